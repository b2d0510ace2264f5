"""Segregation analysis of weighted coauthorship networks."""

from .corpus import (
    PublicationRecord, PublicationSet, CitationIndex, parse_corpus, read_corpus,
    filter_field_year, build_citation_index,
)
from .graph import (
    CoauthorGraph, build_graph, connected_components, network_summary, subgraph,
    community_density, community_transitivity,
)
from .community import (
    CommunityPartition, label_propagation, fast_greedy_modularity, modularity,
    embeddedness, partition_quality, papers_per_community,
)
from .segregation import (
    Category, TransitionView, community_submatrix, dominant_eigenpair, ssi, ssi_all,
    normalize_and_categorize,
)
from .cores import build_community_graph, k_core_decomposition, core_assignment, core_category_table
from .citations import (
    citation_profiles, productivity_bucket, cohort_cdf, citation_productivity_correlation,
)
from .stats import (
    ks_two_sample, mann_whitney_u, zscore_vs_opposite, size_bins, histogram_pdf, ecdf,
    gaussian_kde_2d,
)
from .synth import SynthConfig, generate

__version__ = "0.1.0"
