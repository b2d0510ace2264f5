"""File-based pipeline stages.

Each stage reads its declared inputs, writes CSV outputs into the run
directory and records a ``manifest_<stage>.json`` (config echo, library
versions, seed, SHA-256 of inputs and outputs). Stages only communicate
through files, so any stage can be rerun on its own or fed third-party
partitions and segregation tables.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import platform
import re
from collections import defaultdict
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .citations import (
    VARIABLES, citation_productivity_correlation, cohort_cdf, compare_categories,
    citation_profiles, parse_buckets, read_profiles, write_cdf, write_comparison,
    write_profiles, UndefinedCorrelationError,
)
from .community import (
    fast_greedy_modularity, label_propagation, papers_per_community, partition_quality,
    read_partition, write_partition,
)
from .corpus import build_citation_index, filter_field_year, read_corpus
from .cores import (
    CoreAssignment, build_community_graph, core_assignment, core_category_table,
    write_core_table, write_coreness,
)
from .csvio import read_csv, write_csv
from .graph import (
    UndefinedMetricError, build_graph, community_density, community_transitivity,
    network_summary, write_edge_list,
)
from .segregation import (
    Category, normalize_and_categorize, read_report, ssi_all, write_report, write_report_stats,
)
from .stats import DegenerateAxisError, gaussian_kde_2d, histogram_pdf, size_bins, zscore_vs_opposite
from .synth import SynthConfig, generate

log = logging.getLogger(__name__)

STAGES = ("ingest", "graph", "detect", "ssi", "cores", "citations", "compare", "synth", "pipeline")


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunConfig:
    out: Path
    input: Path | None = None
    field: str | None = None
    year: int | None = None
    window_end: int | None = None
    weighting: str = "strength"
    strength_divisor: str = "n-1"
    algo: str = "labelprop"
    partition_file: Path | None = None
    segregation_file: Path | None = None
    coreness_file: Path | None = None
    profiles_file: Path | None = None
    seed: int = 0
    max_sweeps: int = 1000
    ssi_norm: str = "l1"
    sigma_k: float = 1.0
    bins_file: Path | None = None
    n_size_bins: int = 10
    min_reference: int = 30
    buckets: str = "1-5,6-10,11-"
    kde_grid: int = 40
    synth: dict = dc_field(default_factory=dict)

    def echo(self) -> dict:
        """Config as JSON-ready dict; the output directory is left out so that
        manifests do not depend on where a run is written."""
        d = asdict(self)
        d.pop("out")
        return {k: (self.display(v) if isinstance(v, Path) else v) for k, v in d.items()}

    def display(self, path) -> str:
        """Paths inside the run directory are shown relative to it."""
        path = Path(path)
        try:
            return str(path.resolve().relative_to(self.out.resolve()))
        except ValueError:
            return str(path)

    def path(self, name: str) -> Path:
        return self.out / name


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(cfg: RunConfig, stage: str, inputs: list, outputs: list) -> Path:
    manifest = {
        "stage": stage,
        "config": cfg.echo(),
        "seed": cfg.seed,
        "versions": {
            "segnet": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "inputs": {cfg.display(p): sha256(p) for p in inputs if p is not None},
        "outputs": {Path(p).name: sha256(p) for p in outputs},
    }
    path = cfg.path(f"manifest_{stage}.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _require(value, flag: str, stage: str):
    if value is None:
        raise ValueError(f"{stage} needs {flag}")
    return value


def _load(cfg: RunConfig, stage: str):
    pubs = read_corpus(_require(cfg.input, "--input", stage))
    focal = filter_field_year(pubs, cfg.field, cfg.year)
    return pubs, focal


def _graph(cfg: RunConfig, focal):
    return build_graph(focal, cfg.weighting, cfg.strength_divisor)


def _partition(cfg: RunConfig, g, stage: str):
    p = read_partition(_require(cfg.partition_file, "--partition-file", stage))
    p.check_total(g)
    return p


def _coreness(path) -> CoreAssignment:
    return CoreAssignment({int(r["community_id"]): int(r["coreness"]) for r in read_csv(path)})


def stage_ingest(cfg: RunConfig) -> list[Path]:
    pubs, focal = _load(cfg, "ingest")
    idx = build_citation_index(pubs)
    rows = [
        ("n_records", len(pubs)),
        ("n_focal_records", len(focal)),
        ("n_focal_authors", len(focal.authors())),
        ("n_focal_single_author", sum(1 for r in focal if len(r.authors) == 1)),
        ("n_cited_papers", len(idx)),
        ("n_citation_links", sum(1 for _ in idx.pairs())),
    ]
    out = [write_csv(cfg.path("ingest_summary.csv"), ["statistic", "value"], rows)]
    write_manifest(cfg, "ingest", [cfg.input], out)
    return out


def stage_graph(cfg: RunConfig) -> list[Path]:
    _, focal = _load(cfg, "graph")
    g = _graph(cfg, focal)
    summary = network_summary(g, focal, cfg.strength_divisor)
    edges = cfg.path("edges.csv")
    write_edge_list(g, edges)
    out = [edges, write_csv(cfg.path("network_summary.csv"), ["metric", "value"], summary.rows())]
    write_manifest(cfg, "graph", [cfg.input], out)
    return out


def stage_detect(cfg: RunConfig) -> list[Path]:
    _, focal = _load(cfg, "detect")
    g = _graph(cfg, focal)
    inputs = [cfg.input]
    if cfg.algo == "labelprop":
        p = label_propagation(g, seed=cfg.seed, max_sweeps=cfg.max_sweeps)
    elif cfg.algo == "fastgreedy":
        p = fast_greedy_modularity(g)
    elif cfg.algo == "external":
        p = _partition(cfg, g, "detect --algo external")
        inputs.append(cfg.partition_file)
    else:
        raise ValueError(f"unknown algorithm {cfg.algo!r}")
    part_path = cfg.path("partition.csv")
    write_partition(p, part_path)
    q = partition_quality(g, p)
    counts = papers_per_community(focal, p)
    rows = list(asdict(q).items()) + [
        ("converged", p.converged), ("sweeps", p.sweeps),
        ("boundary_papers", counts.boundary), ("unassigned_papers", counts.unassigned),
    ]
    out = [
        part_path,
        write_csv(cfg.path("partition_quality.csv"), ["metric", "value"], rows),
        write_csv(cfg.path("papers_per_community.csv"), ["community_id", "size", "n_papers"],
                  ((c, len(p.communities[c]), n) for c, n in sorted(counts.per_community.items()))),
    ]
    write_manifest(cfg, "detect", inputs, out)
    return out


def stage_ssi(cfg: RunConfig) -> list[Path]:
    _, focal = _load(cfg, "ssi")
    g = _graph(cfg, focal)
    p = _partition(cfg, g, "ssi")
    report = normalize_and_categorize(ssi_all(g, p, norm=cfg.ssi_norm), cfg.sigma_k)
    seg = cfg.path("segregation.csv")
    stats = cfg.path("segregation_stats.csv")
    write_report(report, seg)
    write_report_stats(report, stats)
    studied = [r.normalized_ssi for r in report.studied()]
    centers, dens = histogram_pdf(studied, 20)
    pdf = write_csv(cfg.path("ssi_pdf.csv"), ["normalized_ssi", "density"], zip(centers, dens))
    out = [seg, stats, pdf]
    write_manifest(cfg, "ssi", [cfg.input, cfg.partition_file], out)
    return out


def _read_bins_file(path) -> list[int]:
    text = Path(path).read_text(encoding="utf-8")
    return [int(tok) for tok in re.split(r"[\s,;]+", text.strip()) if tok]


def stage_cores(cfg: RunConfig) -> list[Path]:
    _, focal = _load(cfg, "cores")
    g = _graph(cfg, focal)
    p = _partition(cfg, g, "cores")
    report = read_report(_require(cfg.segregation_file, "--segregation-file", "cores"))
    cg = build_community_graph(g, p)
    ca = core_assignment(cg)

    out = []
    coreness = cfg.path("coreness.csv")
    write_coreness(ca, coreness)
    out.append(coreness)
    out.append(write_csv(cfg.path("community_graph_edges.csv"), ["source_community", "target_community"],
                         cg.edges()))
    table = cfg.path("core_table.csv")
    write_core_table(core_category_table(ca, p, report), table)
    out.append(table)

    metrics = {}
    for cid, members in sorted(p.communities.items()):
        try:
            dens = community_density(g, members)
        except UndefinedMetricError:
            dens = math.nan
        try:
            trans = community_transitivity(g, members)
        except UndefinedMetricError:
            trans = math.nan
        row = report.rows.get(cid)
        metrics[cid] = {
            "size": len(members),
            "category": row.category.value if row and row.category else "",
            "raw_ssi": row.raw_ssi if row else math.nan,
            "normalized_ssi": row.normalized_ssi if row else math.nan,
            "density": dens,
            "transitivity": trans,
            "coreness": ca[cid],
        }

    compared = {c: m for c, m in metrics.items()
                if m["category"] in (Category.HIGH.value, Category.NON.value)}
    bin_of: dict[int, str] = {}
    bin_rows = []
    if compared:
        override = _read_bins_file(cfg.bins_file) if cfg.bins_file else None
        bins = size_bins({c: m["size"] for c, m in compared.items()}, cfg.n_size_bins, override)
        labels = bins.labels
        bin_of = {c: labels[b] for c, b in bins.assignment.items()}
        for b, label in enumerate(labels):
            members = [c for c, k in bins.assignment.items() if k == b]
            n_hi = sum(1 for c in members if compared[c]["category"] == Category.HIGH.value)
            bin_rows.append((label, bins.edges[b], len(members), n_hi, len(members) - n_hi))
    out.append(write_csv(cfg.path("size_bins.csv"),
                         ["size_range", "lower_edge", "n_communities", "n_high", "n_non"], bin_rows))
    out.append(write_csv(
        cfg.path("community_metrics.csv"),
        ["community_id", "size", "category", "raw_ssi", "normalized_ssi", "density",
         "transitivity", "coreness", "size_range"],
        ((c, m["size"], m["category"], m["raw_ssi"], m["normalized_ssi"], m["density"],
          m["transitivity"], m["coreness"], bin_of.get(c, "")) for c, m in metrics.items()),
    ))

    z_rows = []
    opposite = {Category.HIGH.value: Category.NON.value, Category.NON.value: Category.HIGH.value}
    for scope in ("size_range", "all"):
        for c, m in compared.items():
            ref_ids = [d for d, n in compared.items() if n["category"] == opposite[m["category"]]
                       and (scope == "all" or bin_of[d] == bin_of[c])]
            for metric in ("density", "transitivity", "coreness"):
                if math.isnan(m[metric]):
                    continue
                z = zscore_vs_opposite(m[metric], [compared[d][metric] for d in ref_ids], cfg.min_reference)
                z_rows.append((scope, c, m["category"], bin_of[c] if scope == "size_range" else "all",
                               metric, z.value, z.status))
    out.append(write_csv(cfg.path("zscores.csv"),
                         ["scope", "community_id", "category", "size_range", "metric", "z", "status"],
                         z_rows))

    pdf_rows = []
    grouped = defaultdict(list)
    for scope, _, cat, _, metric, z, status in z_rows:
        if status == "ok":
            grouped[(scope, cat, metric)].append(z)
    for key in sorted(grouped):
        centers, dens = histogram_pdf(grouped[key], 20)
        pdf_rows.extend((*key, x, d) for x, d in zip(centers, dens))
    out.append(write_csv(cfg.path("zscore_pdf.csv"), ["scope", "category", "metric", "z", "density"],
                         pdf_rows))

    kde_rows = []
    by_core = defaultdict(list)
    for c, m in compared.items():
        by_core[(m["category"], m["coreness"])].append((m["normalized_ssi"], m["size"]))
    for (cat, core), pts in sorted(by_core.items()):
        if len(pts) < 2:
            continue
        try:
            grid = gaussian_kde_2d(pts, grid=cfg.kde_grid)
        except DegenerateAxisError:
            log.info("KDE skipped for %s core %d: degenerate axis", cat, core)
            continue
        kde_rows.extend((cat, core, len(pts), x, y, d) for x, y, d in grid.long_rows())
    out.append(write_csv(cfg.path("kde_grid.csv"),
                         ["category", "core", "n", "normalized_ssi", "size", "density"], kde_rows))

    write_manifest(cfg, "cores", [cfg.input, cfg.partition_file, cfg.segregation_file, cfg.bins_file], out)
    return out


def stage_citations(cfg: RunConfig) -> list[Path]:
    pubs, focal = _load(cfg, "citations")
    g = _graph(cfg, focal)
    p = _partition(cfg, g, "citations")
    report = read_report(_require(cfg.segregation_file, "--segregation-file", "citations"))
    ca = _coreness(_require(cfg.coreness_file, "--coreness-file", "citations"))
    focal_year = _require(cfg.year, "--year", "citations")
    window_end = cfg.window_end if cfg.window_end is not None else focal_year
    buckets = parse_buckets(cfg.buckets)
    profiles = citation_profiles(pubs, build_citation_index(pubs), p, report, ca,
                                 focal_year, window_end, field=cfg.field, buckets=buckets)
    prof = cfg.path("profiles.csv")
    write_profiles(profiles, prof)

    cdfs = {}
    for var in VARIABLES:
        cdfs[var] = cohort_cdf(profiles, var, ("category",))
    cdf_all = cfg.path("cdf.csv")
    write_cdf(cdfs, ("category",), cdf_all)
    cdfs_core = {var: cohort_cdf(profiles, var, ("category", "coreness", "productivity_bucket"))
                 for var in VARIABLES}
    cdf_core = cfg.path("cdf_by_core.csv")
    write_cdf(cdfs_core, ("category", "coreness", "productivity_bucket"), cdf_core)

    try:
        rho, pval = citation_productivity_correlation(profiles)
    except UndefinedCorrelationError as exc:
        log.warning("correlation undefined: %s", exc)
        rho = pval = math.nan
    corr = write_csv(cfg.path("correlation.csv"), ["n", "spearman_rho", "p_value"],
                     [(len(profiles), rho, pval)])
    out = [prof, cdf_all, cdf_core, corr]
    write_manifest(cfg, "citations",
                   [cfg.input, cfg.partition_file, cfg.segregation_file, cfg.coreness_file], out)
    return out


def stage_compare(cfg: RunConfig) -> list[Path]:
    path = _require(cfg.profiles_file, "--profiles-file", "compare")
    profiles = read_profiles(path)
    buckets = parse_buckets(cfg.buckets)
    rows = compare_categories(profiles, buckets=buckets)
    out = [cfg.path("comparison.csv")]
    write_comparison(rows, out[0])
    write_manifest(cfg, "compare", [path], out)
    return out


def stage_synth(cfg: RunConfig) -> list[Path]:
    params = dict(cfg.synth)
    params.setdefault("seed", cfg.seed)
    for key in ("team_size_range", "papers_per_team_range", "authors_per_paper_range"):
        if key in params:
            params[key] = tuple(params[key])
    sc = generate(SynthConfig(**params))
    out = [cfg.path("corpus.jsonl"), cfg.path("teams.csv"), cfg.path("citation_labels.csv")]
    sc.write(*out)
    write_manifest(cfg, "synth", [], out)
    return out


def run_pipeline(cfg: RunConfig) -> list[Path]:
    """All analysis stages in order, each handing off through files in ``cfg.out``."""
    outputs = []

    def run(stage, fn, c):
        try:
            outputs.extend(fn(c))
        except Exception as exc:
            raise StageError(stage, exc) from exc

    base = RunConfig(**{**asdict(cfg), "out": cfg.out})
    run("ingest", stage_ingest, base)
    run("graph", stage_graph, base)
    if cfg.algo != "external":
        base.partition_file = None
    run("detect", stage_detect, base)
    base.partition_file = cfg.path("partition.csv")
    run("ssi", stage_ssi, base)
    base.segregation_file = cfg.path("segregation.csv")
    run("cores", stage_cores, base)
    base.coreness_file = cfg.path("coreness.csv")
    run("citations", stage_citations, base)
    base.profiles_file = cfg.path("profiles.csv")
    run("compare", stage_compare, base)
    inputs = [cfg.input] if cfg.input else []
    write_manifest(cfg, "pipeline", inputs, outputs)
    return outputs


STAGE_FUNCS = {
    "ingest": stage_ingest,
    "graph": stage_graph,
    "detect": stage_detect,
    "ssi": stage_ssi,
    "cores": stage_cores,
    "citations": stage_citations,
    "compare": stage_compare,
    "synth": stage_synth,
    "pipeline": run_pipeline,
}
