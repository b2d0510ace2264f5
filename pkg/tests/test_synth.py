import pytest

from segnet.corpus import build_citation_index, dump_corpus, read_corpus
from segnet.citations import citation_profiles
from segnet.graph import build_graph, connected_components
from segnet.synth import (
    BUNDLED_CONFIG, SynthConfig, SynthConfigError, bundled_corpus_path, generate,
)


def test_deterministic():
    a = generate(SynthConfig(seed=7))
    b = generate(SynthConfig(seed=7))
    assert dump_corpus(a.pubs) == dump_corpus(b.pubs)
    assert a.citation_label == b.citation_label
    assert dump_corpus(generate(SynthConfig(seed=8)).pubs) != dump_corpus(a.pubs)


@pytest.mark.parametrize("seed", range(5))
def test_zero_mixing_teams_are_components(seed):
    sc = generate(SynthConfig(n_teams=15, mixing=0.0, seed=seed))
    g = build_graph(sc.focal())
    comps = {frozenset(c) for c in connected_components(g)}
    teams = {}
    for r, t in sc.team_of.items():
        teams.setdefault(t, set()).add(r)
    assert comps == {frozenset(m) for m in teams.values()}
    assert not sc.cross_team_papers


def test_cross_team_papers_span_two_teams():
    sc = generate(SynthConfig(n_teams=20, mixing=0.5, seed=3))
    assert sc.cross_team_papers
    for pid in sc.cross_team_papers:
        assert len({sc.team_of[a] for a in sc.pubs[pid].authors}) == 2


def test_citation_labels_semantics():
    sc = generate(SynthConfig(n_teams=20, mixing=0.3, citation_rate=3.0, seed=4))
    focal = sc.focal()
    coauthors = {}
    for r in focal:
        for a in r.authors:
            coauthors.setdefault(a, set()).update(r.authors)
    for cid, label in sc.citation_label.items():
        citing = sc.pubs[cid]
        cited = focal[sc.cited_by[cid]]
        assert citing.cited_paper_ids == (cited.paper_id,)
        assert sc.config.focal_year < citing.year <= sc.config.window_end
        if label == "coauthor":
            assert citing.authors == cited.authors
        elif label == "external":
            assert all(a.startswith("x") for a in citing.authors)
        else:
            teams = {sc.team_of[a] for a in cited.authors}
            assert {sc.team_of[a] for a in citing.authors} == teams
            near = set().union(*(coauthors[a] for a in cited.authors))
            assert not near & set(citing.authors)


def test_expected_proportions_match_pipeline():
    for seed in range(5):
        sc = generate(SynthConfig(n_teams=25, mixing=0.2, seed=seed))
        p = sc.planted_partition()
        for end in (2012, 2015, 2020):
            prof = citation_profiles(sc.pubs, build_citation_index(sc.pubs), p, None, None,
                                     2011, end)
            expected = sc.expected_proportions(end)
            for pr in prof:
                ev, same, co = expected[pr.researcher_id]
                assert pr.total_citations == ev
                if ev:
                    assert pr.prop_same_community == same / ev
                    assert pr.prop_coauthors == co / ev


@pytest.mark.parametrize("kw", [
    dict(n_teams=0),
    dict(mixing=1.5),
    dict(citation_rate=-1),
    dict(team_size_range=(5, 3)),
    dict(team_size_range=(1, 3), authors_per_paper_range=(1, 1)),
    dict(authors_per_paper_range=(2, 6), team_size_range=(4, 8)),
    dict(window_end=2011),
])
def test_config_validation(kw):
    with pytest.raises(SynthConfigError):
        generate(SynthConfig(**kw))


def test_bundled_corpus_is_reproducible():
    bundled = read_corpus(bundled_corpus_path())
    sc = generate(BUNDLED_CONFIG)
    assert dump_corpus(bundled) == dump_corpus(sc.pubs)
    assert len(sc.focal()) == 500


def test_write(tmp_path):
    sc = generate(SynthConfig(n_teams=3, seed=2))
    sc.write(tmp_path / "c.jsonl", tmp_path / "t.csv", tmp_path / "l.csv")
    assert read_corpus(tmp_path / "c.jsonl") == sc.pubs
    lines = (tmp_path / "l.csv").read_text().splitlines()
    assert lines[0] == "paper_id,source_label,cited_paper_id"
    assert len(lines) == len(sc.citation_label) + 1
