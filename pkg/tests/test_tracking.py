import pytest

from commtrack.benchmark import PlantedParams, generate_planted
from commtrack.similarity import SimilarityMatrix, score_all_pairs, transition_vectors
from commtrack.temporal import Snapshot, TemporalNetwork
from commtrack.tracking import (METHODS, Event, EvolvingSequence, TrackerConfig, classify_events, link_holds,
                                read_sequences, run_tracker, track_ged, track_greene, track_tajeuna,
                                track_takaffoli, write_events, write_sequences)

from conftest import layers_from_sets

CFG = TrackerConfig({"jaccard": 0.3, "modec": 0.3, "inclusion_fwd": 0.2, "inclusion_bwd": 0.2, "mutual": 0.3})


def edgeless_network(layers):
    """Snapshots holding exactly the community members, no edges (uniform importance)."""
    n = 1 + max((x for layer in layers for c in layer for x in c.members), default=0)
    snaps = tuple(Snapshot(layer.timestamp_index,
                           frozenset(x for c in layer for x in c.members), frozenset()) for layer in layers)
    return TemporalNetwork(snaps, tuple(str(i) for i in range(n)))


def all_matrices(layers):
    net = edgeless_network(layers)
    vectors = transition_vectors(layers)
    mats = {m: score_all_pairs(layers, m, net, vectors) for m in ("jaccard", "modec", "inclusion", "mutual")}
    return mats, vectors


def run_all(layers, cfg=CFG):
    mats, vectors = all_matrices(layers)
    return {m: run_tracker(m, layers, mats, cfg, vectors) for m in METHODS}


def seq_from(seqs, origin):
    return next(s for s in seqs if s.origin == origin)


A = {1, 2, 3, 4}


class TestGreene:
    def test_identical_chain_is_active(self):
        layers = layers_from_sets([A], [A], [A])
        seqs = track_greene(layers, score_all_pairs(layers, "jaccard"), CFG)
        assert [s.members for s in seqs] == [((1, 0), (2, 0), (3, 0))]
        assert seqs[0].status == "active"

    def test_dissolves_after_patience(self):
        layers = layers_from_sets([A], [{10, 11}], [{20, 21}], [{30, 31}], [{40, 41}])
        seqs = track_greene(layers, score_all_pairs(layers, "jaccard"), CFG)
        s = seq_from(seqs, (1, 0))
        assert s.members == ((1, 0),)
        assert s.status == "dissolved" and s.dissolved_at == 4

    def test_gap_of_one_is_bridged(self):
        layers = layers_from_sets([A], [{10, 11}], [A])
        seqs = track_greene(layers, score_all_pairs(layers, "jaccard"), CFG)
        assert seq_from(seqs, (1, 0)).members == ((1, 0), (3, 0))

    def test_gap_of_d_is_not_bridged(self):
        layers = layers_from_sets([A], [{10}], [{11}], [{12}], [A])
        seqs = track_greene(layers, score_all_pairs(layers, "jaccard"), CFG)
        assert seq_from(seqs, (1, 0)).members == ((1, 0),)
        assert seq_from(seqs, (5, 0)).members == ((5, 0),)

    def test_best_match_wins(self):
        layers = layers_from_sets([A], [{1, 2, 9}, {1, 2, 3, 9}])
        seqs = track_greene(layers, score_all_pairs(layers, "jaccard"), CFG)
        assert seq_from(seqs, (1, 0)).members == ((1, 0), (2, 1))

    def test_rejects_small_patience(self):
        with pytest.raises(ValueError):
            TrackerConfig({"jaccard": 0.3}, d=2)


class TestTakaffoli:
    def test_unbounded_horizon(self):
        layers = layers_from_sets([A], [{10}], [{11}], [{12}], [A])
        seqs = track_takaffoli(layers, score_all_pairs(layers, "modec"), CFG)
        assert seq_from(seqs, (1, 0)).members == ((1, 0), (5, 0))

    def test_below_threshold_gives_singletons(self):
        layers = layers_from_sets([{1, 2, 3, 4, 5}], [{1, 6, 7, 8, 9}], [{6, 10, 11, 12, 13}])
        seqs = track_takaffoli(layers, score_all_pairs(layers, "modec"), CFG)
        assert [len(s) for s in seqs] == [1, 1, 1]

    def test_tie_goes_to_lower_ordinal(self):
        layers = layers_from_sets([A], [{1, 2}, {3, 4}])
        seqs = track_takaffoli(layers, score_all_pairs(layers, "modec"), CFG)
        assert seq_from(seqs, (1, 0)).members == ((1, 0), (2, 0))
        assert seq_from(seqs, (2, 1)).members == ((2, 1),)


class TestGED:
    def ged(self, layers, fwd=0.2, bwd=0.2):
        cfg = TrackerConfig({"inclusion_fwd": fwd, "inclusion_bwd": bwd})
        return track_ged(layers, score_all_pairs(layers, "inclusion", edgeless_network(layers)), cfg)

    def test_identical_consecutive(self):
        assert len(seq_from(self.ged(layers_from_sets([A], [A])), (1, 0))) == 2

    def test_one_step_absence_splits_sequence(self):
        seqs = self.ged(layers_from_sets([A], [{10, 11}], [A]))
        assert seq_from(seqs, (1, 0)).members == ((1, 0),)
        assert seq_from(seqs, (1, 0)).dissolved_at == 2
        assert seq_from(seqs, (3, 0)).members == ((3, 0),)

    def test_subset_backward_inclusion(self):
        layers = layers_from_sets([{1, 2}], [{1, 2, 3, 4}])
        inc = score_all_pairs(layers, "inclusion", edgeless_network(layers))
        assert inc.score((1, 0), (2, 0)) == 1.0
        assert inc.score((2, 0), (1, 0)) == pytest.approx(0.25)
        assert len(seq_from(self.ged(layers, bwd=0.25), (1, 0))) == 2
        assert len(seq_from(self.ged(layers, bwd=0.26), (1, 0))) == 1


class TestTajeuna:
    def test_origin_scores(self):
        layers = layers_from_sets([A], [{5}], [{6}], [{7}])
        mat = SimilarityMatrix("mutual", {((1, 0), (2, 0)): 0.9, ((1, 0), (3, 0)): 0.3, ((1, 0), (4, 0)): 0.7})
        seqs = track_tajeuna(layers, None, 0.5, mat)
        assert seq_from(seqs, (1, 0)).members == ((1, 0), (2, 0), (4, 0))
        assert seq_from(seqs, (3, 0)).members == ((3, 0),)
        assert all(s.origin not in {(2, 0), (4, 0)} for s in seqs)

    def test_exact_copies(self):
        layers = layers_from_sets(*[[A] for _ in range(5)])
        seqs = track_tajeuna(layers, transition_vectors(layers), 0.3)
        assert [len(s) for s in seqs] == [5]
        assert seqs[0].status == "active"

    def test_nothing_shared(self):
        layers = layers_from_sets([A], [{9}])
        seqs = track_tajeuna(layers, transition_vectors(layers), 0.3)
        assert [s.members for s in seqs] == [((1, 0),), ((2, 0),)]

    def test_non_exclusive_across_origins(self):
        # two origins at t1 may both collect the same later community
        mat = SimilarityMatrix("mutual", {((1, 0), (2, 0)): 0.9, ((1, 1), (2, 0)): 0.8})
        layers = layers_from_sets([{1}, {2}], [{3}])
        seqs = track_tajeuna(layers, None, 0.5, mat)
        assert seq_from(seqs, (1, 0)).members[-1] == (2, 0)
        assert seq_from(seqs, (1, 1)).members[-1] == (2, 0)


class TestEvents:
    def test_merge(self):
        layers = layers_from_sets([{1, 2, 3}, {4, 5, 6}], [set(range(1, 7))])
        ev = classify_events([EvolvingSequence("x", ((1, 0), (2, 0))), EvolvingSequence("x", ((1, 1),))], layers)
        assert Event(2, "merge", ((1, 0), (1, 1), (2, 0))) in ev

    def test_split(self):
        layers = layers_from_sets([set(range(1, 7))], [{1, 2, 3}, {4, 5, 6}])
        ev = classify_events([EvolvingSequence("x", ((1, 0), (2, 0))), EvolvingSequence("x", ((2, 1),))], layers)
        assert Event(2, "split", ((1, 0), (2, 0), (2, 1))) in ev
        assert not any(e.kind == "form" for e in ev)

    @pytest.mark.parametrize("after,kind", [(16, "grow"), (15, "continue"), (6, "shrink"), (10, "continue")])
    def test_size_ratio(self, after, kind):
        layers = layers_from_sets([set(range(10))], [set(range(after))])
        ev = classify_events([EvolvingSequence("x", ((1, 0), (2, 0)))], layers)
        assert [e.kind for e in ev] == [kind]

    def test_form_and_dissolve(self):
        layers = layers_from_sets([A], [A, {50, 51}], [{50, 51}])
        seqs = [EvolvingSequence("x", ((1, 0), (2, 0)), "dissolved", 3),
                EvolvingSequence("x", ((2, 1), (3, 0)))]
        kinds = {(e.kind, e.at) for e in classify_events(seqs, layers)}
        assert ("form", 2) in kinds and ("dissolve", 3) in kinds


def planted(seed=0, **kw):
    base = dict(m=8, n_chains=8, community_size=12, churn=0.1, noise_per_step=3, noise_overlap=0.5,
                merges=((4, "c0", "c1"),), splits=((5, "c2"),), dissolves=((6, "c3"),))
    base.update(kw)
    return generate_planted(PlantedParams(**base), seed)


PLANTED_CFG = TrackerConfig({"jaccard": 0.2, "modec": 0.3, "inclusion_fwd": 0.2, "inclusion_bwd": 0.2,
                             "mutual": 0.2})


@pytest.mark.parametrize("seed", [0, 1])
def test_links_replay_and_gap_rules(seed):
    sc = planted(seed)
    mats = {m: score_all_pairs(sc.layers, m, sc.network) for m in ("jaccard", "modec", "inclusion", "mutual")}
    vectors = transition_vectors(sc.layers)
    for method in METHODS:
        seqs = run_tracker(method, sc.layers, mats, PLANTED_CFG, vectors)
        covered = [c for s in seqs for c in s.members]
        if method != "tajeuna":
            assert sorted(covered) == sorted(c.id for layer in sc.layers for c in layer)
        for s in seqs:
            for i in range(1, len(s)):
                assert link_holds(method, s, i, mats, PLANTED_CFG)
            if method == "ged":
                assert all(g == 0 for g in s.gaps())
            if method == "greene":
                assert all(g < PLANTED_CFG.d for g in s.gaps())
        again = run_tracker(method, sc.layers, mats, PLANTED_CFG, vectors)
        assert again == seqs


def test_copied_community_recovered_by_every_method():
    m = 6
    per_t = [[set(range(10)), set(range(100 + 10 * t, 105 + 10 * t))] for t in range(m)]
    layers = layers_from_sets(*per_t)
    for method, seqs in run_all(layers).items():
        assert seq_from(seqs, (1, 0)).members == tuple((t, 0) for t in range(1, m + 1)), method


def test_sequence_and_event_export(tmp_path):
    sc = planted(2)
    mats = {"jaccard": score_all_pairs(sc.layers, "jaccard")}
    seqs = run_tracker("greene", sc.layers, mats, PLANTED_CFG)
    path = write_sequences(seqs, tmp_path / "s.jsonl")
    back = read_sequences(path)
    assert [(s.method, s.members, s.status) for s in back] == [(s.method, s.members, s.status) for s in seqs]
    ev = write_events({"greene": classify_events(seqs, sc.layers)}, tmp_path / "e.csv")
    lines = ev.read_text().splitlines()
    assert lines[0] == "method,kind,t,participants"
    assert any(",merge,4," in line for line in lines)
