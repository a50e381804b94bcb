import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from commtrack.detection import Community
from commtrack.similarity import (SimilarityMatrix, inclusion, jaccard, modec, modified_jaccard, mutual,
                                  mutual_score, overlap_ratio, score_all_pairs, transition_vectors)
from commtrack.temporal import Snapshot, from_edge_lists

from conftest import clique_edges, layers_from_sets
from oracles import (inclusion_oracle, jaccard_oracle, modec_oracle, modified_jaccard_oracle, mutual_oracle,
                     transition_oracle)


def com(*nodes, t=1, q=0):
    return Community((t, q), frozenset(nodes))


def snap(edges, nodes=()):
    ns = {n for e in edges for n in e} | set(nodes)
    return Snapshot(1, frozenset(ns), frozenset((min(u, v), max(u, v)) for u, v in edges))


class TestPairwise:
    def test_jaccard(self):
        assert jaccard(com(1, 2, 3), com(2, 3, 4)) == 0.5
        assert jaccard(com(1, 2), com(1, 2)) == 1.0
        assert jaccard(com(1, 2), com(3, 4)) == 0.0

    def test_modec(self):
        a, b = com(1, 2, 3, 4), com(*range(1, 9))
        assert modec(a, b, 0.3) == 0.5
        assert modec(a, b, 0.6) == 0
        assert modec(b, b, 1.0) == 1.0
        with pytest.raises(ValueError):
            modec(a, b, 1.5)

    def test_modified_jaccard(self):
        assert modified_jaccard(com(1, 2), com(1, 2, 3, 4)) == 1.0
        assert modified_jaccard(com(1, 2), com(1, 2)) == 1.0
        assert modified_jaccard(com(1, 2), com(3)) == 0.0

    def test_inclusion_examples(self):
        tri = snap(clique_edges([1, 2, 3]))
        a = com(1, 2, 3)
        assert inclusion(a, com(2, 3, 9), tri) == pytest.approx(4 / 9, abs=1e-15)
        assert inclusion(a, a, tri) == 1.0
        assert inclusion(a, com(7, 8), tri) == 0.0

    def test_inclusion_uniform_importance(self):
        # edgeless community: every node floors to importance 1
        s = snap([], nodes=range(6))
        a, b = com(0, 1, 2, 3, 4), com(0, 1, 9)
        assert inclusion(a, b, s) == pytest.approx((2 / 5) ** 2, abs=1e-15)

    def test_inclusion_member_outside_snapshot(self):
        from commtrack.errors import DataError
        with pytest.raises(DataError):
            inclusion(com(1, 99), com(1), snap([(1, 2)]))


sets = st.frozensets(st.integers(0, 20), min_size=1, max_size=12)


@settings(max_examples=200, deadline=None)
@given(sets, sets)
def test_pairwise_ordering_and_range(a, b):
    ca, cb = com(*a), com(*b, t=2)
    j, r, mj = jaccard(ca, cb), overlap_ratio(ca, cb), modified_jaccard(ca, cb)
    for v in (j, r, mj):
        assert 0.0 <= v <= 1.0
    assert j <= r + 1e-15 and r <= mj + 1e-15
    assert j == pytest.approx(float(jaccard_oracle(a, b)), abs=1e-15)
    assert mj == pytest.approx(float(modified_jaccard_oracle(a, b)), abs=1e-15)
    assert modec(ca, cb, 0.5) == pytest.approx(float(modec_oracle(a, b, Fraction(1, 2))), abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(sets, sets, st.integers(0, 2**16))
def test_inclusion_matches_oracle(a, b, seed):
    rng = random.Random(seed)
    nodes = sorted(a | b)
    edges = [(u, v) for i, u in enumerate(nodes) for v in nodes[i + 1:] if rng.random() < 0.4]
    s = snap(edges, nodes)
    val = inclusion(com(*a), com(*b), s)
    assert 0.0 <= val <= 1.0
    assert val == pytest.approx(float(inclusion_oracle(a, b, edges)), abs=1e-12)


class TestTransitionVectors:
    def test_three_community_toy(self):
        layers = layers_from_sets([{1, 2, 3}], [{1, 2}, {3}])
        tv = transition_vectors(layers)
        np.testing.assert_allclose(tv[(1, 0)].components, [3 / 6, 2 / 6, 1 / 6], atol=1e-15)

    def test_isolated_community_is_indicator(self):
        layers = layers_from_sets([{1, 2}], [{5, 6}])
        tv = transition_vectors(layers)
        np.testing.assert_array_equal(tv[(1, 0)].components, [1.0, 0.0])
        np.testing.assert_array_equal(tv[(2, 0)].components, [0.0, 1.0])

    def test_pair_splits_evenly(self):
        tv = transition_vectors(layers_from_sets([{1, 2}], [{1, 2}]))
        np.testing.assert_array_equal(tv[(1, 0)].components, [0.5, 0.5])

    def test_needs_two_layers(self):
        from commtrack.errors import DataError
        with pytest.raises(DataError):
            transition_vectors(layers_from_sets([{1}]))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.lists(sets, min_size=1, max_size=4), min_size=2, max_size=4))
    def test_matches_oracle_and_sums_to_one(self, per_t):
        layers = layers_from_sets(*per_t)
        tv = transition_vectors(layers)
        flat = [g for groups in per_t for g in groups]
        expected = transition_oracle(flat)
        for i, cid in enumerate(tv.order):
            v = tv[cid].components
            assert abs(v.sum() - 1.0) < 1e-12
            assert v[i] > 0
            np.testing.assert_allclose(v, [float(x) for x in expected[i]], atol=1e-12)


class TestMutual:
    def test_example(self):
        v, w = np.array([0.5, 0.5, 0]), np.array([0.5, 0.25, 0.25])
        assert mutual(v, w, 0.5) == pytest.approx(5 / 6, abs=1e-15)
        assert float(mutual_oracle([Fraction(1, 2), Fraction(1, 2), 0],
                                   [Fraction(1, 2), Fraction(1, 4), Fraction(1, 4)])) == pytest.approx(5 / 6)
        assert mutual(v, w, 0.9) == 0.0

    def test_identity_and_disjoint(self):
        v = np.array([0.2, 0.3, 0.5])
        assert abs(mutual(v, v, 0.0) - 1.0) < 1e-12
        assert mutual(np.array([1.0, 0, 0]), np.array([0, 0.5, 0.5])) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mutual_score(np.ones(2) / 2, np.ones(3) / 3)


class TestAllPairs:
    def test_pair_counts(self):
        net = from_edge_lists([clique_edges([1, 2, 3]), clique_edges([2, 3, 4])])
        # from_edge_lists interns tokens "1".."4" as ids 0..3; rebuild layers on those ids
        ids = {int(tok): i for i, tok in enumerate(net.tokens)}
        layers = layers_from_sets([{ids[n] for n in (1, 2, 3)}], [{ids[n] for n in (2, 3, 4)}])
        assert len(score_all_pairs(layers, "jaccard")) == 1
        inc = score_all_pairs(layers, "inclusion", net)
        assert len(inc) == 2
        assert set(inc.entries) == {((1, 0), (2, 0)), ((2, 0), (1, 0))}
        assert len(inc.direction("fwd")) == 1 and len(inc.direction("bwd")) == 1

    def test_identical_layers_score_one(self):
        layers = layers_from_sets([{1, 2}, {3, 4, 5}], [{1, 2}, {3, 4, 5}])
        mat = score_all_pairs(layers, "jaccard")
        assert mat.score((1, 0), (2, 0)) == 1.0
        assert mat.score((2, 1), (1, 1)) == 1.0
        assert mat.score((1, 0), (2, 1)) == 0.0

    @pytest.mark.parametrize("measure", ["jaccard", "modec", "modified_jaccard", "inclusion", "mutual"])
    def test_matches_pairwise(self, measure):
        rng = random.Random(7)
        edge_lists, groups = [], []
        for t in range(3):
            edges = [(u, v) for u in range(30) for v in range(u + 1, 30) if rng.random() < 0.2]
            edge_lists.append(edges + [(100 + t, 200 + t)])
            groups.append([set(rng.sample(range(30), rng.randint(2, 8))) for _ in range(4)])
        net = from_edge_lists(edge_lists)
        ids = {tok: i for i, tok in enumerate(net.tokens)}
        layers = layers_from_sets(*[[{ids[str(n)] for n in g} for g in gs] for gs in groups])
        mat = score_all_pairs(layers, measure, net)
        tv = transition_vectors(layers)
        comms = [c for layer in layers for c in layer]
        for a in comms:
            for b in comms:
                if a.timestamp_index == b.timestamp_index:
                    continue
                if measure == "jaccard":
                    want = jaccard(a, b)
                elif measure == "modec":
                    want = overlap_ratio(a, b)
                elif measure == "modified_jaccard":
                    want = modified_jaccard(a, b)
                elif measure == "mutual":
                    want = mutual_score(tv[a.id], tv[b.id])
                else:
                    want = inclusion(a, b, net.snapshot(a.timestamp_index))
                got = mat.score(a.id, b.id)
                assert got == pytest.approx(want, abs=1e-12)
                assert 0.0 <= got <= 1.0 + 1e-12
                if mat.symmetric:
                    assert got == mat.score(b.id, a.id)

    def test_csv_round_trip(self, tmp_path):
        layers = layers_from_sets([{1, 2, 3}, {4, 5}], [{1, 2}, {3, 4, 5}], [{1, 5}])
        mat = score_all_pairs(layers, "mutual")
        back = SimilarityMatrix.from_csv(mat.to_csv(tmp_path / "scores_mutual.csv"))
        assert back == mat
        header = (tmp_path / "scores_mutual.csv").read_text().splitlines()[0]
        assert header == "t_i,q_i,t_j,q_j,measure,score"

    def test_unknown_measure(self):
        with pytest.raises(ValueError):
            score_all_pairs(layers_from_sets([{1}], [{1}]), "cosine")
