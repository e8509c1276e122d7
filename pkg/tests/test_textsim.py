import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from speechscreen.textsim import (TsneConfig, bertscore, bleu,
                                  overlap_report, tsne,
                                  _binary_search_sigmas)


class TestBleu:
    def test_identity_is_one(self):
        cand = ["the", "boy", "fell", "off", "the", "stool"]
        rep = bleu([cand], [[list(cand)]])
        assert all(rep.scores[n] == 1.0 for n in range(1, 5))
        assert rep.brevity_penalty == 1.0

    def test_no_overlap_is_zero(self):
        rep = bleu([["xyzzy", "plugh"]], [[["the", "cat"]]])
        assert rep.scores[1] == 0.0

    def test_clipping_hand_case(self):
        # "the the the" vs "the cat": clip "the" at 1 -> p1 = 1/3; c=3 >= r=2
        rep = bleu([["the", "the", "the"]], [[["the", "cat"]]])
        assert rep.scores[1] == pytest.approx(1 / 3)
        assert rep.brevity_penalty == 1.0

    def test_brevity_penalty_applied(self):
        # c=1 < r=3: BP = exp(1 - 3) = exp(-2)
        rep = bleu([["the"]], [[["the", "cat", "sat"]]])
        assert rep.brevity_penalty == pytest.approx(math.exp(-2))
        assert rep.scores[1] == pytest.approx(math.exp(-2) * 1.0)

    def test_reference_permutation_invariance(self):
        cand = [["a", "b", "c"]]
        refs1 = [[["a", "x"], ["b", "c", "d"], ["c"]]]
        refs2 = [[["c"], ["a", "x"], ["b", "c", "d"]]]
        r1, r2 = bleu(cand, refs1), bleu(cand, refs2)
        assert r1.scores == r2.scores

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_adding_a_reference_never_decreases_precision(self, data):
        vocab = ["a", "b", "c", "d"]
        cand = data.draw(st.lists(st.sampled_from(vocab), min_size=1,
                                  max_size=8))
        ref1 = data.draw(st.lists(st.sampled_from(vocab), min_size=1,
                                  max_size=8))
        ref2 = data.draw(st.lists(st.sampled_from(vocab), min_size=1,
                                  max_size=8))
        before = bleu([cand], [[ref1]])
        after = bleu([cand], [[ref1, ref2]])
        for n in range(1, 5):
            assert after.precisions[n] >= before.precisions[n] - 1e-12

    def test_corpus_level_pooling(self):
        # two candidates pool their clipped counts before dividing
        rep = bleu([["a", "b"], ["c", "d"]],
                   [[["a", "x"]], [["c", "d"]]])
        assert rep.scores[1] == pytest.approx(3 / 4)

    def test_geometric_mean_composite(self):
        cand = ["the", "boy", "fell", "down"]
        rep = bleu([cand], [[list(cand)]])
        assert rep.geometric_mean == 1.0
        rep0 = bleu([["q", "w"]], [[["e", "r"]]])
        assert rep0.geometric_mean == 0.0

    def test_empty_candidates_error(self):
        with pytest.raises(ValueError):
            bleu([], [])


class TestBertScore:
    def test_identity(self):
        m = np.array([[1.0, 2.0], [0.5, -1.0]])
        rep = bertscore(m, m)
        assert rep.precision == pytest.approx(1.0)
        assert rep.recall == pytest.approx(1.0)
        assert rep.f1 == pytest.approx(1.0)

    def test_orthogonal_is_zero(self):
        rep = bertscore(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))
        assert (rep.precision, rep.recall, rep.f1) == (0.0, 0.0, 0.0)

    def test_hand_case(self):
        rep = bertscore(np.array([[1.0, 0.0]]),
                        np.array([[1.0, 0.0], [0.0, 1.0]]))
        assert rep.precision == 1.0
        assert rep.recall == 0.5
        assert rep.f1 == pytest.approx(2 / 3)

    def test_symmetry_p_of_ab_equals_r_of_ba(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=(3, 4)), rng.normal(size=(5, 4))
        assert bertscore(a, b).precision == pytest.approx(
            bertscore(b, a).recall)

    def test_dim_mismatch(self):
        with pytest.raises(ValueError):
            bertscore(np.ones((1, 3)), np.ones((1, 4)))

    def test_zero_norm_vector(self):
        with pytest.raises(ValueError):
            bertscore(np.zeros((1, 3)), np.ones((1, 3)))

    def test_idf_weighting(self):
        cand = np.array([[1.0, 0.0], [0.0, 1.0]])
        ref = np.array([[1.0, 0.0]])
        unweighted = bertscore(cand, ref)
        weighted = bertscore(cand, ref, cand_idf=np.array([1.0, 0.0]))
        assert unweighted.precision == pytest.approx(0.5)
        assert weighted.precision == pytest.approx(1.0)


class TestTsne:
    def test_sigma_search_symmetric_for_equidistant_points(self):
        # equilateral triangle: every pairwise distance equal
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, math.sqrt(3) / 2]])
        sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
        _, betas = _binary_search_sigmas(sq, perplexity=2.0)
        assert betas[0] == pytest.approx(betas[1], rel=1e-6)
        assert betas[1] == pytest.approx(betas[2], rel=1e-6)

    def test_sigma_search_hits_log_perplexity(self):
        rng = np.random.default_rng(5)
        X = rng.normal(size=(40, 6))
        sq = ((X[:, None, :] - X[None, :, :]) ** 2).sum(-1)
        P, _ = _binary_search_sigmas(sq, perplexity=10.0, tol=1e-5)
        target = math.log(10.0)
        for i in range(40):
            row = np.delete(P[i], i)
            nz = row[row > 0]
            entropy = -(nz * np.log(nz)).sum()
            assert abs(entropy - target) < 1e-4

    def test_kl_non_increasing_after_exaggeration(self):
        rng = np.random.default_rng(2)
        X = np.vstack([rng.normal(size=(30, 5)),
                       rng.normal(size=(30, 5)) + 4.0])
        res = tsne(X, TsneConfig(perplexity=15, seed=0))
        post = [kl for it, kl in res.kl_trace if it > 250]
        for a, b in zip(post, post[1:]):
            assert b <= a + 1e-6

    def test_two_cluster_silhouette(self):
        from sklearn.metrics import silhouette_score
        rng = np.random.default_rng(0)
        X = np.vstack([rng.normal(size=(50, 10)),
                       rng.normal(size=(50, 10)) + 10.0])
        res = tsne(X, TsneConfig(seed=3))
        labels = [0] * 50 + [1] * 50
        assert silhouette_score(res.coordinates, labels) > 0.8

    def test_rigid_rotation_preserves_final_kl(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(30, 4))
        # random rotation via QR
        Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
        res1 = tsne(X, TsneConfig(perplexity=8, seed=1, iterations=300))
        res2 = tsne(X @ Q, TsneConfig(perplexity=8, seed=1, iterations=300))
        assert res1.kl_divergence == pytest.approx(res2.kl_divergence,
                                                   abs=1e-6)

    def test_identical_points_jitter_fallback(self):
        X = np.ones((10, 3))
        res = tsne(X, TsneConfig(perplexity=3, seed=0, iterations=300))
        assert np.isfinite(res.coordinates).all()

    def test_perplexity_bound(self):
        with pytest.raises(ValueError):
            tsne(np.random.default_rng(0).normal(size=(5, 2)),
                 TsneConfig(perplexity=5))


class TestOverlapReport:
    def test_identical_groups_mix_half(self):
        rng = np.random.default_rng(1)
        pts = rng.normal(size=(40, 2))
        rep = overlap_report({"a": pts, "b": pts.copy()})
        assert rep["mixing_overall"] == pytest.approx(0.5, abs=0.1)

    def test_far_clusters_do_not_mix(self):
        rng = np.random.default_rng(2)
        rep = overlap_report({"a": rng.normal(size=(30, 2)),
                              "b": rng.normal(size=(30, 2)) + 100.0})
        assert rep["mixing_overall"] == 0.0
        assert rep["centroid_distances"]["a|b"] > 90.0

    def test_hand_four_points_k1(self):
        # a0=(0,0) a1=(10,10), b0=(1,0) b1=(11,10): every nearest neighbor
        # is from the other group
        rep = overlap_report({"a": np.array([[0.0, 0.0], [10.0, 10.0]]),
                              "b": np.array([[1.0, 0.0], [11.0, 10.0]])},
                             k=1)
        assert rep["mixing_overall"] == 1.0

    def test_small_group_clamps_k(self):
        rep = overlap_report({"a": np.zeros((2, 2)),
                              "b": np.ones((2, 2))}, k=10)
        assert rep["k"] <= 2

    def test_needs_two_groups(self):
        with pytest.raises(ValueError):
            overlap_report({"a": np.zeros((3, 2))})
