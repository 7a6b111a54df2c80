"""Unit tests for the per-query contrastive losses."""
import math

import numpy as np
import pytest

from errors import DimensionMismatch
from losses import hinge_ranking, info_nce, tag_positive_mask, tag_supervised_nce
from numerics import SeededRng, finite_diff_grad, relative_error
from numerics.linalg import random_orthogonal


def _keys_with_sims(sims):
    """Query e0 and unit keys whose dot product with it equals ``sims``."""
    query = np.array([1.0, 0.0, 0.0])
    keys = np.array([[s, math.sqrt(1.0 - s * s), 0.0] for s in sims])
    return query, keys


class TestInfoNce:
    def test_no_negatives_gives_zero(self, unit_rows, rng):
        q, k = unit_rows(rng, 2, 5)
        loss, grad = info_nce(q, k, [], 0.07)
        assert loss == 0.0
        np.testing.assert_allclose(grad, 0.0, atol=1e-15)

    def test_uniform_logits_give_log_n(self):
        q = np.array([1.0, 0.0])
        k = np.array([0.0, 1.0])
        loss, _ = info_nce(q, k, np.tile(k, (7, 1)), 0.07)
        assert loss == pytest.approx(math.log(8), abs=1e-12)

    def test_scalar_formula(self):
        q, keys = _keys_with_sims([1.0, 0.0])
        loss, _ = info_nce(q, keys[0], keys[1:], 0.07)
        assert loss == pytest.approx(math.log1p(math.exp(-1.0 / 0.07)), rel=1e-6, abs=1e-15)

    def test_gradient_matches_finite_differences(self, unit_rows, rng):
        q, k = unit_rows(rng, 2, 6)
        negs = unit_rows(rng, 9, 6)
        _, grad = info_nce(q, k, negs, 0.5)
        numeric = finite_diff_grad(lambda x: info_nce(x, k, negs, 0.5)[0], q)
        assert relative_error(grad, numeric) < 1e-7

    def test_dimension_mismatch(self, unit_rows, rng):
        with pytest.raises(DimensionMismatch):
            info_nce(unit_rows(rng, 1, 4)[0], unit_rows(rng, 1, 3)[0], None, 0.1)

    def test_monotone_in_positive_similarity(self):
        losses = []
        for s in (0.1, 0.4, 0.8):
            q, keys = _keys_with_sims([s, 0.3, -0.2])
            losses.append(info_nce(q, keys[0], keys[1:], 0.07)[0])
        assert losses[0] >= losses[1] >= losses[2] >= 0.0


class TestTagSupervised:
    def test_degenerates_to_info_nce_bit_for_bit(self, unit_rows):
        rng = SeededRng(21)
        for _ in range(100):
            q, k = unit_rows(rng, 2, 5)
            negs = unit_rows(rng, 6, 5)
            q_tags = (rng.random(8) < 0.5).astype(float)
            neg_tags = np.zeros((6, 8))
            neg_tags[:, :2] = 1.0
            plain = info_nce(q, k, negs, 0.07)
            tagged = tag_supervised_nce(q, q_tags, k, negs, neg_tags, 0.07, 2.0)
            assert tagged[0] == plain[0]
            np.testing.assert_array_equal(tagged[1], plain[1])

    def test_threshold_is_strict(self):
        q_tags = np.array([1.0, 1.0, 1.0, 0.0])
        neg_tags = np.array([[1.0, 1.0, 1.0, 0.0], [1.0, 1.0, 0.0, 1.0]])
        np.testing.assert_array_equal(tag_positive_mask(q_tags, neg_tags, 2.0), [True, False])

    def test_uniform_logits_with_two_positives(self):
        q = np.array([1.0, 0.0])
        k = np.array([0.0, 1.0])
        negs = np.tile(k, (3, 1))
        neg_tags = np.array([[1.0, 1.0, 1.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        loss, _ = tag_supervised_nce(q, np.ones(3), k, negs, neg_tags, 0.07, 2.0)
        assert loss == pytest.approx(math.log(4), abs=1e-12)

    def test_gradient_matches_finite_differences(self, unit_rows, rng):
        q, k = unit_rows(rng, 2, 6)
        negs = unit_rows(rng, 8, 6)
        q_tags = np.array([1.0, 1.0, 1.0, 1.0, 0.0])
        neg_tags = np.zeros((8, 5))
        neg_tags[[1, 4, 6], :4] = 1.0
        _, grad = tag_supervised_nce(q, q_tags, k, negs, neg_tags, 0.3, 2.0)
        numeric = finite_diff_grad(lambda x: tag_supervised_nce(x, q_tags, k, negs, neg_tags, 0.3, 2.0)[0], q)
        assert relative_error(grad, numeric) < 1e-7

    def test_tag_rows_must_match_negatives(self, unit_rows, rng):
        q, k = unit_rows(rng, 2, 3)
        with pytest.raises(DimensionMismatch):
            tag_supervised_nce(q, np.ones(2), k, unit_rows(rng, 3, 3), np.ones((2, 2)), 0.1, 0.5)


class TestHinge:
    @pytest.mark.parametrize(
        "sims, expected",
        [([0.9, 0.1, 0.1], 0.0), ([0.5, 0.5], 0.2), ([0.5, 0.6, 0.4], 0.4)],
    )
    def test_examples(self, sims, expected):
        q, keys = _keys_with_sims(sims)
        loss, grad = hinge_ranking(q, keys[0], keys[1:], 0.2)
        assert loss == pytest.approx(expected, abs=1e-12)
        if expected == 0.0:
            np.testing.assert_array_equal(grad, 0.0)

    def test_gradient_matches_finite_differences(self, unit_rows, rng):
        q, k = unit_rows(rng, 2, 6)
        negs = unit_rows(rng, 10, 6)
        _, grad = hinge_ranking(q, k, negs, 0.2)
        numeric = finite_diff_grad(lambda x: hinge_ranking(x, k, negs, 0.2)[0], q)
        assert relative_error(grad, numeric) < 1e-6

    def test_never_negative(self, unit_rows, rng):
        for _ in range(20):
            q, k = unit_rows(rng, 2, 4)
            assert hinge_ranking(q, k, unit_rows(rng, 5, 4), 0.2)[0] >= 0.0


def test_losses_are_rotation_invariant(unit_rows):
    rng = SeededRng(8)
    for _ in range(50):
        q, k = unit_rows(rng, 2, 6)
        negs = unit_rows(rng, 7, 6)
        q_tags = (rng.random(5) < 0.6).astype(float)
        neg_tags = (rng.random((7, 5)) < 0.6).astype(float)
        rot = random_orthogonal(6, rng)
        rq, rk, rnegs = rot @ q, rot @ k, negs @ rot.T
        assert info_nce(rq, rk, rnegs, 0.07)[0] == pytest.approx(info_nce(q, k, negs, 0.07)[0], abs=1e-10)
        assert tag_supervised_nce(rq, q_tags, rk, rnegs, neg_tags, 0.07, 2.0)[0] == pytest.approx(
            tag_supervised_nce(q, q_tags, k, negs, neg_tags, 0.07, 2.0)[0], abs=1e-10
        )
        assert hinge_ranking(rq, rk, rnegs, 0.2)[0] == pytest.approx(hinge_ranking(q, k, negs, 0.2)[0], abs=1e-10)
