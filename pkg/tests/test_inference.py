"""Tests for top-K fusion, the dissimilarity map and guidance combination."""
import math

import numpy as np
import pytest

from gluenet.common.errors import ConfigurationError, DimensionError, EmptyBatchError, FusionWindowError
from gluenet.data.gge import EmbeddingStore
from gluenet.inference import (
    FusionParams,
    GuidanceParams,
    dissimilarity_map,
    fuse_stores,
    guidance_combine,
    topk_fuse,
)


def fuse_by_index(a, b, k):
    """Reference built one output row at a time."""
    length = a.shape[0]
    rows = []
    for i in range(length):
        if i < k:
            rows.append(a[i])
        elif i < 2 * k:
            rows.append(b[i - k])
        else:
            j = i - k
            rows.append((a[j] + b[j]) / 2)
    return np.stack(rows)


class TestTopKFuse:
    """Prefix concatenation with an averaged interior."""

    def test_equal_inputs(self):
        a = np.arange(16, dtype=np.float32).reshape(8, 2)
        out = topk_fuse(a, a.copy(), FusionParams(2))
        np.testing.assert_array_equal(out, a[[0, 1, 0, 1, 2, 3, 4, 5]])

    def test_constant_rows(self):
        out = topk_fuse(np.ones((6, 3)), np.full((6, 3), 3.0), FusionParams(2))
        np.testing.assert_array_equal(out[:, 0], [1, 1, 3, 3, 2, 2])

    def test_random_matches_reference(self, rng):
        a, b = rng.standard_normal((10, 5)), rng.standard_normal((10, 5))
        np.testing.assert_array_equal(topk_fuse(a, b, FusionParams(4)), fuse_by_index(a, b, 4))

    def test_exhaustive_sweep(self, rng):
        for length in range(3, 33):
            a = rng.standard_normal((length, 3)).astype(np.float32)
            b = rng.standard_normal((length, 3)).astype(np.float32)
            for k in range(1, (length - 1) // 2 + 1):
                out = topk_fuse(a, b, FusionParams(k))
                assert out.shape == a.shape
                np.testing.assert_array_equal(out, fuse_by_index(a, b, k))

    def test_batch_axis(self, rng):
        a, b = rng.standard_normal((3, 7, 2)), rng.standard_normal((3, 7, 2))
        out = topk_fuse(a, b, FusionParams(3))
        for i in range(3):
            np.testing.assert_array_equal(out[i], fuse_by_index(a[i], b[i], 3))

    @pytest.mark.parametrize("length,k", [(4, 2), (5, 3), (2, 1)])
    def test_window_too_large(self, length, k):
        with pytest.raises(FusionWindowError):
            topk_fuse(np.ones((length, 2)), np.ones((length, 2)), FusionParams(k))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            topk_fuse(np.ones((6, 2)), np.ones((6, 3)), FusionParams(1))

    def test_k_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            FusionParams(0)

    def test_default_k(self):
        assert FusionParams.from_config().k == 6

    def test_fuse_stores_keeps_first_ids(self, rng):
        a = EmbeddingStore(rng.standard_normal((4, 6, 2)), ids=np.array([9, 3, 5, 1]))
        b = EmbeddingStore(rng.standard_normal((4, 6, 2)))
        fused = fuse_stores(a, b, FusionParams(2))
        np.testing.assert_array_equal(fused.ids, a.ids)
        np.testing.assert_array_equal(fused.records[1], fuse_by_index(a.records[1], b.records[1], 2))

    def test_fuse_stores_shape_mismatch(self, rng):
        a = EmbeddingStore(rng.standard_normal((4, 6, 2)))
        b = EmbeddingStore(rng.standard_normal((3, 6, 2)))
        with pytest.raises(DimensionError):
            fuse_stores(a, b, FusionParams(2))


class TestDissimilarityMap:
    """Mean pairwise token distances."""

    def test_zero_diagonal_and_symmetry(self, rng):
        m = dissimilarity_map(rng.standard_normal((5, 6, 4)))
        np.testing.assert_array_equal(np.diag(m), np.zeros(6))
        np.testing.assert_allclose(m, m.T, atol=1e-6)

    def test_unit_basis(self):
        m = dissimilarity_map(np.eye(2))
        assert m[0, 1] == pytest.approx(math.sqrt(2.0))
        assert m[1, 0] == pytest.approx(math.sqrt(2.0))

    def test_matches_double_loop(self, rng):
        batch = rng.standard_normal((3, 4, 5))
        expected = np.zeros((4, 4))
        for seq in batch:
            for i in range(4):
                for j in range(4):
                    expected[i, j] += np.sqrt(((seq[i] - seq[j]) ** 2).sum()) / 3
        np.testing.assert_allclose(dissimilarity_map(batch), expected, atol=1e-10)

    def test_list_input(self, rng):
        seqs = [rng.standard_normal((3, 2)) for _ in range(4)]
        np.testing.assert_allclose(dissimilarity_map(seqs), dissimilarity_map(np.stack(seqs)))

    def test_empty(self):
        with pytest.raises(EmptyBatchError):
            dissimilarity_map(np.zeros((0, 3, 2)))


class TestGuidance:
    """Classifier-free guidance combination."""

    def test_endpoints(self, rng):
        u = rng.standard_normal((4, 3)) + 0.5
        c = rng.standard_normal((4, 3)) + 0.5
        np.testing.assert_array_equal(guidance_combine(u, c, GuidanceParams(0.0)), u)
        np.testing.assert_array_equal(guidance_combine(u, c, GuidanceParams(1.0)), c)

    def test_hand_example(self):
        out = guidance_combine([0.0, 0.0], [1.0, 2.0], GuidanceParams(7.5))
        np.testing.assert_allclose(out, [7.5, 15.0], atol=1e-6)

    def test_extrapolates_past_conditional(self):
        out = guidance_combine([1.0], [2.0], GuidanceParams(3.0))
        np.testing.assert_allclose(out, [4.0])

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            GuidanceParams(-1.0)
        with pytest.raises(ConfigurationError):
            GuidanceParams(float("nan"))
        with pytest.raises(DimensionError):
            guidance_combine(np.ones(2), np.ones(3), GuidanceParams(1.0))

    def test_from_settings(self):
        assert GuidanceParams.from_config().s == 7.5
