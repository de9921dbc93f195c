import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sigverify.errors import DegenerateData, DimensionMismatch, KTooLarge, NotFitted, TooShort
from sigverify.features import (
    STATS_DIM,
    TRANSFORM_DIM,
    FeatureReducer,
    PCAModel,
    assemble_transform_features,
    channel_stats,
    explained_variance,
    pca_fit,
    pca_project,
    pca_reconstruct,
    reduce,
    stat_features,
    symmetric_eigh,
    transform_dim,
)
from sigverify.signals import ChannelSet, derive_channels
from sigverify.transforms import Mode

from .oracles import principal_angle


class TestChannelStats:
    def test_flat(self):
        np.testing.assert_array_equal(channel_stats([0, 0, 0, 0]), np.zeros(6))

    def test_hand_worked(self):
        # mean 2, population sigma sqrt(2/3), m4 / sigma^4 = (2/3) / (4/9) = 1.5
        st_ = channel_stats([1, 2, 3])
        np.testing.assert_allclose(st_, [2.0, np.sqrt(2 / 3), 1.0, 3.0, 0.0, -1.5], atol=1e-12)

    def test_symmetric_sequence_zero_skew(self):
        x = np.array([-4.0, -1.0, 0.5, 2.0, 2.0, 0.5, -1.0, -4.0])
        assert abs(channel_stats(np.r_[x, -x])[4]) < 1e-10

    def test_too_short(self):
        with pytest.raises(TooShort):
            channel_stats([1.0])


class TestAssemble:
    def test_477(self, synth_small):
        cs = derive_channels(synth_small.signers[0].genuine[0], 100)
        for mode in Mode:
            assert assemble_transform_features(cs, mode).shape == (477,)
        assert TRANSFORM_DIM == 477 == transform_dim(100, 8, 1)
        assert stat_features(cs).shape == (STATS_DIM,) == (54,)

    def test_zero_channels(self):
        out = assemble_transform_features(ChannelSet(np.zeros((9, 100))), Mode.DWT_DCT)
        np.testing.assert_array_equal(out, np.zeros(477))

    def test_block_permutation(self, synth_small):
        cs = derive_channels(synth_small.signers[1].forgeries[0], 100)
        swapped = cs.data.copy()
        swapped[[0, 4]] = swapped[[4, 0]]
        a = assemble_transform_features(cs, "dwt")
        b = assemble_transform_features(ChannelSet(swapped), "dwt")
        np.testing.assert_array_equal(a[0:53], b[4 * 53:5 * 53])
        np.testing.assert_array_equal(a[4 * 53:5 * 53], b[0:53])
        np.testing.assert_array_equal(a[53:4 * 53], b[53:4 * 53])


class TestEigh:
    def test_matches_dense(self):
        A = np.random.default_rng(0).standard_normal((9, 9))
        A = A @ A.T
        w, V = symmetric_eigh(A)
        np.testing.assert_allclose(w, np.linalg.eigvalsh(A)[::-1], atol=1e-10)
        np.testing.assert_allclose(V.T @ V, np.eye(9), atol=1e-12)


class TestPcaFit:
    def test_line_y_equals_x(self):
        t = np.array([-2.0, -1.0, 0.5, 1.0, 1.5])
        m = pca_fit(np.c_[t, t], 2)
        np.testing.assert_allclose(m.loadings[0], [2**-0.5, 2**-0.5], atol=1e-12)
        assert m.eigenvalues[1] == pytest.approx(0.0, abs=1e-12)
        ratio, cum = explained_variance(m)
        assert cum[-1] == pytest.approx(1.0, abs=1e-8)
        assert ratio[0] == pytest.approx(1.0, abs=1e-8)

    def test_full_rank_reconstruction(self):
        X = np.random.default_rng(1).standard_normal((12, 5))
        m = pca_fit(X, 5)
        np.testing.assert_allclose(pca_reconstruct(m, pca_project(m, X)), X, atol=1e-8)

    @pytest.mark.parametrize("seed", range(5))
    def test_against_dense_oracle(self, seed):
        X = np.random.default_rng(seed).standard_normal((10, 5))
        m = pca_fit(X, 3)
        Xc = X - X.mean(axis=0)
        w, V = np.linalg.eigh(Xc.T @ Xc / 9)
        w, V = w[::-1], V[:, ::-1]
        np.testing.assert_allclose(m.eigenvalues, w[:3], atol=1e-8)
        assert principal_angle(m.loadings, V[:, :3].T) < 1e-6

    def test_gram_path_matches_oracle(self):
        X = np.random.default_rng(9).standard_normal((6, 40))
        m = pca_fit(X, 5)
        Xc = X - X.mean(axis=0)
        w, V = np.linalg.eigh(Xc.T @ Xc / 5)
        w, V = w[::-1], V[:, ::-1]
        np.testing.assert_allclose(m.eigenvalues, w[:5], atol=1e-8)
        assert principal_angle(m.loadings, V[:, :5].T) < 1e-6
        np.testing.assert_allclose(m.loadings @ m.loadings.T, np.eye(5), atol=1e-8)

    def test_gram_path_rank_deficient_completes_basis(self):
        base = np.random.default_rng(2).standard_normal((2, 30))
        coef = np.random.default_rng(3).standard_normal((8, 2))
        m = pca_fit(coef @ base, 4)
        np.testing.assert_allclose(m.loadings @ m.loadings.T, np.eye(4), atol=1e-8)
        np.testing.assert_allclose(m.eigenvalues[2:], 0.0, atol=1e-10)
        _, cum = explained_variance(m)
        assert cum[-1] == pytest.approx(1.0, abs=1e-8)

    def test_sign_convention(self):
        X = np.random.default_rng(4).standard_normal((15, 6))
        m = pca_fit(X, 4)
        for row in m.loadings:
            assert row[np.argmax(np.abs(row))] > 0

    def test_eigenvalues_descending_nonnegative(self):
        X = np.random.default_rng(5).standard_normal((20, 8))
        w = pca_fit(X, 8).eigenvalues
        assert np.all(np.diff(w) <= 1e-12) and np.all(w >= 0)

    def test_errors(self):
        X = np.random.default_rng(6).standard_normal((5, 3))
        with pytest.raises(KTooLarge):
            pca_fit(X, 4)
        with pytest.raises(KTooLarge):
            pca_fit(X[:3], 3)
        with pytest.raises(ValueError):
            pca_fit(X, 0)
        with pytest.raises(DegenerateData):
            pca_fit(np.ones((4, 3)), 1)
        with pytest.raises(DegenerateData):
            pca_fit(X[:1], 1)

    def test_isotropic_half(self):
        # the four points (+-1, 0), (0, +-1) have covariance proportional to I
        X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        ratio, _ = explained_variance(pca_fit(X, 1))
        assert ratio[0] == pytest.approx(0.5, abs=1e-12)

    def test_planted_subspace(self):
        rng = np.random.default_rng(8)
        basis, _ = np.linalg.qr(rng.standard_normal((20, 3)))
        signal = rng.standard_normal((200, 3)) * 100.0
        X = signal @ basis.T + rng.standard_normal((200, 20))
        m = pca_fit(X, 3)
        assert principal_angle(m.loadings, basis.T) < 1e-1
        # SNR in amplitude 100: recovered subspace angle shrinks with noise
        X = signal @ basis.T + 1e-4 * rng.standard_normal((200, 20))
        assert principal_angle(pca_fit(X, 3).loadings, basis.T) < 1e-4

    def test_reconstruction_error_monotone(self):
        X = np.random.default_rng(10).standard_normal((15, 7))
        errs = []
        for k in range(1, 8):
            m = pca_fit(X, k)
            errs.append(np.mean((pca_reconstruct(m, pca_project(m, X)) - X) ** 2))
        assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))


class TestProject:
    def test_mean_maps_to_zero(self):
        X = np.random.default_rng(11).standard_normal((10, 4))
        m = pca_fit(X, 2)
        np.testing.assert_allclose(pca_project(m, m.mean), 0.0, atol=1e-15)

    def test_identity_loadings(self):
        m = PCAModel(np.zeros(4), np.eye(4)[:2], np.array([2.0, 1.0]), 4.0)
        np.testing.assert_array_equal(pca_project(m, [5.0, 6.0, 7.0, 8.0]), [5.0, 6.0])

    def test_hand_worked_3_to_2(self):
        t = np.array([[0.6, 0.8, 0.0], [0.0, 0.0, 1.0]])
        m = PCAModel(np.array([1.0, 1.0, 1.0]), t, np.array([1.0, 0.5]), 2.0)
        a = np.array([2.0, 3.0, -1.0])
        # centered a = (1, 2, -2); b_1 = 0.6*1 + 0.8*2 = 2.2; b_2 = -2
        np.testing.assert_allclose(pca_project(m, a), [2.2, -2.0], atol=1e-15)

    def test_dimension_mismatch(self):
        m = PCAModel(np.zeros(3), np.eye(3)[:1], np.array([1.0]), 1.0)
        with pytest.raises(DimensionMismatch):
            pca_project(m, np.zeros(4))

    @settings(max_examples=50, deadline=None)
    @given(alpha=st.floats(0.0, 1.0), seed=st.integers(0, 10_000))
    def test_affine_combination(self, alpha, seed):
        rng = np.random.default_rng(seed)
        m = pca_fit(rng.standard_normal((8, 5)), 3)
        a1, a2 = rng.standard_normal(5), rng.standard_normal(5)
        lhs = pca_project(m, alpha * a1 + (1 - alpha) * a2)
        rhs = alpha * pca_project(m, a1) + (1 - alpha) * pca_project(m, a2)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_projection_idempotent(self):
        X = np.random.default_rng(12).standard_normal((12, 6))
        m = pca_fit(X, 3)
        b = pca_project(m, X)
        np.testing.assert_allclose(pca_project(m, pca_reconstruct(m, b)), b, atol=1e-8)

    def test_serialization_round_trip(self):
        m = pca_fit(np.random.default_rng(13).standard_normal((9, 4)), 2)
        m2 = PCAModel.from_dict(m.to_dict())
        x = np.random.default_rng(14).standard_normal(4)
        assert np.array_equal(pca_project(m, x), pca_project(m2, x))


class TestReducer:
    def _rows(self, m=20, seed=0):
        rng = np.random.default_rng(seed)
        return rng.standard_normal((m, 477)), rng.standard_normal((m, 54))

    def test_default_dim_10(self):
        T, S = self._rows()
        r = FeatureReducer().fit(T, S)
        assert r.dim == 10
        assert reduce(r, T[0], S[0]).shape == (10,)
        assert r.transform(T, S).shape == (20, 10)

    def test_training_mean_near_zero(self):
        T, S = self._rows()
        r = FeatureReducer().fit(T, S)
        np.testing.assert_allclose(reduce(r, T.mean(axis=0), S.mean(axis=0)), 0.0, atol=1e-10)
        np.testing.assert_allclose(r.transform(T, S).mean(axis=0), 0.0, atol=1e-10)

    def test_k_too_large(self):
        T, S = self._rows()
        with pytest.raises(KTooLarge):
            FeatureReducer(transform_k=477).fit(T, S)

    def test_not_fitted(self):
        with pytest.raises(NotFitted):
            reduce(FeatureReducer(), np.zeros(477), np.zeros(54))
        with pytest.raises(NotFitted):
            reduce(None, np.zeros(477), np.zeros(54))

    def test_round_trip(self):
        T, S = self._rows()
        r = FeatureReducer().fit(T, S)
        r2 = FeatureReducer.from_dict(r.to_dict())
        assert np.array_equal(r.transform(T, S), r2.transform(T, S))
