import numpy as np
import pytest

from anchormvc.tensor_ops import (
    SymmetryViolation,
    as_tensor3,
    fft_mode3,
    gst_shrink,
    ifft_mode3,
    prox_schatten_p,
    schatten_p_norm,
)


def naive_dft_tube(tube):
    # direct O(n^2) DFT summation, independent of numpy.fft
    n = tube.shape[0]
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        for t in range(n):
            out[k] += tube[t] * np.exp(-2j * np.pi * k * t / n)
    return out


def scalar_objective(delta, sigma, tau, p):
    return 0.5 * (delta - sigma) ** 2 + tau * delta**p


def prox_objective(x, z, tau, p):
    return 0.5 * np.sum((x - z) ** 2) + tau * schatten_p_norm(x, p) ** p


class TestFFT:
    def test_constant_tube_concentrates_on_dc(self):
        t = np.full((2, 3, 4), 2.5)
        spec = fft_mode3(t)
        assert np.allclose(spec[:, :, 0], 10.0)
        assert np.allclose(spec[:, :, 1:], 0.0, atol=1e-12)

    def test_length_one_is_identity(self):
        t = np.arange(6.0).reshape(2, 3, 1)
        spec = fft_mode3(t)
        assert np.allclose(spec, t)
        assert np.iscomplexobj(spec)

    def test_matches_naive_dft(self):
        rng = np.random.default_rng(3)
        t = rng.standard_normal((2, 2, 3))
        spec = fft_mode3(t)
        for i in range(2):
            for j in range(2):
                assert np.allclose(spec[i, j, :], naive_dft_tube(t[i, j, :]), atol=1e-12)

    @pytest.mark.parametrize("shape", [(1, 1, 1), (3, 2, 5), (8, 5, 7), (2, 4, 6)])
    def test_round_trip(self, shape):
        rng = np.random.default_rng(hash(shape) % 2**32)
        t = rng.standard_normal(shape)
        back = ifft_mode3(fft_mode3(t))
        assert np.max(np.abs(back - t)) < 1e-12 * max(1.0, np.max(np.abs(t)))

    def test_conjugate_symmetry(self):
        rng = np.random.default_rng(4)
        t = rng.standard_normal((3, 4, 6))
        spec = fft_mode3(t)
        n3 = 6
        for i in range(1, n3):
            assert np.allclose(spec[:, :, i], np.conj(spec[:, :, n3 - i]), atol=1e-12)

    def test_zero_tensor_inverse(self):
        assert np.allclose(ifft_mode3(np.zeros((2, 2, 3), dtype=complex)), 0.0)

    def test_two_point_inverse(self):
        a, b = 1.7, -0.4
        spec = np.array([a + b, a - b], dtype=complex).reshape(1, 1, 2)
        assert np.allclose(ifft_mode3(spec), np.array([a, b]).reshape(1, 1, 2))

    def test_symmetry_violation_raises(self):
        rng = np.random.default_rng(5)
        spec = fft_mode3(rng.standard_normal((2, 2, 4)))
        spec[0, 0, 1] += 0.5j  # corrupt one slice without its mirror
        with pytest.raises(SymmetryViolation):
            ifft_mode3(spec)


class TestTensorValidation:
    def test_rejects_non_3d(self):
        with pytest.raises(ValueError):
            as_tensor3(np.zeros((2, 2)))

    def test_rejects_nan(self):
        t = np.zeros((2, 2, 2))
        t[0, 0, 0] = np.nan
        with pytest.raises(ValueError):
            as_tensor3(t)


class TestSchattenNorm:
    def test_zero_tensor(self):
        assert schatten_p_norm(np.zeros((3, 2, 4)), 0.7) == 0.0

    def test_single_slice_nuclear(self):
        t = np.diag([3.0, 4.0]).reshape(2, 2, 1)
        assert schatten_p_norm(t, 1.0) == pytest.approx(7.0, abs=1e-12)

    def test_matches_eigenvalue_oracle(self):
        rng = np.random.default_rng(6)
        t = rng.standard_normal((3, 2, 2))
        spec = fft_mode3(t)
        total = 0.0
        for i in range(2):
            s = spec[:, :, i]
            evals = np.linalg.eigvalsh(np.conj(s).T @ s)
            total += np.sum(np.sqrt(np.maximum(evals, 0)) ** 0.5)
        assert schatten_p_norm(t, 0.5) == pytest.approx(total**2, abs=1e-8)

    def test_p1_sums_slice_nuclear_norms(self):
        rng = np.random.default_rng(7)
        t = rng.standard_normal((4, 3, 5))
        spec = fft_mode3(t)
        total = sum(
            np.sum(np.linalg.svd(spec[:, :, i], compute_uv=False)) for i in range(5)
        )
        assert schatten_p_norm(t, 1.0) == pytest.approx(total, rel=1e-12)

    @pytest.mark.parametrize("p", [0.0, -0.5, 1.5])
    def test_invalid_p(self, p):
        with pytest.raises(ValueError):
            schatten_p_norm(np.zeros((2, 2, 2)), p)


class TestGstShrink:
    def test_soft_threshold_above(self):
        assert gst_shrink(1.5, 0.4, 1.0) == pytest.approx(1.1, abs=1e-12)

    def test_soft_threshold_below(self):
        assert gst_shrink(0.3, 0.4, 1.0) == 0.0

    def test_tau_zero_is_identity(self):
        assert gst_shrink(2.3, 0.0, 0.6) == pytest.approx(2.3)

    def test_matches_grid_search(self):
        # frozen from a 1e-6 grid search of the scalar objective on [0, 3]
        grid = np.arange(0.0, 3.0, 1e-6)
        best = grid[np.argmin(scalar_objective(grid, 2.0, 0.5, 0.5))]
        got = gst_shrink(2.0, 0.5, 0.5)
        assert abs(got - best) < 1e-5

    def test_monotone_in_sigma(self):
        for p in (0.3, 0.6, 1.0):
            vals = gst_shrink(np.linspace(0, 4, 400), 0.5, p)
            assert np.all(np.diff(vals) >= -1e-12)

    def test_monotone_in_tau(self):
        for p in (0.3, 0.6, 1.0):
            vals = [gst_shrink(2.0, tau, p) for tau in np.linspace(0, 2, 200)]
            assert np.all(np.diff(vals) <= 1e-12)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            gst_shrink(1.0, 0.5, 1.2)
        with pytest.raises(ValueError):
            gst_shrink(1.0, -0.1, 0.5)
        with pytest.raises(ValueError):
            gst_shrink(-1.0, 0.1, 0.5)


class TestProx:
    def test_tau_zero_identity(self):
        rng = np.random.default_rng(8)
        z = rng.standard_normal((3, 2, 4))
        assert np.array_equal(prox_schatten_p(z, 0.0, 0.7), z)

    def test_single_slice_svt(self):
        # n3 = 1, p = 1: classical singular value thresholding at tau * n3 = 2
        z = np.diag([3.0, 1.0]).reshape(2, 2, 1)
        out = prox_schatten_p(z, 2.0, 1.0)
        assert np.allclose(out[:, :, 0], np.diag([1.0, 0.0]), atol=1e-10)

    def test_output_is_real_and_optimal_vs_candidates(self):
        rng = np.random.default_rng(9)
        z = rng.standard_normal((4, 3, 2))
        tau, p = 0.1, 0.7
        x = prox_schatten_p(z, tau, p)
        assert np.isrealobj(x)
        fx = prox_objective(x, z, tau, p)
        assert fx <= prox_objective(z, z, tau, p) + 1e-9
        assert fx <= prox_objective(np.zeros_like(z), z, tau, p) + 1e-9
        for _ in range(500):
            eps = 10 ** rng.uniform(-4, -0.5)
            cand = x + eps * rng.standard_normal(z.shape)
            assert fx <= prox_objective(cand, z, tau, p) + 1e-9

    def test_never_increases_objective_from_input(self):
        rng = np.random.default_rng(10)
        for _ in range(20):
            z = rng.standard_normal((3, 2, 3))
            tau = 10 ** rng.uniform(-2, 0)
            p = rng.uniform(0.3, 1.0)
            x = prox_schatten_p(z, tau, p)
            assert prox_objective(x, z, tau, p) <= prox_objective(z, z, tau, p) + 1e-9
