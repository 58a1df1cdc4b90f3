"""Third-order tensor operations: mode-3 FFT, Schatten p-norm, and its prox.

A third-order tensor is stored as a real numpy array of shape (n1, n2, n3).
Mode 3 is the last axis: tubes run along axis 2, and the i-th frontal slice
is ``t[:, :, i]``.  The forward transform is the unnormalized DFT along
axis 2 and the inverse carries the 1/n3 factor (numpy convention).

The Schatten p-norm of a tensor, for 0 < p <= 1, is

    ( sum_i sum_j sigma_j(S_i)^p )^(1/p)

over the frontal slices S_i of the mode-3 DFT.  Its proximal operator
shrinks every Fourier-domain singular value with a generalized
soft-thresholding rule that reduces to plain soft thresholding at p = 1.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SymmetryViolation",
    "as_tensor3",
    "fft_mode3",
    "ifft_mode3",
    "schatten_p_norm",
    "gst_shrink",
    "prox_schatten_p",
]

# Singular values below this are treated as exactly zero before shrinkage so
# the p-1 power in the fixed-point iteration cannot blow up.
SINGULAR_FLOOR = 1e-12


class SymmetryViolation(ValueError):
    """Fourier-domain tensor is not conjugate-symmetric along mode 3."""


def _check_p(p):
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")


def as_tensor3(values):
    """Validate and return a third-order real tensor as a float ndarray.

    Raises ValueError if the input is not 3-dimensional, has an empty
    axis, or contains non-finite entries.
    """
    t = np.asarray(values, dtype=float)
    if t.ndim != 3:
        raise ValueError(f"expected a 3-d array, got shape {t.shape}")
    if min(t.shape) < 1:
        raise ValueError(f"all dimensions must be positive, got shape {t.shape}")
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor entries must be finite")
    return t


def fft_mode3(t):
    """Unnormalized forward DFT of every tube t[i, j, :] (complex output)."""
    t = np.asarray(t)
    if t.ndim != 3:
        raise ValueError(f"expected a 3-d array, got shape {t.shape}")
    return np.fft.fft(t, axis=2)


def ifft_mode3(t, imag_tol=1e-9):
    """Inverse DFT along mode 3 of a conjugate-symmetric complex tensor.

    The result of a mode-3 FFT of a real tensor is conjugate-symmetric
    along axis 2, so the inverse is real up to rounding.  Any imaginary
    residue below ``imag_tol`` is discarded; a larger residue signals a
    corrupted Fourier-domain edit and raises SymmetryViolation.
    """
    t = np.asarray(t)
    if t.ndim != 3:
        raise ValueError(f"expected a 3-d array, got shape {t.shape}")
    back = np.fft.ifft(t, axis=2)
    residue = float(np.max(np.abs(back.imag))) if back.size else 0.0
    if residue > imag_tol:
        raise SymmetryViolation(
            f"imaginary residue {residue:.3e} exceeds tolerance {imag_tol:.1e}; "
            "input is not conjugate-symmetric along mode 3"
        )
    return np.ascontiguousarray(back.real)


def _slice_singular_values(spec):
    """Singular values of every frontal slice of a complex tensor, (n3, h)."""
    # np.linalg.svd batches over leading axes; move the slice index up front.
    return np.linalg.svd(np.moveaxis(spec, 2, 0), compute_uv=False)


def schatten_p_norm(t, p):
    """Tensor Schatten p-norm of a real third-order tensor, 0 < p <= 1.

    Returns ``(sum_i sum_j sigma_j(S_i)^p)^(1/p)`` where S_i are the
    frontal slices of the mode-3 DFT of ``t``.  At p = 1 this is the sum
    of all Fourier-domain singular values (the tensor nuclear norm, up to
    the transform normalization).
    """
    _check_p(p)
    t = as_tensor3(t)
    sv = _slice_singular_values(fft_mode3(t))
    total = float(np.sum(sv**p))
    return total ** (1.0 / p)


def gst_shrink(sigma, tau, p, tol=1e-10, max_iter=200):
    """Generalized soft-thresholding: minimize 0.5*(d - sigma)^2 + tau*d^p over d >= 0.

    For p = 1 this is the plain soft threshold max(sigma - tau, 0).  For
    p < 1 the minimizer is 0 whenever sigma is at or below the threshold

        t_gst = (2*tau*(1-p))^(1/(2-p)) + tau*p*(2*tau*(1-p))^((p-1)/(2-p))

    and otherwise the fixed point of d <- sigma - tau*p*d^(p-1), started
    at d = sigma and iterated until the step falls below ``tol``.

    ``sigma`` may be a scalar or ndarray (applied elementwise).
    """
    _check_p(p)
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    sig = np.asarray(sigma, dtype=float)
    if np.any(sig < 0):
        raise ValueError("sigma must be nonnegative")
    scalar = sig.ndim == 0
    sig = np.atleast_1d(sig)

    if p == 1.0:
        out = np.maximum(sig - tau, 0.0)
    elif tau == 0.0:
        out = sig.copy()
    else:
        d0 = (2.0 * tau * (1.0 - p)) ** (1.0 / (2.0 - p))
        thresh = d0 + tau * p * d0 ** (p - 1.0)
        out = np.zeros_like(sig)
        active = sig > thresh
        if np.any(active):
            s = sig[active]
            delta = s.copy()
            for _ in range(max_iter):
                step = s - tau * p * np.maximum(delta, SINGULAR_FLOOR) ** (p - 1.0)
                done = np.max(np.abs(step - delta)) < tol
                delta = step
                if done:
                    break
            out[active] = np.maximum(delta, 0.0)

    return float(out[0]) if scalar else out


def prox_schatten_p(z, tau, p):
    """Proximal operator of tau * (Schatten p-norm)^p at the tensor z.

    Returns ``argmin_X 0.5*||X - Z||_F^2 + tau*||X||_Sp^p``.  Each frontal
    slice of the mode-3 DFT of z is SVD'd, its singular values are shrunk
    by ``gst_shrink`` with threshold ``tau * n3``, and the result is
    transformed back.  Conjugate-symmetric slice pairs are computed once
    and mirrored, so only ceil((n3+1)/2) SVDs are taken.
    """
    _check_p(p)
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    z = as_tensor3(z)
    if tau == 0.0:
        return z.copy()
    n3 = z.shape[2]
    spec = fft_mode3(z)
    half = n3 // 2 + 1
    stack = np.moveaxis(spec, 2, 0)[:half]
    u, s, vh = np.linalg.svd(stack, full_matrices=False)
    s = np.where(s < SINGULAR_FLOOR, 0.0, s)
    s = gst_shrink(s, tau * n3, p)
    out = np.empty_like(spec)
    out[:, :, :half] = np.moveaxis((u * s[:, None, :]) @ vh, 0, 2)
    for i in range(1, (n3 + 1) // 2):
        out[:, :, n3 - i] = np.conj(out[:, :, i])
    return ifft_mode3(out)
