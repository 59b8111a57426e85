"""Small dense Hermitian helpers."""

import numpy as np


def eigvalsh_2x2(h):
    """
    Ascending eigenvalues of a 2x2 Hermitian matrix (or a stack of them).

    Uses ``mean -/+ hypot(half_difference, |offdiag|)``, which avoids the
    cancellation of the textbook discriminant.
    """
    h = np.asarray(h)
    a = h[..., 0, 0].real
    d = h[..., 1, 1].real
    b = 0.5 * (h[..., 0, 1] + np.conj(h[..., 1, 0]))
    mean = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), np.abs(b))
    return np.stack([mean - rad, mean + rad], axis=-1)


def hermitian_eigvalsh(h):
    """Ascending real eigenvalues of a Hermitian matrix.

    2x2 inputs use the closed form; larger ones defer to LAPACK.
    """
    h = np.asarray(h)
    if h.shape[-2:] == (2, 2):
        return eigvalsh_2x2(h)
    return np.linalg.eigvalsh(h)


def min_eig(h):
    return float(hermitian_eigvalsh(h)[..., 0])


def hermiticity_defect(h):
    h = np.asarray(h)
    return float(np.max(np.abs(h - h.conj().swapaxes(-1, -2)))) if h.size else 0.0


def is_psd(h, tol=1e-10):
    return min_eig(h) >= -tol
