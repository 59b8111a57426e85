"""
Monotone metrics on the displacement sector of Gaussian states.

For a thermal mode with symplectic eigenvalue ``nu`` the Fock spectrum is
geometric with ratio ``lam = (nu - 1)/(nu + 1)``. Displacements only couple
adjacent Fock levels, so the Bures/BKM ratio on that sector is the Petz
function ratio evaluated at ``lam``, which gives ``c_geom(nu)``.

Per quadrature and per unit displacement (HHW units):

* Bures metric: ``1/(2 nu)``, i.e. ``gamma^{-1}/2`` in general;
* BKM metric: ``ln((nu + 1)/(nu - 1)) = 2 arccoth(nu)``.

The BKM displacement metric of a general covariance is the second one
transported by the Williamson symplectic map; it serves as the Fisher weight
``J`` in the repair cost and in the entropy-rate increment ``tr(dD J)/2``.
"""

import math

import numpy as np

from .exceptions import InvalidInputError, NearPurityError
from .gaussian import _as_covariance, mode_count, symplectic_eigenvalues, symplectic_form

NEAR_PURITY_TOL = 1e-9
_SERIES_T = 1e-6


def metric_ratio(t):
    """
    Bures-to-BKM ratio ``(t - 1) / (2 (t + 1) ln t)`` of Petz functions.

    Symmetric under ``t -> 1/t``; equals 1/4 at ``t = 1``.
    """
    t = float(t)
    if not t > 0.0:
        raise InvalidInputError(f"ratio argument must be > 0, got {t}")
    x = math.log(t)
    if abs(t - 1.0) < _SERIES_T:
        # (e^x - 1)/x = 1 + x/2 + x^2/6 + ...
        q = 1.0 + x / 2.0 + x * x / 6.0
    else:
        q = math.expm1(x) / x
    return 0.5 * q / (t + 1.0)


def lambda_ratio(nu):
    """Adjacent Fock eigenvalue ratio ``(nu - 1)/(nu + 1)`` of a thermal mode."""
    nu = float(nu)
    if not nu >= 1.0:
        raise InvalidInputError(f"symplectic eigenvalue must be >= 1, got {nu}")
    return (nu - 1.0) / (nu + 1.0)


def _log_ratio(nu):
    # ln((nu+1)/(nu-1)) = 2 artanh(1/nu), accurate for large nu.
    return 2.0 * math.atanh(1.0 / nu)


def c_geom(nu):
    """
    Geometric constant ``1 / (2 nu ln((nu + 1)/(nu - 1)))`` in (0, 1/4].

    Raises
    ------
    NearPurityError
        For ``nu <= 1``: the constant degenerates to 0 at purity.
    """
    nu = float(nu)
    if not nu > 1.0:
        raise NearPurityError(f"c_geom requires nu > 1, got {nu}")
    if nu > 1e6:
        # 2 nu artanh(1/nu) = 2 + 2/(3 nu^2) + ...
        return 1.0 / (4.0 + 4.0 / (3.0 * nu * nu))
    return 1.0 / (2.0 * nu * _log_ratio(nu))


def _williamson_function(gamma, fn):
    """``i sigma fn(i gamma sigma)`` for an odd scalar ``fn`` applied on the spectrum.

    ``i gamma sigma = S (i N sigma) S^{-1}`` has eigenvalues ``+-nu_k``, so this
    equals ``S^{-T} (+)_k fn(nu_k) 1_2 S^{-1}``.
    """
    n = mode_count(gamma)
    sigma = symplectic_form(n)
    a = 1j * gamma @ sigma
    w, v = np.linalg.eig(a)
    w = w.real
    f = v @ np.diag([fn(x) for x in w]) @ np.linalg.inv(v)
    j = (1j * sigma @ f).real
    return 0.5 * (j + j.T)


def bkm_displacement_metric(gamma):
    """
    BKM Fisher matrix on displacement tangents.

    Parameters
    ----------
    gamma : array_like, shape (2n, 2n)
        Covariance with every symplectic eigenvalue strictly above 1.

    Returns
    -------
    ndarray, shape (2n, 2n)
        Real symmetric positive definite ``J``. For
        ``diag(nu e^{2r}, nu e^{-2r})`` this is
        ``diag(e^{-2r}, e^{2r}) ln((nu+1)/(nu-1))``.
    """
    gamma = _as_covariance(gamma)
    nus = symplectic_eigenvalues(gamma)
    if nus[-1] <= 1.0 + NEAR_PURITY_TOL:
        raise NearPurityError(
            f"BKM displacement metric needs all nu_k > 1 (min nu = {nus[-1]:.12g})"
        )
    if gamma.shape == (2, 2):
        nu = float(nus[0])
        return _log_ratio(nu) * nu * np.linalg.inv(gamma)
    return _williamson_function(gamma, lambda x: math.copysign(_log_ratio(abs(x)), x))


def bures_displacement_metric(gamma):
    """Bures metric on displacement tangents, ``gamma^{-1} / 2`` (a quarter of the SLD QFI)."""
    gamma = _as_covariance(gamma)
    return 0.5 * np.linalg.inv(gamma)


def endpoint_bound(f):
    """
    The pair ``(-2 ln f, 2 A^2)`` with ``A = arccos(sqrt(f))``; the first
    always dominates the second.

    ``f = 0`` returns ``(inf, pi^2/2)``.
    """
    f = float(f)
    if f < -1e-12 or f > 1.0 + 1e-12:
        raise InvalidInputError(f"fidelity must lie in [0, 1], got {f}")
    f = min(max(f, 0.0), 1.0)
    angle = math.acos(math.sqrt(f))
    if f == 0.0:
        return math.inf, 2.0 * angle * angle
    return -2.0 * math.log(f), 2.0 * angle * angle
