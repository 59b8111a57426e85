"""
Covariance-level algebra for Gaussian states.

Conventions: canonical operators with ``[Q_j, P_k] = i delta_jk``, quadratures
ordered ``(Q_1, P_1, ..., Q_n, P_n)`` and covariance matrices normalised so
that the vacuum is the identity. A real symmetric ``gamma`` is a physical
covariance iff ``gamma + i*sigma >= 0``, i.e. every symplectic eigenvalue is
at least 1.

Fidelity is the *squared* Uhlmann fidelity ``F = (Tr sqrt(sqrt(r1) r2 sqrt(r1)))**2``
so that ``F = cos(A)**2`` with ``A`` the Bures angle.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import DegenerateInputError, InvalidInputError
from .linalg import hermitian_eigvalsh

SYMMETRY_TOL = 1e-9
PSD_TOL = 1e-10
# Symplectic eigenvalues within this distance of 1 are treated as exactly pure.
PURITY_TOL = 1e-13


def symplectic_form(n):
    """Block-diagonal symplectic form with ``n`` blocks ``[[0, 1], [-1, 0]]``."""
    if n < 1:
        raise InvalidInputError(f"mode count must be >= 1, got {n}")
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _as_covariance(gamma):
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1] or gamma.shape[0] % 2:
        raise InvalidInputError(f"covariance must be 2n x 2n, got shape {gamma.shape}")
    asym = np.max(np.abs(gamma - gamma.T))
    if asym > SYMMETRY_TOL:
        raise InvalidInputError(f"covariance is not symmetric (max asymmetry {asym:.3g})")
    return 0.5 * (gamma + gamma.T)


def mode_count(gamma):
    return np.shape(gamma)[0] // 2


@dataclass(frozen=True)
class SqueezedThermalParams:
    """One-mode squeezed thermal state: covariance ``diag(nu e^{2r}, nu e^{-2r})``."""

    nu: float
    r: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.nu) or self.nu < 1.0:
            raise InvalidInputError(f"nu must be >= 1, got {self.nu}")
        if not np.isfinite(self.r) or self.r < 0.0:
            raise InvalidInputError(f"r must be >= 0, got {self.r}")

    def covariance(self):
        return squeezed_thermal_cov(self)


@dataclass(frozen=True)
class FidelityValue:
    """Squared Uhlmann fidelity together with its Bures angle."""

    f: float
    angle: float

    @property
    def neg2log(self):
        """``-2 ln F``, the infidelity measure used by the noise-floor bound."""
        return math.inf if self.f <= 0.0 else max(0.0, -2.0 * math.log(self.f))


def physicality_check(gamma):
    """
    Test the uncertainty relation ``gamma + i*sigma >= 0``.

    Parameters
    ----------
    gamma : array_like, shape (2n, 2n)
        Real symmetric covariance matrix.

    Returns
    -------
    ok : bool
        True iff the minimum eigenvalue is at least ``-1e-10``.
    margin : float
        Minimum eigenvalue of the Hermitian matrix ``gamma + i*sigma``.
    """
    gamma = _as_covariance(gamma)
    sigma = symplectic_form(mode_count(gamma))
    margin = float(hermitian_eigvalsh(gamma + 1j * sigma)[0])
    return margin >= -PSD_TOL, margin


def symplectic_eigenvalues(gamma):
    """
    Symplectic eigenvalues of a positive definite covariance, in descending order.

    They are the moduli of the eigenvalues of ``i*sigma*gamma``. With the
    Cholesky factor ``gamma = L L^T`` the Hermitian matrix ``L^T (i sigma) L``
    has the same spectrum, ``{+nu_k, -nu_k}``, which keeps the computation on a
    Hermitian eigensolver.
    """
    gamma = _as_covariance(gamma)
    n = mode_count(gamma)
    try:
        chol = np.linalg.cholesky(gamma)
    except np.linalg.LinAlgError:
        raise DegenerateInputError("covariance is singular or not positive definite") from None
    if np.min(np.abs(np.diag(chol))) < 1e-150:
        raise DegenerateInputError("covariance is singular")
    h = chol.T @ (1j * symplectic_form(n)) @ chol
    evals = hermitian_eigvalsh(h)
    return np.sort(evals[n:])[::-1].copy()


def squeezed_thermal_cov(p):
    """Covariance ``diag(nu e^{2r}, nu e^{-2r})`` of a squeezed thermal mode."""
    if not isinstance(p, SqueezedThermalParams):
        p = SqueezedThermalParams(*p)
    return np.diag([p.nu * math.exp(2.0 * p.r), p.nu * math.exp(-2.0 * p.r)])


def squeezed_thermal_params(gamma):
    """
    Williamson data ``(nu, r)`` of a one-mode covariance.

    ``nu = sqrt(det gamma)`` and ``cosh(2r) = tr(gamma) / (2 nu)``; the
    rotation angle is discarded.
    """
    gamma = _as_covariance(gamma)
    if gamma.shape != (2, 2):
        raise InvalidInputError("squeezed_thermal_params is defined for one mode only")
    det = float(np.linalg.det(gamma))
    if det <= 0.0:
        raise DegenerateInputError("covariance is singular or indefinite")
    nu = math.sqrt(det)
    ch = max(1.0, float(np.trace(gamma)) / (2.0 * nu))
    return nu, 0.5 * math.acosh(ch)


def bures_angle(f):
    """Bures angle ``arccos(sqrt(f))`` for a squared fidelity ``f`` in [0, 1]."""
    f = float(f)
    if f < -1e-12 or f > 1.0 + 1e-12:
        raise InvalidInputError(f"fidelity must lie in [0, 1], got {f}")
    return math.acos(math.sqrt(min(max(f, 0.0), 1.0)))


def _check_physical(gamma, name):
    ok, margin = physicality_check(gamma)
    if not ok:
        raise InvalidInputError(f"{name} is not a physical covariance (margin {margin:.3g})")


def gaussian_fidelity(gamma1, gamma2):
    """
    Squared Uhlmann fidelity between two zero-mean Gaussian states.

    Uses the closed form of Banchi, Braunstein and Pirandola (PRL 115, 260501)
    written for covariances with vacuum ``1/2``; inputs are rescaled by 1/2.
    If either state is pure the fidelity reduces to the overlap
    ``2^n / sqrt(det(gamma1 + gamma2))``, which is used directly because the
    general formula loses about half its digits at purity.

    Returns
    -------
    FidelityValue
    """
    g1 = _as_covariance(gamma1)
    g2 = _as_covariance(gamma2)
    if g1.shape != g2.shape:
        raise InvalidInputError("covariances have different mode counts")
    _check_physical(g1, "gamma1")
    _check_physical(g2, "gamma2")
    n = mode_count(g1)

    pure = any(
        np.all(np.abs(symplectic_eigenvalues(g) - 1.0) <= PURITY_TOL) for g in (g1, g2)
    )
    if pure:
        f = 2.0**n / math.sqrt(np.linalg.det(g1 + g2))
    else:
        omega = symplectic_form(n)
        v1, v2 = 0.5 * g1, 0.5 * g2
        vsum = v1 + v2
        v_aux = omega.T @ np.linalg.solve(vsum, omega / 4.0 + v2 @ omega @ v1)
        z = np.linalg.eigvals(v_aux @ omega)
        ftot4 = np.prod(np.sqrt(1.0 + 1.0 / (4.0 * z**2) + 0j) + 1.0) * np.linalg.det(2.0 * v_aux)
        root = abs(ftot4.real) ** 0.25 / np.linalg.det(vsum) ** 0.25
        f = root**2
    f = min(max(float(f), 0.0), 1.0)
    return FidelityValue(f=f, angle=bures_angle(f))


def random_symplectic(rng, n=1, max_squeeze=1.0):
    """Random symplectic matrix built from single-mode rotations and squeezers.

    For ``n > 1`` neighbouring modes are additionally mixed by beam splitters.
    """
    s = np.eye(2 * n)
    for _ in range(3):
        layer = np.zeros((2 * n, 2 * n))
        for k in range(n):
            th, phi = rng.uniform(0, 2 * np.pi, size=2)
            r = rng.uniform(-max_squeeze, max_squeeze)
            rot1 = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
            rot2 = np.array([[np.cos(phi), np.sin(phi)], [-np.sin(phi), np.cos(phi)]])
            layer[2 * k:2 * k + 2, 2 * k:2 * k + 2] = rot2 @ np.diag([np.exp(r), np.exp(-r)]) @ rot1
        s = layer @ s
        for k in range(n - 1):
            t = rng.uniform(0, 2 * np.pi)
            bs = np.eye(2 * n)
            c, si = np.cos(t), np.sin(t)
            idx = [2 * k, 2 * k + 1, 2 * k + 2, 2 * k + 3]
            bs[np.ix_(idx, idx)] = np.block([[c * np.eye(2), si * np.eye(2)], [-si * np.eye(2), c * np.eye(2)]])
            s = bs @ s
    return s
