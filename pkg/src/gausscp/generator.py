"""
Complete positivity of Gaussian channels and semigroup generators.

A centered Gaussian channel ``(X, Y)`` maps covariances ``gamma -> X gamma X^T + Y``
and is completely positive iff ``Y - i(sigma - X sigma X^T) >= 0``. Taking
``X = 1 + K dt`` and ``Y = D dt`` gives the generator condition
``M = D + i(K sigma + sigma K^T) >= 0``.

Reverse-time convention: a reverse decoder integrates in a reversed clock with
drift ``-K_bayes``. Since ``M(-K) = conj(M(K))`` for real ``K`` and ``D``,
both signs share one spectrum, so CP admissibility is always evaluated on
``M(K_bayes)``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .exceptions import DegenerateInputError, InvalidInputError
from .gaussian import (
    SYMMETRY_TOL,
    PSD_TOL,
    SqueezedThermalParams,
    squeezed_thermal_cov,
    symplectic_form,
)
from .linalg import hermitian_eigvalsh, hermiticity_defect

WITNESS_DT = 1e-6


def _square(a, name):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
        raise InvalidInputError(f"{name} must be a real 2n x 2n matrix, got shape {a.shape}")
    return a


def _symmetric(a, name):
    a = _square(a, name)
    if np.max(np.abs(a - a.T)) > SYMMETRY_TOL:
        raise InvalidInputError(f"{name} must be symmetric")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class GaussianChannel:
    """Centered Gaussian channel acting as ``gamma -> X gamma X^T + Y``."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        x = _square(self.X, "X")
        y = _symmetric(self.Y, "Y")
        if x.shape != y.shape:
            raise InvalidInputError("X and Y must have the same shape")
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "Y", y)

    @property
    def n(self):
        return self.X.shape[0] // 2

    def apply(self, gamma):
        return self.X @ gamma @ self.X.T + self.Y


@dataclass(frozen=True)
class GaussianGenerator:
    """Drift ``K`` and diffusion ``D`` of ``d(gamma)/dt = K gamma + gamma K^T + D``."""

    K: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        k = _square(self.K, "K")
        d = _symmetric(self.D, "D")
        if k.shape != d.shape:
            raise InvalidInputError("K and D must have the same shape")
        object.__setattr__(self, "K", k)
        object.__setattr__(self, "D", d)

    @property
    def n(self):
        return self.K.shape[0] // 2

    def rhs(self, gamma):
        return self.K @ gamma + gamma @ self.K.T + self.D

    def step_channel(self, dt):
        """First-order channel ``(1 + K dt, D dt)`` of a step ``dt``."""
        return GaussianChannel(np.eye(2 * self.n) + self.K * dt, self.D * dt)


@dataclass(frozen=True)
class CpMatrix:
    """Generator CP matrix ``M`` with its ascending eigenvalues."""

    M: np.ndarray
    eigenvalues: np.ndarray = field(repr=False)

    @property
    def lambda_min(self):
        return float(self.eigenvalues[0])

    @property
    def is_cp(self):
        return self.lambda_min >= -PSD_TOL


def attenuator(gamma_rate, n=1):
    """Quantum-limited attenuator generator ``K = -g*1``, ``D = 2g*1``."""
    if gamma_rate <= 0:
        raise InvalidInputError(f"attenuation rate must be > 0, got {gamma_rate}")
    eye = np.eye(2 * n)
    return GaussianGenerator(-gamma_rate * eye, 2.0 * gamma_rate * eye)


def cp_matrix(K, D):
    """``D + i(K sigma + sigma K^T)`` as a complex array."""
    K = np.asarray(K, dtype=float)
    sigma = symplectic_form(K.shape[0] // 2)
    return np.asarray(D, dtype=float) + 1j * (K @ sigma + sigma @ K.T)


def generator_cp_matrix(g):
    """
    Generator CP matrix of a Gaussian semigroup generator.

    Raises
    ------
    InvalidInputError
        If the assembled matrix is not Hermitian to 1e-12 (only possible for
        malformed input such as non-finite entries).
    """
    m = cp_matrix(g.K, g.D)
    if not hermiticity_defect(m) <= 1e-12:
        raise InvalidInputError("generator CP matrix is not Hermitian")
    return CpMatrix(m, hermitian_eigvalsh(m))


def hhw_cp_check(channel):
    """
    Complete-positivity test ``Y - i(sigma - X sigma X^T) >= 0``.

    Returns ``(ok, margin)`` with ``margin`` the minimum eigenvalue.
    """
    sigma = symplectic_form(channel.n)
    x = channel.X
    h = channel.Y - 1j * (sigma - x @ sigma @ x.T)
    margin = float(hermitian_eigvalsh(h)[0])
    return margin >= -PSD_TOL, margin


def bayes_reverse_generator(fwd, gamma_ref):
    """Score-lifted reverse generator ``(K + D gamma_ref^{-1}, D)`` at fixed diffusion."""
    gamma_ref = np.asarray(gamma_ref, dtype=float)
    if gamma_ref.shape != fwd.K.shape:
        raise InvalidInputError("reference covariance has the wrong shape")
    try:
        cond = np.linalg.cond(gamma_ref)
    except np.linalg.LinAlgError:
        cond = math.inf
    if not np.isfinite(cond) or cond > 1e14:
        raise DegenerateInputError("reference covariance is singular")
    k_bayes = fwd.K + fwd.D @ np.linalg.inv(gamma_ref)
    return GaussianGenerator(k_bayes, fwd.D)


def nogo_eigenvalues(gamma_rate, p):
    """
    Closed-form spectrum ``(lambda_minus, lambda_plus)`` of the Bayes CP matrix
    for the attenuator with a squeezed thermal reference.

    ``lambda_plus = 4 g cosh(2r)/nu`` and ``lambda_minus = 4 g (1 - cosh(2r)/nu)``.
    """
    if gamma_rate <= 0:
        raise InvalidInputError(f"attenuation rate must be > 0, got {gamma_rate}")
    if not isinstance(p, SqueezedThermalParams):
        p = SqueezedThermalParams(*p)
    ratio = math.cosh(2.0 * p.r) / p.nu
    return 4.0 * gamma_rate * (1.0 - ratio), 4.0 * gamma_rate * ratio


def nogo_lambda_min(gamma_rate, p):
    """
    Smallest eigenvalue of the Bayes CP matrix in closed form.

    This is ``4 g (1 - cosh(2r)/nu)`` whenever ``cosh(2r)/nu >= 1/2``, which
    covers the threshold and everything beyond it; for strongly mixed, weakly
    squeezed references ``lambda_plus`` is the smaller one. Negative exactly
    when ``cosh(2r) > nu``.
    """
    return min(nogo_eigenvalues(gamma_rate, p))


def bayes_cp_matrix(gamma_rate, p):
    """Assembled ``M`` for the attenuator Bayes generator at reference ``p``."""
    g = bayes_reverse_generator(attenuator(gamma_rate), squeezed_thermal_cov(p))
    return generator_cp_matrix(g)


def tmsv_cov(mu):
    """Two-mode squeezed vacuum covariance ``[[mu 1, c Z], [c Z, mu 1]]``, ``c = sqrt(mu^2-1)``."""
    if not mu > 1.0:
        raise InvalidInputError(f"TMSV parameter must be > 1, got {mu}")
    z = np.diag([1.0, -1.0])
    c = math.sqrt(mu * mu - 1.0)
    return np.block([[mu * np.eye(2), c * z], [c * z, mu * np.eye(2)]])


def tmsv_schur_witness(channel, mu):
    """
    Schur complement of the reference block of ``(Phi x id)(TMSV_mu) + i sigma_AB``.

    The channel acts on mode A. The complement is formed from the explicit
    output covariance with a numerical inverse of the B block, so comparing it
    with ``Y + i(sigma - X sigma X^T)`` is a genuine cross-check.
    """
    if channel.n != 1:
        raise InvalidInputError("TMSV witness is defined for one-mode channels")
    if not mu > 1.0:
        raise InvalidInputError(f"TMSV parameter must be > 1, got {mu}")
    x, y = channel.X, channel.Y
    big_x = np.block([[x, np.zeros((2, 2))], [np.zeros((2, 2)), np.eye(2)]])
    big_y = np.block([[y, np.zeros((2, 2))], [np.zeros((2, 2)), np.zeros((2, 2))]])
    out = big_x @ tmsv_cov(mu) @ big_x.T + big_y
    h = out + 1j * symplectic_form(2)
    h_aa, h_ab, h_ba, h_bb = h[:2, :2], h[:2, 2:], h[2:, :2], h[2:, 2:]
    s = h_aa - h_ab @ np.linalg.inv(h_bb) @ h_ba
    return 0.5 * (s + s.conj().T)


def hhw_matrix(channel):
    """``Y + i(sigma - X sigma X^T)``, the closed form the TMSV witness reduces to."""
    sigma = symplectic_form(channel.n)
    return channel.Y + 1j * (sigma - channel.X @ sigma @ channel.X.T)


def infinitesimal_witness(g, dt=WITNESS_DT, mu=2.0):
    """
    Rescaled witness ``lambda_min(S(mu)) / dt`` for the step ``(1 + K dt, D dt)``.

    Returns ``(value, richardson)`` where ``richardson = 2 v(dt/2) - v(dt)``
    removes the O(dt) term.
    """
    def rescaled(h):
        s = tmsv_schur_witness(g.step_channel(h), mu)
        return float(hermitian_eigvalsh(s)[0]) / h

    coarse = rescaled(dt)
    fine = rescaled(0.5 * dt)
    return coarse, 2.0 * fine - coarse


def sign_flip_spectrum_check(g, tol=1e-12):
    """True iff ``M(K)`` and ``M(-K)`` have the same sorted spectrum to ``tol``."""
    plus = hermitian_eigvalsh(cp_matrix(g.K, g.D))
    minus = hermitian_eigvalsh(cp_matrix(-g.K, g.D))
    return bool(np.max(np.abs(plus - minus)) <= tol)
