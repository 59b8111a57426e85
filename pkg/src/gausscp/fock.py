"""
Truncated Fock-space oracle for one-mode Gaussian states.

Everything here is brute force and exists to check the closed forms in the
rest of the package: density matrices are built explicitly, fidelities come
from eigendecompositions and metrics from the Petz sum. Conventions match
the covariance side: ``Q = (a + a^dag)/sqrt(2)``, ``P = (a - a^dag)/(i sqrt(2))``,
vacuum covariance ``1``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import expm

from .exceptions import InvalidInputError, TruncationError
from .gaussian import SqueezedThermalParams
from .geometry import lambda_ratio

MIN_CUTOFF = 8
PAD = 16
DEFICIT_TOL = 1e-8
RANK_FLOOR = 1e-14
MAX_SUGGESTED_CUTOFF = 2048
METRIC_KINDS = ("bkm", "bures")


@dataclass(frozen=True)
class FockState:
    """Truncated density matrix; ``truncation_deficit = 1 - trace``."""

    cutoff: int
    matrix: np.ndarray = field(repr=False)
    truncation_deficit: float

    def __post_init__(self):
        if self.cutoff < MIN_CUTOFF:
            raise InvalidInputError(f"cutoff must be >= {MIN_CUTOFF}, got {self.cutoff}")
        if self.matrix.shape != (self.cutoff, self.cutoff):
            raise InvalidInputError("matrix shape does not match cutoff")


def ladder(cutoff):
    """Annihilation operator ``a`` with ``a|k> = sqrt(k)|k-1>``."""
    return np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1)


def quadratures(cutoff):
    a = ladder(cutoff)
    q = (a + a.T) / math.sqrt(2.0)
    p = (a - a.T) / (1j * math.sqrt(2.0))
    return q, p


def _build(p, size):
    lam = lambda_ratio(p.nu)
    levels = np.arange(size)
    probs = (1.0 - lam) * lam**levels if lam > 0.0 else (levels == 0).astype(float)
    rho = np.diag(probs).astype(complex)
    if p.r > 0.0:
        a = ladder(size)
        # exp((r/2)(a^dag^2 - a^2)) stretches Q by e^r, giving diag(nu e^{2r}, nu e^{-2r}).
        u = expm(0.5 * p.r * (a.T @ a.T - a @ a))
        rho = u @ rho @ u.conj().T
    return rho


def _truncated(p, cutoff):
    rho = _build(p, cutoff + PAD)[:cutoff, :cutoff]
    rho = 0.5 * (rho + rho.conj().T)
    return rho, 1.0 - float(np.trace(rho).real)


def suggest_cutoff(p, tol=DEFICIT_TOL, start=MIN_CUTOFF):
    """Smallest power-of-two multiple of ``start`` whose truncation deficit is within ``tol``."""
    if not isinstance(p, SqueezedThermalParams):
        p = SqueezedThermalParams(*p)
    cutoff = max(int(start), MIN_CUTOFF)
    while cutoff <= MAX_SUGGESTED_CUTOFF:
        if _truncated(p, cutoff)[1] <= tol:
            return cutoff
        cutoff *= 2
    raise TruncationError(f"no cutoff up to {MAX_SUGGESTED_CUTOFF} reaches deficit {tol:g}")


def fock_gaussian_state(p, cutoff, tol=DEFICIT_TOL):
    """
    Squeezed thermal state in a truncated Fock basis.

    The thermal spectrum ``(1 - lam) lam^k`` is conjugated by the squeeze
    unitary, computed by ``expm`` in a space ``PAD`` levels larger and then cut
    back to ``cutoff``.

    Raises
    ------
    TruncationError
        If ``1 - trace > tol``; ``suggested_cutoff`` carries a size that works.
    """
    if not isinstance(p, SqueezedThermalParams):
        p = SqueezedThermalParams(*p)
    cutoff = int(cutoff)
    if cutoff < MIN_CUTOFF:
        raise InvalidInputError(f"cutoff must be >= {MIN_CUTOFF}, got {cutoff}")
    rho, deficit = _truncated(p, cutoff)
    if deficit > tol:
        try:
            hint = suggest_cutoff(p, tol, start=2 * cutoff)
        except TruncationError:
            hint = None
        raise TruncationError(
            f"cutoff {cutoff} leaves truncation deficit {deficit:.3g} > {tol:g}",
            suggested_cutoff=hint,
        )
    return FockState(cutoff, rho, max(deficit, 0.0))


def _check_deficit(state, tol):
    if state.truncation_deficit > tol:
        raise TruncationError(
            f"truncation deficit {state.truncation_deficit:.3g} exceeds {tol:g}",
            suggested_cutoff=2 * state.cutoff,
        )


def _psd_sqrt(rho):
    w, v = np.linalg.eigh(rho)
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def fock_fidelity(rho1, rho2, tol=DEFICIT_TOL):
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2``."""
    if rho1.cutoff != rho2.cutoff:
        raise InvalidInputError("states must share a cutoff")
    _check_deficit(rho1, tol)
    _check_deficit(rho2, tol)
    s = _psd_sqrt(rho1.matrix)
    inner = s @ rho2.matrix @ s
    ev = np.linalg.eigvalsh(0.5 * (inner + inner.conj().T))
    return float(np.sum(np.sqrt(np.clip(ev, 0.0, None))) ** 2)


def displacement_tangent(state, direction=(1.0, 0.0)):
    """
    ``d rho / d xi`` for the shift ``(Q, P) -> (Q, P) + xi * direction``.

    The shift by ``(x, p)`` is generated by ``x P - p Q``, so the tangent is
    ``-i [x P - p Q, rho]``.
    """
    x, pp = (float(c) for c in direction)
    q_op, p_op = quadratures(state.cutoff)
    g = x * p_op - pp * q_op
    return -1j * (g @ state.matrix - state.matrix @ g)


def _petz_denominator(pi, pj, kind):
    if kind == "bures":
        # Bures is a quarter of SLD, whose kernel is 2/(p_i + p_j).
        return 2.0 * (pi + pj)
    # Logarithmic mean (p_i - p_j)/(ln p_i - ln p_j), equal to p on the diagonal.
    x = np.log(pi) - np.log(pj)
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    return np.where(small, pj * (1.0 + 0.5 * x), (pi - pj) / safe)


def fock_monotone_metric(state, tangent, kind="bkm"):
    """
    Petz metric ``sum |X_ij|^2 / (p_j f(p_i/p_j))`` of a Hermitian tangent.

    Parameters
    ----------
    state : FockState
    tangent : array_like, (cutoff, cutoff)
        Hermitian and traceless to 1e-10.
    kind : {"bkm", "bures"}
        ``f(t) = (t - 1)/ln t`` or a quarter of the SLD metric.

    Notes
    -----
    Eigenvalues of ``rho`` below ``RANK_FLOOR`` are dropped and the tangent is
    projected onto the retained eigenvectors.
    """
    kind = kind.lower()
    if kind not in METRIC_KINDS:
        raise InvalidInputError(f"kind must be one of {METRIC_KINDS}")
    x = np.asarray(tangent, dtype=complex)
    if x.shape != state.matrix.shape:
        raise InvalidInputError("tangent shape does not match the state")
    if np.max(np.abs(x - x.conj().T)) > 1e-10:
        raise InvalidInputError("tangent must be Hermitian")
    if abs(np.trace(x)) > 1e-10:
        raise InvalidInputError("tangent must be traceless")
    w, v = np.linalg.eigh(state.matrix)
    keep = w > RANK_FLOOR
    w, v = w[keep], v[:, keep]
    xe = v.conj().T @ x @ v
    pi, pj = np.meshgrid(w, w, indexing="ij")
    return float(np.sum(np.abs(xe) ** 2 / _petz_denominator(pi, pj, kind)))


def fock_covariance(state):
    """Covariance ``2 Re <(R - <R>)(R - <R>)^T>`` recovered from second moments."""
    q_op, p_op = quadratures(state.cutoff)
    rho = state.matrix
    ops = (q_op, p_op)
    mean = [np.trace(rho @ o).real for o in ops]
    cov = np.empty((2, 2))
    for i, a in enumerate(ops):
        for j, b in enumerate(ops):
            cov[i, j] = np.trace(rho @ (a @ b + b @ a)).real - 2.0 * mean[i] * mean[j]
    return cov
