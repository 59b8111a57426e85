"""
Minimal diffusion that restores complete positivity.

Given a Hermitian CP matrix ``M`` and a positive definite weight ``W``, solve

    minimize    tr(dD W)
    subject to  dD real symmetric, dD >= 0, M + dD >= 0.

The feasible set is never empty (``dD = c*1`` for large ``c``).

One mode is solved exactly. Writing ``M = R + i b sigma`` with ``R`` real,
``M + dD >= 0`` iff ``C = R + dD >= 0`` and ``det C >= b^2``. Either the
repair has full rank, and then ``C = |b| sqrt(det W) W^{-1}`` (the AM-GM
optimum of ``tr(C W)`` at fixed determinant), or it is ``alpha u u^T`` with
``u`` the top generalised eigenvector of ``(adj R, W)``.

Larger problems use a primal barrier method: Newton steps on
``tr(dD W) - t [logdet dD + logdet(M + dD)]`` over the ``n(2n+1)`` symmetric
coordinates, shrinking ``t`` geometrically.

Dual certificate: on the central path ``Z1 = t dD^{-1}`` and
``Z2 = t (M + dD)^{-1}`` satisfy ``W = Z1 + Re(Z2)``. The dual objective is
``-Re tr(Z2 M)``. Forming ``Z2`` loses relative accuracy as ``t -> 0`` (one
eigenvalue of ``M + dD`` is O(t)), so the bound is rebuilt from its
eigenvectors and rescaled onto dual feasibility. A second candidate is fitted
to complementary slackness at the current iterate. The reported gap is
``cost - best dual bound``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .exceptions import FastPathError, InvalidInputError
from .gaussian import SYMMETRY_TOL, symplectic_form
from .linalg import eigvalsh_2x2, hermitian_eigvalsh, hermiticity_defect

PSD_TOL = 1e-10
GAP_RTOL = 1e-9
WEIGHT_COND_MAX = 1e8
T_SHRINK = 0.05


@dataclass(frozen=True)
class RepairResult:
    """Added diffusion and its certificate.

    ``optimality_gap`` bounds ``cost - optimum`` for the barrier solver and is
    the grid resolution bound for the brute-force oracle.
    """

    delta_d: np.ndarray
    cost: float
    feasibility_margin: float
    optimality_gap: float
    iterations: int = 0

    @property
    def trace(self):
        return float(np.trace(self.delta_d))


def _check_problem(m, w):
    m = np.asarray(m, dtype=complex)
    w = np.asarray(w, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape != w.shape:
        raise InvalidInputError("M and W must be square matrices of the same shape")
    if hermiticity_defect(m) > 1e-10:
        raise InvalidInputError("M must be Hermitian")
    if np.max(np.abs(w - w.T)) > SYMMETRY_TOL:
        raise InvalidInputError("weight must be symmetric")
    w = 0.5 * (w + w.T)
    ev = np.linalg.eigvalsh(w)
    if ev[0] <= PSD_TOL:
        raise InvalidInputError(f"weight must be positive definite (min eigenvalue {ev[0]:.3g})")
    if ev[-1] / ev[0] > WEIGHT_COND_MAX:
        raise InvalidInputError(f"weight is too ill-conditioned (cond {ev[-1] / ev[0]:.3g})")
    return 0.5 * (m + m.conj().T), w


def _sym_basis(dim):
    basis = []
    for i in range(dim):
        for j in range(i, dim):
            e = np.zeros((dim, dim))
            e[i, j] = e[j, i] = 1.0
            basis.append(e)
    return np.array(basis)


def _logdet_pd(a):
    """Log-determinant of a Hermitian matrix, or None if it is not positive definite."""
    if a.shape == (2, 2):
        a00, a11 = a[0, 0].real, a[1, 1].real
        det = a00 * a11 - abs(a[0, 1]) ** 2
        if a00 <= 0.0 or det <= 0.0:
            return None
        return math.log(det)
    ev = np.linalg.eigvalsh(a)
    if ev[0] <= 0.0:
        return None
    return float(np.sum(np.log(ev)))


def _inv(a):
    if a.shape == (2, 2):
        det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
        return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det
    return np.linalg.inv(a)


def _kron(a, b):
    n = a.shape[0]
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(n * n, n * n)


def _zero_result(m, dim):
    return RepairResult(np.zeros((dim, dim)), 0.0, float(hermitian_eigvalsh(m)[0]), 0.0)


def minimal_repair(m, w, gap_rtol=GAP_RTOL, max_newton=200, method="auto"):
    """
    Solve the minimal CP repair problem.

    Parameters
    ----------
    m : array_like, complex Hermitian (2n, 2n)
        Candidate generator CP matrix.
    w : array_like, real symmetric positive definite (2n, 2n)
        Fisher weight.
    gap_rtol : float
        Target ``gap <= gap_rtol * (1 + cost)`` for the barrier solver.
    method : {"auto", "exact", "barrier"}
        ``auto`` uses the exact one-mode solution for 2x2 problems.

    Returns
    -------
    RepairResult
        ``delta_d`` is exactly zero when ``m`` is already PSD.
    """
    m, w = _check_problem(m, w)
    dim = m.shape[0]
    lam_min = float(hermitian_eigvalsh(m)[0])
    if lam_min >= -PSD_TOL:
        return _zero_result(m, dim)
    if method not in ("auto", "exact", "barrier"):
        raise InvalidInputError(f"unknown repair method {method!r}")
    if method == "exact" or (method == "auto" and dim == 2):
        if dim != 2:
            raise InvalidInputError("the exact solver handles one-mode problems only")
        return _one_mode_repair(m, w)

    basis = _sym_basis(dim)
    bmat = basis.reshape(len(basis), -1).T  # columns are vec(E_k)
    c_lin = bmat.T @ w.reshape(-1)
    nu_barrier = 2.0 * dim  # degree of the two log-det barriers

    def unpack(x):
        return (bmat @ x).reshape(dim, dim)

    def objective(x, t):
        dd = unpack(x)
        l1 = _logdet_pd(dd)
        if l1 is None:
            return math.inf
        l2 = _logdet_pd(m + dd)
        if l2 is None:
            return math.inf
        return float(c_lin @ x) - t * (l1 + l2)

    # Strictly feasible start dD = c*1; initial t balances cost and barrier gradients.
    c0 = -lam_min + 1.0
    x = c0 * (bmat.T @ np.eye(dim).reshape(-1) > 0).astype(float)
    t = max(float(np.trace(w)) * c0 / nu_barrier, 1e-3)

    iterations = 0
    best_dual = -math.inf
    while True:
        fx = objective(x, t)
        for _ in range(max_newton):
            dd = unpack(x)
            p = _inv(dd)
            q = _inv(m + dd)
            grad = c_lin - t * (bmat.T @ (p.reshape(-1) + q.real.reshape(-1)))
            hess = t * (bmat.T @ (_kron(p, p) + _kron(q.T, q).real) @ bmat)
            step = -np.linalg.solve(hess, grad)
            # Squared Newton decrement; f - min f is about half of it.
            dec2 = float(-grad @ step)
            iterations += 1
            if dec2 < 1e-13:
                break
            alpha = 1.0
            while alpha > 1e-12:
                trial = x + alpha * step
                f_trial = objective(trial, t)
                if f_trial <= fx - 0.25 * alpha * dec2:
                    break
                alpha *= 0.5
            x, fx = trial, f_trial
        dd = unpack(x)
        cost = float(c_lin @ x)
        best_dual = max(best_dual, _dual_bound(m, w, t * _inv(m + dd)), _slackness_dual(m, w, dd))
        if cost - best_dual <= gap_rtol * (1.0 + abs(cost)) or nu_barrier * t <= 1e-3 * gap_rtol:
            break
        t *= T_SHRINK

    dd = unpack(x)
    dd = 0.5 * (dd + dd.T)
    cost = float(np.trace(dd @ w))
    margin = float(hermitian_eigvalsh(m + dd)[0])
    return RepairResult(dd, cost, margin, max(0.0, cost - best_dual), iterations)


def _one_mode_repair(m, w):
    r = m.real
    b = float(m[0, 1].imag)
    det_w = w[0, 0] * w[1, 1] - w[0, 1] ** 2
    w_inv = np.array([[w[1, 1], -w[0, 1]], [-w[0, 1], w[0, 0]]]) / det_w
    c_full = abs(b) * math.sqrt(det_w) * w_inv
    dd = c_full - r
    if hermitian_eigvalsh(dd)[0] < 0.0:
        # Rank one: det(R + a u u^T) = det R + a u^T adj(R) u, so the cost
        # a u^T W u is (b^2 - det R) u^T W u / u^T adj(R) u.
        adj = np.array([[r[1, 1], -r[0, 1]], [-r[0, 1], r[0, 0]]])
        ell = np.linalg.cholesky(w)
        ell_inv = np.linalg.inv(ell)
        mu, vecs = np.linalg.eigh(ell_inv @ adj @ ell_inv.T)
        u = ell_inv.T @ vecs[:, -1]
        det_r = r[0, 0] * r[1, 1] - r[0, 1] ** 2
        alpha = (b * b - det_r) / float(u @ adj @ u)
        dd = max(alpha, 0.0) * np.outer(u, u)
    dd = 0.5 * (dd + dd.T)
    cost = float(np.trace(dd @ w))
    h = m + dd
    ev, vecs = np.linalg.eigh(h)
    v = vecs[:, :1]
    dual = _dual_bound(m, w, v @ v.conj().T)
    return RepairResult(dd, cost, float(ev[0]), max(0.0, cost - dual), 0)


def _slackness_dual(m, w, dd, rtol=1e-6):
    """
    Dual bound fitted to complementary slackness at a near-optimal ``dD``.

    The optimal dual lives on the near-null space ``V`` of ``M + dD`` and
    ``W - Re(Z)`` vanishes on the range of ``dD``. ``Z = V Y V^H`` is fitted
    to the latter by least squares over Hermitian ``Y``, projected onto
    ``Y >= 0`` and handed to :func:`_dual_bound` for the feasibility rescale.
    """
    e, vecs = np.linalg.eigh(m + dd)
    v = vecs[:, e < rtol * max(1.0, float(np.abs(e).max()))]
    ed, ud = np.linalg.eigh(dd)
    rng = ud[:, ed > rtol * max(1.0, float(ed.max()))]
    k = v.shape[1]
    if k == 0 or rng.shape[1] == 0:
        return 0.0
    basis = []
    for i in range(k):
        for j in range(i, k):
            e_ij = np.zeros((k, k), dtype=complex)
            e_ij[i, j] = e_ij[j, i] = 1.0
            basis.append(e_ij)
            if i != j:
                e_ij = np.zeros((k, k), dtype=complex)
                e_ij[i, j], e_ij[j, i] = 1j, -1j
                basis.append(e_ij)
    cols = [(rng.T @ (v @ b @ v.conj().T).real).ravel() for b in basis]
    y, *_ = np.linalg.lstsq(np.array(cols).T, (rng.T @ w).ravel(), rcond=None)
    ymat = sum(c * b for c, b in zip(y, basis))
    mu, q = np.linalg.eigh(0.5 * (ymat + ymat.conj().T))
    ymat = (q * np.clip(mu, 0.0, None)) @ q.conj().T
    return _dual_bound(m, w, v @ ymat @ v.conj().T)


def _dual_bound(m, w, z2):
    """
    Lower bound on the optimum from a candidate dual matrix.

    Any Hermitian ``Z >= 0`` with ``Re(Z) <= W`` gives
    ``tr(dD W) >= -Re tr(Z M)`` for every feasible ``dD``. The candidate's
    eigenvectors are kept and its spectrum re-fitted: the whole matrix is
    scaled onto the feasible boundary, and so is its leading rank-one part
    (the typical optimal dual when ``M`` has one negative eigenvalue).
    """
    z2 = 0.5 * (z2 + z2.conj().T)
    mu, vecs = np.linalg.eigh(z2)
    mu = np.clip(mu, 0.0, None)
    w_chol_inv = np.linalg.inv(np.linalg.cholesky(w))

    def scaled_value(z):
        rz = w_chol_inv @ z.real @ w_chol_inv.T
        top = float(np.linalg.eigvalsh(0.5 * (rz + rz.T))[-1])
        obj = -float(np.trace(z @ m).real)
        if top <= 0.0 or obj <= 0.0:
            return 0.0
        return obj / top

    full = (vecs * mu) @ vecs.conj().T
    v = vecs[:, -1:]
    return max(scaled_value(full), scaled_value(v @ v.conj().T), 0.0)


def isotropic_repair_closed_form(m, w=None, tol=1e-10):
    """
    Closed-form repair for one-mode ``M = a*1 + b*(i sigma)`` with isotropic weight.

    The optimum is ``max(0, |b| - a) * 1``: for ``A = diag(a1, a2)`` the matrix
    ``A + b i sigma`` is PSD iff ``a1 a2 >= b^2`` (and a1, a2 >= 0), and by
    AM-GM the trace is minimised by ``a1 = a2 = |b|``.

    Raises
    ------
    FastPathError
        If ``M`` is not of that form to ``tol`` or ``w`` is not isotropic.
    """
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        raise FastPathError("closed form applies to one-mode problems only")
    isig = 1j * symplectic_form(1)
    a = float(np.trace(m).real) / 2.0
    b = float(np.trace(m @ isig.conj().T).real) / 2.0
    residual = np.max(np.abs(m - a * np.eye(2) - b * isig))
    if residual > tol:
        raise FastPathError(f"M is not of the form a*1 + b*i*sigma (residual {residual:.3g})")
    if w is None:
        w = np.eye(2)
    w = np.asarray(w, dtype=float)
    w_iso = float(np.trace(w)) / 2.0
    if np.max(np.abs(w - w_iso * np.eye(2))) > tol:
        raise FastPathError("weight is not isotropic")
    d = max(0.0, abs(b) - a)
    dd = d * np.eye(2)
    return RepairResult(dd, 2.0 * d * w_iso, float(hermitian_eigvalsh(m + dd)[0]), 0.0)


def brute_force_repair_oracle(m, w, grid_resolution=1e-5, points=33, bisections=50):
    """
    Grid search over ``dD = [[d1, d3], [d3, d2]]`` for one-mode problems.

    Independent of the solver above: it only uses feasibility tests by the
    2x2 eigenvalue formula. For each ``(d1, d3)`` on a grid the smallest
    feasible ``d2`` is found by bisection (adding to ``d2`` adds a PSD term, so
    feasibility is monotone in it). The resulting cost is convex in
    ``(d1, d3)``, and the grid is zoomed onto the best point, halving its width
    per level, until the cell size drops below ``grid_resolution``.

    The first box comes from the feasible point ``c*1`` with
    ``c = -lambda_min(M)``: any better ``dD`` has
    ``tr(dD) <= c tr(W) / lambda_min(W)``.

    Returns
    -------
    RepairResult
        ``optimality_gap`` is the final cell size times ``sum |W_ij|``, the
        cost change across one cell.
    """
    m, w = _check_problem(m, w)
    if m.shape != (2, 2):
        raise InvalidInputError("the brute-force oracle handles one-mode problems only")
    lam_min = float(hermitian_eigvalsh(m)[0])
    if lam_min >= -PSD_TOL:
        return _zero_result(m, 2)

    c = -lam_min
    span = c * float(np.trace(w)) / float(np.linalg.eigvalsh(w)[0])

    def feasible(d1, d2, d3):
        dd = np.empty(d1.shape + (2, 2))
        dd[..., 0, 0], dd[..., 1, 1], dd[..., 0, 1], dd[..., 1, 0] = d1, d2, d3, d3
        return (eigvalsh_2x2(dd)[..., 0] >= 0.0) & (eigvalsh_2x2(m + dd)[..., 0] >= 0.0)

    def min_d2(d1, d3):
        lo = np.zeros_like(d1)
        hi = np.full_like(d1, span)
        ok = feasible(d1, hi, d3)
        for _ in range(bisections):
            mid = 0.5 * (lo + hi)
            good = feasible(d1, mid, d3)
            hi = np.where(good, mid, hi)
            lo = np.where(good, lo, mid)
        return np.where(ok, hi, np.inf)

    lo = np.array([0.0, -0.5 * span])
    hi = np.array([span, 0.5 * span])
    best = np.array([c, c, 0.0])
    best_cost = c * float(np.trace(w))
    while True:
        d1, d3 = (g.reshape(-1) for g in np.meshgrid(
            np.linspace(lo[0], hi[0], points), np.linspace(lo[1], hi[1], points), indexing="ij"))
        d2 = min_d2(d1, d3)
        cost = d1 * w[0, 0] + d2 * w[1, 1] + 2.0 * d3 * w[0, 1]
        k = int(np.argmin(cost))
        if cost[k] < best_cost:
            best_cost, best = float(cost[k]), np.array([d1[k], d2[k], d3[k]])
        cell = float(np.max((hi - lo) / (points - 1)))
        if cell <= grid_resolution:
            break
        half = 0.25 * (points - 1) * cell
        lo = np.array([max(best[0] - half, 0.0), best[2] - half])
        hi = np.array([best[0] + half, best[2] + half])

    dd = np.array([[best[0], best[2]], [best[2], best[1]]])
    margin = float(hermitian_eigvalsh(m + dd)[0])
    return RepairResult(dd, float(np.trace(dd @ w)), margin, cell * float(np.abs(w).sum()))
