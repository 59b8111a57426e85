"""
Forward attenuation, repaired reverse decoding and the noise-floor check.

The forward process is the quantum-limited attenuator,
``d(gamma)/ds = -2g gamma + 2g 1``. Its reference path ``tau_s`` is what a
trained score model would know. The reverse decoder runs in the reversed clock
``u = S - s`` with

    K_rev(s) = -(K + D tau_s^{-1}),   D_rev(s) = D + dD*(s),

where ``dD*(s)`` is the minimal repair of the Bayes CP matrix at ``tau_s``.
Without repair this retraces ``tau`` exactly. Both the repair weight and the
entropy-rate increment ``tr(dD* J)/2`` use a BKM displacement metric ``J``,
taken at the reference ``tau_s`` or at the decoded state. ``repair_weight``
picks the state for the former (default ``"reference"``) and
``weight_source`` for the latter (default ``"actual"``).
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.integrate import trapezoid
from scipy.optimize import brentq

from .exceptions import InvalidInputError, NearPurityError
from .gaussian import (
    FidelityValue,
    SqueezedThermalParams,
    gaussian_fidelity,
    physicality_check,
    squeezed_thermal_cov,
    squeezed_thermal_params,
    symplectic_eigenvalues,
)
from .generator import attenuator, cp_matrix, nogo_lambda_min
from .geometry import bkm_displacement_metric, c_geom
from .linalg import hermitian_eigvalsh
from .repair import minimal_repair

WEIGHT_SOURCES = ("reference", "actual")
INEQUALITY_TOL = 1e-9
RANK_TOL = 1e-6


@dataclass(frozen=True)
class TrajectoryConfig:
    gamma: float = 1.0
    depth: float = 1.0
    steps: int = 256
    initial: SqueezedThermalParams = SqueezedThermalParams(1.2, 0.6)
    weight_source: str = "actual"
    nu_min_policy: float = 1.01
    repair_weight: str = "reference"

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidInputError(f"gamma must be > 0, got {self.gamma}")
        if not self.depth > 0:
            raise InvalidInputError(f"depth must be > 0, got {self.depth}")
        if int(self.steps) != self.steps or self.steps < 16:
            raise InvalidInputError(f"steps must be an integer >= 16, got {self.steps}")
        for name in ("weight_source", "repair_weight"):
            if getattr(self, name) not in WEIGHT_SOURCES:
                raise InvalidInputError(f"{name} must be one of {WEIGHT_SOURCES}")
        if not self.nu_min_policy > 1.0:
            raise InvalidInputError("nu_min_policy must be > 1")
        if not isinstance(self.initial, SqueezedThermalParams):
            object.__setattr__(self, "initial", SqueezedThermalParams(*self.initial))


@dataclass(frozen=True)
class TrajectorySample:
    s: float
    gamma_hat: np.ndarray
    tau: np.ndarray
    lambda_min: float
    delta_d: np.ndarray
    increment: float

    @property
    def defect(self):
        return self.lambda_min < 0.0


@dataclass(frozen=True)
class TrajectoryRecord:
    config: TrajectoryConfig
    samples: list = field(repr=False)
    i_dec: float
    endpoint_fidelity: FidelityValue
    nu_min_observed: float
    kink_depths: tuple = ()
    i_dec_trapezoid: float = math.nan

    @property
    def bound(self):
        return c_geom(self.nu_min_observed) * self.i_dec

    @property
    def neg2log_f(self):
        return self.endpoint_fidelity.neg2log

    @property
    def decoded(self):
        return self.samples[0].gamma_hat

    @property
    def has_defect(self):
        return any(smp.defect for smp in self.samples)


def forward_evolve(gamma0, gamma_rate, s):
    """Attenuator flow ``e^{-2gs} gamma0 + (1 - e^{-2gs}) 1``."""
    gamma0 = np.asarray(gamma0, dtype=float)
    if s < 0:
        raise InvalidInputError(f"depth must be >= 0, got {s}")
    decay = math.exp(-2.0 * gamma_rate * s)
    return decay * gamma0 + (1.0 - decay) * np.eye(gamma0.shape[0])


def debruijn_increment(delta_d, j):
    """Entropy-rate increment ``tr(dD J)/2`` of added diffusion ``dD >= 0``."""
    delta_d = np.asarray(delta_d, dtype=float)
    ev = np.linalg.eigvalsh(0.5 * (delta_d + delta_d.T))
    if ev.size and ev[0] < -1e-10:
        raise InvalidInputError(f"added diffusion must be PSD (min eigenvalue {ev[0]:.3g})")
    return max(0.0, 0.5 * float(np.trace(delta_d @ np.asarray(j, dtype=float))))


def lyapunov_rhs(k, d, gamma):
    return k @ gamma + gamma @ k.T + d


def rk4_step(f, u, y, h):
    """One classical Runge-Kutta step for ``y' = f(u, y)``."""
    k1 = f(u, y)
    k2 = f(u + 0.5 * h, y + 0.5 * h * k1)
    k3 = f(u + 0.5 * h, y + 0.5 * h * k2)
    k4 = f(u + h, y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _ReversePlan:
    """Reference path, Bayes generator and repair as functions of depth."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.gamma0 = squeezed_thermal_cov(cfg.initial)
        self.fwd = attenuator(cfg.gamma)
        self._cache = {}

    def tau(self, s):
        return forward_evolve(self.gamma0, self.cfg.gamma, s)

    def k_bayes(self, tau):
        return self.fwd.K + self.fwd.D @ np.linalg.inv(tau)

    def lambda_min(self, s):
        tau = self.tau(s)
        return float(hermitian_eigvalsh(cp_matrix(self.k_bayes(tau), self.fwd.D))[0])


    def repair(self, s, gamma_hat=None):
        """``(tau, K_bayes, M, lambda_min, dD*)`` at depth ``s``.

        The repair weight is the BKM metric of ``gamma_hat`` under
        ``repair_weight="actual"`` and of ``tau_s`` otherwise.
        """
        actual = self.cfg.repair_weight == "actual"
        key = (s, gamma_hat.tobytes()) if actual else s
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        tau = self.tau(s)
        kb = self.k_bayes(tau)
        m = cp_matrix(kb, self.fwd.D)
        lam = float(hermitian_eigvalsh(m)[0])
        if lam >= 0.0:
            dd = np.zeros_like(tau)
        else:
            state = gamma_hat if actual else tau
            dd = minimal_repair(m, self.weight(state, s)).delta_d
        out = (tau, kb, m, lam, dd)
        self._cache[key] = out
        return out

    def weight(self, gamma, s):
        try:
            return bkm_displacement_metric(gamma)
        except NearPurityError as exc:
            raise NearPurityError(str(exc), depth=s, member=self.cfg.initial) from None

    def increment(self, s, gamma_hat):
        tau, _, _, lam, dd = self.repair(s, gamma_hat)
        if lam >= 0.0:
            return 0.0
        state = gamma_hat if self.cfg.weight_source == "actual" else tau
        return debruijn_increment(dd, self.weight(state, s))

    def signature(self, s, gamma_hat=None):
        """Active-set data of the repair; the right-hand side is smooth while it is constant."""
        _, _, m, lam, dd = self.repair(s, gamma_hat)
        if lam >= 0.0:
            return (False,)
        scale = float(np.max(np.abs(dd)))
        if scale == 0.0:
            # Inside the solver's PSD tolerance: same smooth branch as no defect.
            return (False,)
        return (
            True,
            int(np.sum(np.linalg.eigvalsh(dd) > RANK_TOL * scale)),
            int(np.sum(hermitian_eigvalsh(m + dd) > RANK_TOL * max(scale, 1.0))),
        )

    def rhs(self, s, y):
        """Right-hand side of the augmented reverse state ``(gamma_hat, I)`` in the clock ``u``."""
        gamma = y[:-1].reshape(self.gamma0.shape)
        _, kb, _, _, dd = self.repair(s, gamma)
        dgamma = lyapunov_rhs(-kb, self.fwd.D + dd, gamma)
        return np.append(dgamma.reshape(-1), self.increment(s, gamma))




def _split_points(plan, lo, hi, state_at):
    """Depths in ``(lo, hi)`` where the repair switches on or changes its active set.

    ``state_at(s)`` predicts the decoded covariance inside the step; it only
    matters when the repair weight follows the decoded state.
    """
    a, b = plan.lambda_min(lo), plan.lambda_min(hi)
    cuts = []
    if (a < 0.0) != (b < 0.0) and a != 0.0 and b != 0.0:
        cuts.append(brentq(plan.lambda_min, lo, hi, xtol=1e-15, rtol=1e-15))
    edges = [lo] + cuts + [hi]
    found = list(cuts)

    def sig(s):
        return plan.signature(s, state_at(s))

    for left, right in zip(edges[:-1], edges[1:]):
        # Inside a defect segment only rank changes can remain.
        probe_l = left + 1e-8 * (right - left) if left in cuts else left
        probe_r = right - 1e-8 * (right - left) if right in cuts else right
        if sig(probe_l) != sig(probe_r):
            k = _bisect(sig, probe_l, probe_r)
            # Changes hugging a root or grid point come from the solver's PSD tolerance.
            if all(abs(k - c) > 1e-6 * (hi - lo) for c in [lo, hi] + cuts):
                found.append(k)
    return sorted(found)


def _bisect(sig, lo, hi, xtol=1e-13):
    sig_lo = sig(lo)
    while hi - lo > xtol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if sig(mid) == sig_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def reverse_decode(cfg):
    """
    Run the forward reference and the repaired reverse decoder.

    The reverse ODE, augmented with ``dI/du = increment``, is integrated with
    RK4 on the fixed grid ``s_k = k S/steps``. The repair is only piecewise
    smooth in ``s``: it switches on where ``lambda_min`` crosses zero and can
    change rank inside the defect band. A step containing such a depth is
    split there, so every RK4 sub-step sees a smooth right-hand side.
    ``i_dec_trapezoid`` is the composite trapezoid of the sampled increments,
    kept as a low-order cross-check.

    Raises
    ------
    NearPurityError
        If a symplectic eigenvalue along the reference or repaired path drops to
        ``cfg.nu_min_policy`` or below; ``depth`` carries the offending ``s``.
    """
    plan = _ReversePlan(cfg)
    S, steps = float(cfg.depth), int(cfg.steps)
    h = S / steps
    depths = [S - j * h for j in range(steps)] + [0.0]

    y = np.append(plan.tau(S).reshape(-1), 0.0)
    states = [y]
    kinks = []
    for j in range(steps):
        s_hi, s_lo = depths[j], depths[j + 1]
        shape = plan.gamma0.shape

        def state_at(s, y0=y, s0=s_hi):
            if cfg.repair_weight != "actual":
                return None
            pred = rk4_step(lambda u, yy: plan.rhs(s0 - u, yy), 0.0, y0, s0 - s)
            return pred[:-1].reshape(shape)

        inner = _split_points(plan, s_lo, s_hi, state_at)
        kinks.extend(inner)
        cuts = [s_hi] + inner[::-1] + [s_lo]
        for a, b in zip(cuts[:-1], cuts[1:]):
            y = rk4_step(lambda u, yy, a=a: plan.rhs(a - u, yy), 0.0, y, a - b)
        g = y[:-1].reshape(plan.gamma0.shape)
        y = np.append((0.5 * (g + g.T)).reshape(-1), y[-1])
        states.append(y)

    samples = []
    nu_min = math.inf
    for s, yk in zip(reversed(depths), reversed(states)):
        g_hat = yk[:-1].reshape(plan.gamma0.shape)
        tau, _, _, lam, dd = plan.repair(s, g_hat)
        for name, g in (("reference", tau), ("decoded", g_hat)):
            nu = float(symplectic_eigenvalues(g)[-1])
            if nu <= cfg.nu_min_policy:
                raise NearPurityError(
                    f"{name} path reaches nu = {nu:.6g} <= {cfg.nu_min_policy} at s = {s:.6g}",
                    depth=s,
                    member=cfg.initial,
                )
            if name == "decoded":
                nu_min = min(nu_min, nu)
        if not physicality_check(g_hat)[0]:
            raise InvalidInputError(f"decoded covariance became unphysical at s = {s:.6g}")
        samples.append(TrajectorySample(s, g_hat, tau, lam, dd, plan.increment(s, g_hat)))

    i_dec = float(states[-1][-1])
    i_trap = float(trapezoid([smp.increment for smp in samples], [smp.s for smp in samples]))
    fid = gaussian_fidelity(plan.gamma0, samples[0].gamma_hat)
    return TrajectoryRecord(cfg, samples, i_dec, fid, nu_min, tuple(sorted(kinks)), i_trap)


def worst_case_irreversibility(class_params, gamma_rate, depth, steps, **kwargs):
    """
    Maximum ``I_dec`` over a finite class of initial states.

    Returns
    -------
    (float, SqueezedThermalParams, list of TrajectoryRecord)
        The worst-case value, its maximiser and every member's record.
    """
    records = run_class(class_params, gamma_rate, depth, steps, **kwargs)
    best = max(range(len(records)), key=lambda i: records[i].i_dec)
    return records[best].i_dec, records[best].config.initial, records


def run_class(class_params, gamma_rate, depth, steps, **kwargs):
    members = [p if isinstance(p, SqueezedThermalParams) else SqueezedThermalParams(*p) for p in class_params]
    if not members:
        raise InvalidInputError("class of initial states must be nonempty")
    return [
        reverse_decode(TrajectoryConfig(gamma=gamma_rate, depth=depth, steps=steps, initial=p, **kwargs))
        for p in members
    ]


@dataclass(frozen=True)
class NoiseFloorRow:
    depth: float
    neg2log_f_wc: float
    bound: float
    defect_flag: bool
    i_dec_wc: float
    nu_min: float
    fidelity_argmax: SqueezedThermalParams = None
    i_dec_argmax: SqueezedThermalParams = None

    @property
    def holds(self):
        return self.neg2log_f_wc >= self.bound - INEQUALITY_TOL


def noise_floor_row(records, depth):
    """Summarise the class records at one depth.

    ``nu_min`` is the smallest decoded symplectic eigenvalue over the whole
    class (the uniform purity gap), and the bound is ``c_geom(nu_min) I_dec_wc``.
    """
    by_f = max(records, key=lambda r: r.neg2log_f)
    by_i = max(records, key=lambda r: r.i_dec)
    nu_min = min(r.nu_min_observed for r in records)
    return NoiseFloorRow(
        depth=depth,
        neg2log_f_wc=by_f.neg2log_f,
        bound=c_geom(nu_min) * by_i.i_dec,
        defect_flag=any(r.has_defect for r in records),
        i_dec_wc=by_i.i_dec,
        nu_min=nu_min,
        fidelity_argmax=by_f.config.initial,
        i_dec_argmax=by_i.config.initial,
    )


def noise_floor_report(depths, class_params, gamma_rate=1.0, steps=256, **kwargs):
    """
    Worst-case infidelity against the noise-floor bound on a grid of depths.

    A depth of 0 yields the row ``(0, 0, 0, flag)`` where the flag reports a CP
    defect at the initial states themselves.
    """
    depths = [float(s) for s in depths]
    if any(b <= a for a, b in zip(depths, depths[1:])):
        raise InvalidInputError("depth grid must be strictly increasing")
    members = [p if isinstance(p, SqueezedThermalParams) else SqueezedThermalParams(*p) for p in class_params]
    rows = []
    for s in depths:
        if s == 0.0:
            flag = any(nogo_lambda_min(gamma_rate, p) < 0.0 for p in members)
            rows.append(NoiseFloorRow(0.0, 0.0, 0.0, flag, 0.0, math.nan))
            continue
        records = run_class(members, gamma_rate, s, steps, **kwargs)
        rows.append(noise_floor_row(records, s))
    return rows


def williamson_defect(tau):
    """``cosh(2 r) > nu`` for the Williamson data of a one-mode reference."""
    nu, r = squeezed_thermal_params(tau)
    return math.cosh(2.0 * r) > nu
