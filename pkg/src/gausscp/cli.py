"""
Command-line experiment runner.

Subcommands ``phase-diagram``, ``witness``, ``repair`` and ``noise-floor``
write CSV or JSON into an output directory (``--out``, else ``$GAUSSCP_OUT``,
else the working directory) together with a ``<name>.meta.json`` sidecar that
records the configuration, package version and tolerances.

Exit codes: 0 success, 1 analysis violation (an asserted inequality or CP
check failed), 2 usage or I/O error, 3 run aborted by a physics precondition
(for example a trajectory approaching purity).
"""

import argparse
import configparser
from concurrent.futures import ProcessPoolExecutor
import csv
from dataclasses import asdict, dataclass, field, replace
import json
import math
import os
from pathlib import Path
import sys

import numpy as np

from . import __version__
from .exceptions import GaussCPError, NearPurityError
from .gaussian import SqueezedThermalParams, squeezed_thermal_cov
from .generator import (
    GaussianChannel,
    attenuator,
    bayes_cp_matrix,
    bayes_reverse_generator,
    hhw_matrix,
    infinitesimal_witness,
    nogo_lambda_min,
    tmsv_schur_witness,
)
from .geometry import bkm_displacement_metric
from .repair import GAP_RTOL, PSD_TOL, minimal_repair
from .trajectory import (
    INEQUALITY_TOL,
    TrajectoryConfig,
    noise_floor_row,
    reverse_decode,
)

EXIT_OK, EXIT_VIOLATION, EXIT_IO, EXIT_ABORT = 0, 1, 2, 3
OUT_ENV = "GAUSSCP_OUT"

PHASE_COLUMNS = ("nu", "r", "lambda_min", "repair_trace")
BOUNDARY_COLUMNS = ("r", "nu")
NOISE_FLOOR_COLUMNS = ("S", "neg2lnF_wc", "bound", "defect_flag")
REPAIR_COLUMNS = ("nu", "r", "gamma", "lambda_min", "cost", "repair_trace", "feasibility_margin", "optimality_gap")

CROSS_CHECK_TOL = 1e-10
WITNESS_TOL = 1e-12
TOLERANCES = {
    "psd": PSD_TOL,
    "repair_gap_rtol": GAP_RTOL,
    "inequality": INEQUALITY_TOL,
    "lambda_cross_check": CROSS_CHECK_TOL,
    "witness": WITNESS_TOL,
}

DEFAULT_CLASS = ((1.5, 0.8), (2.0, 0.5), (1.2, 1.0))


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one CLI run; unused fields are ignored by a given command."""

    command: str
    gamma: float = 1.0
    nu_grid: tuple = tuple(np.linspace(1.0, 4.0, 101))
    r_grid: tuple = tuple(np.linspace(0.0, 1.5, 101))
    s_grid: tuple = (0.25, 0.5, 1.0, 2.0)
    steps: int = 256
    class_params: tuple = DEFAULT_CLASS
    weight_source: str = "actual"
    repair_weight: str = "reference"
    mu_grid: tuple = (1.1, 1.5, 2.0, 5.0, 20.0)
    dt: float = 1e-6
    nu: float = 1.2
    r: float = 0.6
    weight: str = "identity"
    out_dir: str = "."
    fmt: str = "csv"
    plot_script: bool = False
    workers: int = 1
    mis_signed_bound: bool = field(default=False, repr=False)


# ---------------------------------------------------------------- computations


def run_phase_diagram(cfg):
    """
    Rows ``(nu, r, lambda_min, repair_trace)`` in row-major order (``nu`` outer)
    and the analytic boundary ``nu = cosh(2r)`` restricted to the ``nu`` range.

    Returns
    -------
    rows, boundary, max_cross_check
        ``max_cross_check`` is the largest gap between the eigensolver and the
        closed-form ``lambda_min``.
    """
    rows = []
    worst = 0.0
    for nu in cfg.nu_grid:
        for r in cfg.r_grid:
            p = SqueezedThermalParams(nu, r)
            cp = bayes_cp_matrix(cfg.gamma, p)
            lam = cp.lambda_min
            worst = max(worst, abs(lam - nogo_lambda_min(cfg.gamma, p)))
            trace = minimal_repair(cp.M, np.eye(2)).trace if lam < 0.0 else 0.0
            rows.append((float(nu), float(r), lam, trace))
    nu_lo, nu_hi = min(cfg.nu_grid), max(cfg.nu_grid)
    boundary = [(float(r), math.cosh(2.0 * r)) for r in cfg.r_grid if nu_lo <= math.cosh(2.0 * r) <= nu_hi]
    return rows, boundary, worst


def sign_change_locus(rows, nu_grid, r_grid):
    """For each ``r``, the first ``nu`` cell ``(nu_k, nu_{k+1})`` across which ``lambda_min`` turns non-negative."""
    lam = np.array([row[2] for row in rows]).reshape(len(nu_grid), len(r_grid))
    locus = {}
    for j, r in enumerate(r_grid):
        col = lam[:, j]
        for k in range(len(nu_grid) - 1):
            if col[k] < 0.0 <= col[k + 1]:
                locus[float(r)] = (float(nu_grid[k]), float(nu_grid[k + 1]))
                break
    return locus


def _hermitian_json(h):
    return {"re": np.real(h).tolist(), "im": np.imag(h).tolist()}


def _channel_witness(name, channel, mu_grid):
    mats = [tmsv_schur_witness(channel, mu) for mu in mu_grid]
    closed = hhw_matrix(channel)
    spread = max(float(np.max(np.abs(a - b))) for a in mats for b in mats)
    closed_dev = max(float(np.max(np.abs(a - closed))) for a in mats)
    return {
        "channel": name,
        "X": channel.X.tolist(),
        "Y": channel.Y.tolist(),
        "S_mu": {f"{mu:g}": _hermitian_json(s) for mu, s in zip(mu_grid, mats)},
        "closed_form": _hermitian_json(closed),
        "max_mu_deviation": spread,
        "max_closed_form_deviation": closed_dev,
        "min_eigenvalue": float(np.linalg.eigvalsh(closed)[0]),
    }


def run_witness(cfg):
    """
    TMSV witness report for the identity channel, an attenuator step and the
    Bayes step at ``(cfg.nu, cfg.r)``, each over ``cfg.mu_grid``.
    """
    fwd = attenuator(cfg.gamma)
    p = SqueezedThermalParams(cfg.nu, cfg.r)
    bayes = bayes_reverse_generator(fwd, squeezed_thermal_cov(p))
    channels = [
        ("identity", GaussianChannel(np.eye(2), np.zeros((2, 2)))),
        ("attenuator_step", fwd.step_channel(cfg.dt)),
        ("bayes_step", bayes.step_channel(cfg.dt)),
    ]
    entries = [_channel_witness(name, ch, cfg.mu_grid) for name, ch in channels]
    coarse, richardson = infinitesimal_witness(bayes, cfg.dt)
    closed = nogo_lambda_min(cfg.gamma, p)
    return {
        "mu_grid": list(cfg.mu_grid),
        "dt": cfg.dt,
        "channels": entries,
        "bayes_infinitesimal": {
            "nu": p.nu,
            "r": p.r,
            "rescaled_min_eig": coarse,
            "richardson": richardson,
            "nogo_lambda_min": closed,
            "abs_error": abs(coarse - closed),
        },
    }


def run_repair(cfg):
    """Pointwise minimal repair of the Bayes CP matrix at ``(cfg.nu, cfg.r)``."""
    p = SqueezedThermalParams(cfg.nu, cfg.r)
    cp = bayes_cp_matrix(cfg.gamma, p)
    gamma_ref = squeezed_thermal_cov(p)
    w = np.eye(2) if cfg.weight == "identity" else bkm_displacement_metric(gamma_ref)
    res = minimal_repair(cp.M, w)
    row = (p.nu, p.r, cfg.gamma, cp.lambda_min, res.cost, res.trace, res.feasibility_margin, res.optimality_gap)
    return row, res


def _decode(args):
    return reverse_decode(TrajectoryConfig(**args))


def run_noise_floor(cfg):
    """
    Noise-floor rows over ``cfg.s_grid`` plus per-member detail.

    Class members and depths are independent trajectories; with
    ``cfg.workers > 1`` they run in a process pool and are reassembled in grid
    order.
    """
    members = [SqueezedThermalParams(*p) for p in cfg.class_params]
    jobs = []
    for s in cfg.s_grid:
        if s > 0.0:
            for p in members:
                jobs.append(dict(gamma=cfg.gamma, depth=s, steps=cfg.steps, initial=p,
                                 weight_source=cfg.weight_source, repair_weight=cfg.repair_weight))
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_decode, jobs))
    else:
        records = [_decode(j) for j in jobs]

    rows, detail = [], []
    it = iter(records)
    for s in cfg.s_grid:
        if s == 0.0:
            flag = any(nogo_lambda_min(cfg.gamma, p) < 0.0 for p in members)
            rows.append((0.0, 0.0, 0.0, flag))
            continue
        recs = [next(it) for _ in members]
        row = noise_floor_row(recs, s)
        rows.append((s, row.neg2log_f_wc, row.bound, row.defect_flag))
        for rec in recs:
            detail.append({
                "S": s,
                "nu": rec.config.initial.nu,
                "r": rec.config.initial.r,
                "i_dec": rec.i_dec,
                "i_dec_trapezoid": rec.i_dec_trapezoid,
                "neg2lnF": rec.neg2log_f,
                "nu_min_observed": rec.nu_min_observed,
                "member_bound": rec.bound,
                "has_defect": rec.has_defect,
                "kink_depths": list(rec.kink_depths),
            })
        detail.append({
            "S": s,
            "fidelity_argmax": asdict(row.fidelity_argmax),
            "i_dec_argmax": asdict(row.i_dec_argmax),
            "class_nu_min": row.nu_min,
        })
    return rows, detail


def noise_floor_violations(rows, tol=INEQUALITY_TOL):
    """Rows with ``neg2lnF_wc < bound - tol``."""
    return [row for row in rows if row[1] < row[2] - tol]


# --------------------------------------------------------------------- output


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_csv_value(v) for v in row])


def _csv_value(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, float):
        return repr(v)
    return v


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _sidecar(cfg, out, name, outputs, summary):
    meta = {
        "command": cfg.command,
        "version": __version__,
        "config": {k: v for k, v in asdict(cfg).items() if k != "mis_signed_bound"},
        "tolerances": TOLERANCES,
        "outputs": outputs,
        "summary": summary,
    }
    _write_json(out / f"{name}.meta.json", meta)


def _table(cfg, out, name, columns, rows):
    if cfg.fmt == "csv":
        path = out / f"{name}.csv"
        _write_csv(path, columns, rows)
    else:
        path = out / f"{name}.json"
        _write_json(path, [dict(zip(columns, row)) for row in rows])
    return path.name


PLOT_TEMPLATES = {
    "phase_diagram": '''"""Plot lambda_min over (nu, r) with the analytic threshold."""
import csv
import matplotlib.pyplot as plt
import numpy as np

with open("phase_diagram.csv") as fh:
    rows = [tuple(map(float, row)) for row in list(csv.reader(fh))[1:]]
nu = np.unique([r[0] for r in rows])
r = np.unique([r[1] for r in rows])
lam = np.array([row[2] for row in rows]).reshape(len(nu), len(r))
fig, ax = plt.subplots()
im = ax.pcolormesh(nu, r, lam.T, cmap="RdBu", shading="auto")
ax.plot(np.cosh(2 * r), r, "k--", label="cosh(2r) = nu")
ax.set_xlim(nu[0], nu[-1])
ax.set_xlabel("nu")
ax.set_ylabel("r")
ax.legend()
fig.colorbar(im, label="lambda_min")
fig.savefig("phase_diagram.png", dpi=150)
''',
    "noise_floor": '''"""Plot worst-case infidelity against the noise-floor bound."""
import csv
import matplotlib.pyplot as plt

with open("noise_floor.csv") as fh:
    rows = [tuple(map(float, row)) for row in list(csv.reader(fh))[1:]]
s = [r[0] for r in rows]
fig, ax = plt.subplots()
ax.plot(s, [r[1] for r in rows], "o-", label="-2 ln F_wc")
ax.plot(s, [r[2] for r in rows], "s--", label="c_geom * I_dec_wc")
ax.set_xlabel("S")
ax.legend()
fig.savefig("noise_floor.png", dpi=150)
''',
}


def _plot_script(cfg, out, name):
    if not cfg.plot_script or name not in PLOT_TEMPLATES:
        return []
    path = out / f"plot_{name}.py"
    path.write_text(PLOT_TEMPLATES[name])
    return [path.name]


def _emit_phase_diagram(cfg, out):
    rows, boundary, worst = run_phase_diagram(cfg)
    files = [_table(cfg, out, "phase_diagram", PHASE_COLUMNS, rows)]
    files.append(_table(cfg, out, "phase_boundary", BOUNDARY_COLUMNS, boundary))
    files += _plot_script(cfg, out, "phase_diagram")
    ok = worst <= CROSS_CHECK_TOL
    _sidecar(cfg, out, "phase_diagram", files, {"max_lambda_cross_check": worst, "ok": ok})
    return ok, f"{len(rows)} grid points, eigensolver vs closed form max |diff| = {worst:.3g}"


def _emit_witness(cfg, out):
    report = run_witness(cfg)
    _write_json(out / "witness.json", report)
    dev = max(max(c["max_mu_deviation"], c["max_closed_form_deviation"]) for c in report["channels"])
    ok = dev <= WITNESS_TOL
    _sidecar(cfg, out, "witness", ["witness.json"], {"max_deviation": dev, "ok": ok})
    b = report["bayes_infinitesimal"]
    return ok, (f"max witness deviation {dev:.3g}; Bayes step rescaled min eig "
                f"{b['rescaled_min_eig']:.6g} vs closed form {b['nogo_lambda_min']:.6g}")


def _emit_repair(cfg, out):
    row, res = run_repair(cfg)
    if cfg.fmt == "csv":
        name = _table(cfg, out, "repair", REPAIR_COLUMNS, [row])
    else:
        name = "repair.json"
        _write_json(out / name, {**dict(zip(REPAIR_COLUMNS, row)), "delta_d": res.delta_d})
    ok = res.feasibility_margin >= -PSD_TOL
    _sidecar(cfg, out, "repair", [name], {"ok": ok, "delta_d": res.delta_d})
    return ok, f"cost {res.cost:.10g}, trace {res.trace:.10g}, margin {res.feasibility_margin:.3g}"


def _emit_noise_floor(cfg, out):
    rows, detail = run_noise_floor(cfg)
    files = [_table(cfg, out, "noise_floor", NOISE_FLOOR_COLUMNS, rows)]
    _write_json(out / "noise_floor_members.json", detail)
    files.append("noise_floor_members.json")
    files += _plot_script(cfg, out, "noise_floor")
    bad = noise_floor_violations(rows, -INEQUALITY_TOL if cfg.mis_signed_bound else INEQUALITY_TOL)
    _sidecar(cfg, out, "noise_floor", files, {"violations": [row[0] for row in bad], "ok": not bad})
    lines = [f"S={row[0]:g}: -2lnF_wc={row[1]:.6g} bound={row[2]:.6g} defect={bool(row[3])}" for row in rows]
    if bad:
        lines.append(f"noise-floor inequality violated at S = {[row[0] for row in bad]}")
    return not bad, "\n".join(lines)


EMITTERS = {
    "phase-diagram": _emit_phase_diagram,
    "witness": _emit_witness,
    "repair": _emit_repair,
    "noise-floor": _emit_noise_floor,
}


# -------------------------------------------------------------------- parsing


def parse_grid(text):
    """``"a:b:n"`` (inclusive linspace) or a comma list; must be nonempty and increasing."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, n = text.split(":")
            values = tuple(float(v) for v in np.linspace(float(a), float(b), int(n)))
        else:
            values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}; use a:b:n or v1,v2,...") from None
    if not values:
        raise argparse.ArgumentTypeError("grid must be nonempty")
    if any(y <= x for x, y in zip(values, values[1:])):
        raise argparse.ArgumentTypeError(f"grid must be strictly increasing: {text!r}")
    return values


def parse_class(text):
    """``"nu:r,nu:r,..."`` into ``((nu, r), ...)``."""
    out = []
    try:
        for item in str(text).split(","):
            nu, r = item.split(":")
            out.append((float(nu), float(r)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad class {text!r}; use nu:r,nu:r,...") from None
    if not out:
        raise argparse.ArgumentTypeError("class must be nonempty")
    return tuple(out)


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", type=float, default=1.0, help="attenuation rate (default 1)")
    common.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--plot-script", action="store_true", help="also write a matplotlib script for the CSV")
    common.add_argument("--config", default=None, help="INI file with one section per subcommand; flags win")
    common.add_argument("--workers", type=_positive_int, default=1, help="process pool size")

    parser = argparse.ArgumentParser(prog="gausscp", description="Gaussian CP obstruction experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    ph = sub.add_parser("phase-diagram", parents=[common], help="lambda_min and repair size over (nu, r)")
    ph.add_argument("--nu-grid", type=parse_grid, default="1:4:101")
    ph.add_argument("--r-grid", type=parse_grid, default="0:1.5:101")

    wi = sub.add_parser("witness", parents=[common], help="TMSV Schur-complement witness report")
    wi.add_argument("--mu-grid", type=parse_grid, default="1.1,1.5,2,5,20")
    wi.add_argument("--dt", type=float, default=1e-6)
    wi.add_argument("--nu", type=float, default=1.2)
    wi.add_argument("--r", type=float, default=0.6)

    rp = sub.add_parser("repair", parents=[common], help="minimal CP repair at one reference state")
    rp.add_argument("--nu", type=float, default=1.2)
    rp.add_argument("--r", type=float, default=0.6)
    rp.add_argument("--weight", choices=("identity", "bkm"), default="identity")

    nf = sub.add_parser("noise-floor", parents=[common], help="worst-case infidelity vs noise-floor bound")
    nf.add_argument("--s-grid", type=parse_grid, default="0.25,0.5,1,2")
    nf.add_argument("--steps", type=int, default=256)
    nf.add_argument("--class", dest="class_params", type=parse_class, default="1.5:0.8,2:0.5,1.2:1.0")
    nf.add_argument("--weight-source", choices=("reference", "actual"), default="actual")
    nf.add_argument("--repair-weight", choices=("reference", "actual"), default="reference")
    # Harness self-test: checks against bound + tol instead of bound - tol, so even
    # an all-zero table must be reported as a violation.
    nf.add_argument("--mis-signed-bound", action="store_true", help=argparse.SUPPRESS)
    return parser, sub


def _config_defaults(path, command, subparser):
    """Defaults for ``command`` from an INI file; keys may use dashes or underscores."""
    ini = configparser.ConfigParser()
    if not ini.read(path):
        raise OSError(f"cannot read config file {path}")
    if not ini.has_section(command):
        return {}
    known = {a.dest: a for a in subparser._actions}
    aliases = {"class": "class_params", "format": "fmt"}
    out = {}
    for key, value in ini.items(command):
        dest = aliases.get(key.replace("-", "_"), key.replace("-", "_"))
        if dest not in known:
            raise argparse.ArgumentTypeError(f"unknown key {key!r} in section [{command}]")
        action = known[dest]
        if isinstance(action, (argparse._StoreTrueAction,)):
            out[dest] = ini.getboolean(command, key)
        else:
            # argparse applies ``type`` to string defaults.
            out[dest] = value
    return out


def parse_args(argv=None):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        defaults = _config_defaults(args.config, args.command, sub.choices[args.command])
        sub.choices[args.command].set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def config_from_args(args):
    out = args.out or os.environ.get(OUT_ENV) or "."
    fields = {k: v for k, v in vars(args).items() if k in ExperimentConfig.__dataclass_fields__}
    return replace(ExperimentConfig(command=args.command), out_dir=str(out), **fields)


def main(argv=None):
    try:
        args = parse_args(argv)
        cfg = config_from_args(args)
    except (OSError, argparse.ArgumentTypeError, configparser.Error) as exc:
        print(f"gausscp: error: {exc}", file=sys.stderr)
        return EXIT_IO
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        ok, message = EMITTERS[cfg.command](cfg, out)
    except NearPurityError as exc:
        where = f" (member {exc.member}, depth {exc.depth})" if exc.member is not None else ""
        print(f"gausscp: aborted: {exc}{where}", file=sys.stderr)
        return EXIT_ABORT
    except GaussCPError as exc:
        print(f"gausscp: aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except OSError as exc:
        print(f"gausscp: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    print(message)
    if not ok:
        print("gausscp: analysis violation", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK
