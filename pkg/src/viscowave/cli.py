"""Command-line driver: single runs, refinement studies, energy traces, and
the pairing diagnostic.

Modes
-----
solve                 one run; prints a summary, optionally writes field
                      snapshots sampled at element centers.
convergence           mesh refinement at fixed time step; one CSV row per N.
temporal-convergence  time refinement with the mesh coupled as N = M^2/4.
stability             energy trace of one example for each requested dt.
infsup                discrete pairing constants on small n-by-n meshes.

Settings come from flags, overriding an optional ``key=value`` config file
(``--config``); a ``--preset`` fills in the published study configurations.
Study CSV columns are ``N,M,dt,E_a_sigma,order_sigma,E_c_v,order_v``.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import convergence_orders, infsup_constants
from .fespace import FAMILIES, NEDELEC, StressSpace, VelocitySpace
from .linalg import ConvergenceError, SingularBlockError
from .mesh import StructuredMesh
from .timestepper import run

__all__ = ["RunConfig", "PRESETS", "main", "convergence_study", "temporal_study"]

CSV_HEADER = ["N", "M", "dt", "E_a_sigma", "order_sigma", "E_c_v", "order_v"]

PRESETS = {
    "table1": dict(mode="convergence", example=1, nx="4,8,16,32,64", nt="200", t_final=1.0),
    "table2": dict(mode="convergence", example=2, nx="4,8,16,32,64", nt="200", t_final=1.0),
    "table3": dict(mode="convergence", example=3, nx="4,8,16,32,64", nt="200", t_final=1.0),
    "table7": dict(mode="temporal-convergence", example=1, nt="4,8,12,16", t_final=1.0),
    "table8": dict(mode="temporal-convergence", example=2, nt="4,8,12,16", t_final=1.0),
    "table9": dict(mode="temporal-convergence", example=3, nt="4,8,12,16", t_final=1.0),
}

_DEFAULTS = dict(
    mode="solve",
    element=NEDELEC,
    example=None,
    nx="8",
    nt=None,
    dt=None,
    t_final=1.0,
    rho=1.0,
    mu=1.0,
    lam=1.0,
    solver="direct",
    solver_tol=1e-12,
    preset=None,
    snapshot_every=None,
    out=None,
    force=False,
)

_MODES = ("solve", "convergence", "temporal-convergence", "stability", "infsup")


@dataclass
class RunConfig:
    """Fully resolved configuration of a single simulation."""

    mode: str = "solve"
    element: str = NEDELEC
    example: int | None = None
    nx: int = 8
    n_steps: int = 200
    dt: float | None = None
    t_final: float = 1.0
    rho: float = 1.0
    mu: float = 1.0
    lam: float = 1.0
    solver: str = "direct"
    solver_tol: float = 1e-12
    snapshot_every: int | None = None
    out: str | None = None
    force: bool = False


def resolve_time(t_final, dt, n_steps):
    """Fill in the missing one of (dt, n_steps) and check dt * M = T."""
    if not t_final > 0.0:
        raise ValueError(f"final time must be positive, got {t_final}")
    if dt is None and n_steps is None:
        n_steps = 200
    if dt is None:
        dt = t_final / n_steps
    elif n_steps is None:
        n_steps = round(t_final / dt)
    if n_steps < 1 or abs(dt * n_steps - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError(
            f"dt = {dt} and M = {n_steps} do not partition [0, {t_final}]"
        )
    return float(t_final), float(dt), int(n_steps)


def _base_config(s, **overrides) -> RunConfig:
    cfg = RunConfig(
        mode=s["mode"],
        element=s["element"],
        example=s["example"],
        t_final=s["t_final"],
        rho=s["rho"],
        mu=s["mu"],
        lam=s["lam"],
        solver=s["solver"],
        solver_tol=s["solver_tol"],
        snapshot_every=s["snapshot_every"],
        out=s["out"],
        force=s["force"],
    )
    for key, val in overrides.items():
        setattr(cfg, key, val)
    return cfg


def convergence_study(
    element,
    example,
    ns,
    *,
    dt=None,
    n_steps=None,
    t_final=1.0,
    rho=1.0,
    mu=1.0,
    lam=1.0,
    solver="direct",
    solver_tol=1e-12,
    force=False,
):
    """Run one example on a list of N-by-N meshes at a fixed time step.

    Returns (rows, results); rows are dicts keyed by the CSV columns.
    """
    t_final, dt, n_steps = resolve_time(t_final, dt, n_steps)
    results = []
    for n in ns:
        cfg = RunConfig(
            mode="convergence",
            element=element,
            example=example,
            nx=int(n),
            n_steps=n_steps,
            dt=dt,
            t_final=t_final,
            rho=rho,
            mu=mu,
            lam=lam,
            solver=solver,
            solver_tol=solver_tol,
            force=force,
        )
        results.append(run(cfg))
    return _study_rows(list(ns), results), results


def temporal_study(
    element,
    example,
    ms,
    *,
    t_final=1.0,
    rho=1.0,
    mu=1.0,
    lam=1.0,
    solver="direct",
    solver_tol=1e-12,
    force=False,
):
    """Refine the time step with the mesh coupled as N = M^2/4.

    Every M must be even so that M^2/4 is an integer.
    """
    results = []
    for m in ms:
        m = int(m)
        if m % 2:
            raise ValueError(f"step count {m} must be even to couple N = M^2/4")
        cfg = RunConfig(
            mode="temporal-convergence",
            element=element,
            example=example,
            nx=m * m // 4,
            n_steps=m,
            dt=t_final / m,
            t_final=t_final,
            rho=rho,
            mu=mu,
            lam=lam,
            solver=solver,
            solver_tol=solver_tol,
            force=force,
        )
        results.append(run(cfg))
    return _study_rows([int(m) for m in ms], results, param="M"), results


def _study_rows(params, results, param="N"):
    e_sigma = [r.E_a_sigma for r in results]
    e_v = [r.E_c_v for r in results]
    orders_sigma = [None] + convergence_orders(list(zip(params, e_sigma)))
    orders_v = [None] + convergence_orders(list(zip(params, e_v)))
    del param
    rows = []
    for r, os_, ov in zip(results, orders_sigma, orders_v):
        rows.append(
            {
                "N": r.config.nx,
                "M": r.config.n_steps,
                "dt": r.config.dt,
                "E_a_sigma": r.E_a_sigma,
                "order_sigma": os_,
                "E_c_v": r.E_c_v,
                "order_v": ov,
            }
        )
    return rows


def format_study_csv(rows) -> str:
    """Render study rows with the fixed header and deterministic formatting."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(
            [
                row["N"],
                row["M"],
                f"{row['dt']:.10g}",
                f"{row['E_a_sigma']:.6e}",
                "" if row["order_sigma"] is None else f"{row['order_sigma']:.3f}",
                f"{row['E_c_v']:.6e}",
                "" if row["order_v"] is None else f"{row['order_v']:.3f}",
            ]
        )
    return buf.getvalue()


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)


def _parse_int_list(s):
    try:
        vals = [int(tok) for tok in str(s).split(",") if tok.strip()]
    except ValueError as err:
        raise ValueError(f"expected comma-separated integers, got {s!r}") from err
    if not vals:
        raise ValueError(f"empty integer list {s!r}")
    return vals


def _parse_float_list(s):
    try:
        vals = [float(tok) for tok in str(s).split(",") if tok.strip()]
    except ValueError as err:
        raise ValueError(f"expected comma-separated numbers, got {s!r}") from err
    if not vals:
        raise ValueError(f"empty number list {s!r}")
    return vals


def _single(vals, what):
    if len(vals) != 1:
        raise ValueError(f"{what} takes a single value here, got {vals}")
    return vals[0]


def _run_solve(s) -> int:
    nx = _single(_parse_int_list(s["nx"]), "--nx")
    dt = None if s["dt"] is None else _single(_parse_float_list(s["dt"]), "--dt")
    n_steps = None if s["nt"] is None else _single(_parse_int_list(s["nt"]), "--nt")
    t_final, dt, n_steps = resolve_time(s["t_final"], dt, n_steps)
    cfg = _base_config(s, nx=nx, dt=dt, n_steps=n_steps, t_final=t_final)
    result = run(cfg)
    print(
        f"element={cfg.element} N={cfg.nx} M={cfg.n_steps} dt={cfg.dt:.10g} "
        f"T={cfg.t_final:.10g}"
    )
    print(f"final energy = {result.energy[-1]:.12e}")
    if result.E_a_sigma is not None:
        print(f"E_a_sigma = {result.E_a_sigma:.6e} (node {result.argmax_sigma})")
        print(f"E_c_v     = {result.E_c_v:.6e} (node {result.argmax_v})")
    if result.snapshots:
        _write_snapshots(cfg, result)
    return 0


def _write_snapshots(cfg, result):
    mesh = StructuredMesh(cfg.nx, cfg.nx)
    ss = StressSpace(mesh, cfg.element)
    vs = VelocitySpace(mesh, cfg.element)
    centers = mesh.element_centers()
    sbasis = ss.local_values(0.0, 0.0)
    vbasis = vs.local_values(0.0, 0.0)
    stem = cfg.out or "snapshot"
    if stem.endswith(".csv"):
        stem = stem[:-4]
    for n, state in result.snapshots:
        sig = np.einsum("la,el->ea", sbasis, state.alpha[ss.eldof])
        vel = np.einsum("ld,el->ed", vbasis, state.beta[vs.eldof])
        path = f"{stem}_n{n:05d}.csv"
        with open(path, "w") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["x", "y", "sigma11", "sigma22", "sigma12", "v1", "v2"])
            for row in np.column_stack([centers, sig, vel]):
                writer.writerow([f"{v:.10e}" for v in row])
        print(f"wrote {path}")


def _run_convergence(s) -> int:
    if s["example"] is None:
        raise ValueError("convergence mode needs --example")
    ns = _parse_int_list(s["nx"])
    dt = None if s["dt"] is None else _single(_parse_float_list(s["dt"]), "--dt")
    n_steps = None if s["nt"] is None else _single(_parse_int_list(s["nt"]), "--nt")
    rows, _ = convergence_study(
        s["element"],
        s["example"],
        ns,
        dt=dt,
        n_steps=n_steps,
        t_final=s["t_final"],
        rho=s["rho"],
        mu=s["mu"],
        lam=s["lam"],
        solver=s["solver"],
        solver_tol=s["solver_tol"],
        force=s["force"],
    )
    _emit(format_study_csv(rows), s["out"])
    return 0


def _run_temporal(s) -> int:
    if s["example"] is None:
        raise ValueError("temporal-convergence mode needs --example")
    if s["nt"] is None:
        raise ValueError("temporal-convergence mode needs --nt")
    ms = _parse_int_list(s["nt"])
    rows, _ = temporal_study(
        s["element"],
        s["example"],
        ms,
        t_final=s["t_final"],
        rho=s["rho"],
        mu=s["mu"],
        lam=s["lam"],
        solver=s["solver"],
        solver_tol=s["solver_tol"],
        force=s["force"],
    )
    _emit(format_study_csv(rows), s["out"])
    return 0


def _run_stability(s) -> int:
    if s["example"] is None:
        raise ValueError("stability mode needs --example")
    if s["dt"] is None:
        raise ValueError("stability mode needs --dt (one or more values)")
    nx = _single(_parse_int_list(s["nx"]), "--nx")
    dts = _parse_float_list(s["dt"])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dt", "n", "t", "energy"])
    finals = []
    for dt in dts:
        t_final, dt, n_steps = resolve_time(s["t_final"], dt, None)
        cfg = _base_config(s, nx=nx, dt=dt, n_steps=n_steps, t_final=t_final)
        result = run(cfg)
        for n, (t, e) in enumerate(zip(result.times, result.energy)):
            writer.writerow([f"{dt:.10g}", n, f"{t:.10g}", f"{e:.10e}"])
        finals.append((dt, result.energy[-1]))
    for dt, e in finals:
        print(f"dt={dt:.10g} final energy = {e:.12e}")
    _emit(buf.getvalue(), s["out"])
    return 0


def _run_infsup(s) -> int:
    ns = _parse_int_list(s["nx"])
    consts = infsup_constants(s["element"], ns)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["N", "beta_h"])
    for n, b in zip(ns, consts):
        writer.writerow([n, f"{b:.10e}"])
    _emit(buf.getvalue(), s["out"])
    return 0


_RUNNERS = {
    "solve": _run_solve,
    "convergence": _run_convergence,
    "temporal-convergence": _run_temporal,
    "stability": _run_stability,
    "infsup": _run_infsup,
}

_FILE_PARSERS = {
    "mode": str,
    "element": str,
    "example": int,
    "nx": str,
    "nt": str,
    "dt": str,
    "t_final": float,
    "rho": float,
    "mu": float,
    "lam": float,
    "solver": str,
    "solver_tol": float,
    "preset": str,
    "snapshot_every": int,
    "out": str,
    "force": lambda v: v.lower() in ("1", "true", "yes"),
}


def _read_config_file(path):
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _FILE_PARSERS:
                raise ValueError(f"{path}:{lineno}: unknown setting {key!r}")
            out[key] = _FILE_PARSERS[key](val)
    return out


def _build_parser():
    p = argparse.ArgumentParser(
        prog="viscowave",
        description="Mixed-element velocity-stress wave solver on the unit square.",
    )
    p.add_argument("--mode", choices=_MODES, help="what to run (default: solve)")
    p.add_argument("--element", choices=list(FAMILIES), help="element family")
    p.add_argument("--example", type=int, help="built-in solution id (1, 2, or 3)")
    p.add_argument("--nx", help="mesh size N, or comma list for study modes")
    p.add_argument("--nt", help="time steps M, or comma list for temporal mode")
    p.add_argument("--dt", help="time step, or comma list for stability mode")
    p.add_argument("--t-final", dest="t_final", type=float, help="final time (default 1.0)")
    p.add_argument("--rho", type=float, help="density (default 1.0)")
    p.add_argument("--mu", type=float, help="shear modulus (default 1.0)")
    p.add_argument("--lambda", dest="lam", type=float, help="first Lame parameter (default 1.0)")
    p.add_argument("--solver", choices=["direct", "cg"], help="reduced-system solver")
    p.add_argument("--solver-tol", dest="solver_tol", type=float, help="relative residual bound")
    p.add_argument("--preset", choices=sorted(PRESETS), help="published study configuration")
    p.add_argument(
        "--snapshot-every",
        dest="snapshot_every",
        type=int,
        help="write field snapshots every k steps (solve mode)",
    )
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--config", help="key=value settings file; flags win")
    p.add_argument(
        "--force",
        action="store_true",
        default=None,
        help="accept non-unit materials with the built-in solutions",
    )
    return p


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        settings = dict(_DEFAULTS)
        if args.config:
            settings.update(_read_config_file(args.config))
        cli_given = {
            k: v for k, v in vars(args).items() if k != "config" and v is not None
        }
        preset = cli_given.get("preset", settings.get("preset"))
        if preset:
            if preset not in PRESETS:
                raise ValueError(f"unknown preset {preset!r}")
            settings.update(PRESETS[preset])
        settings.update(cli_given)
        return _RUNNERS[settings["mode"]](settings)
    except (ValueError, ConvergenceError, SingularBlockError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
