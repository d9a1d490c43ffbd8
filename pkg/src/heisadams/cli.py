"""Batch experiment driver.

Every experiment is a subcommand writing CSV/JSON artifacts plus a manifest
that echoes the fully resolved configuration (flags, config-file values, and
defaults actually used).  Identical config and seed produce byte-identical
artifacts.  Exit codes: 0 success, 2 configuration error, 3 convergence
failure, 4 hypothesis-validation failure.

Configuration may come from a flat key=value file ('#' starts a comment)
passed with --config; command-line flags override file values.

Beta tokens for the sharpness probe: a bare float is an absolute exponent,
'xA' means x times the sharp constant A, and 'x*' means x times the singular
threshold A(1 - a/4).  k lists: 'a..b' doubles from a up to b, otherwise a
comma list.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .constants import QuadratureOptions, compute_constants
from .extremals import capacity_profile, probe_to_csv, sharpness_probe
from .grids import ball_grid, box_grid, gauge_power_field, save_field
from .io import fmt, read_csv, write_csv, write_json
from .operators import dirichlet_energy
from .rearrange import (
    decreasing_rearrangement,
    double_star,
    hardy_littlewood_slack,
    kernel_star,
    one_d_reduction,
)
from .varsolve import (
    SolveOptions,
    critical_continuation,
    critical_model,
    cubic_model,
    energy,
    lambda_estimate,
    level_bound,
    mountain_pass_solve,
    rayleigh_quotient,
    validate_hypotheses,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_HYPOTHESES = 4

BIG_A = 32.0 / 9.0


class ConfigError(Exception):
    pass


def _read_config_file(path: str) -> dict[str, str]:
    out: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = line.split("=", 1)
        out[key.strip()] = val.strip()
    return out


def _parse_betas(spec: str, a: float) -> list[float]:
    out = []
    for tok in spec.split(","):
        tok = tok.strip()
        if not tok:
            continue
        if tok.endswith("A"):
            out.append(float(tok[:-1]) * BIG_A)
        elif tok.endswith("*"):
            out.append(float(tok[:-1]) * BIG_A * (1.0 - a / 4.0))
        else:
            out.append(float(tok))
    if not out:
        raise ConfigError(f"no beta values in {spec!r}")
    return out


def _parse_ks(spec: str) -> list[int]:
    spec = spec.strip()
    if ".." in spec:
        lo, hi = spec.split("..", 1)
        lo, hi = int(lo), int(hi)
        ks = []
        k = lo
        while k <= hi:
            ks.append(k)
            k *= 2
        return ks
    return [int(tok) for tok in spec.split(",") if tok.strip()]


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heisadams", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=[
        "constants", "rearrange-check", "sharpness", "capacity",
        "solve", "continuation", "lambda", "plot-data",
    ])
    ap.add_argument("--config", help="flat key=value config file")
    ap.add_argument("--grid", type=int, help="cells per axis (default 17)")
    ap.add_argument("--extent", type=float, help="box half-extent (default 1.0)")
    ap.add_argument("--a", type=float, help="singular-weight exponent (default 0)")
    ap.add_argument("--nl", help="nonlinearity: cubic | critical (default cubic)")
    ap.add_argument("--lam", type=float, help="critical-model coefficient")
    ap.add_argument("--alpha0", type=float, help="critical-model exponent scale")
    ap.add_argument("--tol", type=float, help="solver/quadrature tolerance")
    ap.add_argument("--out", help="output directory (default ./out)")
    ap.add_argument("--seed", type=int, help="seed for randomized suites (default 0)")
    ap.add_argument("--betas", help="sharpness: beta list, e.g. 0.75*,1.25* or 0.9A,1.1A")
    ap.add_argument("--ks", help="sharpness: k list, e.g. 2..32 or 2,4,8")
    ap.add_argument("--ell", type=float, help="capacity: inner gauge radius ratio")
    ap.add_argument("--nmax", type=int, help="continuation: number of stages")
    ap.add_argument("--tail-radius", type=float, dest="tail_radius",
                    help="constants: gauge truncation radius")
    ap.add_argument("--mc-samples", type=int, dest="mc_samples",
                    help="constants: Monte Carlo sample count")
    ap.add_argument("--artifact", help="plot-data: path of the CSV artifact to reshape")
    return ap


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration: defaults <- config file <- flags."""

    command: str
    grid: int
    extent: float
    a: float
    nl: str
    lam: float
    alpha0: float
    tol: float
    out: str
    seed: int
    betas: str
    ks: str
    ell: float
    nmax: int
    tail_radius: float
    mc_samples: int
    artifact: str


_DEFAULTS = {
    "grid": 17,
    "extent": 1.0,
    "a": 0.0,
    "nl": "cubic",
    "lam": 1.0,
    "alpha0": 1.0,
    "tol": 1e-6,
    "out": "out",
    "seed": 0,
    "betas": "0.75*,1.0*,1.25*",
    "ks": "2..32",
    "ell": 0.5,
    "nmax": 6,
    "tail_radius": 50.0,
    "mc_samples": 200000,
    "artifact": "",
}

_CASTS = {
    "grid": int, "extent": float, "a": float, "nl": str, "lam": float,
    "alpha0": float, "tol": float, "out": str, "seed": int, "betas": str,
    "ks": str, "ell": float, "nmax": int, "tail_radius": float,
    "mc_samples": int, "artifact": str,
}


def resolve_config(args: argparse.Namespace) -> "RunConfig":
    """Merge defaults <- config file <- command line; validate ranges."""
    cfg = dict(_DEFAULTS)
    if args.config:
        for key, val in _read_config_file(args.config).items():
            nkey = key.replace("-", "_")
            if nkey not in cfg:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                cfg[nkey] = _CASTS[nkey](val)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {val!r}") from exc
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val

    rc = RunConfig(command=args.command, **cfg)
    if rc.command != "continuation" and not (0.0 <= rc.a < 4.0):
        raise ConfigError(f"a = {rc.a} outside [0, 4)")
    if rc.grid < 5:
        raise ConfigError("grid must have at least 5 cells per axis")
    if rc.nl not in ("cubic", "critical"):
        raise ConfigError(f"unknown nonlinearity {rc.nl!r}")
    if not (0.0 < rc.ell < 1.0):
        raise ConfigError(f"ell = {rc.ell} outside (0, 1)")
    return rc


def _manifest(cfg: "RunConfig", extra: dict | None = None) -> dict:
    resolved = asdict(cfg)
    doc = {"version": __version__, "resolved": {k: resolved[k] for k in sorted(resolved)}}
    if extra:
        doc["derived"] = extra
    return doc


def _make_nl(cfg: "RunConfig"):
    if cfg.nl == "cubic":
        return cubic_model()
    return critical_model(lam=cfg.lam, alpha0=cfg.alpha0)


# -- commands -------------------------------------------------------------------

def cmd_constants(cfg: RunConfig, out: Path) -> int:
    opts = QuadratureOptions(tail_radius=cfg.tail_radius, mc_samples=cfg.mc_samples,
                             mc_seed=cfg.seed or QuadratureOptions.mc_seed)
    consts = compute_constants(opts)
    write_json(out / "constants.json", {
        "q": consts.q,
        "c0": consts.c0,
        "gamma1": consts.gamma1,
        "bigA": consts.bigA,
        "unitBallVolume": consts.unitBallVolume,
        "errorEstimates": consts.errorEstimates,
    })
    write_json(out / "manifest.json", _manifest(cfg))
    return EXIT_OK


def cmd_rearrange_check(cfg: RunConfig, out: Path) -> int:
    n = cfg.grid
    dom = ball_grid(n)
    f = gauge_power_field(dom, 2.0)
    prof = decreasing_rearrangement(f)
    prof.to_csv(out / "profile.csv")

    total = prof.totalMeasure
    ts = np.linspace(0.1 * total, 0.9 * total, 97)
    fstar_err = float(np.max(np.abs(prof.f_star(ts) / kernel_star(ts) - 1.0)))
    dstar_err = float(np.max(np.abs(
        np.array([double_star(prof, t) for t in ts]) / (2.0 * prof.f_star(ts)) - 1.0)))
    _, _, defect = one_d_reduction(f)
    l2 = float(np.sum(f.masked() ** 2)) * dom.cell_volume

    rng = np.random.default_rng(cfg.seed)
    small = ball_grid(9)
    worst_slack = np.inf
    for _ in range(20):
        from .grids import GridField
        av = np.where(small.mask, rng.standard_normal(small.shape), 0.0)
        bv = np.where(small.mask, rng.standard_normal(small.shape), 0.0)
        s = hardy_littlewood_slack(GridField(small, av), GridField(small, bv))
        worst_slack = min(worst_slack, s)

    write_json(out / "rearrange_summary.json", {
        "grid": n,
        "fstar_max_rel_err": fstar_err,
        "dstar_ratio_max_rel_err": dstar_err,
        "one_d_defect": defect,
        "one_d_defect_rel": defect / l2,
        "hardy_littlewood_min_slack": worst_slack,
    })
    write_json(out / "manifest.json", _manifest(cfg))
    return EXIT_OK


def cmd_sharpness(cfg: RunConfig, out: Path) -> int:
    a = cfg.a
    betas = _parse_betas(cfg.betas, a)
    ks = _parse_ks(cfg.ks)
    dom = ball_grid(cfg.grid)
    rows = sharpness_probe(a, betas, ks, grid=dom, tol=min(cfg.tol, 1e-8))
    probe_to_csv(rows, out / "sharpness.csv")
    write_json(out / "manifest.json", _manifest(cfg, {
        "threshold": BIG_A * (1.0 - a / 4.0), "betas": betas, "ks": ks,
    }))
    return EXIT_OK


def cmd_capacity(cfg: RunConfig, out: Path) -> int:
    dom = ball_grid(cfg.grid)
    prof = capacity_profile(cfg.ell, dom, tol=min(cfg.tol, 1e-8))
    save_field(prof.field, out / "capacity_field.bin")
    write_json(out / "capacity.json", {
        "ell": prof.ell,
        "energy": prof.energy,
        "bound": prof.bound,
        "slack": prof.slack,
        "cg_iterations": prof.cg_iterations,
        "cg_residual": prof.cg_residual,
        "plateau_cells": prof.plateau_cells,
        "resolved_rings": prof.resolved_rings,
    })
    write_json(out / "manifest.json", _manifest(cfg))
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out: Path) -> int:
    dom = box_grid(cfg.grid, extent=cfg.extent)
    nl = _make_nl(cfg)
    a = cfg.a

    lam = lambda_estimate(dom, a, tol=1e-10)
    report = validate_hypotheses(nl, a, lam.value, dom)
    write_json(out / "hypotheses.json", {
        "lambda": lam.value,
        "sampled_range": list(report.sampled_range),
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                   for c in report.checks],
    })
    if not report.passed_geometry():
        write_json(out / "manifest.json", _manifest(cfg))
        print("hypothesis validation failed; see hypotheses.json", file=sys.stderr)
        return EXIT_HYPOTHESES

    opts = SolveOptions(tol=cfg.tol, seed=cfg.seed)
    u, state = mountain_pass_solve(nl, a, dom, opts)
    save_field(u, out / "solution.bin")
    write_csv(out / "trace.csv", ["iteration", "level", "gradResidual", "norm"],
              state.history)
    unorm = float(np.sqrt(dirichlet_energy(u)))
    summary = {
        "converged": state.converged,
        "geometry_failure": state.geometry_failure,
        "level": state.levelEstimate,
        "gradResidual": state.gradResidual,
        "norm": unorm,
        "energy": energy(u, nl, a),
        "rayleigh_bound_ok": bool(
            unorm == 0.0 or rayleigh_quotient(u, a) >= lam.value * (1 - 1e-6)),
        "newton_iterations": state.newton_iterations,
        "message": state.message,
    }
    if nl.growth_class == "critical" and nl.alpha0:
        summary["level_bound"] = level_bound(a, nl.alpha0)
    write_json(out / "solve.json", summary)
    write_json(out / "manifest.json", _manifest(cfg, {"lambda": lam.value}))
    if state.geometry_failure or not state.converged:
        print(state.message or "solver did not converge", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_continuation(cfg: RunConfig, out: Path) -> int:
    dom = box_grid(cfg.grid, extent=cfg.extent)
    nl = _make_nl(cfg)
    opts = SolveOptions(tol=cfg.tol, seed=cfg.seed)
    steps = critical_continuation(nl, cfg.nmax, dom, opts)
    rows = [(s.n, s.a, s.norm, s.diff_from_previous, s.weighted_uf, s.weighted_F,
             s.state.levelEstimate, s.state.gradResidual) for s in steps]
    write_csv(out / "continuation.csv",
              ["n", "a", "norm", "diff", "weighted_uf", "weighted_F", "level", "gradResidual"],
              rows)
    if steps:
        save_field(steps[-1].solution, out / "final_solution.bin")
    from .varsolve import tail_differences_decreasing
    write_json(out / "continuation.json", {
        "stages": len(steps),
        "all_converged": bool(all(s.state.converged for s in steps)),
        "tail_differences_decreasing": tail_differences_decreasing(steps),
    })
    write_json(out / "manifest.json", _manifest(cfg))
    if len(steps) < cfg.nmax or not all(s.state.converged for s in steps):
        print("continuation aborted early; partial results written", file=sys.stderr)
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_lambda(cfg: RunConfig, out: Path) -> int:
    dom = box_grid(cfg.grid, extent=cfg.extent)
    res = lambda_estimate(dom, cfg.a, tol=min(cfg.tol, 1e-10))
    write_json(out / "lambda.json", {
        "a": cfg.a,
        "value": res.value,
        "residual": res.residual,
        "iterations": res.iterations,
        "converged": res.converged,
    })
    write_json(out / "manifest.json", _manifest(cfg))
    return EXIT_OK if res.converged else EXIT_CONVERGENCE


def emit_plot_data(artifact: str | Path, out: Path) -> list[Path]:
    """Reshape a CSV artifact into plain columnar series files.

    sharpness.csv -> one (k, value) series per beta; trace.csv -> (iteration,
    level); continuation.csv -> (a, norm, diff).  Byte-stable given identical
    inputs.
    """
    artifact = Path(artifact)
    if not artifact.exists():
        raise ConfigError(f"artifact {artifact} does not exist")
    header, rows = read_csv(artifact)
    written: list[Path] = []
    if header[:3] == ["k", "beta", "a"]:
        betas = sorted({r[1] for r in rows}, key=float)
        for b in betas:
            series = [(int(r[0]), float(r[3])) for r in rows if r[1] == b]
            series.sort()
            path = out / f"series_beta_{b}.dat"
            text = "\n".join(f"{k} {fmt(v)}" for k, v in series) + "\n"
            from .io import atomic_write_text
            atomic_write_text(path, text)
            written.append(path)
    elif header[:2] == ["iteration", "level"]:
        path = out / "series_level.dat"
        text = "\n".join(f"{r[0]} {fmt(float(r[1]))}" for r in rows) + "\n"
        from .io import atomic_write_text
        atomic_write_text(path, text)
        written.append(path)
    elif header[:2] == ["n", "a"]:
        path = out / "series_continuation.dat"
        text = "\n".join(
            f"{fmt(float(r[1]))} {fmt(float(r[2]))} {fmt(float(r[3]))}" for r in rows
        ) + "\n"
        from .io import atomic_write_text
        atomic_write_text(path, text)
        written.append(path)
    else:
        raise ConfigError(f"unrecognized artifact header: {header}")
    return written


def cmd_plot_data(cfg: RunConfig, out: Path) -> int:
    if not cfg.artifact:
        raise ConfigError("plot-data requires --artifact")
    emit_plot_data(cfg.artifact, out)
    return EXIT_OK


_COMMANDS = {
    "constants": cmd_constants,
    "rearrange-check": cmd_rearrange_check,
    "sharpness": cmd_sharpness,
    "capacity": cmd_capacity,
    "solve": cmd_solve,
    "continuation": cmd_continuation,
    "lambda": cmd_lambda,
    "plot-data": cmd_plot_data,
}


def main(argv: list[str] | None = None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
        cfg = resolve_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0

    out = Path(cfg.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"config error: cannot create output dir {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        return _COMMANDS[cfg.command](cfg, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
