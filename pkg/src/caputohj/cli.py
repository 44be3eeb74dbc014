"""Command-line front end.

    caputohj SUBCOMMAND [--config PATH] [--set KEY=VALUE ...] [--out DIR]

Subcommands
-----------
caputo-check   randomized self-consistency audit of the memory operators
cell           tabulate the effective Hamiltonian over a slope grid
solve          run one oscillatory (or effective) evolution, dump snapshots
homogenize     sweep the scale ladder and fit the convergence order
estimates      check the envelope and discount-uniformity bounds

Exit status: 0 when every check in the subcommand passes, 2 when a check
fails, 1 on an operational error (bad config, I/O, solver breakdown).
Settings come from built-in defaults, overridden by the optional JSON
config file, overridden by ``--set`` flags; ``--out`` overrides the
``output_dir`` key.  Unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .cell import (EffectiveTable, TorusGrid, discount_uniformity_check)
from .envelopes import envelope_report
from .fraccalc import (FracOrder, HistoryScalar, TimeGrid, caputo_l1,
                       caputo_power_oracle, caputo_split)
from .hamiltonian import HamiltonianSpec, InitialData
from .homogenize import (SweepConfig, rate_report_json, run_sweep,
                         write_errors_csv, write_rate_svg)
from .timestepper import solve, strict_cfl_steps

__all__ = ["DEFAULTS", "parse_config", "run", "main"]


DEFAULTS: dict = {
    "hamiltonian": "eikonal-potential",
    "amplitude": 1.0,
    "frequency": 1,
    "offset": 0.0,
    "u0": "cosine",
    "u0_amplitude": 0.25,
    "u0_frequency": 1,
    "alpha": 0.5,
    "classical": False,
    "t_final": 0.25,
    "n_steps": None,
    "n_cells": None,
    "cfl_fraction": 0.98,
    "eps": 0.25,
    "eps_ladder": [0.25, 0.125, 0.0625],
    "lambda_ladder": [0.1, 0.05, 0.025, 0.0125],
    "nu": 0.5,
    "p_min": -4.0,
    "p_max": 4.0,
    "p_count": 33,
    "cell_n_cells": 256,
    "tol": 1e-8,
    "resolution": 16,
    "envelope_delta": [0.1, 0.01, 0.001],
    "envelope_nodes": 2000,
    "discount_pair": [0.0, 2.0],
    "discount_values": [0.1, 0.05],
    "snapshot_times": None,
    "seed": 0,
    "output_dir": "out",
}

_SUBCOMMANDS = ("caputo-check", "cell", "solve", "homogenize", "estimates")


class _CliError(Exception):
    """Operational failure: reported on stderr, exit status 1."""


def _fail(msg: str) -> "_CliError":
    return _CliError(msg)


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise _fail(msg)


def _as_float(cfg: dict, key: str) -> float:
    v = cfg[key]
    _require(isinstance(v, (int, float)) and not isinstance(v, bool),
             f"config key '{key}' must be a number, got {v!r}")
    return float(v)


def _as_int(cfg: dict, key: str) -> int:
    v = cfg[key]
    _require(isinstance(v, int) and not isinstance(v, bool),
             f"config key '{key}' must be an integer, got {v!r}")
    return v


def _as_float_list(cfg: dict, key: str) -> list:
    v = cfg[key]
    _require(isinstance(v, (list, tuple)) and len(v) > 0,
             f"config key '{key}' must be a non-empty list of numbers")
    out = []
    for item in v:
        _require(isinstance(item, (int, float)) and not isinstance(item, bool),
                 f"config key '{key}' must contain only numbers, got {item!r}")
        out.append(float(item))
    return out


def _check_reciprocal(value: float, key: str) -> None:
    _require(0.0 < value <= 1.0,
             f"config key '{key}' must lie in (0, 1], got {value}")
    inv = 1.0 / value
    _require(abs(inv - round(inv)) <= 1e-9 * inv,
             f"config key '{key}' must be a reciprocal integer "
             f"(1, 1/2, 1/4, ...), got {value}")


def _validate(cfg: dict) -> dict:
    unknown = sorted(set(cfg) - set(DEFAULTS))
    if unknown:
        raise _fail(
            f"unknown config key(s): {', '.join(unknown)}; "
            f"known keys: {', '.join(sorted(DEFAULTS))}")
    merged = dict(DEFAULTS)
    merged.update(cfg)

    _require(merged["hamiltonian"] in
             ("eikonal", "eikonal-potential", "eikonal-plus-constant"),
             "config key 'hamiltonian' must be one of eikonal, "
             "eikonal-potential, eikonal-plus-constant")
    _as_float(merged, "amplitude")
    _require(_as_int(merged, "frequency") >= 1,
             "config key 'frequency' must be an integer >= 1")
    _as_float(merged, "offset")
    _require(merged["u0"] in ("zero", "cosine", "hat"),
             "config key 'u0' must be one of zero, cosine, hat")
    _as_float(merged, "u0_amplitude")
    _require(_as_int(merged, "u0_frequency") >= 1,
             "config key 'u0_frequency' must be an integer >= 1")

    _require(isinstance(merged["classical"], bool),
             "config key 'classical' must be true or false")
    alpha = _as_float(merged, "alpha")
    if not merged["classical"] and not 0.0 < alpha < 1.0:
        hint = ("; set classical=true for the first-order-in-time baseline"
                if alpha == 1.0 else "")
        raise _fail(f"config key 'alpha' must lie in (0, 1), got {alpha}{hint}")

    _require(_as_float(merged, "t_final") > 0.0,
             "config key 't_final' must be positive")
    if merged["n_steps"] is not None:
        _require(_as_int(merged, "n_steps") >= 1,
                 "config key 'n_steps' must be an integer >= 1 or null")
    if merged["n_cells"] is not None:
        _require(_as_int(merged, "n_cells") >= 16,
                 "config key 'n_cells' must be an integer >= 16 or null")
    cflf = _as_float(merged, "cfl_fraction")
    _require(0.0 < cflf <= 1.0,
             "config key 'cfl_fraction' must lie in (0, 1]")

    _check_reciprocal(_as_float(merged, "eps"), "eps")
    ladder = _as_float_list(merged, "eps_ladder")
    _require(len(ladder) >= 3, "config key 'eps_ladder' needs >= 3 entries")
    _require(len(set(ladder)) == len(ladder),
             "config key 'eps_ladder' entries must be distinct")
    for e in ladder:
        _check_reciprocal(e, "eps_ladder")

    lam = _as_float_list(merged, "lambda_ladder")
    _require(len(lam) >= 3 and all(x > 0 for x in lam)
             and all(b < a for a, b in zip(lam, lam[1:])),
             "config key 'lambda_ladder' must be >= 3 strictly decreasing "
             "positive discounts")

    nu = _as_float(merged, "nu")
    _require(0.0 < nu < 1.0, f"config key 'nu' must lie in (0, 1), got {nu}")
    _require(_as_float(merged, "p_min") < _as_float(merged, "p_max"),
             "config keys 'p_min'/'p_max' must satisfy p_min < p_max")
    _require(_as_int(merged, "p_count") >= 2,
             "config key 'p_count' must be an integer >= 2")
    _require(_as_int(merged, "cell_n_cells") >= 16,
             "config key 'cell_n_cells' must be an integer >= 16")
    _require(_as_float(merged, "tol") > 0.0,
             "config key 'tol' must be positive")
    _require(_as_int(merged, "resolution") >= 16,
             "config key 'resolution' must be an integer >= 16 "
             "(at least sixteen cells per oscillation period)")

    deltas = _as_float_list(merged, "envelope_delta")
    _require(all(0.0 < d < 1.0 for d in deltas),
             "config key 'envelope_delta' entries must lie in (0, 1)")
    _require(_as_int(merged, "envelope_nodes") >= 16,
             "config key 'envelope_nodes' must be an integer >= 16")
    pair = _as_float_list(merged, "discount_pair")
    _require(len(pair) == 2 and pair[0] != pair[1],
             "config key 'discount_pair' must be two distinct slopes")
    dvals = _as_float_list(merged, "discount_values")
    _require(len(dvals) >= 2 and all(x > 0 for x in dvals),
             "config key 'discount_values' needs >= 2 positive discounts")

    if merged["snapshot_times"] is not None:
        snaps = _as_float_list(merged, "snapshot_times")
        t_final = float(merged["t_final"])
        _require(all(0.0 <= s <= t_final for s in snaps),
                 "config key 'snapshot_times' entries must lie in [0, t_final]")
    _require(_as_int(merged, "seed") >= 0,
             "config key 'seed' must be a non-negative integer")
    _require(isinstance(merged["output_dir"], str) and merged["output_dir"],
             "config key 'output_dir' must be a non-empty string")
    return merged


def _parse_set(pairs: list) -> dict:
    out: dict = {}
    for raw in pairs:
        key, sep, value = raw.partition("=")
        if not sep or not key:
            raise _fail(f"--set expects KEY=VALUE, got {raw!r}")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value  # bare strings may be given unquoted
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); 2 means check failure
        raise _fail(message)


def parse_config(argv) -> dict:
    """Resolve argv to a validated settings mapping (plus 'subcommand')."""
    parser = _Parser(prog="caputohj", add_help=True)
    parser.add_argument("subcommand", choices=_SUBCOMMANDS)
    parser.add_argument("--config", metavar="PATH", default=None)
    parser.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], dest="overrides")
    parser.add_argument("--out", metavar="DIR", default=None)
    args = parser.parse_args(argv)

    file_cfg: dict = {}
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise _fail(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise _fail(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_cfg, dict):
            raise _fail("config file must hold a JSON object")

    file_cfg.update(_parse_set(args.overrides))
    if args.out is not None:
        file_cfg["output_dir"] = args.out
    cfg = _validate(file_cfg)
    cfg["subcommand"] = args.subcommand
    return cfg


# --- shared construction helpers --------------------------------------

def _build_hamiltonian(cfg: dict) -> HamiltonianSpec:
    kind = cfg["hamiltonian"]
    if kind == "eikonal":
        return HamiltonianSpec.eikonal()
    if kind == "eikonal-potential":
        return HamiltonianSpec.eikonal_potential(cfg["amplitude"],
                                                 cfg["frequency"])
    return HamiltonianSpec.eikonal_plus_constant(cfg["offset"])


def _build_u0(cfg: dict) -> InitialData:
    kind = cfg["u0"]
    if kind == "zero":
        return InitialData.zero()
    if kind == "cosine":
        return InitialData.cosine(cfg["u0_amplitude"], cfg["u0_frequency"])
    return InitialData.hat(cfg["u0_amplitude"])


def _build_frac(cfg: dict) -> FracOrder | None:
    return None if cfg["classical"] else FracOrder.of(cfg["alpha"])


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _np_scalar(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"not JSON-serializable: {type(obj).__name__}")


def _dump_json(payload: dict, path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2, default=_np_scalar) + "\n",
                    encoding="ascii")


# --- subcommands -------------------------------------------------------

def _cmd_caputo_check(cfg: dict) -> bool:
    rng = np.random.default_rng(cfg["seed"])
    max_gap = 0.0
    for _ in range(100):
        n = int(rng.integers(4, 64))
        t_final = float(rng.uniform(0.5, 2.0))
        frac = FracOrder.of(float(rng.uniform(0.1, 0.9)))
        grid = TimeGrid.of(t_final, n, frac)
        hist = HistoryScalar(samples=rng.uniform(-1.0, 1.0, n + 1), tgrid=grid)
        scale = 1.0 + float(np.max(np.abs(hist.samples)))
        t_n = grid.times()[n]
        l1 = caputo_l1(hist, frac, n)
        for ratio in (0.1, 0.5, 0.9):
            split = caputo_split(hist, frac, n, ratio * t_n)
            max_gap = max(max_gap, abs(split.total - l1) / scale)
    identity_ok = max_gap <= 1e-10

    orders = []
    for alpha in (0.3, 0.5, 0.7):
        frac = FracOrder.of(alpha)
        errs, steps = [], (100, 200, 400, 800, 1600)
        for n in steps:
            grid = TimeGrid.of(1.0, n, frac)
            hist = HistoryScalar.from_callable(lambda t: t * t, grid)
            errs.append(abs(caputo_l1(hist, frac, n)
                            - caputo_power_oracle(frac, 2.0, 1.0)))
        x = np.log([1.0 / n for n in steps])
        y = np.log(errs)
        slope = float(np.sum((x - x.mean()) * (y - y.mean()))
                      / np.sum((x - x.mean()) ** 2))
        orders.append({"alpha": alpha, "order": slope,
                       "band": [2 - alpha - 0.2, 2 - alpha + 0.2],
                       "ok": 2 - alpha - 0.2 <= slope <= 2 - alpha + 0.2})
    orders_ok = all(o["ok"] for o in orders)
    passed = identity_ok and orders_ok

    _dump_json({"histories": 100, "max_identity_gap": max_gap,
                "identity_ok": identity_ok, "power_orders": orders,
                "pass": passed}, _out_dir(cfg) / "caputo_report.json")
    print(f"caputo-check: identity gap {max_gap:.3e} "
          f"(tol 1e-10), L1 orders "
          + ", ".join(f"{o['order']:.3f}@a={o['alpha']}" for o in orders)
          + f" -> {'PASS' if passed else 'FAIL'}")
    return passed


def _cmd_cell(cfg: dict) -> bool:
    h = _build_hamiltonian(cfg)
    grid = TorusGrid.of(cfg["cell_n_cells"])
    p_grid = np.linspace(cfg["p_min"], cfg["p_max"], cfg["p_count"])
    table = EffectiveTable.build(h, p_grid, cfg["lambda_ladder"], grid,
                                 tol=cfg["tol"])
    table.to_csv(_out_dir(cfg) / "hbar.csv")
    slopes = np.asarray(table.fit_slopes)
    print(f"cell: tabulated {len(table.p_grid)} slopes on "
          f"[{cfg['p_min']:g}, {cfg['p_max']:g}], "
          f"effective Lipschitz bound {table.lip_p:.4f}, "
          f"discount-fit slopes in [{slopes.min():.3f}, {slopes.max():.3f}] "
          f"-> PASS")
    return True


def _cmd_solve(cfg: dict) -> bool:
    h = _build_hamiltonian(cfg)
    u0 = _build_u0(cfg)
    frac = _build_frac(cfg)
    eps = cfg["eps"]
    n_cells = cfg["n_cells"]
    if n_cells is None:
        n_cells = int(round(cfg["resolution"] / eps))
    grid = TorusGrid.of(n_cells)
    n_steps = cfg["n_steps"]
    if n_steps is None:
        n_steps = strict_cfl_steps(frac, cfg["t_final"], grid.dy, h.lip_p,
                                   cfg["cfl_fraction"])
    if frac is None:
        tgrid = TimeGrid.classical(cfg["t_final"], n_steps)
    else:
        tgrid = TimeGrid.of(cfg["t_final"], n_steps, frac)
    state = solve(h, u0, eps, frac, tgrid, grid)

    times = tgrid.times()
    if cfg["snapshot_times"] is None:
        idx = sorted({0, n_steps // 4, n_steps // 2, (3 * n_steps) // 4,
                      n_steps})
    else:
        idx = sorted({int(np.argmin(np.abs(times - s)))
                      for s in cfg["snapshot_times"]})
    state.to_csv(_out_dir(cfg) / "solution.csv", time_indices=idx)
    print(f"solve: eps={eps:g}, {n_cells} cells, {n_steps} steps, "
          f"final sup |u| = {np.max(np.abs(state.data[n_steps])):.6f}, "
          f"{len(idx)} snapshots -> PASS")
    return True


def _cmd_homogenize(cfg: dict) -> bool:
    sweep = SweepConfig(
        h=_build_hamiltonian(cfg), u0=_build_u0(cfg), frac=_build_frac(cfg),
        t_final=cfg["t_final"], eps_ladder=tuple(cfg["eps_ladder"]),
        lambda_ladder=tuple(cfg["lambda_ladder"]), nu=cfg["nu"],
        p_grid=np.linspace(cfg["p_min"], cfg["p_max"], cfg["p_count"]),
        cell_n_cells=cfg["cell_n_cells"], n_steps=cfg["n_steps"],
        n_cells=cfg["n_cells"], resolution=cfg["resolution"],
        cfl_fraction=cfg["cfl_fraction"], tol=cfg["tol"])
    report = run_sweep(sweep)
    out = _out_dir(cfg)
    (out / "rate_report.json").write_text(rate_report_json(report),
                                          encoding="ascii")
    write_errors_csv(report, out / "errors.csv")
    write_rate_svg(report, out / "rate_plot.svg")
    fitted = ("exact" if report.fitted_order is None and not report.failures
              else "n/a" if report.fitted_order is None
              else f"{report.fitted_order:.4f}")
    print(f"homogenize: {len(report.eps_ladder)} rungs, fitted order {fitted} "
          f"vs floor {report.theorem_exponent - 0.02:.4f} -> "
          f"{'PASS' if report.passed else 'FAIL'}")
    return report.passed


def _cmd_estimates(cfg: dict) -> bool:
    alpha = cfg["alpha"] if not cfg["classical"] else 0.5
    frac = FracOrder.of(alpha)
    tgrid = TimeGrid.of(1.0, cfg["envelope_nodes"], frac)
    hist = HistoryScalar.from_callable(lambda t: t ** alpha, tgrid)
    env_reports = [envelope_report(hist, d, holder=(1.0, alpha))
                   for d in cfg["envelope_delta"]]
    env_ok = all(r.all_ok for r in env_reports)
    _dump_json({"function": "t^alpha", "alpha": alpha, "holder_m": 1.0,
                "reports": [r.to_json_dict() for r in env_reports],
                "pass": env_ok},
               _out_dir(cfg) / "envelope_report.json")

    h = _build_hamiltonian(cfg)
    grid = TorusGrid.of(cfg["cell_n_cells"])
    p, q = cfg["discount_pair"]
    checks = [discount_uniformity_check(h, p, q, lam, grid,
                                        lambda_ladder=tuple(cfg["lambda_ladder"]),
                                        tol=cfg["tol"])
              for lam in cfg["discount_values"]]
    ratios = [c.lip_ratio for c in checks]
    spread = ((max(ratios) - min(ratios)) / max(ratios)
              if max(ratios) > 0 else 0.0)
    stable = spread < 0.25 and max(ratios) <= 5.0
    disc_ok = all(c.rate_ok for c in checks) and stable
    _dump_json({"pair": [p, q], "checks": [c.to_json_dict() for c in checks],
                "ratio_spread": spread, "stable": stable, "pass": disc_ok},
               _out_dir(cfg) / "discount_report.json")

    passed = env_ok and disc_ok
    print(f"estimates: envelopes {'ok' if env_ok else 'FAILED'} at deltas "
          f"{cfg['envelope_delta']}, discount ratio spread {spread:.1%} "
          f"(limit 25%) -> {'PASS' if passed else 'FAIL'}")
    return passed


_DISPATCH = {
    "caputo-check": _cmd_caputo_check,
    "cell": _cmd_cell,
    "solve": _cmd_solve,
    "homogenize": _cmd_homogenize,
    "estimates": _cmd_estimates,
}


def run(cfg: dict) -> int:
    """Execute a validated config; returns the process exit status."""
    try:
        passed = _DISPATCH[cfg["subcommand"]](cfg)
    except (_CliError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0 if passed else 2


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        cfg = parse_config(argv)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help
        return 0 if exc.code in (0, None) else 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
