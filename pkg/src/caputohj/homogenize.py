"""Oscillation-scale sweeps and convergence-rate measurement.

Runs the oscillatory problem over a ladder of scales ``eps``, solves the
homogenized equation once on the finest grid, and fits the decay order
of ``sup |u_eps - ubar|`` against ``eps`` in log-log coordinates.  The
measured order is compared to the floor ``1/(3(2-nu)) - 0.02`` for the
configured reporting parameter ``nu``; the known bounds only cap the
error from above, so no upper assertion on the order is made.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cell import EffectiveTable, TorusGrid
from .fraccalc import FracOrder, TimeGrid
from .hamiltonian import HamiltonianSpec, InitialData
from .timestepper import FieldHistory, solve, strict_cfl_steps

__all__ = [
    "RateReport",
    "sup_error",
    "fit_rate",
    "SweepConfig",
    "run_sweep",
    "rate_report_json",
    "write_errors_csv",
    "write_rate_svg",
]


@dataclass(frozen=True)
class RateReport:
    """Outcome of one sweep.

    ``errors[i]`` is the all-nodes sup gap at ``eps_ladder[i]`` (NaN for
    rungs that failed); ``fitted_order`` is the log-log least-squares
    slope, or ``None`` when homogenization is exact to roundoff (the
    degenerate branch) or when a failure cut the ladder short.
    ``passed`` requires strictly decreasing errors and
    ``fitted_order >= theorem_exponent - 0.02`` (degenerate branch:
    exactness alone passes).
    """

    eps_ladder: tuple
    errors: tuple
    fitted_order: float | None
    nu: float
    theorem_exponent: float
    passed: bool
    failures: tuple = ()


def sup_error(ua: FieldHistory, ub: FieldHistory) -> float:
    """``max_{n,i} |ua - ub|`` over computed rows; grids must coincide."""
    if ua.data.shape != ub.data.shape:
        raise ValueError(f"shape mismatch: {ua.data.shape} vs {ub.data.shape}")
    if ua.filled != ub.filled:
        raise ValueError("histories are not equally advanced")
    rows = slice(0, ua.filled + 1)
    return float(np.max(np.abs(ua.data[rows] - ub.data[rows])))


def fit_rate(eps_ladder, errors) -> float:
    """Least-squares slope of ``log(error)`` against ``log(eps)``."""
    eps_arr = np.asarray(eps_ladder, dtype=float)
    err_arr = np.asarray(errors, dtype=float)
    if eps_arr.shape != err_arr.shape or eps_arr.ndim != 1:
        raise ValueError("ladder and errors must be equal-length vectors")
    if eps_arr.size < 3:
        raise ValueError("rate fit needs at least three rungs")
    if np.any(~np.isfinite(err_arr)) or np.any(err_arr <= 0.0):
        raise ValueError(
            "degenerate fit: errors must be positive and finite "
            "(exact homogenization is handled by the sweep's degenerate branch)"
        )
    x = np.log(eps_arr)
    y = np.log(err_arr)
    mx, my = float(np.mean(x)), float(np.mean(y))
    sxx = float(np.sum((x - mx) ** 2))
    if sxx == 0.0:
        raise ValueError("degenerate fit: all eps values coincide")
    return float(np.sum((x - mx) * (y - my))) / sxx


def _default_p_grid() -> np.ndarray:
    return np.linspace(-4.0, 4.0, 33)


@dataclass(frozen=True, eq=False)
class SweepConfig:
    """Everything one sweep needs; defaults reproduce the stock experiment."""

    h: HamiltonianSpec = field(
        default_factory=lambda: HamiltonianSpec.eikonal_potential(1.0, 1))
    u0: InitialData = field(default_factory=lambda: InitialData.cosine(0.25, 1))
    frac: FracOrder | None = field(default_factory=lambda: FracOrder.of(0.5))
    t_final: float = 0.25
    eps_ladder: tuple = (0.25, 0.125, 0.0625)
    lambda_ladder: tuple = (0.1, 0.05, 0.025, 0.0125)
    nu: float = 0.5
    p_grid: np.ndarray | None = None
    cell_n_cells: int = 256
    n_steps: int | None = None
    n_cells: int | None = None
    resolution: int = 16
    cfl_fraction: float = 0.98
    tol: float = 1e-8


def _rung_cells(cfg: SweepConfig, eps: float) -> int:
    if cfg.n_cells is not None:
        return int(cfg.n_cells)
    return int(round(cfg.resolution / eps))


def run_sweep(cfg: SweepConfig) -> RateReport:
    """Execute the ladder and assemble the rate report.

    The effective table is built once; the homogenized solution is
    computed once on the finest rung's grid and restricted to coarser
    rungs at coincident nodes.  All rungs share one time grid (the
    finest rung's stability requirement binds).  A failing rung aborts
    the remaining ladder; completed rungs are still reported, with the
    failure recorded.
    """
    ladder = tuple(float(e) for e in cfg.eps_ladder)
    if len(ladder) < 3:
        raise ValueError("eps ladder needs at least three rungs")
    nu = float(cfg.nu)
    if not 0.0 < nu < 1.0:
        raise ValueError(f"nu must lie in (0, 1), got {nu}")
    exponent = 1.0 / (3.0 * (2.0 - nu))

    cells = [_rung_cells(cfg, e) for e in ladder]
    finest = max(cells)
    for e, nc in zip(ladder, cells):
        if finest % nc != 0:
            raise ValueError(
                f"rung grids are not nested: {nc} cells at eps={e} does not "
                f"divide the finest grid ({finest} cells)"
            )

    p_grid = cfg.p_grid if cfg.p_grid is not None else _default_p_grid()
    cell_grid = TorusGrid.of(cfg.cell_n_cells)
    table = EffectiveTable.build(cfg.h, p_grid, cfg.lambda_ladder, cell_grid,
                                 tol=cfg.tol)

    theta = max(cfg.h.lip_p, table.lip_p)
    finest_grid = TorusGrid.of(finest)
    if cfg.n_steps is not None:
        n_steps = int(cfg.n_steps)
    else:
        n_steps = strict_cfl_steps(cfg.frac, cfg.t_final, finest_grid.dy, theta,
                                   cfg.cfl_fraction)
    if cfg.frac is None:
        tgrid = TimeGrid.classical(cfg.t_final, n_steps)
    else:
        tgrid = TimeGrid.of(cfg.t_final, n_steps, cfg.frac)

    ubar = solve(table, cfg.u0, None, cfg.frac, tgrid, finest_grid)

    errors = [math.nan] * len(ladder)
    failures: list[str] = []
    for i, (eps, nc) in enumerate(zip(ladder, cells)):
        try:
            rung_grid = TorusGrid.of(nc)
            ue = solve(cfg.h, cfg.u0, eps, cfg.frac, tgrid, rung_grid)
        except (ValueError, RuntimeError) as exc:
            failures.append(f"eps={eps:g}: {exc}")
            break
        stride = finest // nc
        gap = np.abs(ue.data - ubar.data[:, ::stride])
        errors[i] = float(np.max(gap))

    clean = [e for e in errors if not math.isnan(e)]
    fitted: float | None = None
    if failures:
        passed = False
        if len(clean) >= 3 and all(e > 0.0 for e in clean):
            fitted = fit_rate(ladder[: len(clean)], clean)
    elif max(clean) <= 1e-8:
        # Homogenization is exact (y-independent Hamiltonian): nothing to fit.
        passed = True
    else:
        fitted = fit_rate(ladder, clean)
        decreasing = all(b < a for a, b in zip(clean, clean[1:]))
        passed = decreasing and fitted >= exponent - 0.02
    return RateReport(eps_ladder=ladder, errors=tuple(errors),
                      fitted_order=fitted, nu=nu, theorem_exponent=exponent,
                      passed=passed, failures=tuple(failures))


# --- serialization ----------------------------------------------------

def _json_safe(x: float) -> float | None:
    return None if (x is None or math.isnan(x)) else x


def rate_report_json(report: RateReport) -> str:
    payload = {
        "eps": list(report.eps_ladder),
        "error": [_json_safe(e) for e in report.errors],
        "fitted_order": _json_safe(report.fitted_order),
        "nu": report.nu,
        "theorem_exponent": report.theorem_exponent,
        "pass": report.passed,
        "failures": list(report.failures),
    }
    return json.dumps(payload, indent=2) + "\n"


def write_errors_csv(report: RateReport, path) -> None:
    lines = ["eps,error"]
    for e, err in zip(report.eps_ladder, report.errors):
        lines.append(f"{e:.12g},{err:.12g}")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


_SVG_W, _SVG_H = 720, 540
_MARG_L, _MARG_R, _MARG_T, _MARG_B = 80, 30, 30, 60


def write_rate_svg(report: RateReport, path) -> None:
    """Hand-rolled log-log plot: data points, fitted line, reference slope.

    No plotting dependency; all coordinates formatted to fixed precision
    so the bytes are reproducible.
    """
    pts = [(e, err) for e, err in zip(report.eps_ladder, report.errors)
           if not math.isnan(err) and err > 0.0]
    body: list[str] = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_SVG_W}" '
        f'height="{_SVG_H}" viewBox="0 0 {_SVG_W} {_SVG_H}">',
        f'<rect width="{_SVG_W}" height="{_SVG_H}" fill="#ffffff"/>',
    ]
    if len(pts) < 2:
        body.append(f'<text x="{_SVG_W / 2:.2f}" y="{_SVG_H / 2:.2f}" '
                    f'text-anchor="middle" font-family="monospace" '
                    f'font-size="14">no positive errors to plot</text>')
        body.append("</svg>")
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(body) + "\n")
        return

    lx = [math.log10(p[0]) for p in pts]
    ly = [math.log10(p[1]) for p in pts]
    pad = 0.12
    x_lo, x_hi = min(lx), max(lx)
    y_lo, y_hi = min(ly), max(ly)
    x_span = (x_hi - x_lo) or 1.0
    y_span = (y_hi - y_lo) or 1.0
    x_lo -= pad * x_span
    x_hi += pad * x_span
    y_lo -= pad * y_span
    y_hi += pad * y_span

    def sx(v: float) -> float:
        return _MARG_L + (v - x_lo) / (x_hi - x_lo) * (_SVG_W - _MARG_L - _MARG_R)

    def sy(v: float) -> float:
        return _SVG_H - _MARG_B - (v - y_lo) / (y_hi - y_lo) * (_SVG_H - _MARG_T - _MARG_B)

    axis_y = _SVG_H - _MARG_B
    body.append(f'<line x1="{_MARG_L}" y1="{axis_y}" x2="{_SVG_W - _MARG_R}" '
                f'y2="{axis_y}" stroke="#000000" stroke-width="1"/>')
    body.append(f'<line x1="{_MARG_L}" y1="{_MARG_T}" x2="{_MARG_L}" '
                f'y2="{axis_y}" stroke="#000000" stroke-width="1"/>')
    body.append(f'<text x="{(_MARG_L + _SVG_W - _MARG_R) / 2:.2f}" '
                f'y="{_SVG_H - 18}" text-anchor="middle" '
                f'font-family="monospace" font-size="13">eps (log scale)</text>')
    body.append(f'<text x="22" y="{(_MARG_T + axis_y) / 2:.2f}" '
                f'text-anchor="middle" font-family="monospace" font-size="13" '
                f'transform="rotate(-90 22 {(_MARG_T + axis_y) / 2:.2f})">'
                f'sup error (log scale)</text>')
    for e, err in pts:
        px = sx(math.log10(e))
        body.append(f'<line x1="{px:.2f}" y1="{axis_y}" x2="{px:.2f}" '
                    f'y2="{axis_y + 5}" stroke="#000000" stroke-width="1"/>')
        body.append(f'<text x="{px:.2f}" y="{axis_y + 20}" text-anchor="middle" '
                    f'font-family="monospace" font-size="12">{e:.4g}</text>')
        py = sy(math.log10(err))
        body.append(f'<line x1="{_MARG_L - 5}" y1="{py:.2f}" x2="{_MARG_L}" '
                    f'y2="{py:.2f}" stroke="#000000" stroke-width="1"/>')
        body.append(f'<text x="{_MARG_L - 9}" y="{py + 4:.2f}" text-anchor="end" '
                    f'font-family="monospace" font-size="12">{err:.3g}</text>')

    path_d = " ".join(f"{'M' if i == 0 else 'L'} {sx(x):.2f} {sy(y):.2f}"
                      for i, (x, y) in enumerate(zip(lx, ly)))
    body.append(f'<path d="{path_d}" fill="none" stroke="#1f77b4" '
                f'stroke-width="2"/>')
    for x, y in zip(lx, ly):
        body.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="4" '
                    f'fill="#1f77b4"/>')

    if report.fitted_order is not None:
        mx = sum(lx) / len(lx)
        my = sum(ly) / len(ly)
        slope = report.fitted_order
        intercept = my - slope * mx
        xs = (x_lo + 0.02 * x_span, x_hi - 0.02 * x_span)
        body.append(
            f'<line x1="{sx(xs[0]):.2f}" y1="{sy(intercept + slope * xs[0]):.2f}" '
            f'x2="{sx(xs[1]):.2f}" y2="{sy(intercept + slope * xs[1]):.2f}" '
            f'stroke="#d62728" stroke-width="1.5" stroke-dasharray="6 4"/>')
        body.append(f'<text x="{_MARG_L + 12}" y="{_MARG_T + 18}" '
                    f'font-family="monospace" font-size="13" fill="#d62728">'
                    f'measured order {slope:.3f}</text>')
    ref = report.theorem_exponent
    anchor_x, anchor_y = lx[0], ly[0] - 0.15 * y_span
    xs = (x_lo + 0.02 * x_span, x_hi - 0.02 * x_span)
    body.append(
        f'<line x1="{sx(xs[0]):.2f}" '
        f'y1="{sy(anchor_y + ref * (xs[0] - anchor_x)):.2f}" '
        f'x2="{sx(xs[1]):.2f}" '
        f'y2="{sy(anchor_y + ref * (xs[1] - anchor_x)):.2f}" '
        f'stroke="#2ca02c" stroke-width="1.5" stroke-dasharray="2 4"/>')
    body.append(f'<text x="{_MARG_L + 12}" y="{_MARG_T + 36}" '
                f'font-family="monospace" font-size="13" fill="#2ca02c">'
                f'reference exponent {ref:.3f}</text>')
    body.append("</svg>")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(body) + "\n")
