"""Discounted cell problems, the effective Hamiltonian, and its table."""

import numpy as np
import pytest

from caputohj.cell import (EffectiveTable, TorusGrid, cell_oracle_1d,
                           discount_uniformity_check, effective_hamiltonian,
                           solve_discounted)
from caputohj.hamiltonian import HamiltonianSpec


@pytest.fixture(scope="module")
def grid128():
    return TorusGrid.of(128)


@pytest.fixture(scope="module")
def hpot():
    return HamiltonianSpec.eikonal_potential(1.0, 1)


def test_torus_grid_basics():
    g = TorusGrid.of(32)
    assert g.dy == pytest.approx(1.0 / 32)
    assert g.nodes[0] == 0.0
    assert g.nodes[-1] == pytest.approx(1.0 - 1.0 / 32)
    with pytest.raises(ValueError):
        TorusGrid.of(8)


def test_discounted_residual_and_mean_identity(hpot, grid128):
    sol = solve_discounted(hpot, 1.0, 0.1, grid128)
    assert sol.residual_inf <= 1e-8
    # lambda * v + H(y, p + Dv) = 0 pointwise, so the residual controls
    # |scaled_mean + mean(H along the solution)| too; spot-check scale.
    assert abs(sol.scaled_mean) <= hpot.max_on_slope_ball(2.0)


def test_discount_oscillation_bound(hpot, grid128):
    """The discounted solutions stay flat: lambda * osc(v) <= 2 lip_y
    in theory, asserted with slack factor two against discretization."""
    for lam in (0.2, 0.05):
        sol = solve_discounted(hpot, 0.5, lam, grid128)
        osc = float(np.max(sol.values) - np.min(sol.values))
        assert lam * osc <= 4.0 * hpot.lip_y


def test_effective_matches_bisection_oracle(hpot):
    grid = TorusGrid.of(128)
    for p in (-1.5, 0.0, 0.75, 2.0):
        est = effective_hamiltonian(hpot, p, (0.1, 0.05, 0.025, 0.0125), grid)
        assert est.hbar == pytest.approx(cell_oracle_1d(hpot, p), abs=0.02)


def test_oracle_closed_form_for_cosine_potential(hpot):
    # flat piece at max V, linear growth outside: Hbar(p) = max(A, |p|)
    assert cell_oracle_1d(hpot, 0.0) == pytest.approx(1.0, abs=1e-6)
    assert cell_oracle_1d(hpot, 0.4) == pytest.approx(1.0, abs=1e-6)
    assert cell_oracle_1d(hpot, 3.0) == pytest.approx(3.0, abs=1e-6)
    assert cell_oracle_1d(hpot, -2.5) == pytest.approx(2.5, abs=1e-6)


def test_oracle_requires_separable_potential_form():
    with pytest.raises(ValueError):
        cell_oracle_1d(HamiltonianSpec.eikonal(), 1.0)
    with pytest.raises(ValueError):
        cell_oracle_1d(HamiltonianSpec.eikonal_plus_constant(0.5), 1.0)


def test_effective_degenerate_when_no_oscillation():
    """A y-independent Hamiltonian solves the cell problem with v = 0 at
    every discount, so the affine fit degenerates and the rate defaults."""
    h = HamiltonianSpec.eikonal()
    est = effective_hamiltonian(h, 1.25, (0.1, 0.05, 0.025), TorusGrid.of(32))
    assert est.hbar == pytest.approx(1.25, abs=1e-9)
    assert est.fit_slope == 1.0


def test_effective_ladder_validation(hpot, grid128):
    with pytest.raises(ValueError):
        effective_hamiltonian(hpot, 0.0, (0.1, 0.05), grid128)  # too short
    with pytest.raises(ValueError):
        effective_hamiltonian(hpot, 0.0, (0.05, 0.1, 0.2), grid128)
    with pytest.raises(ValueError):
        effective_hamiltonian(hpot, 0.0, (0.1, 0.0, -0.1), grid128)


@pytest.fixture(scope="module")
def table(hpot):
    p_grid = np.linspace(-2.0, 2.0, 17)
    return EffectiveTable.build(hpot, p_grid, (0.1, 0.05, 0.025, 0.0125),
                                TorusGrid.of(128))


def test_table_symmetry_and_lipschitz(table, hpot):
    vals = np.asarray(table.values)
    # even Hamiltonian in p => even effective Hamiltonian
    assert np.max(np.abs(vals - vals[::-1])) <= 1e-3
    # effective slope bound inherits lip_p (+ fitting tolerance)
    p = np.asarray(table.p_grid)
    rates = np.abs(np.diff(vals)) / np.diff(p)
    assert np.max(rates) <= hpot.lip_p + 0.1
    assert table.lip_p <= hpot.lip_p + 0.1


def test_table_interpolation_and_range(table):
    # interior query agrees with the flat piece of max(1, |p|)
    assert table.interpolate(0.1) == pytest.approx(1.0, abs=0.02)
    mid = 0.5 * (table.values[3] + table.values[4])
    p_mid = 0.5 * (table.p_grid[3] + table.p_grid[4])
    assert table.interpolate(p_mid) == pytest.approx(mid, rel=1e-12)
    with pytest.raises(ValueError):
        table.interpolate(2.5)
    with pytest.raises(ValueError):
        table.interpolate(np.array([0.0, -3.0]))


def test_table_csv_layout(table, tmp_path):
    path = tmp_path / "hbar.csv"
    table.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "p,hbar,fit_slope"
    assert len(lines) == 1 + len(table.p_grid)
    first = lines[1].split(",")
    assert float(first[0]) == pytest.approx(table.p_grid[0])
    assert float(first[1]) == pytest.approx(table.values[0], rel=1e-11)


def test_table_needs_increasing_grid(hpot):
    with pytest.raises(ValueError):
        EffectiveTable.build(hpot, [0.0, 0.0, 1.0], (0.1, 0.05, 0.025),
                             TorusGrid.of(32))
    with pytest.raises(ValueError):
        EffectiveTable.build(hpot, [1.0], (0.1, 0.05, 0.025),
                             TorusGrid.of(32))


def test_discount_uniformity_check_stable_pair(hpot):
    grid = TorusGrid.of(64)
    chk = discount_uniformity_check(hpot, 0.0, 2.0, 0.1, grid)
    assert chk.rate_ok
    assert chk.lip_ratio <= 4.0 * (1.0 + hpot.lip_p)
    assert 0.7 <= chk.fit_slope <= 1.3
    payload = chk.to_json_dict()
    assert set(payload) >= {"p", "q", "discount", "lip_ratio", "fit_slope",
                            "rate_ok"}
    with pytest.raises(ValueError):
        discount_uniformity_check(hpot, 1.0, 1.0, 0.1, grid)
