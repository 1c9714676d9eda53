"""Tests for the region of vulnerability, participation factors and sensitivity."""

import math

import numpy as np
import pytest

from evcs_attack.attack import synthesize
from evcs_attack.dynamics import GeneratorTrip, Spectrum, capture_operating_state
from evcs_attack.vulnerability import (
    NOT_AVAILABLE_EPSILON,
    RegionSpec,
    SweepCell,
    SweepResult,
    achieved_cell,
    cell_of,
    dominant_states,
    evaluate_cell,
    modes_near,
    participation_factors,
    perturbed_builder,
    relocation_error,
    sensitivity,
    sweep,
    targets_from,
)

TOY_X = np.array([0.01, 0.02, 0.01])
SMALL_REGION = RegionSpec(xi_min=0.0, xi_max=0.03, xi_step=0.015, omega_min=5.0, omega_max=5.2, omega_step=0.1)


class TestRegion:
    """Test the (xi, omega_n) lattice."""

    def test_default_lattice(self):
        """Test the default region has 41 damping ratios and 102 frequencies."""
        region = RegionSpec()
        assert len(region.xi_values()) == 41
        assert len(region.omega_values()) == 102
        assert region.xi_values()[0] == -0.09
        assert region.xi_values()[-1] == 0.03
        assert region.omega_values()[-1] == 12.6
        assert len(region.cells()) == 41 * 102

    def test_cells_are_omega_major(self):
        """Test xi varies fastest."""
        cells = SMALL_REGION.cells()
        assert cells[:3] == [(0.0, 5.0), (0.015, 5.0), (0.03, 5.0)]
        assert cells[3] == (0.0, 5.1)

    def test_single_cell(self):
        """Test a zero-span region is one cell."""
        assert RegionSpec.single(0.03, 12.6).cells() == [(0.03, 12.6)]

    def test_rejects_bad_bounds(self):
        """Test inverted bounds, zero steps over a span and |xi| >= 1."""
        with pytest.raises(ValueError):
            RegionSpec(xi_min=0.1, xi_max=0.0)
        with pytest.raises(ValueError):
            RegionSpec(omega_step=0.0)
        with pytest.raises(ValueError):
            RegionSpec(xi_min=-1.0)
        with pytest.raises(ValueError):
            RegionSpec(omega_min=0.0, omega_max=1.0)

    def test_contains(self):
        """Test membership with a small tolerance."""
        assert RegionSpec().contains(0.03, 12.6)
        assert not RegionSpec().contains(0.05, 5.0)


class TestTargets:
    """Test conversion between cells and eigenvalues."""

    def test_targets_from_cell(self):
        """Test the conjugate pair for a damping ratio and natural frequency."""
        upper, lower = targets_from(0.03, 12.6)
        assert upper.real == pytest.approx(-0.378)
        assert upper.imag == pytest.approx(12.6 * math.sqrt(1 - 0.03**2))
        assert lower == upper.conjugate()

    def test_negative_damping_is_unstable(self):
        """Test xi < 0 puts the pair in the right half plane."""
        upper, _ = targets_from(-0.09, 2.5)
        assert upper.real == pytest.approx(0.225)

    def test_cell_round_trip(self):
        """Test cell_of inverts targets_from."""
        xi, omega_n = cell_of(targets_from(0.03, 12.6)[0])
        assert xi == pytest.approx(0.03)
        assert omega_n == pytest.approx(12.6)

    def test_rejects_non_oscillatory(self):
        """Test |xi| >= 1 and non-positive omega_n."""
        with pytest.raises(ValueError):
            targets_from(1.0, 5.0)
        with pytest.raises(ValueError):
            targets_from(0.1, 0.0)

    def test_relocation_error(self):
        """Test epsilon pairs targets with the closest achieved eigenvalues."""
        achieved = Spectrum(np.array([-5.0, -0.1 - 1.0j, -0.1 + 1.0j]))
        epsilon = relocation_error(achieved, [1.0j, -1.0j])
        assert epsilon == pytest.approx(0.1414, abs=1e-4)
        assert epsilon > NOT_AVAILABLE_EPSILON
        with pytest.raises(ValueError):
            relocation_error(Spectrum(np.array([-1.0])), [-1.0])

    def test_achieved_cell(self):
        """Test the cell of the achieved eigenvalue nearest the upper target."""
        target = targets_from(0.05, 4.0)
        achieved = Spectrum(np.array([-9.0, target[1], target[0]]))
        xi, omega_n = achieved_cell(achieved, target)
        assert xi == pytest.approx(0.05)
        assert omega_n == pytest.approx(4.0)


class TestParticipation:
    """Test participation factors."""

    def test_diagonal_matrix(self):
        """Test each state owns its own mode, columns in canonical order."""
        p = participation_factors(np.diag([-1.0, -2.0, -3.0]))
        np.testing.assert_allclose(p, [[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]], atol=1e-12)

    def test_columns_sum_to_one(self, toy_model):
        """Test normalization on a coupled model."""
        p = participation_factors(toy_model.A)
        np.testing.assert_allclose(p.sum(axis=0), 1.0)
        assert np.all(p >= 0)

    def test_defective_matrix(self):
        """Test a Jordan block has no participation factors."""
        with pytest.raises(ValueError, match="defective"):
            participation_factors(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_dominant_states(self):
        """Test the largest participations are listed first."""
        p = participation_factors(np.diag([-1.0, -2.0, -3.0]))
        assert dominant_states(p, ["a", "b", "c"], mode=0, count=1) == [("c", 1.0)]

    def test_modes_near(self):
        """Test lookup of the eigenvalue nearest each point."""
        eigs = np.array([-3.0, -1.0 - 2.0j, -1.0 + 2.0j])
        assert modes_near(eigs, [-1.0 + 1.9j, -2.9]) == [2, 0]


class TestSweep:
    """Test the region-of-vulnerability sweep."""

    def test_small_region(self, toy_model):
        """Test every cell of a 3 x 3 region is synthesized."""
        result = sweep(toy_model, TOY_X, 10.0, SMALL_REGION)
        assert len(result.cells) == 9
        assert result.metadata["cells"] == 9
        assert result.metadata["attack_node"] == "L"
        assert result.metadata["cap_mw"] == pytest.approx(1000.0)
        assert result.metadata["alpha_mw"] == 0.0
        assert all(c.feasible for c in result.cells)
        assert all(not c.not_available for c in result.cells)

        cell = result.cell(0.015, 5.1)
        assert cell.xi == 0.015
        assert cell.omega_n == 5.1

        matrix = result.matrix()
        assert matrix.shape == (3, 3)
        assert list(matrix.index) == [5.0, 5.1, 5.2]
        assert matrix.loc[5.1, 0.015] == pytest.approx(cell.delta_p_mw)

    def test_workers_do_not_change_results(self, toy_model):
        """Test concurrent evaluation keeps order and values."""
        serial = sweep(toy_model, TOY_X, 10.0, SMALL_REGION)
        parallel = sweep(toy_model, TOY_X, 10.0, SMALL_REGION, workers=3)
        assert [(c.xi, c.omega_n, c.delta_p_mw) for c in serial.cells] == [
            (c.xi, c.omega_n, c.delta_p_mw) for c in parallel.cells
        ]
        assert serial.metadata == parallel.metadata

    def test_failed_cell_is_marked(self, toy_model):
        """Test a synthesis failure becomes an unavailable, infeasible cell."""
        cell = evaluate_cell(toy_model, np.array([np.nan, 0.0, 0.0]), 10.0, 0.0, 5.0)
        assert not cell.feasible
        assert cell.delta_p_mw is None
        assert cell.not_available
        assert "solve" in cell.error

    def test_unavailable_cells_are_missing_from_the_table(self):
        """Test cells above the epsilon limit become NaN in the matrix."""
        cells = [
            SweepCell(0.0, 5.0, (), 12.0, 0.01, True),
            SweepCell(0.1, 5.0, (), 30.0, 0.5, True),
        ]
        result = SweepResult(cells, [0.0, 0.1], [5.0])
        matrix = result.matrix()
        assert matrix.loc[5.0, 0.0] == 12.0
        assert np.isnan(matrix.loc[5.0, 0.1])
        assert list(result.long_frame()["not_available"]) == [False, True]


class TestSensitivity:
    """Test minimum demand under grid-parameter errors."""

    def test_rows_per_error(self, toy_spec):
        """Test each parameter error rebuilds the model and re-synthesizes."""
        rows = sensitivity(perturbed_builder(toy_spec, "L"), [-10.0, 0.0, 10.0], (0.03, 5.0), TOY_X, 10.0)
        assert [r.error_pct for r in rows] == [-10.0, 0.0, 10.0]
        for row in rows:
            assert row.feasible
            assert not row.not_available
            assert row.xi == pytest.approx(0.03, abs=1e-6)
            assert row.omega_n == pytest.approx(5.0, abs=1e-6)

    def test_error_changes_the_demand(self, toy_spec):
        """Test the model really is rebuilt."""
        rows = sensitivity(perturbed_builder(toy_spec, "L"), [-50.0, 50.0], (0.03, 5.0), TOY_X, 10.0)
        assert rows[0].delta_p_mw != pytest.approx(rows[1].delta_p_mw)

    def test_invalid_error_is_a_row(self, toy_spec):
        """Test an impossible perturbation is reported in its row."""
        rows = sensitivity(perturbed_builder(toy_spec, "L"), [-100.0], (0.03, 5.0), TOY_X, 10.0)
        assert not rows[0].feasible
        assert rows[0].not_available
        assert rows[0].error

    def test_non_finite_error_raises(self, toy_spec):
        """Test NaN parameter errors are refused."""
        with pytest.raises(ValueError):
            sensitivity(perturbed_builder(toy_spec, "L"), [math.nan], (0.03, 5.0), TOY_X, 10.0)

    def test_empty_list(self, toy_spec):
        """Test no errors gives no rows."""
        assert sensitivity(perturbed_builder(toy_spec, "L"), [], (0.03, 5.0), TOY_X, 10.0) == []


COARSE_REGION = RegionSpec(xi_min=-0.09, xi_max=0.03, xi_step=0.06, omega_min=2.5, omega_max=12.5, omega_step=5.0)


@pytest.fixture(scope="module")
def bundled_state(manhattan_spec, manhattan_model):
    return capture_operating_state(manhattan_model, GeneratorTrip.from_spec(manhattan_spec, "B7"))[1]


class TestBundledGrid:
    """Test the region and sensitivity analyses on the bundled grid attacked from B4."""

    def test_movable_modes_are_the_fast_angle_modes(self, manhattan_model):
        """Test the two fastest modes belong to the B4 and B6 load angles."""
        p = participation_factors(manhattan_model.A)
        names = manhattan_model.index_map.state_names()
        assert dominant_states(p, names, mode=0, count=1)[0][0] == "theta_B4"
        assert dominant_states(p, names, mode=1, count=1)[0][0] == "theta_B6"
        np.testing.assert_allclose(p.sum(axis=0), 1.0)

    def test_every_cell_is_available(self, manhattan_model, bundled_state):
        """Test a coarse lattice is reached everywhere, so no cell is N/A."""
        result = sweep(manhattan_model, bundled_state, math.inf, COARSE_REGION)
        assert len(result.cells) == 9
        for cell in result.cells:
            assert cell.error == ""
            assert cell.epsilon < 1e-6
            assert cell.feasible
            assert not cell.not_available
        assert not result.matrix().isna().any().any()

    def test_parameter_errors(self, manhattan_spec, manhattan_model, bundled_state):
        """Test small errors stay within 25 % of the true demand and doubling every parameter does not."""
        cell = (0.03, 12.6)
        required = synthesize(manhattan_model, targets_from(*cell), bundled_state, math.inf).delta_p_mw
        errors = [-10.0, -7.5, -2.5, 0.0, 2.5, 7.5, 10.0, 100.0]
        rows = sensitivity(
            perturbed_builder(manhattan_spec, "B4"), errors, cell, bundled_state, 1.5 * required / 100.0
        )

        by_error = {row.error_pct: row for row in rows}
        assert by_error[0.0].delta_p_mw == pytest.approx(required, rel=1e-9)
        for error in errors[:-1]:
            row = by_error[error]
            assert row.feasible, row.error
            assert abs(row.delta_p_mw - required) <= 0.25 * required
        assert not by_error[100.0].feasible
