import numpy as np
import pytest

from phdgp.core import (PHSystem, StructureError, TimeGrid, Trajectory, check_ph_structure,
                        continuous_power_residual, gradient_fd_error, read_trajectory_csv,
                        write_trajectory_csv)
from phdgp.models import MODELS, get_model, make_pendulum


def lti2(J):
    J = np.asarray(J, dtype=float)
    return PHSystem(n=2, m=0, E=lambda x: np.eye(2), J=lambda x: J, R=lambda x: np.zeros((2, 2)),
                    z=lambda x: x, B=lambda x: np.zeros((2, 0)), H=lambda x: 0.5 * x @ x,
                    gradH=lambda x: x)


def test_structure_exact_for_canonical_lti():
    rng = np.random.default_rng(0)
    rep = check_ph_structure(lti2([[0, 1], [-1, 0]]), rng.uniform(-1, 1, (20, 2)))
    assert rep.skew_defect == 0 and rep.symmetry_defect == 0
    assert rep.psd_defect == 0 and rep.factorization_defect == 0
    assert rep.passed


def test_structure_detects_skew_perturbation():
    eps = 1e-3
    rep = check_ph_structure(lti2([[0, 1], [-1 + eps, 0]]), [np.array([0.1, 0.2])], tol=1e-6)
    assert rep.skew_defect == pytest.approx(eps, rel=1e-12)
    assert not rep.passed
    np.testing.assert_array_equal(rep.skew_state, [0.1, 0.2])


def test_structure_detects_indefinite_R():
    sys = PHSystem(n=2, m=0, E=lambda x: np.eye(2), J=lambda x: np.zeros((2, 2)),
                   R=lambda x: np.diag([1.0, -0.5]), z=lambda x: x, B=lambda x: np.zeros((2, 0)),
                   H=lambda x: 0.5 * x @ x, gradH=lambda x: x)
    rep = check_ph_structure(sys, [np.zeros(2)])
    assert rep.min_eig_R == pytest.approx(-0.5)
    assert not rep.passed


def test_pendulum_structure_at_random_states():
    rng = np.random.default_rng(3)
    rep = check_ph_structure(make_pendulum(), rng.uniform(-2, 2, (100, 2)))
    assert max(rep.skew_defect, rep.symmetry_defect, rep.psd_defect,
               rep.factorization_defect) <= 1e-12


def test_dimension_mismatch_is_structural_error():
    bad = PHSystem(n=2, m=1, E=lambda x: np.eye(2), J=lambda x: np.zeros((2, 2)),
                   R=lambda x: np.zeros((2, 2)), z=lambda x: x, B=lambda x: np.zeros((2, 2)),
                   H=lambda x: 0.5 * x @ x, gradH=lambda x: x)
    with pytest.raises(StructureError, match="B returned shape"):
        check_ph_structure(bad, [np.zeros(2)])
    with pytest.raises(StructureError):
        PHSystem(n=0, m=0, E=None, J=None, R=None, z=None, B=None, H=None, gradH=None)


def test_power_residual_trivial_cases(quadratic_scalar):
    sys = lti2([[0, 1], [-1, 0]])
    assert continuous_power_residual(sys, np.array([0.3, -0.2]), np.zeros(2)) == 0.0
    x = np.array([0.3, -0.2])
    J = np.array([[0, 1], [-1, 0]])
    assert abs(continuous_power_residual(sys, x, J @ x)) <= 1e-16
    # scalar E=1, H=x^2/2, R=1 at x=1 with xdot=-1: -1*1 + 1 = 0
    assert continuous_power_residual(quadratic_scalar, np.array([1.0]), np.array([-1.0])) == 0.0


def test_power_residual_dimension_check():
    with pytest.raises(StructureError):
        continuous_power_residual(lti2(np.zeros((2, 2))), np.zeros(2), np.zeros(3))


@pytest.mark.parametrize("name", sorted(MODELS))
def test_gradient_matches_central_differences(name):
    spec = get_model(name)
    rng = np.random.default_rng(11)
    assert gradient_fd_error(spec.system, spec.sample_states(50, rng), h=1e-5) <= 1e-6


def test_time_grid_validation():
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0]))
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.1, 0.2]))
    with pytest.raises(ValueError):
        TimeGrid(np.array([0.0, 0.2, 0.2]))
    with pytest.raises(ValueError, match="does not divide"):
        TimeGrid.uniform(1.0, 0.3)
    g = TimeGrid.uniform(1.0, 0.25)
    assert g.q == 5
    np.testing.assert_allclose(g.midpoints, [0.125, 0.375, 0.625, 0.875])


def test_trajectory_length_checks():
    g = TimeGrid.uniform(1.0, 0.5)
    with pytest.raises(ValueError):
        Trajectory(g, np.zeros((2, 1)), np.zeros((2, 0)), np.zeros((2, 0)))
    with pytest.raises(ValueError):
        Trajectory(g, np.zeros((3, 1)), np.zeros((1, 0)), np.zeros((2, 0)))


def test_trajectory_csv_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    g = TimeGrid(np.cumsum(np.r_[0.0, rng.uniform(0.01, 0.1, 7)]))
    traj = Trajectory(g, rng.standard_normal((8, 3)), rng.standard_normal((7, 2)),
                      rng.standard_normal((7, 2)))
    write_trajectory_csv(traj, tmp_path / "s.csv", tmp_path / "p.csv")
    assert (tmp_path / "s.csv").read_text().splitlines()[0] == "t,x_1,x_2,x_3"
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "t_mid,u_1,u_2,y_1,y_2"
    back = read_trajectory_csv(tmp_path / "s.csv", tmp_path / "p.csv")
    np.testing.assert_array_equal(back.grid.points, g.points)
    np.testing.assert_array_equal(back.states, traj.states)
    np.testing.assert_array_equal(back.inputs_mid, traj.inputs_mid)
    np.testing.assert_array_equal(back.outputs_mid, traj.outputs_mid)
