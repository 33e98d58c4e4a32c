import math

import numpy as np
import pytest
from pydantic import ValidationError

from sepradar.estimators.baseline2d import AmbiguitySurface
from sepradar.estimators.separable import DelayProfile
from sepradar.exceptions import InvalidArgumentError, NoTargetSignalError, UnderdeterminedError
from sepradar.fusion.geometry import bistatic_delay, bistatic_doppler, node_parameters
from sepradar.fusion.service import joint_search, localize, velocity_from_dopplers
from sepradar.schemas import Geometry, TargetState

CARRIER = 2 * math.pi * 6e8
TAU_GRID = np.arange(0, 3001) * 1e-9


@pytest.fixture
def geom():
    return Geometry(
        io_pos=(0.0, 0.0),
        node_pos=[(1000.0, 0.0), (-1000.0, 0.0), (0.0, 1000.0), (0.0, -1000.0)],
        carrier=CARRIER,
    )


@pytest.fixture
def target():
    return TargetState(pos=(100.0, 80.0), vel=(-8.0, 6.0))


def peaked_profile(tau: float) -> DelayProfile:
    return DelayProfile(TAU_GRID, np.exp(-(((TAU_GRID - tau) / 2e-8) ** 2)))


def test_localize_recovers_the_position(geom, target):
    profiles = [peaked_profile(tau) for tau, _ in node_parameters(geom, target)]
    xs = np.linspace(0.0, 199.0, 200)
    ys = np.linspace(0.0, 199.0, 200)
    loc = localize(profiles, geom, (xs, ys))
    assert abs(loc.pos_hat[0] - 100.0) <= 1.0
    assert abs(loc.pos_hat[1] - 80.0) <= 1.0
    assert loc.values.shape == (200, 200)


def test_velocity_from_exact_dopplers(geom, target):
    omegas = [omega for _, omega in node_parameters(geom, target)]
    fit = velocity_from_dopplers(geom, target.pos, omegas)
    np.testing.assert_allclose(fit.vel_hat, target.vel, rtol=1e-6)
    assert fit.residual_norm < 1e-6


def test_doppler_is_the_delay_rate(geom, target):
    pos, vel = np.array(target.pos), np.array(target.vel)
    h = 1e-3
    for k in range(geom.n_nodes):
        rate = (bistatic_delay(geom, k, pos + h * vel) - bistatic_delay(geom, k, pos - h * vel)) / (2 * h)
        assert bistatic_doppler(geom, k, pos, vel) == pytest.approx(-CARRIER * rate, rel=1e-4)


def test_closing_target_has_positive_doppler(geom):
    # Moving straight toward the illuminator and node 0 from beyond node 0
    assert bistatic_doppler(geom, 0, (2000.0, 0.0), (-10.0, 0.0)) > 0


def test_direct_path_has_zero_delay(geom):
    assert bistatic_delay(geom, 0, (500.0, 0.0)) == pytest.approx(0.0, abs=1e-15)


def test_single_node_velocity_is_underdetermined(target):
    geom = Geometry(io_pos=(0.0, 0.0), node_pos=[(1000.0, 0.0)], carrier=CARRIER)
    with pytest.raises(UnderdeterminedError):
        velocity_from_dopplers(geom, target.pos, [10.0])


def test_empty_fusion_map(geom):
    profiles = [DelayProfile(TAU_GRID, np.zeros(TAU_GRID.size)) for _ in range(4)]
    with pytest.raises(NoTargetSignalError):
        localize(profiles, geom, (np.linspace(0, 10, 5), np.linspace(0, 10, 5)))


def test_node_count_must_match(geom, target):
    with pytest.raises(InvalidArgumentError):
        localize([peaked_profile(1e-7)], geom, (np.arange(3.0), np.arange(3.0)))


def test_target_on_a_site_is_rejected(geom):
    with pytest.raises(InvalidArgumentError):
        bistatic_doppler(geom, 0, (1000.0, 0.0), (1.0, 0.0))


def test_node_on_the_illuminator_is_rejected():
    with pytest.raises(ValidationError):
        Geometry(io_pos=(0.0, 0.0), node_pos=[(0.0, 0.0)], carrier=CARRIER)


def test_joint_search_recovers_position_and_velocity(geom, target):
    tau_grid = np.arange(0, 501) * 2e-9
    omega_grid = np.arange(-600.0, 601.0)
    surfaces = []
    for tau, omega in node_parameters(geom, target):
        values = np.exp(-(((tau_grid[:, None] - tau) / 2e-8) ** 2) - ((omega_grid[None, :] - omega) / 20.0) ** 2)
        surfaces.append(AmbiguitySurface(tau_grid, omega_grid, values))
    est = joint_search(
        surfaces,
        geom,
        (np.arange(95.0, 106.0), np.arange(75.0, 86.0)),
        (np.arange(-10.0, -5.0), np.arange(4.0, 9.0)),
    )
    assert est.pos_hat == (100.0, 80.0)
    assert est.vel_hat == (-8.0, 6.0)


def test_single_node_lands_on_its_delay_ellipse(target):
    geom = Geometry(io_pos=(0.0, 0.0), node_pos=[(1000.0, 0.0)], carrier=CARRIER)
    tau, _ = node_parameters(geom, target)[0]
    profile = peaked_profile(tau)
    grid = (np.linspace(0.0, 199.0, 200), np.linspace(0.0, 199.0, 200))
    loc = localize([profile], geom, grid)
    assert abs(bistatic_delay(geom, 0, loc.pos_hat) - tau) < profile.step


def test_node_order_does_not_matter(geom, target):
    profiles = [peaked_profile(tau) for tau, _ in node_parameters(geom, target)]
    reversed_geom = geom.model_copy(update={"node_pos": geom.node_pos[::-1]})
    grid = (np.linspace(50.0, 149.0, 100), np.linspace(30.0, 129.0, 100))
    forward = localize(profiles, geom, grid)
    backward = localize(profiles[::-1], reversed_geom, grid)
    assert backward.pos_hat == forward.pos_hat
    np.testing.assert_allclose(backward.values, forward.values, rtol=1e-12)


def test_silent_node_leaves_the_position(geom, target):
    profiles = [peaked_profile(tau) for tau, _ in node_parameters(geom, target)]
    grid = (np.linspace(50.0, 149.0, 100), np.linspace(30.0, 129.0, 100))
    wider = geom.model_copy(update={"node_pos": [*geom.node_pos, (700.0, 700.0)]})
    silent = DelayProfile(TAU_GRID, np.zeros(TAU_GRID.size))
    assert localize([*profiles, silent], wider, grid).pos_hat == localize(profiles, geom, grid).pos_hat


def test_collinear_nodes_leave_velocity_underdetermined():
    geom = Geometry(
        io_pos=(0.0, 0.0), node_pos=[(-1000.0, 0.0), (-2000.0, 0.0), (3000.0, 0.0)], carrier=CARRIER
    )
    pos = (100.0, 0.0)
    omegas = [bistatic_doppler(geom, k, pos, (5.0, 0.0)) for k in range(3)]
    with pytest.raises(UnderdeterminedError):
        velocity_from_dopplers(geom, pos, omegas)
