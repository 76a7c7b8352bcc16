import numpy as np
import pytest

from detumble.geomag import (
    DIPOLE_STRENGTH,
    R_EARTH,
    OrbitConfig,
    PlanarRotating,
    StaticInertial,
    TiltedDipole,
    effective_field_rotation_rate,
    field_inertial,
)


def dipole_magnitude(strength, r, mag_latitude):
    return strength / r**3 * np.sqrt(1 + 3 * np.sin(mag_latitude) ** 2)


def test_static_field_is_constant():
    model = StaticInertial([30e-6, 0, 0])
    for t in (-5.0, 0.0, 1e4):
        np.testing.assert_array_equal(field_inertial(model, t), [30e-6, 0, 0])


def test_planar_rotating_is_periodic_and_norm_preserving():
    model = PlanarRotating([2e-5, 1e-5, 3e-5], [0.2, 0.1, 1.0], 2e-3)
    period = 2 * np.pi / model.rate
    b0 = field_inertial(model, 0.0)
    np.testing.assert_allclose(field_inertial(model, period), b0, rtol=0, atol=1e-12 * np.linalg.norm(b0))
    for t in np.linspace(0, period, 17):
        assert np.linalg.norm(field_inertial(model, t)) == pytest.approx(np.linalg.norm(b0), rel=1e-14)


def test_planar_rotating_turns_right_handed():
    model = PlanarRotating([1, 0, 0], [0, 0, 1], 1.0)
    np.testing.assert_allclose(field_inertial(model, np.pi / 2), [0, 1, 0], atol=1e-15)


def test_equatorial_untilted_dipole_matches_closed_form():
    r = R_EARTH + 500e3
    model = TiltedDipole(orbit_radius=r, inclination=0.0, dipole_tilt=0.0)
    for t in (0.0, 600.0, 2500.0):
        assert np.linalg.norm(field_inertial(model, t)) == pytest.approx(DIPOLE_STRENGTH / r**3, rel=1e-12)


def test_polar_dipole_magnitude_follows_latitude():
    r = R_EARTH + 500e3
    model = TiltedDipole(orbit_radius=r, inclination=np.pi / 2)
    for t in np.linspace(0, model.period, 9):
        lat = model.orbit_phase0 + model.mean_motion * t  # argument of latitude is the latitude here
        assert np.linalg.norm(field_inertial(model, t)) == pytest.approx(
            dipole_magnitude(DIPOLE_STRENGTH, r, lat), rel=1e-12)


def test_default_dipole_strength_reproduces_surface_equator_value():
    model = TiltedDipole(orbit_radius=R_EARTH, inclination=0.0)
    assert np.linalg.norm(field_inertial(model, 0.0)) == pytest.approx(3.12e-5, rel=1e-12)
    leo = np.linalg.norm(field_inertial(TiltedDipole(), 0.0))
    assert 2e-5 < leo < 5e-5


def test_dipole_field_points_north_at_equator():
    model = TiltedDipole(inclination=np.pi / 2)
    b = field_inertial(model, 0.0)
    assert b[2] > 0 and abs(b[0]) < 1e-20


def test_dipole_repeats_each_orbit():
    model = TiltedDipole(inclination=1.7, orbit_phase0=0.3, dipole_tilt=np.deg2rad(11))
    for t in (0.0, 1234.5):
        b = field_inertial(model, t)
        np.testing.assert_allclose(field_inertial(model, t + model.period), b,
                                   rtol=0, atol=1e-9 * np.linalg.norm(b))


@pytest.mark.parametrize("model", [
    StaticInertial([1.0, 2.0, 3.0]),
    PlanarRotating([1e-5, 2e-5, 0.0], [0, 0, 1], 0.01),
    TiltedDipole(inclination=1.0, dipole_tilt=0.2),
])
def test_fields_are_continuous_and_nonzero(model):
    t = 321.0
    b = field_inertial(model, t)
    assert np.linalg.norm(b) > 0
    gaps = [np.linalg.norm(field_inertial(model, t + d) - b) for d in (1e-1, 1e-2, 1e-3)]
    assert gaps[2] <= gaps[1] <= gaps[0]
    assert gaps[2] <= 1e-2 * np.linalg.norm(b)


def test_rotation_rate_static_and_planar():
    assert effective_field_rotation_rate(StaticInertial([1, 0, 0])) == 0.0
    assert effective_field_rotation_rate(PlanarRotating([1, 0, 0], [0, 0, 1], 2e-3)) == 2e-3


def test_polar_dipole_turns_twice_per_orbit():
    orbit = OrbitConfig(t_orb=5400.0, xi=np.pi / 2)
    rate = effective_field_rotation_rate(TiltedDipole(), orbit)
    assert rate == pytest.approx(2 * 2 * np.pi / 5400.0, rel=1e-3)
    # same order as the orbital rate, far below tumbling rates
    assert 1e-3 < rate < 1e-2


def test_equatorial_untilted_dipole_does_not_turn():
    orbit = OrbitConfig(t_orb=5400.0, xi=0.0)
    assert effective_field_rotation_rate(TiltedDipole(), orbit) < 1e-9


def test_orbit_config_validation():
    with pytest.raises(ValueError):
        OrbitConfig(0.0, 0.1)
    with pytest.raises(ValueError):
        OrbitConfig(5400.0, 2.0)
    with pytest.raises(ValueError):
        StaticInertial([0, 0, 0])
