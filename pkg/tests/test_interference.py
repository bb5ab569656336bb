"Tests for the analytic two-photon interference kernel"
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from vvhom.abstractions import Configuration
from vvhom.interference import (BiphotonInput, ProjectionPair, amplitude_cross, analytic_visibility_table,
                                closed_form_label, coincidence_at_delay, coincidence_in, coincidence_out,
                                integrated_visibility_table, visibility_pointwise)
from vvhom.jones import PolVector
from vvhom.modes import RadialProfile, TemporalEnvelope, make_vv_mode, temporal_overlap

CONFIGURATIONS: list[Configuration] = list(Configuration)
angles = st.floats(min_value=0., max_value=2*np.pi, allow_nan=False)


def test_cross_terms(radial_pi, projections):
    first, second = amplitude_cross(radial_pi, projections[Configuration.HH], 0., 0.)
    assert first == pytest.approx(1.) and second == pytest.approx(1.)
    first, second = amplitude_cross(radial_pi, projections[Configuration.HV], np.pi/4, np.pi/4)
    assert first == pytest.approx(-.5) and second == pytest.approx(.5)


def test_orthogonal_projection_cancels_both_terms(radial_pi):
    # V is orthogonal to both fields on the horizontal axis
    projection: ProjectionPair = ProjectionPair(PolVector(0., 1.), PolVector(1., 0.))
    first, second = amplitude_cross(radial_pi, projection, 0., .7)
    assert abs(first) < 1e-15 and abs(second) < 1e-15


def test_closed_form_coincidences(radial_pi, projections, rng):
    phi1, phi2 = rng.uniform(0., 2*np.pi, (2, 500))
    np.testing.assert_allclose(coincidence_in(radial_pi, projections[Configuration.HH], phi1, phi2), 0., atol=1e-15)
    np.testing.assert_allclose(coincidence_out(radial_pi, projections[Configuration.HH], phi1, phi2),
                               np.cos(phi1)**2*np.cos(phi2)**2/2, atol=1e-15)
    np.testing.assert_allclose(coincidence_in(radial_pi, projections[Configuration.HV], phi1, phi2),
                               np.cos(phi1)**2*np.sin(phi2)**2, atol=1e-15)
    np.testing.assert_allclose(coincidence_out(radial_pi, projections[Configuration.HV], phi1, phi2),
                               np.cos(phi1)**2*np.sin(phi2)**2/2, atol=1e-15)
    np.testing.assert_allclose(coincidence_out(radial_pi, projections[Configuration.AH], phi1, phi2),
                               np.cos(phi2)**2/4, atol=1e-15)
    np.testing.assert_allclose(coincidence_in(radial_pi, projections[Configuration.AA], phi1, phi2),
                               np.sin(phi1 - phi2)**2/4, atol=1e-15)
    assert coincidence_in(radial_pi, projections[Configuration.AA], 0., 0.) == pytest.approx(0., abs=1e-30)


def test_delay_endpoints(radial_pi, projections, rng):
    envelope: TemporalEnvelope = radial_pi.mode_a.envelope
    for _ in range(1000):
        configuration: Configuration = CONFIGURATIONS[rng.integers(len(CONFIGURATIONS))]
        phi1, phi2 = rng.uniform(0., 2*np.pi, 2)
        projection: ProjectionPair = projections[configuration]
        assert abs(coincidence_at_delay(radial_pi, projection, phi1, phi2, 0.) -
                   coincidence_in(radial_pi, projection, phi1, phi2)) < 1e-12
        assert abs(coincidence_at_delay(radial_pi, projection, phi1, phi2, 10*envelope.sigma) -
                   coincidence_out(radial_pi, projection, phi1, phi2)) < 1e-9


def test_half_damped_hh_is_half_out(radial_pi, projections):
    envelope: TemporalEnvelope = radial_pi.mode_a.envelope
    # chi^2 = 1/2
    delay: float = envelope.sigma*np.sqrt(np.log(2))
    assert temporal_overlap(envelope, delay)**2 == pytest.approx(.5)
    phi1, phi2 = .4, 1.1
    assert coincidence_at_delay(radial_pi, projections[Configuration.HH], phi1, phi2, delay) == \
        pytest.approx(coincidence_out(radial_pi, projections[Configuration.HH], phi1, phi2)/2, rel=1e-12)


def test_delay_stored_in_the_pair(projections):
    tuned: BiphotonInput = BiphotonInput(make_vv_mode('radial'), make_vv_mode('pi'), 0.)
    detuned: BiphotonInput = BiphotonInput(make_vv_mode('radial'), make_vv_mode('pi'), 1e-9)
    projection: ProjectionPair = projections[Configuration.HV]
    assert coincidence_at_delay(tuned, projection, .3, .9) == pytest.approx(
        coincidence_in(tuned, projection, .3, .9))
    assert coincidence_at_delay(detuned, projection, .3, .9) == pytest.approx(
        coincidence_out(tuned, projection, .3, .9))


@settings(max_examples=300)
@given(phi1=angles, phi2=angles, first=st.floats(0., 3e-12), second=st.floats(0., 3e-12))
def test_delay_curve_is_even_and_monotone(phi1, phi2, first, second):
    pair: BiphotonInput = BiphotonInput(make_vv_mode('radial'), make_vv_mode('pi'))
    projection: ProjectionPair = ProjectionPair.from_configuration('AH')
    assert coincidence_at_delay(pair, projection, phi1, phi2, first) == \
        coincidence_at_delay(pair, projection, phi1, phi2, -first)
    low, high = sorted((first, second))
    values = [coincidence_at_delay(pair, projection, phi1, phi2, delay) for delay in (0., low, high)]
    c_in, c_out = coincidence_in(pair, projection, phi1, phi2), coincidence_out(pair, projection, phi1, phi2)
    if c_in <= c_out:
        assert values[0] <= values[1] + 1e-15 <= values[2] + 2e-15
    else:
        assert values[0] + 2e-15 >= values[1] + 1e-15 >= values[2]


@pytest.mark.parametrize("configuration", CONFIGURATIONS)
def test_pointwise_visibility_matches_closed_forms(radial_pi, configuration, rng):
    phi1, phi2 = rng.uniform(0., 2*np.pi, (2, 10_000))
    projection: ProjectionPair = ProjectionPair.from_configuration(configuration)
    engine: np.ma.MaskedArray = visibility_pointwise(radial_pi, projection, phi1, phi2)
    table: np.ndarray = analytic_visibility_table(configuration, phi1, phi2)
    defined: np.ndarray = ~np.ma.getmaskarray(engine)
    assert defined.mean() > .99
    np.testing.assert_allclose(engine.data[defined], table[defined], atol=1e-10)
    assert np.all(np.abs(engine.data[defined]) <= 1. + 1e-12)


def test_known_visibilities(radial_pi, projections):
    hh: np.ma.MaskedArray = visibility_pointwise(
        radial_pi, projections[Configuration.HH], np.array([.1, np.pi/2, 2.]), np.array([.3, .3, 4.]))
    assert list(np.ma.getmaskarray(hh)) == [False, True, False]
    np.testing.assert_allclose(hh.data[[0, 2]], 1.)
    assert visibility_pointwise(radial_pi, projections[Configuration.HH], np.pi/2, 0.) is None
    assert visibility_pointwise(radial_pi, projections[Configuration.HA], .3, .8) == pytest.approx(np.cos(1.6))


def test_antidiagonal_closed_forms():
    # with A = (1, -1)/sqrt(2) the AA form depends on phi1 + phi2 through the cosine
    assert analytic_visibility_table('AA', .2, .5) == pytest.approx(
        (np.cos(.7)**2 - np.sin(-.3)**2)/(np.cos(.7)**2 + np.sin(-.3)**2))
    assert analytic_visibility_table('AD', .2, .5) == pytest.approx(
        (np.cos(-.3)**2 - np.sin(.7)**2)/(np.cos(-.3)**2 + np.sin(.7)**2))
    assert analytic_visibility_table('AD', 0., 0.) == pytest.approx(1.)


@pytest.mark.parametrize("phi1,expected", [(0., 1.), (np.pi/2, -1.), (np.pi/4, 0.)])
def test_camera_lobes(phi1, expected):
    assert analytic_visibility_table('AH', phi1, 1.234) == pytest.approx(expected, abs=1e-15)
    assert analytic_visibility_table('AV', phi1, 1.234) == pytest.approx(-expected, abs=1e-15)


def test_integrated_table():
    phi1: np.ndarray = np.linspace(0., np.pi, 7)
    np.testing.assert_allclose(integrated_visibility_table('AH', phi1), np.cos(2*phi1))
    np.testing.assert_allclose(integrated_visibility_table('HV', phi1), -1.)
    for name in ('HA', 'HD', 'AA', 'AD'):
        np.testing.assert_allclose(integrated_visibility_table(name, phi1), 0.)
    assert closed_form_label(Configuration.AV, integrated=True) == "-cos(2 phi1)"


def test_unknown_configuration():
    for table, angles in ((analytic_visibility_table, (0., 0.)), (integrated_visibility_table, (0.,))):
        with pytest.raises(ValueError, match='is not one of HH, HV'):
            table('XY', *angles)
    with pytest.raises(ValueError):
        ProjectionPair.from_configuration('XY')


def test_projections_must_be_normalized():
    with pytest.raises(ValueError):
        ProjectionPair(PolVector(1., 1.), PolVector(1., 0.))


def test_pair_must_share_profile_and_envelope():
    with pytest.raises(ValueError):
        BiphotonInput(make_vv_mode('radial'), make_vv_mode('pi', radial=RadialProfile(waist=2.)))
    with pytest.raises(ValueError):
        BiphotonInput(make_vv_mode('radial'), make_vv_mode('pi', envelope=TemporalEnvelope(sigma=2e-12)))


@settings(max_examples=1000)
@given(phi1=angles, phi2=angles, theta1=angles, theta2=angles)
def test_kernel_bounds_and_exchange_symmetry(phi1, phi2, theta1, theta2):
    pair: BiphotonInput = BiphotonInput(make_vv_mode('radial'), make_vv_mode('pi'))
    projection: ProjectionPair = ProjectionPair(
        PolVector(np.cos(theta1), np.sin(theta1)), PolVector(np.cos(theta2), np.sin(theta2)))
    c_in: float = coincidence_in(pair, projection, phi1, phi2)
    c_out: float = coincidence_out(pair, projection, phi1, phi2)
    assert 0. <= c_in <= 2*c_out + 1e-15
    assert abs(coincidence_in(pair.swapped(), projection, phi1, phi2) - c_in) < 1e-15


def test_identical_modes_bunch_everywhere(rng):
    pair: BiphotonInput = BiphotonInput(make_vv_mode('radial'), make_vv_mode('radial'))
    phi1, phi2 = rng.uniform(0., 2*np.pi, (2, 1000))
    for configuration in CONFIGURATIONS:
        projection: ProjectionPair = ProjectionPair.from_configuration(configuration)
        visibility: np.ma.MaskedArray = visibility_pointwise(pair, projection, phi1, phi2)
        np.testing.assert_allclose(visibility.compressed(), 1., atol=1e-9)
