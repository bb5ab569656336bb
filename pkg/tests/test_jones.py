"Tests for Jones calculus elements"
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from vvhom.abstractions import ElementKind
from vvhom.jones import (Element, ElementChain, PolOperator, PolVector, polarizer, polarizer_vector, project,
                         project_field, qplate, qplate_matrix, waveplate)

angles = st.floats(min_value=-2*np.pi, max_value=2*np.pi,
                   allow_nan=False, allow_infinity=False)
charges = st.sampled_from([-1.5, -1., -.5, .5, 1., 1.5, 2.])

H: PolVector = PolVector(1., 0.)
V: PolVector = PolVector(0., 1.)


def test_half_waveplate_at_zero_is_exact():
    assert np.array_equal(waveplate(np.pi, 0.).m, np.diag([1., -1.]))


@pytest.mark.parametrize("axis", [0., .3, np.pi/4, 2.])
def test_zero_retardance_is_identity(axis):
    np.testing.assert_allclose(waveplate(0., axis).m, np.eye(2), atol=1e-15)


def test_half_waveplate_at_45_degrees_swaps_h_and_v():
    output: PolVector = waveplate(np.pi, np.pi/4) @ H
    assert abs(abs(project(V, output)) - 1.) < 1e-12


def test_half_waveplate_at_22_5_degrees_makes_diagonal():
    output: PolVector = waveplate(np.pi, np.pi/8) @ H
    np.testing.assert_allclose(output.as_array(), PolVector.named('D').as_array(), atol=1e-12)


@settings(max_examples=1000)
@given(retardance=angles, axis=angles)
def test_waveplates_are_unitary(retardance, axis):
    assert waveplate(retardance, axis).is_unitary()


@settings(max_examples=1000)
@given(q=charges, offset=angles, phi=angles)
def test_qplate_samples_are_unitary_and_hermitian(q, offset, phi):
    operator: PolOperator = qplate(q, offset)(phi)
    assert operator.is_unitary()
    assert operator.is_hermitian()


def test_qplate_on_horizontal_gives_radial_field():
    phi: np.ndarray = np.linspace(0., 2*np.pi, 37)
    output: np.ndarray = qplate_matrix(.5, 0., phi) @ H.as_array()
    np.testing.assert_allclose(output, np.stack([np.cos(phi), np.sin(phi)], axis=-1), atol=1e-12)


def test_qplate_at_origin_is_half_waveplate():
    np.testing.assert_allclose(qplate(.5, 0.)(0.).m, np.diag([1., -1.]), atol=1e-15)


def test_waveplate_after_qplate_gives_pi_field():
    chain: ElementChain = ElementChain((
        Element(ElementKind.QPLATE, (.5, 0.)),
        Element(ElementKind.WAVEPLATE, (np.pi, 0.)),
    ))
    for phi in np.linspace(0., 2*np.pi, 25):
        output: PolVector = chain.at(phi) @ H
        np.testing.assert_allclose(output.as_array(), [np.cos(phi), -np.sin(phi)], atol=1e-12)


@pytest.mark.parametrize("angle,expected", [
    (0., (1., 0.)),
    (np.pi/2, (0., 1.)),
    (np.pi/4, (1/np.sqrt(2), 1/np.sqrt(2))),
    (-np.pi/4, (1/np.sqrt(2), -1/np.sqrt(2))),
])
def test_polarizer_vectors(angle, expected):
    vector: PolVector = polarizer_vector(angle)
    np.testing.assert_allclose(vector.as_array(), expected, atol=1e-15)
    assert vector.is_normalized()


def test_named_antidiagonal_convention():
    np.testing.assert_allclose(PolVector.named('A').as_array(), np.array([1., -1.])/np.sqrt(2), atol=1e-15)


def test_unknown_polarization_name():
    with pytest.raises(ValueError):
        PolVector.named('R')


@settings(max_examples=1000)
@given(angle=angles)
def test_polarizer_projectors_are_idempotent(angle):
    assert polarizer(angle).is_projector()


@settings(max_examples=1000)
@given(theta=angles, phase=angles)
def test_normalized_vectors(theta, phase):
    vector: PolVector = PolVector(np.cos(theta), np.sin(theta)*np.exp(1j*phase))
    assert vector.is_normalized()
    assert PolVector(3*vector.h, 3*vector.v).normalized().is_normalized()


@pytest.mark.parametrize("phi", np.linspace(0., 2*np.pi, 9))
def test_projections_on_vector_vortex_fields(phi):
    radial: PolVector = PolVector(np.cos(phi), np.sin(phi))
    pi_mode: PolVector = PolVector(np.cos(phi), -np.sin(phi))
    assert project(H, V) == 0
    assert abs(project(H, radial) - np.cos(phi)) < 1e-15
    assert abs(project(PolVector.named('A'), pi_mode) - (np.cos(phi) + np.sin(phi))/np.sqrt(2)) < 1e-12


def test_projection_is_conjugate_linear():
    right: PolVector = PolVector(1/np.sqrt(2), 1j/np.sqrt(2))
    assert abs(project(right, right) - 1.) < 1e-15
    np.testing.assert_allclose(project_field(right, np.array([[1/np.sqrt(2), 1j/np.sqrt(2)]])), [1.])


@settings(max_examples=200)
@given(first=angles, second=angles, third=angles, phi=angles)
def test_chain_product_is_associative(first, second, third, phi):
    elements: tuple[Element, ...] = (
        Element(ElementKind.WAVEPLATE, (first, second)),
        Element(ElementKind.QPLATE, (.5, third)),
        Element(ElementKind.POLARIZER, (first,)),
    )
    a, b, c = (element.matrices(phi) for element in elements)
    np.testing.assert_allclose(ElementChain(elements).matrices(phi), c @ (b @ a), atol=1e-12)
    np.testing.assert_allclose(ElementChain(elements).matrices(phi), (c @ b) @ a, atol=1e-12)


def test_chain_is_vectorized():
    chain: ElementChain = ElementChain((Element(ElementKind.QPLATE, (.5, 0.)),))
    assert chain.matrices(np.zeros((3, 4))).shape == (3, 4, 2, 2)


def test_malformed_operators_and_elements():
    with pytest.raises(ValueError):
        PolOperator(np.eye(3))
    with pytest.raises(ValueError):
        Element(ElementKind.POLARIZER, (0., 1.))
    with pytest.raises(ValueError):
        PolVector(0., 0.).normalized()


def test_operators_are_immutable():
    operator: PolOperator = waveplate(np.pi/2, 0.)
    with pytest.raises(ValueError):
        operator.m[0, 0] = 2.
