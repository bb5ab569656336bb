"Single-photon transverse modes: polarization field, radial profile and temporal envelope"
from dataclasses import dataclass, field
from functools import cache
from math import factorial, sqrt
from typing import Callable
from warnings import warn
import numpy as np
from scipy.integrate import quad
from vvhom.abstractions import ElementKind, EnvelopeShape, RadialKind
from vvhom.jones import ElementChain, PolVector

NAMED_MODES: tuple[str, ...] = ('radial', 'pi')


@dataclass(frozen=True)
class RadialProfile:
    """Radial amplitude profile f(r) of a mode, normalized so that the integral of f^2(r) r dr is 1.

    Parameters
    ----------
    kind : RadialKind
        ring or uniform
    waist : float, optional
        ring waist w, f proportional to r^order exp(-r^2/w^2), by default 1.
    radius : float, optional
        uniform disk radius R, by default 1.
    order : int, optional
        vortex order of the ring, by default 1 (first-order vector vortex modes)
    """
    kind: RadialKind = RadialKind.RING
    waist: float = 1.
    radius: float = 1.
    order: int = 1

    def __post_init__(self) -> None:
        if self.waist <= 0. or self.radius <= 0.:
            raise ValueError(
                f"Radial profile lengths must be positive (waist={self.waist}, radius={self.radius}).")
        if self.order < 0:
            raise ValueError(f"Vortex order must be >= 0, got {self.order}.")

    def fluence(self, r: np.ndarray | float) -> np.ndarray:
        "Vectorized F(r) = f^2(r); does not validate the sign of r."
        r = np.asarray(r, dtype=float)
        match self.kind:
            case RadialKind.RING:
                norm: float = 2 * (2/self.waist**2)**(self.order+1) / \
                    factorial(self.order)
                return norm * r**(2*self.order) * np.exp(-2*r**2/self.waist**2)
            case RadialKind.UNIFORM:
                return np.where(r <= self.radius, 2/self.radius**2, 0.)

    def amplitude(self, r: np.ndarray | float) -> np.ndarray:
        return np.sqrt(self.fluence(r))

    def peak_radius(self) -> float:
        "Radius at which the fluence is maximal (0 for flat and order-0 profiles)."
        if self.kind == RadialKind.RING:
            return self.waist*sqrt(self.order/2)
        return 0.

    def peak_fluence(self) -> float:
        return float(self.fluence(self.peak_radius()))

    def total_fluence(self) -> float:
        "Numerical integral of F(r) r dr over [0, inf), equal to 1 within quadrature accuracy."
        return _total_fluence(self)


@cache
def _total_fluence(profile: RadialProfile) -> float:
    if profile.kind == RadialKind.UNIFORM:
        value, _ = quad(lambda r: float(profile.fluence(r))*r, 0., profile.radius)
    else:
        value, _ = quad(lambda r: float(profile.fluence(r))*r, 0., np.inf)
    return value


@dataclass(frozen=True)
class TemporalEnvelope:
    """Temporal envelope of the photon wavepacket.

    Parameters
    ----------
    sigma : float, optional
        coherence time, in seconds, by default 1 ps
    shape : EnvelopeShape, optional
        envelope shape, by default Gaussian
    """
    sigma: float = 1e-12
    shape: EnvelopeShape = EnvelopeShape.GAUSSIAN

    def __post_init__(self) -> None:
        if self.sigma <= 0.:
            raise ValueError(
                f"Coherence time must be positive, got {self.sigma}.")


@dataclass(frozen=True, eq=False)
class VectorMode:
    """Transverse mode of one photon: e_s(phi) f(r, t - tau) exp(-i omega t).

    Parameters
    ----------
    name : str
        a label for the mode (radial, pi, chain)
    pol_field : Callable[[np.ndarray], np.ndarray]
        vectorized polarization field, maps angles of shape S to unit vectors of shape S + (2,)
    radial : RadialProfile
        radial amplitude profile
    envelope : TemporalEnvelope
        temporal envelope
    time_bin : float, optional
        time-bin offset tau, in seconds, by default 0.
    carrier : float, optional
        carrier angular frequency, informational, by default 0.
    """
    name: str
    pol_field: Callable[[np.ndarray], np.ndarray]
    radial: RadialProfile = field(default_factory=RadialProfile)
    envelope: TemporalEnvelope = field(default_factory=TemporalEnvelope)
    time_bin: float = 0.
    carrier: float = 0.

    def polarization(self, phi: float) -> PolVector:
        "Local polarization at a single azimuthal angle."
        return PolVector.from_array(self.pol_field(np.asarray(phi, dtype=float)))

    def __str__(self) -> str:
        return f"VectorMode {self.name} ({self.radial.kind.value} profile, tau={self.time_bin:g} s)"


def _radial_field(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1).astype(complex)


def _pi_field(phi: np.ndarray) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(phi), -np.sin(phi)], axis=-1).astype(complex)


def _chain_field(chain: ElementChain, input_state: PolVector) -> Callable[[np.ndarray], np.ndarray]:
    vector: np.ndarray = input_state.as_array()

    def pol_field(phi: np.ndarray) -> np.ndarray:
        output: np.ndarray = chain.matrices(phi) @ vector
        norms: np.ndarray = np.linalg.norm(output, axis=-1, keepdims=True)
        if np.any(norms == 0.):
            raise ValueError(
                "Element chain extinguishes the input polarization at some azimuthal angle.")
        return output/norms
    return pol_field


def make_vv_mode(
    name: str | None = None,
    chain: ElementChain | None = None,
    input_state: PolVector | None = None,
    radial: RadialProfile | None = None,
    envelope: TemporalEnvelope | None = None,
    time_bin: float = 0.,
    carrier: float = 0.,
) -> VectorMode:
    """Builds a vector vortex mode, either named (radial, pi) or generated by an element chain acting on a uniform input.

    Parameters
    ----------
    name : str | None, optional
        'radial' for (cos phi, sin phi), 'pi' for (cos phi, -sin phi), by default None
    chain : ElementChain | None, optional
        elements generating the mode from input_state, by default None
    input_state : PolVector | None, optional
        uniform input polarization for the chain path, must be normalized, by default H
    radial : RadialProfile | None, optional
        radial profile, by default a first-order ring
    envelope : TemporalEnvelope | None, optional
        temporal envelope, by default Gaussian
    time_bin : float, optional
        time-bin offset in seconds, by default 0.
    carrier : float, optional
        carrier frequency (inert), by default 0.

    Returns
    -------
    VectorMode
        the mode

    Raises
    ------
    ValueError
        unknown name, both or neither of name and chain, or non-normalized input
    """
    radial = radial if radial is not None else RadialProfile()
    envelope = envelope if envelope is not None else TemporalEnvelope()
    if (name is None) == (chain is None):
        raise ValueError(
            "A mode is built either from a name or from an element chain, not both.")
    if chain is not None:
        input_state = input_state if input_state is not None else PolVector(1., 0.)
        if not input_state.is_normalized():
            raise ValueError(
                f"Input polarization {input_state} is not normalized.")
        pol_field: Callable = _chain_field(chain, input_state)
        # a chain holding a polarizer loses intensity, renormalization hides it
        if any(element.kind == ElementKind.POLARIZER for element in chain.elements):
            warn("Element chain contains a polarizer, the mode field is renormalized at every angle.")
        return VectorMode('chain', pol_field, radial, envelope, time_bin, carrier)
    match name:
        case 'radial':
            return VectorMode(name, _radial_field, radial, envelope, time_bin, carrier)
        case 'pi':
            return VectorMode(name, _pi_field, radial, envelope, time_bin, carrier)
    raise ValueError(
        f"Mode {name} is not a named mode, choose one of {', '.join(NAMED_MODES)}.")


def fluence(profile: RadialProfile, r: np.ndarray | float) -> np.ndarray | float:
    """Fluence F(r) = f^2(r); the time-window integral of the envelope is absorbed in the normalization.

    Parameters
    ----------
    profile : RadialProfile
        the shared radial profile
    r : np.ndarray | float
        radius (or radii), in profile length units

    Returns
    -------
    np.ndarray | float
        nonnegative fluence

    Raises
    ------
    ValueError
        a negative radius was given
    """
    if np.any(np.asarray(r) < 0.):
        raise ValueError("Radius must be nonnegative.")
    value: np.ndarray = profile.fluence(r)
    return float(value) if np.ndim(value) == 0 else value


def temporal_overlap(envelope: TemporalEnvelope, delay: np.ndarray | float) -> np.ndarray | float:
    """Amplitude overlap chi(dt) = exp(-dt^2 / (2 sigma^2)) of two Gaussian wavepackets delayed by dt.

    Parameters
    ----------
    envelope : TemporalEnvelope
        the shared envelope
    delay : np.ndarray | float
        delay(s) between the photons, in seconds

    Returns
    -------
    np.ndarray | float
        overlap in [0, 1], 1 at zero delay
    """
    value: np.ndarray = np.exp(-np.asarray(delay, dtype=float)**2 /
                               (2*envelope.sigma**2))
    return float(value) if np.ndim(value) == 0 else value
