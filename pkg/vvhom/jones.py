"Jones calculus for uniform and azimuthally varying polarization elements"
from dataclasses import dataclass, field
from typing import Callable
import numpy as np
from vvhom.abstractions import ElementKind, Polarization, polarization_angle

TOLERANCE: float = 1e-12


@dataclass(frozen=True)
class PolVector:
    """Local polarization state, as two complex amplitudes in the {H, V} basis.

    Parameters
    ----------
    h : complex
        amplitude along the horizontal unit vector
    v : complex
        amplitude along the vertical unit vector
    """
    h: complex
    v: complex

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'PolVector':
        "Builds a PolVector from a length-2 array."
        return cls(complex(array[0]), complex(array[1]))

    @classmethod
    def named(cls, polarization: Polarization | str) -> 'PolVector':
        """Returns the unit vector of a named linear polarization (H, V, D or A)

        Parameters
        ----------
        polarization : Polarization | str
            a polarization name

        Returns
        -------
        PolVector
            the associated normalized vector

        Raises
        ------
        ValueError
            the name is not one of H, V, D, A
        """
        try:
            polarization = Polarization(polarization)
        except ValueError as exc:
            raise ValueError(
                f"Polarization {polarization} is not one of H, V, D, A.") from exc
        return polarizer_vector(polarization_angle(polarization))

    def as_array(self) -> np.ndarray:
        return np.array([self.h, self.v], dtype=complex)

    def norm(self) -> float:
        return float(np.sqrt(abs(self.h)**2 + abs(self.v)**2))

    def is_normalized(self, tolerance: float = TOLERANCE) -> bool:
        return abs(abs(self.h)**2 + abs(self.v)**2 - 1.) <= tolerance

    def normalized(self) -> 'PolVector':
        """Returns the vector scaled to unit norm

        Raises
        ------
        ValueError
            the vector is null
        """
        if (norm := self.norm()) == 0.:
            raise ValueError("Cannot normalize a null polarization vector.")
        return PolVector(self.h/norm, self.v/norm)


@dataclass(frozen=True, eq=False)
class PolOperator:
    """2x2 complex Jones matrix (waveplate, q-plate sample or polarizer projector).

    Parameters
    ----------
    m : np.ndarray
        the matrix, in the {H, V} basis
    """
    m: np.ndarray

    def __post_init__(self) -> None:
        matrix: np.ndarray = np.asarray(self.m, dtype=complex)
        if matrix.shape != (2, 2):
            raise ValueError(
                f"A Jones matrix must be 2x2, got shape {matrix.shape}.")
        matrix.setflags(write=False)
        object.__setattr__(self, 'm', matrix)

    def __matmul__(self, other: 'PolOperator | PolVector') -> 'PolOperator | PolVector':
        if isinstance(other, PolOperator):
            return PolOperator(self.m @ other.m)
        if isinstance(other, PolVector):
            return PolVector.from_array(self.m @ other.as_array())
        return NotImplemented

    def dagger(self) -> 'PolOperator':
        return PolOperator(self.m.conj().T)

    def is_unitary(self, tolerance: float = TOLERANCE) -> bool:
        return bool(np.allclose(self.m.conj().T @ self.m, np.eye(2), rtol=0., atol=tolerance))

    def is_hermitian(self, tolerance: float = TOLERANCE) -> bool:
        return bool(np.allclose(self.m, self.m.conj().T, rtol=0., atol=tolerance))

    def is_projector(self, tolerance: float = TOLERANCE) -> bool:
        "Hermitian and idempotent."
        return self.is_hermitian(tolerance) and bool(np.allclose(self.m @ self.m, self.m, rtol=0., atol=tolerance))


def _rotation(angle: np.ndarray | float) -> np.ndarray:
    "R(angle) = [[c, s], [-s, c]], broadcast over the leading axes of angle."
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)], axis=-2)


def waveplate_matrix(retardance: float, axis_angle: np.ndarray | float) -> np.ndarray:
    """Vectorized waveplate Jones matrix R(-axis) diag(1, exp(i retardance)) R(axis).

    Parameters
    ----------
    retardance : float
        phase retardance between slow and fast axes, in radians
    axis_angle : np.ndarray | float
        fast axis angle(s), in radians

    Returns
    -------
    np.ndarray
        array of shape (..., 2, 2)
    """
    axis_angle = np.asarray(axis_angle, dtype=float)
    retarder: np.ndarray = np.array(
        [[1., 0.], [0., np.exp(1j*retardance)]], dtype=complex)
    # waveplate(pi, 0) must be diag(1, -1) exactly, exp(1j*pi) leaves a 1e-16 imaginary part
    if np.isclose(np.mod(retardance, 2*np.pi), np.pi, rtol=0., atol=1e-15):
        retarder[1, 1] = -1.
    return _rotation(-axis_angle) @ retarder @ _rotation(axis_angle)


def waveplate(retardance: float, axis_angle: float) -> PolOperator:
    """Returns the Jones operator of a uniform linear retarder.
    The global phase convention makes waveplate(pi, 0) = diag(1, -1) exactly.

    Parameters
    ----------
    retardance : float
        retardance in radians (pi for a half-waveplate)
    axis_angle : float
        fast axis angle in radians

    Returns
    -------
    PolOperator
        the unitary Jones operator
    """
    return PolOperator(waveplate_matrix(retardance, axis_angle))


def qplate_matrix(q: float, offset: float, phi: np.ndarray | float) -> np.ndarray:
    """Vectorized q-plate Jones matrix at azimuthal angle(s) phi.

    Returns
    -------
    np.ndarray
        [[cos 2q(phi-offset), sin 2q(phi-offset)], [sin 2q(phi-offset), -cos 2q(phi-offset)]], shape (..., 2, 2)
    """
    angle: np.ndarray = 2*q*(np.asarray(phi, dtype=float) - offset)
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([np.stack([c, s], axis=-1), np.stack([s, -c], axis=-1)], axis=-2).astype(complex)


def qplate(q: float, offset: float = 0.) -> Callable[[float], PolOperator]:
    """Returns the spatially varying Jones operator of a q-plate.

    Parameters
    ----------
    q : float
        topological charge (half-integer)
    offset : float, optional
        orientation offset of the optic axis, in radians, by default 0.

    Returns
    -------
    Callable[[float], PolOperator]
        maps an azimuthal angle to the local Jones operator, which is unitary and Hermitian
    """
    def at(phi: float) -> PolOperator:
        return PolOperator(qplate_matrix(q, offset, phi))
    return at


def polarizer_vector(angle: float) -> PolVector:
    """Returns the unit vector along a linear polarizer axis, (cos angle, sin angle).
    0 gives H, pi/2 gives V, pi/4 gives D and -pi/4 gives A = (1, -1)/sqrt(2).

    Parameters
    ----------
    angle : float
        axis angle, in radians

    Returns
    -------
    PolVector
        a real, normalized vector
    """
    return PolVector(complex(np.cos(angle)), complex(np.sin(angle)))


def polarizer(angle: float) -> PolOperator:
    "Projector u u^dagger along the polarizer axis."
    u: np.ndarray = polarizer_vector(angle).as_array()
    return PolOperator(np.outer(u, u.conj()))


def project(u: PolVector, e: PolVector) -> complex:
    """Conjugate-linear inner product conj(u) . e, the amplitude for e to pass a polarizer along u.

    Parameters
    ----------
    u : PolVector
        detection unit vector
    e : PolVector
        local field polarization

    Returns
    -------
    complex
        conj(u.h) e.h + conj(u.v) e.v
    """
    return u.h.conjugate()*e.h + u.v.conjugate()*e.v


def project_field(u: PolVector, fields: np.ndarray) -> np.ndarray:
    "Vectorized project(), fields has shape (..., 2)."
    return np.asarray(fields)[..., 0]*u.h.conjugate() + np.asarray(fields)[..., 1]*u.v.conjugate()


@dataclass(frozen=True)
class Element:
    """One element of an ElementChain.

    Parameters
    ----------
    kind : ElementKind
        waveplate, qplate or polarizer
    parameters : tuple[float, ...]
        (retardance, axis angle) | (charge, offset) | (angle,), angles in radians
    """
    kind: ElementKind
    parameters: tuple[float, ...]

    def __post_init__(self) -> None:
        expected: int = {
            ElementKind.WAVEPLATE: 2,
            ElementKind.QPLATE: 2,
            ElementKind.POLARIZER: 1,
        }[self.kind]
        if len(self.parameters) != expected:
            raise ValueError(
                f"Element {self.kind.value} takes {expected} parameter(s), got {len(self.parameters)}.")

    def matrices(self, phi: np.ndarray) -> np.ndarray:
        "Jones matrices of the element at each angle of phi, shape phi.shape + (2, 2)."
        phi = np.asarray(phi, dtype=float)
        match self.kind:
            case ElementKind.WAVEPLATE:
                matrix: np.ndarray = waveplate_matrix(*self.parameters)
            case ElementKind.POLARIZER:
                matrix: np.ndarray = polarizer(self.parameters[0]).m
            case ElementKind.QPLATE:
                return qplate_matrix(*self.parameters, phi)
        return np.broadcast_to(matrix, phi.shape + (2, 2))


@dataclass(frozen=True)
class ElementChain:
    """Ordered list of optical elements, traversed first to last.

    Parameters
    ----------
    elements : tuple[Element, ...]
        elements in the order light meets them
    """
    elements: tuple[Element, ...] = field(default_factory=tuple)

    def matrices(self, phi: np.ndarray | float) -> np.ndarray:
        """Evaluates the chain at azimuthal angle(s) phi; the last element is leftmost in the product.

        Returns
        -------
        np.ndarray
            shape phi.shape + (2, 2)
        """
        phi = np.asarray(phi, dtype=float)
        product: np.ndarray = np.broadcast_to(
            np.eye(2, dtype=complex), phi.shape + (2, 2))
        for element in self.elements:
            product = element.matrices(phi) @ product
        return product

    def at(self, phi: float) -> PolOperator:
        return PolOperator(self.matrices(phi))
