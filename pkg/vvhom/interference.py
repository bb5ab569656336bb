"""Analytic two-photon interference kernel.

A photon in mode_a enters port A and a photon in mode_b enters port B of a 50:50 beamsplitter.
After post-selection on one photon per output arm, the pair amplitude at azimuthal angles
(phi1, phi2) is (T1 - T2)/2 where

    T1 = [p1 . e_a(phi1)] [p2 . e_b(phi2)]
    T2 = [p1 . e_b(phi1)] [p2 . e_a(phi2)]

Every function here returns angular densities; the radial weight F(r1) F(r2) is applied by the detectors.
"""
from dataclasses import dataclass
import numpy as np
from vvhom.abstractions import Configuration
from vvhom.jones import PolVector, project_field
from vvhom.modes import VectorMode, temporal_overlap

UNDEFINED_THRESHOLD: float = 1e-12


@dataclass(frozen=True, eq=False)
class BiphotonInput:
    """Two single photons at the beamsplitter inputs.

    Parameters
    ----------
    mode_a : VectorMode
        mode of the photon in port A
    mode_b : VectorMode
        mode of the photon in port B
    delay : float, optional
        tau' - tau, in seconds, by default 0.

    Raises
    ------
    ValueError
        the two modes do not share their radial profile and temporal envelope
    """
    mode_a: VectorMode
    mode_b: VectorMode
    delay: float = 0.

    def __post_init__(self) -> None:
        if self.mode_a.radial != self.mode_b.radial:
            raise ValueError(
                "Both photons must share the same radial profile.")
        if self.mode_a.envelope != self.mode_b.envelope:
            raise ValueError(
                "Both photons must share the same temporal envelope.")

    def swapped(self) -> 'BiphotonInput':
        "The same pair with input ports exchanged."
        return BiphotonInput(self.mode_b, self.mode_a, self.delay)


@dataclass(frozen=True)
class ProjectionPair:
    """Polarizer settings of the two output arms.

    Parameters
    ----------
    p1 : PolVector
        axis of the polarizer in the first (camera) arm
    p2 : PolVector
        axis of the polarizer in the second (bucket) arm
    """
    p1: PolVector
    p2: PolVector

    def __post_init__(self) -> None:
        if not (self.p1.is_normalized() and self.p2.is_normalized()):
            raise ValueError("Projection vectors must be normalized.")

    @classmethod
    def from_configuration(cls, configuration: Configuration | str) -> 'ProjectionPair':
        """Builds the pair for one of the eight named configurations (HH, HV, ..., AD)

        Raises
        ------
        ValueError
            the configuration name is unknown
        """
        try:
            configuration = Configuration(configuration)
        except ValueError as exc:
            raise ValueError(
                f"Configuration {configuration} is not one of {', '.join(c.value for c in Configuration)}.") from exc
        first, second = configuration.projectors
        return cls(PolVector.named(first), PolVector.named(second))

    def swapped(self) -> 'ProjectionPair':
        return ProjectionPair(self.p2, self.p1)


def _as_output(value: np.ndarray) -> np.ndarray | float | complex:
    if np.ndim(value) == 0:
        return value.item()
    return value


def _cross_terms(biphoton: BiphotonInput, projection: ProjectionPair, phi1: np.ndarray, phi2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    phi1, phi2 = np.broadcast_arrays(
        np.asarray(phi1, dtype=float), np.asarray(phi2, dtype=float))
    first: np.ndarray = project_field(projection.p1, biphoton.mode_a.pol_field(phi1)) * \
        project_field(projection.p2, biphoton.mode_b.pol_field(phi2))
    second: np.ndarray = project_field(projection.p1, biphoton.mode_b.pol_field(phi1)) * \
        project_field(projection.p2, biphoton.mode_a.pol_field(phi2))
    return first, second


def amplitude_cross(biphoton: BiphotonInput, projection: ProjectionPair, phi1: np.ndarray | float, phi2: np.ndarray | float) -> tuple:
    """Returns the two exchange terms (T1, T2) of the post-selected pair amplitude.

    Parameters
    ----------
    biphoton : BiphotonInput
        the input pair
    projection : ProjectionPair
        polarizer settings
    phi1 : np.ndarray | float
        azimuthal angle(s) in the first arm
    phi2 : np.ndarray | float
        azimuthal angle(s) in the second arm, broadcast against phi1

    Returns
    -------
    tuple
        T1 = [p1 . e_a(phi1)][p2 . e_b(phi2)] and T2 = [p1 . e_b(phi1)][p2 . e_a(phi2)]
    """
    first, second = _cross_terms(biphoton, projection, phi1, phi2)
    return _as_output(first), _as_output(second)


def coincidence_in(biphoton: BiphotonInput, projection: ProjectionPair, phi1: np.ndarray | float, phi2: np.ndarray | float) -> np.ndarray | float:
    "Coincidence density of temporally tuned photons, |T1 - T2|^2 / 4."
    first, second = _cross_terms(biphoton, projection, phi1, phi2)
    return _as_output(np.abs(first - second)**2 / 4)


def coincidence_out(biphoton: BiphotonInput, projection: ProjectionPair, phi1: np.ndarray | float, phi2: np.ndarray | float) -> np.ndarray | float:
    "Coincidence density of temporally distinguishable photons, (|T1|^2 + |T2|^2) / 4."
    first, second = _cross_terms(biphoton, projection, phi1, phi2)
    return _as_output((np.abs(first)**2 + np.abs(second)**2) / 4)


def coincidence_at_delay(
    biphoton: BiphotonInput,
    projection: ProjectionPair,
    phi1: np.ndarray | float,
    phi2: np.ndarray | float,
    delay: np.ndarray | float | None = None,
) -> np.ndarray | float:
    """Coincidence density at a finite delay, the interference term being damped by chi^2(dt).

    Parameters
    ----------
    biphoton : BiphotonInput
        the input pair
    projection : ProjectionPair
        polarizer settings
    phi1 : np.ndarray | float
        azimuthal angle(s) in the first arm
    phi2 : np.ndarray | float
        azimuthal angle(s) in the second arm
    delay : np.ndarray | float | None, optional
        delay dt in seconds, by default the delay stored in biphoton

    Returns
    -------
    np.ndarray | float
        (|T1|^2 + |T2|^2 - 2 chi^2(dt) Re(T1 conj(T2))) / 4, equal to coincidence_in at dt = 0
        and to coincidence_out for |dt| much larger than the coherence time
    """
    delay = biphoton.delay if delay is None else delay
    first, second = _cross_terms(biphoton, projection, phi1, phi2)
    damping: np.ndarray = np.asarray(temporal_overlap(
        biphoton.mode_a.envelope, delay))**2
    value: np.ndarray = (np.abs(first)**2 + np.abs(second)**2 -
                         2*damping*np.real(first*np.conj(second))) / 4
    # rounding can leave -1e-17 where the dip is perfect
    return _as_output(np.clip(value, 0., None))


def visibility_pointwise(biphoton: BiphotonInput, projection: ProjectionPair, phi1: np.ndarray | float, phi2: np.ndarray | float) -> np.ma.MaskedArray | float | None:
    """Pointwise visibility (C_out - C_in) / C_out.

    Parameters
    ----------
    biphoton : BiphotonInput
        the input pair
    projection : ProjectionPair
        polarizer settings
    phi1 : np.ndarray | float
        azimuthal angle(s) in the first arm
    phi2 : np.ndarray | float
        azimuthal angle(s) in the second arm

    Returns
    -------
    np.ma.MaskedArray | float | None
        visibility in [-1, 1]; points where C_out < 1e-12 are undefined:
        None for scalar angles, masked entries for arrays
    """
    first, second = _cross_terms(biphoton, projection, phi1, phi2)
    c_out: np.ndarray = (np.abs(first)**2 + np.abs(second)**2) / 4
    c_in: np.ndarray = np.abs(first - second)**2 / 4
    undefined: np.ndarray = c_out < UNDEFINED_THRESHOLD
    with np.errstate(divide='ignore', invalid='ignore'):
        visibility: np.ndarray = np.where(
            undefined, 0., (c_out - c_in) / np.where(undefined, 1., c_out))
    if np.ndim(visibility) == 0:
        return None if bool(undefined) else float(visibility)
    return np.ma.MaskedArray(visibility, mask=undefined)


def analytic_visibility_table(configuration: Configuration | str, phi1: np.ndarray | float, phi2: np.ndarray | float) -> np.ndarray | float:
    """Closed-form pointwise visibility for the radial (port A) / pi (port B) pair.

    The AA and AD expressions are those that follow from A = (1, -1)/sqrt(2) and D = (1, 1)/sqrt(2);
    points where C_out vanishes evaluate to nan.

    Parameters
    ----------
    configuration : Configuration | str
        one of HH, HV, HA, HD, AH, AV, AA, AD
    phi1 : np.ndarray | float
        azimuthal angle(s) in the first arm
    phi2 : np.ndarray | float
        azimuthal angle(s) in the second arm

    Returns
    -------
    np.ndarray | float
        the visibility

    Raises
    ------
    ValueError
        unknown configuration name
    """
    try:
        configuration = Configuration(configuration)
    except ValueError as exc:
        raise ValueError(
            f"Configuration {configuration} is not one of {', '.join(c.value for c in Configuration)}.") from exc
    phi1, phi2 = np.broadcast_arrays(
        np.asarray(phi1, dtype=float), np.asarray(phi2, dtype=float))
    with np.errstate(divide='ignore', invalid='ignore'):
        match configuration:
            case Configuration.HH:
                value = np.ones_like(phi1)
            case Configuration.HV:
                value = -np.ones_like(phi1)
            case Configuration.HA | Configuration.HD:
                value = np.cos(2*phi2)
            case Configuration.AH:
                value = np.cos(2*phi1)
            case Configuration.AV:
                value = -np.cos(2*phi1)
            case Configuration.AA:
                kept, lost = np.cos(phi1+phi2)**2, np.sin(phi1-phi2)**2
                value = (kept - lost)/(kept + lost)
            case Configuration.AD:
                kept, lost = np.cos(phi1-phi2)**2, np.sin(phi1+phi2)**2
                value = (kept - lost)/(kept + lost)
    return _as_output(value)


def integrated_visibility_table(configuration: Configuration | str, phi1: np.ndarray | float) -> np.ndarray | float:
    """Closed-form visibility once the second arm is integrated over phi2 (bucket detection).

    Returns
    -------
    np.ndarray | float
        1 (HH), -1 (HV), cos 2phi1 (AH), -cos 2phi1 (AV), 0 (HA, HD, AA, AD)
    """
    try:
        configuration = Configuration(configuration)
    except ValueError as exc:
        raise ValueError(
            f"Configuration {configuration} is not one of {', '.join(c.value for c in Configuration)}.") from exc
    phi1 = np.asarray(phi1, dtype=float)
    match configuration:
        case Configuration.HH:
            value = np.ones_like(phi1)
        case Configuration.HV:
            value = -np.ones_like(phi1)
        case Configuration.AH:
            value = np.cos(2*phi1)
        case Configuration.AV:
            value = -np.cos(2*phi1)
        case _:
            value = np.zeros_like(phi1)
    return _as_output(value)


def closed_form_label(configuration: Configuration, integrated: bool = False) -> str:
    "Human readable closed form, used by the table printer."
    if integrated:
        return {
            Configuration.HH: "1",
            Configuration.HV: "-1",
            Configuration.AH: "cos(2 phi1)",
            Configuration.AV: "-cos(2 phi1)",
        }.get(configuration, "0")
    return {
        Configuration.HH: "1",
        Configuration.HV: "-1",
        Configuration.HA: "cos(2 phi2)",
        Configuration.HD: "cos(2 phi2)",
        Configuration.AH: "cos(2 phi1)",
        Configuration.AV: "-cos(2 phi1)",
        Configuration.AA: "[cos^2(phi1+phi2) - sin^2(phi1-phi2)] / [cos^2(phi1+phi2) + sin^2(phi1-phi2)]",
        Configuration.AD: "[cos^2(phi1-phi2) - sin^2(phi1+phi2)] / [cos^2(phi1-phi2) + sin^2(phi1+phi2)]",
    }[configuration]
