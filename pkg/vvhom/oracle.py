"""Brute-force second-quantized verifier.

Each photon is discretized over (port, azimuthal sector, polarization, time bin) modes. The two-photon
state sum_ij S_ij a_i^dag a_j^dag |0> is stored as a dense symmetric table S normalized so that
2 sum |S_ij|^2 = 1; the beamsplitter acts as S -> U S U^T. No closed form of the analytic kernel is used.
"""
from dataclasses import dataclass
import logging
import numpy as np
from vvhom.abstractions import Port
from vvhom.interference import BiphotonInput, ProjectionPair, coincidence_in, coincidence_out
from vvhom.modes import VectorMode

logger = logging.getLogger(__name__)

NORM_TOLERANCE: float = 1e-10
UNDEFINED_THRESHOLD: float = 1e-12
BEAMSPLITTER: np.ndarray = np.array([[1., 1j], [1j, 1.]])/np.sqrt(2)


class OracleToleranceError(RuntimeError):
    """The oracle and the analytic kernel disagree beyond tolerance.

    Parameters
    ----------
    max_residual : float
        largest absolute residual
    location : tuple
        (n_sectors, k1, k2, 'in' | 'out') of the largest residual
    """

    def __init__(self, max_residual: float, location: tuple, tolerance: float) -> None:
        self.max_residual: float = max_residual
        self.location: tuple = location
        super().__init__(
            f"Oracle residual {max_residual:.3e} exceeds tolerance {tolerance:.1e} at "
            f"n_sectors={location[0]}, k1={location[1]}, k2={location[2]} ({location[3]})."
        )


@dataclass(frozen=True)
class DiscreteModeBasis:
    """Ordered single-photon modes (port, sector, polarization, time bin), port being the slowest index.

    Parameters
    ----------
    n_sectors : int
        azimuthal sectors per port, >= 2
    n_bins : int, optional
        time bins, by default 2 (tau and tau')
    """
    n_sectors: int
    n_bins: int = 2

    def __post_init__(self) -> None:
        if self.n_sectors < 2:
            raise ValueError(
                f"A discrete basis needs at least 2 sectors, got {self.n_sectors}.")
        if self.n_bins < 1:
            raise ValueError(
                f"A discrete basis needs at least 1 time bin, got {self.n_bins}.")

    @property
    def size(self) -> int:
        return len(Port) * self.n_sectors * 2 * self.n_bins

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return (len(Port), self.n_sectors, 2, self.n_bins)

    def index(self, port: Port, sector: int, polarization: int, time_bin: int) -> int:
        return int(np.ravel_multi_index((int(port), sector, polarization, time_bin), self.shape))

    def sector_centers(self) -> np.ndarray:
        return 2*np.pi*(np.arange(self.n_sectors) + .5)/self.n_sectors


@dataclass(frozen=True, eq=False)
class TwoPhotonAmplitudes:
    """Symmetric coefficient table of a two-photon state.

    Parameters
    ----------
    basis : DiscreteModeBasis
        the mode basis
    table : np.ndarray
        symmetric complex matrix S of side basis.size
    """
    basis: DiscreteModeBasis
    table: np.ndarray

    def __post_init__(self) -> None:
        if np.shape(self.table) != (self.basis.size, self.basis.size):
            raise ValueError(
                f"Amplitude table must be {self.basis.size}x{self.basis.size}.")

    @classmethod
    def from_photons(cls, basis: DiscreteModeBasis, first: np.ndarray, second: np.ndarray) -> 'TwoPhotonAmplitudes':
        """State a^dag(first) a^dag(second)|0>, normalized.

        Raises
        ------
        ValueError
            the two photons give a null state
        """
        table: np.ndarray = (np.outer(first, second) +
                             np.outer(second, first))/2
        norm: float = 2*float(np.sum(np.abs(table)**2))
        if norm == 0.:
            raise ValueError("Photon amplitudes give a null two-photon state.")
        return cls(basis, table/np.sqrt(norm))

    def norm(self) -> float:
        return 2*float(np.sum(np.abs(self.table)**2))

    def blocks(self) -> np.ndarray:
        "Table reshaped to basis.shape + basis.shape."
        return self.table.reshape(self.basis.shape + self.basis.shape)


@dataclass(frozen=True)
class OutcomeProbabilities:
    """Probabilities of the three output classes of two photons at a beamsplitter.

    Parameters
    ----------
    bunched_a : float
        both photons in port A
    bunched_b : float
        both photons in port B
    coincidence : float
        one photon per port
    """
    bunched_a: float
    bunched_b: float
    coincidence: float

    @property
    def total(self) -> float:
        return self.bunched_a + self.bunched_b + self.coincidence


def _as_port(port: Port | str | int) -> Port:
    try:
        return port if isinstance(port, Port) else (Port[port] if isinstance(port, str) else Port(port))
    except (KeyError, ValueError) as exc:
        raise ValueError(f"Port {port!r} is not one of A, B.") from exc


def discretize_mode(mode: VectorMode, port: Port | str, n_sectors: int, time_bin: int = 0) -> np.ndarray:
    """Single-photon amplitude vector of a mode sampled at sector centers 2 pi (k + 1/2) / n_sectors,
    with equal radial weight 1/sqrt(n_sectors) per sector.

    Parameters
    ----------
    mode : VectorMode
        the photon mode
    port : Port | str
        input port A or B
    n_sectors : int
        number of azimuthal sectors, >= 2
    time_bin : int, optional
        index of the time bin, by default 0

    Returns
    -------
    np.ndarray
        unit-norm vector of length DiscreteModeBasis(n_sectors).size

    Raises
    ------
    ValueError
        unknown port, too few sectors, or a time bin outside the basis
    """
    basis: DiscreteModeBasis = DiscreteModeBasis(n_sectors)
    port = _as_port(port)
    if not 0 <= time_bin < basis.n_bins:
        raise ValueError(
            f"Time bin {time_bin} is not in [0, {basis.n_bins}).")
    amplitudes: np.ndarray = np.zeros(basis.shape, dtype=complex)
    amplitudes[int(port), :, :, time_bin] = mode.pol_field(
        basis.sector_centers())/np.sqrt(n_sectors)
    return amplitudes.ravel()


def beamsplitter_unitary(basis: DiscreteModeBasis) -> np.ndarray:
    "a_A^dag -> (a_A^dag + i a_B^dag)/sqrt(2), a_B^dag -> (i a_A^dag + a_B^dag)/sqrt(2) on every other label."
    return np.kron(BEAMSPLITTER, np.eye(basis.size//len(Port)))


def apply_bs(state: TwoPhotonAmplitudes) -> TwoPhotonAmplitudes:
    """Applies the 50:50 beamsplitter to both photons.

    Raises
    ------
    ValueError
        the input state is not normalized
    """
    if abs(state.norm() - 1.) > NORM_TOLERANCE:
        raise ValueError(
            f"Beamsplitter input must be normalized, norm is {state.norm()}.")
    unitary: np.ndarray = beamsplitter_unitary(state.basis)
    return TwoPhotonAmplitudes(state.basis, unitary @ state.table @ unitary.T)


def outcome_probabilities(state: TwoPhotonAmplitudes) -> OutcomeProbabilities:
    "Bunched and coincidence probabilities; they sum to the state norm."
    blocks: np.ndarray = state.blocks()
    return OutcomeProbabilities(
        bunched_a=2*float(np.sum(np.abs(blocks[Port.A, ..., Port.A, :, :, :])**2)),
        bunched_b=2*float(np.sum(np.abs(blocks[Port.B, ..., Port.B, :, :, :])**2)),
        coincidence=4*float(np.sum(np.abs(blocks[Port.A, ..., Port.B, :, :, :])**2)),
    )


def sector_coincidences(state: TwoPhotonAmplitudes, projection: ProjectionPair | None) -> np.ndarray:
    """Coincidence probability for every pair of sectors (k1 in port A, k2 in port B), summed over time bins.

    Parameters
    ----------
    state : TwoPhotonAmplitudes
        the output state
    projection : ProjectionPair | None
        polarizers in front of port A and port B, None for no polarizer

    Returns
    -------
    np.ndarray
        shape (n_sectors, n_sectors)
    """
    # axes: (k1, pol1, bin1, k2, pol2, bin2)
    cross: np.ndarray = 2*state.blocks()[Port.A, ..., Port.B, :, :, :]
    if projection is None:
        return np.sum(np.abs(cross)**2, axis=(1, 2, 4, 5))
    amplitudes: np.ndarray = np.einsum(
        'p,q,apbcqd->abcd', projection.p1.as_array().conj(), projection.p2.as_array().conj(), cross)
    return np.sum(np.abs(amplitudes)**2, axis=(1, 3))


def coincidence_probability(
    state: TwoPhotonAmplitudes,
    projection: ProjectionPair | None,
    sector_1: int | None = None,
    sector_2: int | None = None,
) -> float:
    """Probability of one photon in port A passing p1 and one photon in port B passing p2.

    Parameters
    ----------
    state : TwoPhotonAmplitudes
        normalized output state
    projection : ProjectionPair | None
        polarizer settings, None for no polarizer
    sector_1 : int | None, optional
        sector of the port A photon, by default None (all sectors)
    sector_2 : int | None, optional
        sector of the port B photon, by default None (all sectors)

    Returns
    -------
    float
        the probability
    """
    table: np.ndarray = sector_coincidences(state, projection)
    rows: slice | int = slice(None) if sector_1 is None else sector_1
    columns: slice | int = slice(None) if sector_2 is None else sector_2
    return float(np.sum(table[rows, columns]))


def oracle_state(biphoton: BiphotonInput, n_sectors: int, same_bin: bool) -> TwoPhotonAmplitudes:
    """Beamsplitter output for the pair, both photons in the same time bin or in distinct bins."""
    basis: DiscreteModeBasis = DiscreteModeBasis(n_sectors)
    first: np.ndarray = discretize_mode(biphoton.mode_a, Port.A, n_sectors, 0)
    second: np.ndarray = discretize_mode(
        biphoton.mode_b, Port.B, n_sectors, 0 if same_bin else 1)
    return apply_bs(TwoPhotonAmplitudes.from_photons(basis, first, second))


def oracle_visibility(
    biphoton: BiphotonInput,
    projection: ProjectionPair,
    n_sectors: int,
    sector_1: int | None = None,
) -> float | None:
    """Visibility (P_out - P_in) / P_out with a bucket detector over every sector of port B.

    Returns
    -------
    float | None
        the visibility, None where P_out < 1e-12
    """
    p_in: float = coincidence_probability(oracle_state(
        biphoton, n_sectors, True), projection, sector_1)
    p_out: float = coincidence_probability(oracle_state(
        biphoton, n_sectors, False), projection, sector_1)
    if p_out < UNDEFINED_THRESHOLD:
        return None
    return (p_out - p_in)/p_out


@dataclass(frozen=True)
class OracleComparison:
    """Agreement between the oracle and the analytic kernel at sector centers.

    Parameters
    ----------
    n_sectors : int
        sectors per port
    max_residual : float
        largest |n^2 P_oracle(k1, k2) - C(phi_k1, phi_k2)| over in and out
    location : tuple
        (n_sectors, k1, k2, 'in' | 'out') of the largest residual
    """
    n_sectors: int
    max_residual: float
    location: tuple


def compare_with_engine(biphoton: BiphotonInput, projection: ProjectionPair, n_sectors: int) -> OracleComparison:
    """Compares sector-resolved oracle coincidences with the analytic kernel at sector centers.
    A sector pair carries a weight 1/n_sectors^2 of the angular density.
    """
    centers: np.ndarray = DiscreteModeBasis(n_sectors).sector_centers()
    best: OracleComparison = OracleComparison(n_sectors, -1., (n_sectors, 0, 0, 'in'))
    for label, same_bin, kernel in (('in', True, coincidence_in), ('out', False, coincidence_out)):
        oracle: np.ndarray = sector_coincidences(oracle_state(
            biphoton, n_sectors, same_bin), projection)*n_sectors**2
        engine: np.ndarray = kernel(
            biphoton, projection, centers[:, None], centers[None, :])
        residuals: np.ndarray = np.abs(oracle - engine)
        k1, k2 = np.unravel_index(int(np.argmax(residuals)), residuals.shape)
        if residuals[k1, k2] > best.max_residual:
            best = OracleComparison(n_sectors, float(
                residuals[k1, k2]), (n_sectors, int(k1), int(k2), label))
    logger.debug("Oracle with %d sectors: max residual %.3e",
                 n_sectors, best.max_residual)
    return best


def check_equivalence(
    biphoton: BiphotonInput,
    projection: ProjectionPair,
    sectors: list[int],
    tolerance: float = 1e-9,
) -> list[OracleComparison]:
    """Runs compare_with_engine for every sector count.

    Raises
    ------
    OracleToleranceError
        some residual exceeds tolerance
    """
    comparisons: list[OracleComparison] = [compare_with_engine(
        biphoton, projection, n_sectors) for n_sectors in sectors]
    worst: OracleComparison = max(
        comparisons, key=lambda comparison: comparison.max_residual)
    if worst.max_residual > tolerance:
        raise OracleToleranceError(worst.max_residual, worst.location, tolerance)
    return comparisons
