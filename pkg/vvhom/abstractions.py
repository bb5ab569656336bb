"Abstractions shared by the simulator modules"
from enum import Enum, IntEnum
from math import pi


class Polarization(Enum):
    """Describes the named linear polarization states used for projections.
    The basis is fixed: H = (1, 0), V = (0, 1), D = (1, 1)/sqrt(2) and A = (1, -1)/sqrt(2).

    Parameters
    ----------
    Enum : str
        One of H | V | D | A.
    """
    H = 'H'
    V = 'V'
    D = 'D'
    A = 'A'


def polarization_angle(polarization: Polarization) -> float:
    """Returns the polarizer axis angle associated to a named polarization

    Parameters
    ----------
    polarization : Polarization
        a named linear polarization

    Returns
    -------
    float
        the axis angle, in radians
    """
    return {
        Polarization.H: 0.,
        Polarization.V: pi/2,
        Polarization.D: pi/4,
        Polarization.A: -pi/4,
    }[polarization]


class ElementKind(Enum):
    """Describes the optical elements an ElementChain can hold.

    Parameters
    ----------
    Enum : str
        One of waveplate | qplate | polarizer.
    """
    WAVEPLATE = 'waveplate'
    QPLATE = 'qplate'
    POLARIZER = 'polarizer'


class Port(IntEnum):
    """Describes the two ports of the 50:50 beamsplitter.
    Values are used as block indices in the discretized mode basis.
    """
    A = 0
    B = 1


class Configuration(Enum):
    """Describes the eight polarizer configurations (P1 before the camera, P2 before the bucket detector)
    for which closed-form visibilities are known.

    Parameters
    ----------
    Enum : str
        Two letters, P1 then P2.
    """
    HH = 'HH'
    HV = 'HV'
    HA = 'HA'
    HD = 'HD'
    AH = 'AH'
    AV = 'AV'
    AA = 'AA'
    AD = 'AD'

    @property
    def projectors(self) -> tuple[Polarization, Polarization]:
        "Named polarizations of the camera arm and of the bucket arm."
        return Polarization(self.value[0]), Polarization(self.value[1])


class MapFormat(Enum):
    """Describes the file formats a ScalarMap can be written to.

    Parameters
    ----------
    Enum : str
        One of csv | pgm | viz-ppm.
    """
    CSV = 'csv'
    PGM = 'pgm'
    VIZ_PPM = 'viz-ppm'


class ExitCode(IntEnum):
    "Process exit codes of the command-line tool."
    OK = 0
    USAGE = 1
    RUNTIME = 2
    ORACLE_BREACH = 3


class RadialKind(Enum):
    """Describes the radial amplitude profiles of a transverse mode.

    Parameters
    ----------
    Enum : str
        ring (vortex ring of waist w) | uniform (flat top of radius R)
    """
    RING = 'ring'
    UNIFORM = 'uniform'


class EnvelopeShape(Enum):
    "Temporal envelope shapes. Only the Gaussian envelope is modelled."
    GAUSSIAN = 'gaussian'
