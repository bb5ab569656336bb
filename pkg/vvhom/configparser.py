"Reader and writer of experiment configuration files"
from dataclasses import dataclass
from importlib.resources import files
from math import pi
from os import path
from re import compile as re_compile
import numpy as np
from vvhom.abstractions import Configuration, ElementKind, Polarization, RadialKind, polarization_angle
from vvhom.detectors import DEFAULT_QUADRATURE, MIN_QUADRATURE, PixelGrid
from vvhom.interference import BiphotonInput, ProjectionPair
from vvhom.jones import Element, ElementChain, PolVector, polarizer_vector
from vvhom.modes import NAMED_MODES, RadialProfile, TemporalEnvelope, VectorMode, make_vv_mode

ANGLE_UNITS: dict[str, float] = {'deg': pi/180, 'rad': 1.}
TIME_UNITS: dict[str, float] = {'s': 1., 'ns': 1e-9, 'ps': 1e-12, 'fs': 1e-15}
SECTIONS: dict[str, tuple[str, ...]] = {
    'experiment': ('name', 'quadrature'),
    'input_a': ('mode', 'elements', 'input'),
    'input_b': ('mode', 'elements', 'input'),
    'projectors': ('p1', 'p2'),
    'delay': ('min', 'max', 'steps', 'in', 'out'),
    'envelope': ('sigma',),
    'radial': ('profile', 'waist', 'radius', 'order'),
    'grid': ('width', 'height', 'center_x', 'center_y', 'scale'),
    'noise': ('total_counts', 'seed'),
    'oracle': ('sectors', 'tolerance'),
}

SECTION_LINE = re_compile(r'^\s*\[\s*([^\]]*?)\s*\]\s*$')
KEY_LINE = re_compile(r'^(\s*)([a-z_][a-z0-9_]*)\s*=\s*(.*?)\s*$')
QUANTITY = re_compile(r'^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*([A-Za-z]*)$')
ELEMENT = re_compile(r'^\s*([a-z]+)\s*\((.*)\)\s*$')


class ConfigError(ValueError):
    """Error in an experiment configuration, anchored to a 1-based line and column.

    Parameters
    ----------
    message : str
        what is wrong
    line : int
        line of the offending text
    column : int
        column of the offending text
    """

    def __init__(self, message: str, line: int, column: int) -> None:
        self.message: str = message
        self.line: int = line
        self.column: int = column
        super().__init__(f"line {line}, column {column}: {message}")


@dataclass(frozen=True)
class _Entry:
    value: str
    line: int
    column: int
    key_column: int


@dataclass(frozen=True)
class LinearPolarization:
    """A polarizer axis or an input polarization, given by name or by angle.

    Parameters
    ----------
    angle : float
        axis angle, in radians
    name : Polarization | None, optional
        the named state the angle comes from, by default None
    """
    angle: float
    name: Polarization | None = None

    @classmethod
    def named(cls, polarization: Polarization | str) -> 'LinearPolarization':
        polarization = Polarization(polarization)
        return cls(polarization_angle(polarization), polarization)

    def vector(self) -> PolVector:
        if self.name is not None:
            return PolVector.named(self.name)
        return polarizer_vector(self.angle)

    def to_text(self) -> str:
        return self.name.value if self.name is not None else f"{self.angle!r}rad"


@dataclass(frozen=True)
class ModeSpec:
    """How the photon of one input port is prepared.

    Parameters
    ----------
    mode : str
        radial | pi | chain
    elements : tuple[Element, ...], optional
        chain elements, by default ()
    input_state : LinearPolarization | None, optional
        uniform polarization entering the chain, by default None (H for chains)
    """
    mode: str
    elements: tuple[Element, ...] = ()
    input_state: LinearPolarization | None = None

    def build(self, radial: RadialProfile, envelope: TemporalEnvelope, time_bin: float = 0.) -> VectorMode:
        if self.mode == 'chain':
            return make_vv_mode(
                chain=ElementChain(self.elements),
                input_state=(self.input_state or LinearPolarization.named(
                    Polarization.H)).vector(),
                radial=radial,
                envelope=envelope,
                time_bin=time_bin,
            )
        return make_vv_mode(self.mode, radial=radial, envelope=envelope, time_bin=time_bin)


@dataclass(frozen=True)
class DelayScan:
    """Delay settings, in seconds.

    Parameters
    ----------
    minimum : float
        first delay of the scan
    maximum : float
        last delay of the scan
    steps : int
        number of delays, >= 1
    tuned : float
        delay used for the 'in' maps
    detuned : float
        delay used for the 'out' maps
    """
    minimum: float
    maximum: float
    steps: int
    tuned: float
    detuned: float

    def delays(self) -> np.ndarray:
        return np.linspace(self.minimum, self.maximum, self.steps)


@dataclass(frozen=True)
class NoiseSettings:
    total_counts: float
    seed: int = 0


@dataclass(frozen=True)
class OracleSettings:
    sectors: tuple[int, ...]
    tolerance: float = 1e-9


@dataclass(frozen=True)
class ExperimentConfig:
    """A complete virtual experiment: two input photons, two polarizers, delays, camera and noise.

    Parameters
    ----------
    input_a : ModeSpec
        photon entering port A
    input_b : ModeSpec
        photon entering port B
    projector_1 : LinearPolarization
        polarizer before the camera
    projector_2 : LinearPolarization
        polarizer before the bucket detector
    delay : DelayScan
        HOM scan and in/out delays
    envelope : TemporalEnvelope
        shared temporal envelope
    radial : RadialProfile
        shared radial profile, in grid length units
    grid : PixelGrid
        camera geometry
    name : str, optional
        experiment name, by default 'experiment'
    quadrature : int, optional
        angular quadrature size, by default 512
    noise : NoiseSettings | None, optional
        shot-noise replicas, by default None
    oracle : OracleSettings | None, optional
        oracle cross-check, by default None
    """
    input_a: ModeSpec
    input_b: ModeSpec
    projector_1: LinearPolarization
    projector_2: LinearPolarization
    delay: DelayScan
    envelope: TemporalEnvelope
    radial: RadialProfile
    grid: PixelGrid
    name: str = 'experiment'
    quadrature: int = DEFAULT_QUADRATURE
    noise: NoiseSettings | None = None
    oracle: OracleSettings | None = None

    def __post_init__(self) -> None:
        # names are written on one line with comments stripped
        if not self.name.strip() or self.name != self.name.strip() or any(char in self.name for char in '#\r\n'):
            raise ValueError(
                f"Experiment name must be a nonempty single line without '#' or surrounding spaces, got {self.name!r}.")

    def biphoton(self, delay: float = 0.) -> BiphotonInput:
        return BiphotonInput(
            self.input_a.build(self.radial, self.envelope),
            self.input_b.build(self.radial, self.envelope, delay),
            delay,
        )

    def projection(self) -> ProjectionPair:
        return ProjectionPair(self.projector_1.vector(), self.projector_2.vector())

    def to_text(self) -> str:
        """Canonical text form: angles in radians, times in seconds, floats written with repr.
        Parsing it back gives an equal ExperimentConfig.
        """
        lines: list[str] = [
            "[experiment]",
            f"name = {self.name}",
            f"quadrature = {self.quadrature}",
        ]
        for section, source in (('input_a', self.input_a), ('input_b', self.input_b)):
            lines += ["", f"[{section}]", f"mode = {source.mode}"]
            if source.mode == 'chain':
                lines.append(
                    f"elements = {'; '.join(_element_text(element) for element in source.elements)}")
                if source.input_state is not None:
                    lines.append(f"input = {source.input_state.to_text()}")
        lines += [
            "",
            "[projectors]",
            f"p1 = {self.projector_1.to_text()}",
            f"p2 = {self.projector_2.to_text()}",
            "",
            "[delay]",
            f"min = {self.delay.minimum!r}s",
            f"max = {self.delay.maximum!r}s",
            f"steps = {self.delay.steps}",
            f"in = {self.delay.tuned!r}s",
            f"out = {self.delay.detuned!r}s",
            "",
            "[envelope]",
            f"sigma = {self.envelope.sigma!r}s",
            "",
            "[radial]",
            f"profile = {self.radial.kind.value}",
            f"waist = {self.radial.waist!r}",
            f"radius = {self.radial.radius!r}",
            f"order = {self.radial.order}",
            "",
            "[grid]",
            f"width = {self.grid.width}",
            f"height = {self.grid.height}",
            f"center_x = {float(self.grid.center[0])!r}",
            f"center_y = {float(self.grid.center[1])!r}",
            f"scale = {self.grid.scale!r}",
        ]
        if self.noise is not None:
            lines += ["", "[noise]", f"total_counts = {self.noise.total_counts!r}",
                      f"seed = {self.noise.seed}"]
        if self.oracle is not None:
            lines += ["", "[oracle]", f"sectors = {', '.join(str(n) for n in self.oracle.sectors)}",
                      f"tolerance = {self.oracle.tolerance!r}"]
        return '\n'.join(lines) + '\n'


def _element_text(element: Element) -> str:
    match element.kind:
        case ElementKind.QPLATE:
            return f"qplate({element.parameters[0]!r}, {element.parameters[1]!r}rad)"
        case _:
            return f"{element.kind.value}({', '.join(f'{value!r}rad' for value in element.parameters)})"


class ConfigParser:
    """This class implements static methods to read experiment configuration files, and to parse their values.

    Returns
    -------
    None
        Methods are static and should be used passing arguments.

    Raises
    ------
    ConfigError
        Syntax error, unknown section or key, duplicate, missing value or unit violation
    OSError
        The file does not exist
    """

    @staticmethod
    def read_config(config_path: str) -> ExperimentConfig:
        """Reads and parses a configuration file.

        Raises
        ------
        OSError
            the file does not exist
        """
        if not path.exists(config_path):
            raise OSError(f"Configuration file {config_path} does not exist.")
        with open(config_path, 'r', encoding='utf-8') as config_reader:
            return ConfigParser.parse_config(config_reader.read())

    @staticmethod
    def load_preset(configuration: Configuration | str) -> ExperimentConfig:
        "Parses one of the eight bundled configurations (HH, HV, ..., AD)."
        try:
            configuration = Configuration(configuration)
        except ValueError as exc:
            raise ValueError(
                f"No bundled configuration named {configuration}.") from exc
        return ConfigParser.parse_config(
            files('vvhom.presets').joinpath(f"{configuration.value}.cfg").read_text(encoding='utf-8'))

    @staticmethod
    def tokenize(text: str) -> tuple[dict[str, dict[str, _Entry]], dict[str, int]]:
        """Splits a configuration text into sections of entries.

        Parameters
        ----------
        text : str
            the whole configuration

        Returns
        -------
        tuple[dict[str, dict[str, _Entry]], dict[str, int]]
            entries per section and the line of each section header

        Raises
        ------
        ConfigError
            malformed line, unknown or duplicate section or key
        """
        sections: dict[str, dict[str, _Entry]] = dict()
        headers: dict[str, int] = dict()
        current: str | None = None
        for number, raw in enumerate(text.splitlines(), start=1):
            line: str = raw.split('#', 1)[0].rstrip()
            if not line.strip():
                continue
            first_column: int = len(line) - len(line.lstrip()) + 1
            if (header := SECTION_LINE.match(line)):
                name: str = header.group(1)
                if name not in SECTIONS:
                    raise ConfigError(
                        f"unknown section [{name}], expected one of {', '.join(SECTIONS)}", number, header.start(1)+1)
                if name in headers:
                    raise ConfigError(
                        f"duplicate section [{name}] (lines {headers[name]} and {number})", number, first_column)
                headers[name] = number
                sections[name] = dict()
                current = name
                continue
            if not (entry := KEY_LINE.match(line)):
                raise ConfigError(
                    "expected '[section]' or 'key = value'", number, first_column)
            key: str = entry.group(2)
            if current is None:
                raise ConfigError(
                    f"key '{key}' appears before any section", number, entry.start(2)+1)
            if key not in SECTIONS[current]:
                raise ConfigError(
                    f"unknown key '{key}' in [{current}], expected one of {', '.join(SECTIONS[current])}", number, entry.start(2)+1)
            if key in sections[current]:
                raise ConfigError(
                    f"duplicate key '{key}' in [{current}] (lines {sections[current][key].line} and {number})", number, entry.start(2)+1)
            if not entry.group(3):
                raise ConfigError(
                    f"key '{key}' has no value", number, entry.end(2)+1)
            sections[current][key] = _Entry(
                entry.group(3), number, entry.start(3)+1, entry.start(2)+1)
        return sections, headers

    @staticmethod
    def parse_float(entry: _Entry, minimum: float | None = None, strict: bool = True) -> float:
        "Plain real number, optionally bounded below (strictly by default)."
        try:
            value: float = float(entry.value)
        except ValueError as exc:
            raise ConfigError(
                f"'{entry.value}' is not a number", entry.line, entry.column) from exc
        if not np.isfinite(value):
            raise ConfigError(
                f"'{entry.value}' is not a finite number", entry.line, entry.column)
        if minimum is not None and (value <= minimum if strict else value < minimum):
            raise ConfigError(
                f"value must be {'>' if strict else '>='} {minimum:g}, got {value:g}", entry.line, entry.column)
        return value

    @staticmethod
    def parse_int(entry: _Entry, minimum: int) -> int:
        try:
            value: int = int(entry.value)
        except ValueError as exc:
            raise ConfigError(
                f"'{entry.value}' is not an integer", entry.line, entry.column) from exc
        if value < minimum:
            raise ConfigError(
                f"value must be >= {minimum}, got {value}", entry.line, entry.column)
        return value

    @staticmethod
    def parse_quantity(text: str, units: dict[str, float], line: int, column: int) -> float:
        """Parses a number followed by a unit, and converts it to SI.

        Parameters
        ----------
        text : str
            e.g. '45deg', '1.5 ps'
        units : dict[str, float]
            accepted units and their conversion factors (ANGLE_UNITS or TIME_UNITS)
        line : int
            line of the text, for diagnostics
        column : int
            column of the text, for diagnostics

        Returns
        -------
        float
            the value in radians or seconds

        Raises
        ------
        ConfigError
            malformed number, missing unit or unit of the wrong kind
        """
        if not (quantity := QUANTITY.match(text)):
            raise ConfigError(
                f"'{text}' is not a number followed by a unit", line, column)
        unit: str = quantity.group(2)
        unit_column: int = column + quantity.start(2)
        kind: str = 'angle' if units is ANGLE_UNITS else 'time'
        if not unit:
            raise ConfigError(
                f"missing {kind} unit, expected one of {', '.join(units)}", line, unit_column)
        if unit not in units:
            other: str = 'time' if unit in TIME_UNITS else 'angle' if unit in ANGLE_UNITS else 'unknown'
            raise ConfigError(
                f"unit violation: expected {kind} unit ({', '.join(units)}), got {other} unit '{unit}'", line, unit_column)
        return float(quantity.group(1))*units[unit]

    @staticmethod
    def parse_polarization(entry: _Entry) -> LinearPolarization:
        "H | V | D | A, or an angle with unit."
        if entry.value in {polarization.value for polarization in Polarization}:
            return LinearPolarization.named(entry.value)
        return LinearPolarization(ConfigParser.parse_quantity(entry.value, ANGLE_UNITS, entry.line, entry.column))

    @staticmethod
    def parse_elements(entry: _Entry) -> tuple[Element, ...]:
        """Parses a ';'-separated chain: waveplate(retardance, axis), qplate(q, offset), polarizer(angle).

        Raises
        ------
        ConfigError
            unknown element, wrong argument count or units
        """
        elements: list[Element] = list()
        offset: int = 0
        for chunk in entry.value.split(';'):
            column: int = entry.column + offset
            offset += len(chunk) + 1
            if not (element := ELEMENT.match(chunk)):
                raise ConfigError(
                    f"'{chunk.strip()}' is not of the form name(arguments)", entry.line, column)
            try:
                kind: ElementKind = ElementKind(element.group(1))
            except ValueError as exc:
                raise ConfigError(
                    f"unknown element '{element.group(1)}', expected one of {', '.join(k.value for k in ElementKind)}",
                    entry.line, column + element.start(1)) from exc
            parameters: list[float] = list()
            argument_offset: int = element.start(2)
            for position, argument in enumerate(element.group(2).split(',')):
                argument_column: int = column + argument_offset + \
                    len(argument) - len(argument.lstrip())
                argument_offset += len(argument) + 1
                if kind == ElementKind.QPLATE and position == 0:
                    parameters.append(ConfigParser.parse_float(
                        _Entry(argument.strip(), entry.line, argument_column, argument_column)))
                else:
                    parameters.append(ConfigParser.parse_quantity(
                        argument.strip(), ANGLE_UNITS, entry.line, argument_column))
            try:
                elements.append(Element(kind, tuple(parameters)))
            except ValueError as exc:
                raise ConfigError(str(exc), entry.line, column) from exc
        return tuple(elements)

    @staticmethod
    def parse_mode(section: str, entries: dict[str, _Entry]) -> ModeSpec:
        "Reads [input_a] or [input_b]; elements and input are only allowed for chains."
        default: str = 'radial' if section == 'input_a' else 'pi'
        mode: str = entries['mode'].value if 'mode' in entries else default
        if mode not in NAMED_MODES + ('chain',):
            raise ConfigError(
                f"unknown mode '{mode}', expected one of {', '.join(NAMED_MODES + ('chain',))}",
                entries['mode'].line, entries['mode'].column)
        if mode != 'chain':
            for key in ('elements', 'input'):
                if key in entries:
                    raise ConfigError(
                        f"key '{key}' is only allowed with mode = chain", entries[key].line, entries[key].key_column)
            return ModeSpec(mode)
        if 'elements' not in entries:
            raise ConfigError(
                f"mode = chain needs an 'elements' key in [{section}]", entries['mode'].line, entries['mode'].column)
        return ModeSpec(
            mode,
            ConfigParser.parse_elements(entries['elements']),
            ConfigParser.parse_polarization(
                entries['input']) if 'input' in entries else None,
        )

    @staticmethod
    def parse_config(text: str) -> ExperimentConfig:
        """Strict parse of an experiment configuration. Unknown keys are errors, missing keys take their defaults.

        Parameters
        ----------
        text : str
            the configuration text

        Returns
        -------
        ExperimentConfig
            the validated configuration

        Raises
        ------
        ConfigError
            any syntax, key, value or unit error, with its line and column
        """
        sections, headers = ConfigParser.tokenize(text)

        def entries(section: str) -> dict[str, _Entry]:
            return sections.get(section, dict())

        if 'projectors' not in sections:
            raise ConfigError("missing section [projectors]", 1, 1)
        for key in ('p1', 'p2'):
            if key not in sections['projectors']:
                raise ConfigError(
                    f"missing key '{key}' in [projectors]", headers['projectors'], 1)

        experiment: dict[str, _Entry] = entries('experiment')
        name: str = experiment['name'].value if 'name' in experiment else 'experiment'
        quadrature: int = ConfigParser.parse_int(
            experiment['quadrature'], MIN_QUADRATURE) if 'quadrature' in experiment else DEFAULT_QUADRATURE

        envelope: TemporalEnvelope = TemporalEnvelope(
            ConfigParser.parse_time(entries('envelope')['sigma'], positive=True)) if 'sigma' in entries('envelope') else TemporalEnvelope()
        sigma: float = envelope.sigma

        delay: dict[str, _Entry] = entries('delay')
        scan: DelayScan = DelayScan(
            minimum=ConfigParser.parse_time(
                delay['min']) if 'min' in delay else -5*sigma,
            maximum=ConfigParser.parse_time(
                delay['max']) if 'max' in delay else 5*sigma,
            steps=ConfigParser.parse_int(
                delay['steps'], 1) if 'steps' in delay else 41,
            tuned=ConfigParser.parse_time(delay['in']) if 'in' in delay else 0.,
            detuned=ConfigParser.parse_time(
                delay['out']) if 'out' in delay else 10*sigma,
        )
        if scan.maximum < scan.minimum:
            anchor: _Entry = delay.get('max') or delay['min']
            raise ConfigError(
                "delay max must not be smaller than delay min", anchor.line, anchor.column)

        grid_entries: dict[str, _Entry] = entries('grid')
        width: int = ConfigParser.parse_int(
            grid_entries['width'], 1) if 'width' in grid_entries else 64
        height: int = ConfigParser.parse_int(
            grid_entries['height'], 1) if 'height' in grid_entries else 64
        scale: float = ConfigParser.parse_float(
            grid_entries['scale'], 0.) if 'scale' in grid_entries else 1.
        center: tuple[float, float] = (
            ConfigParser.parse_float(
                grid_entries['center_x']) if 'center_x' in grid_entries else (width-1)/2,
            ConfigParser.parse_float(
                grid_entries['center_y']) if 'center_y' in grid_entries else (height-1)/2,
        )
        grid: PixelGrid = PixelGrid(width, height, center, scale)

        radial_entries: dict[str, _Entry] = entries('radial')
        try:
            kind: RadialKind = RadialKind(
                radial_entries['profile'].value) if 'profile' in radial_entries else RadialKind.RING
        except ValueError as exc:
            raise ConfigError(
                f"unknown profile '{radial_entries['profile'].value}', expected one of {', '.join(k.value for k in RadialKind)}",
                radial_entries['profile'].line, radial_entries['profile'].column) from exc
        radial: RadialProfile = RadialProfile(
            kind=kind,
            waist=ConfigParser.parse_float(
                radial_entries['waist'], 0.) if 'waist' in radial_entries else width*scale/4,
            radius=ConfigParser.parse_float(
                radial_entries['radius'], 0.) if 'radius' in radial_entries else width*scale/2.5,
            order=ConfigParser.parse_int(
                radial_entries['order'], 0) if 'order' in radial_entries else 1,
        )

        noise: NoiseSettings | None = None
        if 'noise' in sections:
            if 'total_counts' not in sections['noise']:
                raise ConfigError(
                    "missing key 'total_counts' in [noise]", headers['noise'], 1)
            noise = NoiseSettings(
                ConfigParser.parse_float(sections['noise']['total_counts'], 0.),
                ConfigParser.parse_int(
                    sections['noise']['seed'], 0) if 'seed' in sections['noise'] else 0,
            )

        oracle: OracleSettings | None = None
        if 'oracle' in sections:
            if 'sectors' not in sections['oracle']:
                raise ConfigError(
                    "missing key 'sectors' in [oracle]", headers['oracle'], 1)
            sectors: _Entry = sections['oracle']['sectors']
            counts: list[int] = list()
            offset: int = 0
            for chunk in sectors.value.split(','):
                column: int = sectors.column + offset + len(chunk) - len(chunk.lstrip())
                offset += len(chunk) + 1
                counts.append(ConfigParser.parse_int(
                    _Entry(chunk.strip(), sectors.line, column, sectors.key_column), 2))
            oracle = OracleSettings(
                tuple(counts),
                ConfigParser.parse_float(
                    sections['oracle']['tolerance'], 0.) if 'tolerance' in sections['oracle'] else 1e-9,
            )

        return ExperimentConfig(
            input_a=ConfigParser.parse_mode(
                'input_a', entries('input_a')),
            input_b=ConfigParser.parse_mode(
                'input_b', entries('input_b')),
            projector_1=ConfigParser.parse_polarization(
                sections['projectors']['p1']),
            projector_2=ConfigParser.parse_polarization(
                sections['projectors']['p2']),
            delay=scan,
            envelope=envelope,
            radial=radial,
            grid=grid,
            name=name,
            quadrature=quadrature,
            noise=noise,
            oracle=oracle,
        )

    @staticmethod
    def parse_time(entry: _Entry, positive: bool = False) -> float:
        value: float = ConfigParser.parse_quantity(
            entry.value, TIME_UNITS, entry.line, entry.column)
        if positive and value <= 0.:
            raise ConfigError(
                f"time must be positive, got {value:g} s", entry.line, entry.column)
        return value
