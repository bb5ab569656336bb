"Writers and readers for run outputs: CSV tables, PGM and PPM images, JSON sidecars"
from csv import reader as csv_reader
from json import dumps
from os import path
from pathlib import Path
import logging
import numpy as np
from vvhom.abstractions import MapFormat
from vvhom.detectors import HomCurve, PixelGrid, ScalarMap
from vvhom.plotting import VISIBILITY_CMAP, palette_bytes

logger = logging.getLogger(__name__)

MAP_HEADER: str = "x,y,value,defined"
CURVE_HEADER: str = "delay,counts"
PALETTE_SIZE: int = 256


def path_allocator(
    directory: str,
    file_name: str,
    particle: str | None = None,
    overwrite: bool = True,
) -> str:
    """Builds the path to an output file, and creates the arborescence if needed.

    Parameters
    ----------
    directory : str
        output folder, created with its parents
    file_name : str
        file name, 'file' if empty
    particle : str | None, optional
        file extension appended when missing, by default None
    overwrite : bool, optional
        if an existing file may be written over, by default True

    Returns
    -------
    str
        the path to the file, with extension

    Raises
    ------
    OSError
        the folder cannot be created, or the file exists and overwrite is False
    """
    file_name = file_name or 'file'
    if particle and not file_name.endswith(particle):
        file_name = file_name + particle
    full_path: str = path.join(directory, file_name)
    if not overwrite and path.exists(full_path):
        raise OSError(f"File {full_path} already exists. Aborting.")
    try:
        Path(directory).mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"Cannot create output folder {directory}: {exc.strerror}") from exc
    return full_path


def _number(value: float | int) -> str:
    "Exact decimal form: repr for floats, plain digits for counts."
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write(file_path: str, content: str | bytes) -> None:
    try:
        if isinstance(content, bytes):
            with open(file_path, 'wb') as binary_writer:
                binary_writer.write(content)
        else:
            with open(file_path, 'w', encoding='utf-8', newline='\n') as text_writer:
                text_writer.write(content)
    except OSError as exc:
        raise OSError(f"Cannot write {file_path}: {exc.strerror}") from exc
    logger.debug("Wrote %s", file_path)


def write_json(data: dict, file_path: str) -> str:
    "Sorted, indented JSON with a trailing newline."
    _write(file_path, dumps(data, indent=2, sort_keys=True) + '\n')
    return file_path


def map_to_csv(scalar_map: ScalarMap) -> str:
    values: np.ndarray = np.asarray(scalar_map.values)
    mask: np.ndarray = np.asarray(scalar_map.mask, dtype=bool)
    rows: list[str] = [MAP_HEADER]
    for y in range(scalar_map.grid.height):
        for x in range(scalar_map.grid.width):
            rows.append(
                f"{x},{y},{_number(values[y, x].item())},{int(mask[y, x])}")
    return '\n'.join(rows) + '\n'


def map_to_pgm(scalar_map: ScalarMap) -> tuple[bytes, dict]:
    """Binary P5 image, defined values scaled linearly from [min, max] to [0, 255], masked pixels 0.
    A constant map is written as 255 everywhere it is defined.

    Returns
    -------
    tuple[bytes, dict]
        the image and its sidecar metadata
    """
    values: np.ndarray = np.asarray(scalar_map.values, dtype=float)
    mask: np.ndarray = np.asarray(scalar_map.mask, dtype=bool)
    if not mask.any():
        raise ValueError("Cannot scale a map without defined pixels.")
    low, high = float(values[mask].min()), float(values[mask].max())
    if high > low:
        scaled: np.ndarray = np.rint((values - low)/(high - low)*255)
    else:
        scaled: np.ndarray = np.full(values.shape, 255.)
    pixels: np.ndarray = np.where(mask, np.clip(scaled, 0, 255), 0).astype(np.uint8)
    header: bytes = f"P5\n{scalar_map.grid.width} {scalar_map.grid.height}\n255\n".encode('ascii')
    sidecar: dict = {
        'format': 'P5',
        'width': scalar_map.grid.width,
        'height': scalar_map.grid.height,
        'min': low,
        'max': high,
        'masked_value': 0,
        'defined_pixels': int(mask.sum()),
    }
    return header + pixels.tobytes(), sidecar


def map_to_ppm(scalar_map: ScalarMap) -> bytes:
    """Binary P6 image of a visibility map over a fixed diverging palette.
    Visibility v in [-1, 1] takes palette entry rint((v + 1) / 2 * 255) of the 256-color coolwarm palette,
    so 0 lands on entry 128; masked pixels are black.
    """
    values: np.ndarray = np.clip(np.asarray(scalar_map.values, dtype=float), -1., 1.)
    mask: np.ndarray = np.asarray(scalar_map.mask, dtype=bool)
    indices: np.ndarray = np.rint((values + 1)/2*(PALETTE_SIZE - 1)).astype(int)
    colors: np.ndarray = palette_bytes(PALETTE_SIZE, VISIBILITY_CMAP)[indices]
    colors[~mask] = 0
    header: bytes = f"P6\n{scalar_map.grid.width} {scalar_map.grid.height}\n255\n".encode('ascii')
    return header + colors.astype(np.uint8).tobytes()


def emit_map(scalar_map: ScalarMap, file_path: str, map_format: MapFormat | str) -> list[str]:
    """Writes a map to disk.

    Parameters
    ----------
    scalar_map : ScalarMap
        the map, with at least one defined pixel for image formats
    file_path : str
        destination file
    map_format : MapFormat | str
        csv | pgm | viz-ppm

    Returns
    -------
    list[str]
        written files (the PGM sidecar is file_path + '.json')

    Raises
    ------
    ValueError
        unknown format
    OSError
        unwritable path
    """
    try:
        map_format = MapFormat(map_format)
    except ValueError as exc:
        raise ValueError(
            f"Map format {map_format} is not one of {', '.join(f.value for f in MapFormat)}.") from exc
    match map_format:
        case MapFormat.CSV:
            _write(file_path, map_to_csv(scalar_map))
            return [file_path]
        case MapFormat.PGM:
            image, sidecar = map_to_pgm(scalar_map)
            _write(file_path, image)
            return [file_path, write_json(sidecar, file_path + '.json')]
        case MapFormat.VIZ_PPM:
            _write(file_path, map_to_ppm(scalar_map))
            return [file_path]


def emit_curve(curve: HomCurve, file_path: str) -> str:
    "Writes a HOM curve as 'delay,counts' CSV."
    rows: list[str] = [CURVE_HEADER] + [
        f"{_number(delay.item())},{_number(count.item())}" for delay, count in zip(np.asarray(curve.delays), np.asarray(curve.counts))
    ]
    _write(file_path, '\n'.join(rows) + '\n')
    return file_path


def _read_rows(file_path: str, header: str) -> list[list[str]]:
    with open(file_path, 'r', encoding='utf-8', newline='') as csv_file:
        rows: list[list[str]] = list(csv_reader(csv_file))
    if not rows or ','.join(rows[0]) != header:
        raise ValueError(f"{file_path} does not start with the header '{header}'.")
    return rows[1:]


def _parse_number(text: str) -> float | int:
    return float(text) if any(character in text for character in '.eEn') else int(text)


def read_map_csv(file_path: str, grid: PixelGrid | None = None) -> ScalarMap:
    """Reads a map written by emit_map in csv format.

    Parameters
    ----------
    file_path : str
        the CSV file
    grid : PixelGrid | None, optional
        the grid to attach, by default a grid sized from the largest x and y

    Returns
    -------
    ScalarMap
        the map, without fluence weights
    """
    rows: list[list[str]] = _read_rows(file_path, MAP_HEADER)
    xs: list[int] = [int(row[0]) for row in rows]
    ys: list[int] = [int(row[1]) for row in rows]
    grid = grid if grid is not None else PixelGrid(max(xs)+1, max(ys)+1)
    parsed: list[float | int] = [_parse_number(row[2]) for row in rows]
    values: np.ndarray = np.zeros(grid.shape, dtype=float if any(
        isinstance(value, float) for value in parsed) else np.int64)
    mask: np.ndarray = np.zeros(grid.shape, dtype=bool)
    for x, y, value, row in zip(xs, ys, parsed, rows):
        values[y, x] = value
        mask[y, x] = row[3] == '1'
    return ScalarMap(grid, values, mask)


def read_curve_csv(file_path: str) -> HomCurve:
    "Reads a curve written by emit_curve."
    rows: list[list[str]] = _read_rows(file_path, CURVE_HEADER)
    counts: list[float | int] = [_parse_number(row[1]) for row in rows]
    return HomCurve(np.array([float(row[0]) for row in rows]), np.array(counts))
