"Tests for output writers and readers"
import json
import numpy as np
import pytest
from vvhom.abstractions import MapFormat
from vvhom.detectors import HomCurve, PixelGrid, ScalarMap
from vvhom.emitters import (emit_curve, emit_map, map_to_csv, map_to_pgm, map_to_ppm, path_allocator, read_curve_csv,
                            read_map_csv)
from vvhom.plotting import get_palette, palette_bytes

GRID: PixelGrid = PixelGrid(3, 2)


def image_body(data: bytes, width: int, height: int, channels: int) -> np.ndarray:
    header_size: int = len(data) - width*height*channels
    return np.frombuffer(data[header_size:], dtype=np.uint8).reshape(height, width, channels)


def test_csv_round_trip(tmp_path):
    values: np.ndarray = np.array([[.1, 1/3, -2.5e-17], [0., 7., 1e300]])
    mask: np.ndarray = np.array([[True, True, False], [True, True, True]])
    written: list[str] = emit_map(ScalarMap(GRID, values, mask), str(tmp_path / 'map.csv'), MapFormat.CSV)
    restored: ScalarMap = read_map_csv(written[0])
    assert restored.grid == GRID
    assert np.array_equal(restored.values, values) and np.array_equal(restored.mask, mask)
    assert map_to_csv(restored).splitlines()[0] == "x,y,value,defined"
    assert map_to_csv(restored).splitlines()[3] == "2,0,-2.5e-17,0"


def test_integer_maps_stay_integer(tmp_path):
    counts: ScalarMap = ScalarMap(GRID, np.arange(6, dtype=np.int64).reshape(2, 3), np.ones((2, 3), dtype=bool))
    restored: ScalarMap = read_map_csv(emit_map(counts, str(tmp_path / 'counts.csv'), 'csv')[0], GRID)
    assert restored.values.dtype == np.int64
    assert np.array_equal(restored.values, counts.values)


def test_curve_round_trip(tmp_path):
    curve: HomCurve = HomCurve(np.linspace(-1e-12, 1e-12, 5), np.array([.2, .1, 0., .1, .2]))
    restored: HomCurve = read_curve_csv(emit_curve(curve, str(tmp_path / 'curve.csv')))
    assert np.array_equal(restored.delays, curve.delays)
    assert np.array_equal(restored.counts, curve.counts)
    with open(tmp_path / 'curve.csv', encoding='utf-8') as reader:
        assert reader.readline() == "delay,counts\n"


def test_wrong_header(tmp_path):
    other = tmp_path / 'other.csv'
    other.write_text("a,b\n1,2\n", encoding='utf-8')
    with pytest.raises(ValueError):
        read_curve_csv(str(other))


def test_constant_pgm(tmp_path):
    mask: np.ndarray = np.array([[True, True, True], [True, False, True]])
    constant: ScalarMap = ScalarMap(GRID, np.ones((2, 3)), mask)
    written: list[str] = emit_map(constant, str(tmp_path / 'constant.pgm'), MapFormat.PGM)
    assert written[1] == written[0] + '.json'
    with open(written[0], 'rb') as reader:
        data: bytes = reader.read()
    assert data.startswith(b"P5\n3 2\n255\n")
    pixels: np.ndarray = image_body(data, 3, 2, 1)[..., 0]
    assert np.all(pixels[mask] == 255) and pixels[1, 1] == 0
    with open(written[1], encoding='utf-8') as reader:
        sidecar: dict = json.load(reader)
    assert sidecar['min'] == sidecar['max'] == 1.
    assert sidecar['defined_pixels'] == 5


def test_pgm_scaling():
    ramp: ScalarMap = ScalarMap(GRID, np.array([[-1., 0., 1.], [.5, 3., -1.]]), np.ones((2, 3), dtype=bool))
    image, sidecar = map_to_pgm(ramp)
    pixels: np.ndarray = image_body(image, 3, 2, 1)[..., 0]
    assert pixels[0, 0] == 0 and pixels[1, 1] == 255 and pixels[0, 1] == 64
    assert (sidecar['min'], sidecar['max']) == (-1., 3.)
    with pytest.raises(ValueError):
        map_to_pgm(ScalarMap(GRID, np.zeros((2, 3)), np.zeros((2, 3), dtype=bool)))


def test_visibility_ppm():
    mask: np.ndarray = np.array([[True, True, True], [False, True, True]])
    visibility: ScalarMap = ScalarMap(GRID, np.array([[0., 1., -1.], [0., 2., 0.]]), mask)
    pixels: np.ndarray = image_body(map_to_ppm(visibility), 3, 2, 3)
    palette: np.ndarray = palette_bytes()
    assert np.array_equal(pixels[0, 0], palette[128])
    assert np.array_equal(pixels[0, 1], palette[255]) and np.array_equal(pixels[1, 1], palette[255])
    assert np.array_equal(pixels[0, 2], palette[0])
    assert not pixels[1, 0].any()


def test_unknown_map_format(tmp_path):
    with pytest.raises(ValueError):
        emit_map(ScalarMap(GRID, np.zeros((2, 3)), np.ones((2, 3), dtype=bool)), str(tmp_path / 'map.tif'), 'tif')


def test_path_allocator(tmp_path):
    target: str = path_allocator(str(tmp_path / 'nested' / 'run'), 'map_in', '.csv')
    assert target.endswith('map_in.csv')
    assert (tmp_path / 'nested' / 'run').is_dir()
    assert path_allocator(str(tmp_path), 'report.json', '.json').endswith('report.json')
    assert path_allocator(str(tmp_path), '').endswith('file')
    (tmp_path / 'taken.csv').write_text('', encoding='utf-8')
    with pytest.raises(OSError):
        path_allocator(str(tmp_path), 'taken', '.csv', overwrite=False)


def test_palettes():
    assert len(get_palette(5)) == 5
    assert get_palette(3, 'coolwarm', as_hex=True)[0].startswith('#')
    assert palette_bytes(16).shape == (16, 3)
    with pytest.raises(ValueError):
        get_palette(3, 'no_such_colormap')
