"Tests for the virtual experiment runner and the command-line front end"
import json
import numpy as np
import pytest
from vvhom import __version__
from vvhom.abstractions import Configuration, ExitCode
from vvhom.cli import build_parser, main
from vvhom.configparser import ConfigParser, ExperimentConfig
from vvhom.emitters import read_curve_csv, read_map_csv
from vvhom.interference import integrated_visibility_table
from vvhom.oracle import OracleToleranceError
from vvhom.runner import RunReport, run

SMALL: str = """[experiment]
name = small
quadrature = 32

[projectors]
p1 = A
p2 = H

[delay]
min = -3 ps
max = 3 ps
steps = 13

[radial]
waist = 3

[grid]
width = 12
height = 12

[noise]
total_counts = 1e5
seed = 4

[oracle]
sectors = 4, 8
"""


@pytest.fixture
def small_config() -> ExperimentConfig:
    return ConfigParser.parse_config(SMALL)


@pytest.fixture
def config_file(tmp_path) -> str:
    written = tmp_path / 'small.cfg'
    written.write_text(SMALL, encoding='utf-8')
    return str(written)


def test_run_writes_every_panel(small_config, tmp_path):
    outdir = tmp_path / 'out'
    report: RunReport = run(small_config, str(outdir), threads=2)
    for name in ('hom_curve.csv', 'map_in.csv', 'map_in.pgm', 'map_in.pgm.json', 'map_out.csv', 'visibility.csv',
                 'visibility.pgm', 'visibility.ppm', 'hom_curve_noisy.csv', 'map_in_noisy.csv',
                 'visibility_noisy.ppm', 'oracle.json', 'report.json'):
        assert (outdir / name).is_file(), name
    assert not (outdir / 'panel.png').exists()
    curve = read_curve_csv(str(outdir / 'hom_curve.csv'))
    assert curve.delays.size == 13
    assert report.rate_in == pytest.approx(report.rate_out, rel=1e-9)
    visibility = read_map_csv(str(outdir / 'visibility.csv'))
    assert visibility.values[visibility.mask].max() <= 1. + 1e-12
    noisy = read_map_csv(str(outdir / 'map_out_noisy.csv'))
    assert noisy.values.dtype == np.int64
    assert report.azimuthal_fit is not None
    assert report.oracle_breach() is None


def test_report_content(small_config, tmp_path):
    report: RunReport = run(small_config, str(tmp_path), seed=11)
    with open(tmp_path / 'report.json', encoding='utf-8') as reader:
        content: dict = json.load(reader)
    assert content['version'] == __version__
    assert 'wall_clock' not in content
    assert content['outputs']['curve'] == ['hom_curve.csv']
    assert [entry['n_sectors'] for entry in content['oracle']] == [4, 8]
    restored: ExperimentConfig = ConfigParser.parse_config(content['config'])
    assert restored == report.config
    assert restored.noise.seed == 11
    assert report.wall_clock > 0.


def test_runs_are_reproducible(small_config, tmp_path):
    run(small_config, str(tmp_path / 'first'), threads=1)
    run(small_config, str(tmp_path / 'second'), threads=3)
    for name in ('hom_curve.csv', 'map_in.pgm', 'visibility.ppm', 'hom_curve_noisy.csv', 'map_out_noisy.csv',
                 'oracle.json', 'report.json'):
        assert (tmp_path / 'first' / name).read_bytes() == (tmp_path / 'second' / name).read_bytes(), name


@pytest.mark.parametrize('configuration', list(Configuration))
def test_preset_visibility_maps(configuration, tmp_path):
    preset: ExperimentConfig = ConfigParser.load_preset(configuration)
    run(preset, str(tmp_path))
    visibility = read_map_csv(str(tmp_path / 'visibility.csv'), preset.grid)
    _, angle = preset.grid.polar()
    assert visibility.mask.any()
    np.testing.assert_allclose(
        visibility.defined(), integrated_visibility_table(configuration, angle[visibility.mask]), atol=1e-9)


def test_noisy_ah_lobes_sit_on_the_horizontal_axis(tmp_path):
    preset: ExperimentConfig = ConfigParser.load_preset(Configuration.AH)
    assert (preset.noise.total_counts, preset.noise.seed) == (1e6, 7)
    report: RunReport = run(preset, str(tmp_path))
    fit = report.azimuthal_fit
    assert fit.amplitude > 0.
    assert abs(fit.orientation) < .05
    assert fit.lobes[1] == pytest.approx(np.pi, abs=.05)


def test_quadrature_override(small_config, tmp_path):
    report: RunReport = run(small_config, str(tmp_path), quadrature=16)
    assert report.config.quadrature == 16


def test_oracle_breach_is_raised_after_writing(tmp_path):
    strict: ExperimentConfig = ConfigParser.parse_config(SMALL.replace('sectors = 4, 8', 'sectors = 4\ntolerance = 1e-300'))
    with pytest.raises(OracleToleranceError) as caught:
        run(strict, str(tmp_path))
    assert caught.value.location[0] == 4
    assert (tmp_path / 'oracle.json').is_file()
    assert (tmp_path / 'report.json').is_file()


def test_figure(small_config, tmp_path):
    report: RunReport = run(small_config, str(tmp_path), figure=True)
    assert (tmp_path / 'panel.png').read_bytes().startswith(b'\x89PNG')
    assert report.outputs['figure'] == [str(tmp_path / 'panel.png')]


def test_cli_run(config_file, tmp_path):
    assert main(['run', '-c', config_file, '-o', str(tmp_path / 'cli'), '--seed', '2']) == ExitCode.OK
    assert (tmp_path / 'cli' / 'report.json').is_file()


def test_cli_validate_prints_canonical_text(config_file, capsys):
    assert main(['validate', '-c', config_file]) == ExitCode.OK
    printed: str = capsys.readouterr().out
    assert ConfigParser.parse_config(printed) == ConfigParser.read_config(config_file)
    assert main(['validate', '-c', 'HV']) == ExitCode.OK
    assert 'p2 = V' in capsys.readouterr().out


def test_cli_table(capsys):
    assert main(['table']) == ExitCode.OK
    lines: list[str] = capsys.readouterr().out.splitlines()
    assert len(lines) == 9
    assert lines[2].startswith('HV\t2.000000')
    assert lines[1].startswith('HH\t0.000000')


def test_cli_oracle(config_file, capsys):
    assert main(['oracle', '-c', config_file, '--sectors', '4', '8']) == ExitCode.OK
    assert capsys.readouterr().out.count('n_sectors=') == 2
    assert main(['oracle', '-c', config_file, '--sectors', '4', '--tolerance', '-1']) == ExitCode.ORACLE_BREACH


def test_cli_usage_errors(tmp_path, config_file):
    broken = tmp_path / 'broken.cfg'
    broken.write_text("[projectors]\np1 = A\np2 = 3 ps\n", encoding='utf-8')
    assert main(['validate', '-c', str(broken)]) == ExitCode.USAGE
    assert main(['validate', '-c', str(tmp_path / 'absent.cfg')]) == ExitCode.USAGE
    with pytest.raises(SystemExit) as caught:
        main(['run', '-c', config_file, '-o', str(tmp_path), '--quadrature', '4'])
    assert caught.value.code == ExitCode.USAGE
    with pytest.raises(SystemExit) as caught:
        main(['oracle', '-c', config_file, '--sectors', '1'])
    assert caught.value.code == ExitCode.USAGE
    with pytest.raises(SystemExit) as caught:
        main([])
    assert caught.value.code == ExitCode.USAGE


def test_cli_runtime_error(config_file, tmp_path):
    blocker = tmp_path / 'blocker'
    blocker.write_text('', encoding='utf-8')
    assert main(['run', '-c', config_file, '-o', str(blocker / 'out')]) == ExitCode.RUNTIME


def test_parser_verbs():
    parser = build_parser()
    args = parser.parse_args(['run', '-c', 'HH', '-o', 'out', '--figure', '-v'])
    assert args.verb == 'run' and args.figure and args.verbose and args.seed is None
