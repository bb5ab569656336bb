"Virtual experiment runner: scans, maps, noisy replicas and oracle cross-checks of one configuration"
from dataclasses import dataclass, field, replace
from os import path
from time import perf_counter
import logging
import numpy as np
from vvhom import __version__
from vvhom.abstractions import MapFormat
from vvhom.configparser import ExperimentConfig
from vvhom.detectors import (AzimuthalFit, HomCurve, HomFit, ScalarMap, bucket_bucket_rate, camera_bucket_map,
                             fit_azimuthal_modulation, fit_hom_curve, hom_scan, sample_poisson, visibility_map)
from vvhom.emitters import emit_curve, emit_map, path_allocator, write_json
from vvhom.oracle import OracleComparison, OracleToleranceError, compare_with_engine
from vvhom.plotting import draw_panel

logger = logging.getLogger(__name__)


@dataclass
class RunReport:
    """Everything a run produced.

    Parameters
    ----------
    config : ExperimentConfig
        the configuration, after command-line overrides
    version : str
        vvhom version
    outputs : dict[str, list[str]]
        written files per panel (curve, map_in, map_out, visibility, noise, oracle, report)
    rate_in : float
        bucket-bucket rate of tuned photons
    rate_out : float
        bucket-bucket rate of detuned photons
    hom_fit : HomFit | None
        fit of the noisy HOM curve
    azimuthal_fit : AzimuthalFit | None
        lobe fit of the noisy visibility map
    oracle : list[OracleComparison]
        oracle residuals, one per sector count
    wall_clock : float
        run duration in seconds, kept out of report.json
    """
    config: ExperimentConfig
    version: str
    outputs: dict[str, list[str]] = field(default_factory=dict)
    rate_in: float = 0.
    rate_out: float = 0.
    hom_fit: HomFit | None = None
    azimuthal_fit: AzimuthalFit | None = None
    oracle: list[OracleComparison] = field(default_factory=list)
    wall_clock: float = 0.

    def oracle_breach(self) -> OracleComparison | None:
        "Worst comparison above tolerance, if any."
        if self.config.oracle is None or not self.oracle:
            return None
        worst: OracleComparison = max(
            self.oracle, key=lambda comparison: comparison.max_residual)
        return worst if worst.max_residual > self.config.oracle.tolerance else None

    def as_json(self, outdir: str) -> dict:
        "Report content, file paths relative to outdir."
        return {
            'name': self.config.name,
            'version': self.version,
            'config': self.config.to_text(),
            'outputs': {panel: [path.relpath(file, outdir) for file in files] for panel, files in self.outputs.items()},
            'rates': {
                'in': self.rate_in,
                'out': self.rate_out,
                'ratio': self.rate_in/self.rate_out if self.rate_out > 0. else None,
            },
            'hom_fit': None if self.hom_fit is None else vars(self.hom_fit),
            'azimuthal_fit': None if self.azimuthal_fit is None else vars(self.azimuthal_fit),
            'oracle': [
                {'n_sectors': comparison.n_sectors, 'max_residual': comparison.max_residual,
                 'location': list(comparison.location)} for comparison in self.oracle
            ],
        }


def _emit_map_panel(scalar_map: ScalarMap, outdir: str, stem: str, formats: tuple[MapFormat, ...]) -> list[str]:
    written: list[str] = list()
    for map_format in formats:
        particle: str = {MapFormat.CSV: '.csv', MapFormat.PGM: '.pgm', MapFormat.VIZ_PPM: '.ppm'}[map_format]
        written += emit_map(scalar_map, path_allocator(outdir, stem, particle), map_format)
    return written


def run(
    config: ExperimentConfig,
    outdir: str,
    seed: int | None = None,
    quadrature: int | None = None,
    figure: bool = False,
    threads: int | None = None,
) -> RunReport:
    """Runs the virtual experiment described by config and writes its outputs in outdir.

    Parameters
    ----------
    config : ExperimentConfig
        a parsed configuration
    outdir : str
        output folder, created if needed
    seed : int | None, optional
        overrides the noise seed, by default None
    quadrature : int | None, optional
        overrides the angular quadrature size, by default None
    figure : bool, optional
        also draws panel.png, by default False
    threads : int | None, optional
        worker threads for maps, by default thread_count()

    Returns
    -------
    RunReport
        what was computed and written

    Raises
    ------
    OracleToleranceError
        an oracle residual exceeds the configured tolerance; every file, oracle.json included, is written first
    OSError
        an output cannot be written
    """
    start: float = perf_counter()
    if quadrature is not None:
        config = replace(config, quadrature=quadrature)
    if seed is not None and config.noise is not None:
        config = replace(config, noise=replace(config.noise, seed=seed))
    report: RunReport = RunReport(config, __version__)
    biphoton = config.biphoton()
    projection = config.projection()
    n_phi: int = config.quadrature
    logger.info("Running %s: %s / %s, projectors %s %s",
                config.name, biphoton.mode_a.name, biphoton.mode_b.name,
                config.projector_1.to_text(), config.projector_2.to_text())

    curve: HomCurve = hom_scan(biphoton, projection, config.delay.delays(), n_phi)
    report.outputs['curve'] = [emit_curve(curve, path_allocator(outdir, 'hom_curve', '.csv'))]
    report.rate_in = bucket_bucket_rate(biphoton, projection, config.delay.tuned, n_phi)
    report.rate_out = bucket_bucket_rate(biphoton, projection, config.delay.detuned, n_phi)

    logger.info("Computing %dx%d camera maps with %d bucket angles",
                config.grid.width, config.grid.height, n_phi)
    map_in: ScalarMap = camera_bucket_map(
        biphoton, projection, config.delay.tuned, config.grid, n_phi, threads)
    map_out: ScalarMap = camera_bucket_map(
        biphoton, projection, config.delay.detuned, config.grid, n_phi, threads)
    visibility: ScalarMap = visibility_map(map_out, map_in)
    report.outputs['map_in'] = _emit_map_panel(
        map_in, outdir, 'map_in', (MapFormat.CSV, MapFormat.PGM))
    report.outputs['map_out'] = _emit_map_panel(
        map_out, outdir, 'map_out', (MapFormat.CSV, MapFormat.PGM))
    report.outputs['visibility'] = _emit_map_panel(
        visibility, outdir, 'visibility', (MapFormat.CSV, MapFormat.PGM, MapFormat.VIZ_PPM))

    if config.noise is not None:
        # seed for the curve, seed + 1 and seed + 2 for the in and out maps;
        # total_counts is the expectation of the out map, the in map keeps its relative intensity
        total, noise_seed = config.noise.total_counts, config.noise.seed
        out_sum: float = float(np.sum(map_out.defined()))
        in_share: float = float(np.sum(map_in.defined()))/out_sum if out_sum > 0. else 1.
        noisy_curve: HomCurve = sample_poisson(curve, total, noise_seed)
        noisy_in: ScalarMap = sample_poisson(map_in, total*in_share or total, noise_seed + 1)
        noisy_out: ScalarMap = sample_poisson(map_out, total, noise_seed + 2)
        noisy_visibility: ScalarMap = visibility_map(noisy_out, noisy_in)
        report.outputs['noise'] = [emit_curve(noisy_curve, path_allocator(outdir, 'hom_curve_noisy', '.csv'))] + \
            _emit_map_panel(noisy_in, outdir, 'map_in_noisy', (MapFormat.CSV, MapFormat.PGM)) + \
            _emit_map_panel(noisy_out, outdir, 'map_out_noisy', (MapFormat.CSV, MapFormat.PGM)) + \
            _emit_map_panel(noisy_visibility, outdir, 'visibility_noisy', (MapFormat.CSV, MapFormat.VIZ_PPM))
        try:
            report.hom_fit = fit_hom_curve(noisy_curve, config.envelope.sigma)
        except (ValueError, RuntimeError) as exc:
            logger.warning("Noisy HOM curve could not be fitted: %s", exc)
        if np.count_nonzero(noisy_visibility.mask) >= 3:
            report.azimuthal_fit = fit_azimuthal_modulation(noisy_visibility, normalize=False)

    if config.oracle is not None:
        report.oracle = [compare_with_engine(biphoton, projection, n_sectors)
                         for n_sectors in config.oracle.sectors]
        for comparison in report.oracle:
            logger.info("Oracle with %d sectors: max residual %.3e",
                        comparison.n_sectors, comparison.max_residual)
        report.outputs['oracle'] = [write_json({
            'tolerance': config.oracle.tolerance,
            'comparisons': report.as_json(outdir)['oracle'],
        }, path_allocator(outdir, 'oracle', '.json'))]

    if figure:
        report.outputs['figure'] = [draw_panel(
            curve, map_in, map_out, visibility, path_allocator(outdir, 'panel', '.png'),
            config.name, config.envelope.sigma)]

    report_path: str = path_allocator(outdir, 'report', '.json')
    report.outputs['report'] = [report_path]
    write_json(report.as_json(outdir), report_path)
    report.wall_clock = perf_counter() - start
    logger.info("Run %s done in %.2f s, outputs in %s", config.name, report.wall_clock, outdir)

    if (breach := report.oracle_breach()) is not None:
        raise OracleToleranceError(breach.max_residual, breach.location, config.oracle.tolerance)
    return report
