"Detection geometry and statistics: bucket and camera detection, HOM scans, visibility maps, shot noise"
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from multiprocessing import cpu_count
from os import environ
from typing import Callable
import logging
import numpy as np
from scipy.optimize import minimize
from vvhom.interference import BiphotonInput, ProjectionPair, coincidence_at_delay
from vvhom.modes import temporal_overlap

logger = logging.getLogger(__name__)

DEFAULT_QUADRATURE: int = 512
MIN_QUADRATURE: int = 8
FLUENCE_FLOOR: float = 1e-6
UNDEFINED_THRESHOLD: float = 1e-12
THREADS_VARIABLE: str = 'VVHOM_THREADS'


def thread_count() -> int:
    """Number of worker threads, capped by the VVHOM_THREADS environment variable.

    Raises
    ------
    ValueError
        the variable is set but is not a positive integer
    """
    if (value := environ.get(THREADS_VARIABLE)) is None:
        return cpu_count()
    try:
        threads: int = int(value)
    except ValueError as exc:
        raise ValueError(
            f"{THREADS_VARIABLE} must be a positive integer, got {value!r}.") from exc
    if threads < 1:
        raise ValueError(
            f"{THREADS_VARIABLE} must be a positive integer, got {value!r}.")
    return threads


def futures_collector(
    func: Callable,
        argslist: list,
        kwargslist: list[dict] | None = None,
        num_processes: int | None = None,
) -> list:
    """Runs func once per entry of argslist on a thread pool; camera maps use it with one call per pixel row.
    Results come back in the order of argslist, so a map does not depend on the thread count.

    Parameters
    ----------
    func : Callable
        the task, e.g. the coincidences of one camera row against the whole bucket arm
    argslist : list
        positional arguments of each call, a tuple or a single value
    kwargslist : list[dict] | None, optional
        keyword arguments of each call, by default None
    num_processes : int | None, optional
        pool size, by default thread_count()

    Returns
    -------
    list
        one result per call

    Raises
    ------
    ValueError
        argslist and kwargslist lengths differ
    """
    num_processes = num_processes if num_processes is not None else thread_count()
    if kwargslist is None or len(kwargslist) == len(argslist):
        with ThreadPoolExecutor(max_workers=num_processes) as executor:
            futures = [
                executor.submit(
                    func,
                    *args if isinstance(args, Iterable) else (args,)
                ) if kwargslist is None else
                executor.submit(
                    func,
                    *args if isinstance(args, Iterable) else (args,),
                    **kwargslist[i]
                ) for i, args in enumerate(argslist)
            ]
        return [f.result() for f in futures]
    else:
        raise ValueError(
            f"""Positional argument list length ({len(argslist)})
            does not match keywords argument list length ({len(kwargslist)}).""")


@dataclass(frozen=True)
class PixelGrid:
    """Camera pixel grid.

    Parameters
    ----------
    width : int
        number of columns
    height : int
        number of rows
    center : tuple[float, float] | None, optional
        optical axis position (x, y) in pixels, by default the grid center ((width-1)/2, (height-1)/2)
    scale : float, optional
        length per pixel, by default 1.
    """
    width: int
    height: int
    center: tuple[float, float] | None = None
    scale: float = 1.

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(
                f"Degenerate grid {self.width}x{self.height}, both sizes must be >= 1.")
        if self.scale <= 0.:
            raise ValueError(f"Grid scale must be positive, got {self.scale}.")
        if self.center is None:
            object.__setattr__(
                self, 'center', ((self.width-1)/2, (self.height-1)/2))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        """Polar coordinates of every pixel, y pointing up.

        Returns
        -------
        tuple[np.ndarray, np.ndarray]
            r (length units) and phi (radians), both of shape (height, width)
        """
        rows, columns = np.indices(self.shape, dtype=float)
        x: np.ndarray = (columns - self.center[0])*self.scale
        y: np.ndarray = (self.center[1] - rows)*self.scale
        return np.hypot(x, y), np.arctan2(y, x)


@dataclass(frozen=True, eq=False)
class ScalarMap:
    """Real-valued function sampled on a pixel grid.

    Parameters
    ----------
    grid : PixelGrid
        the sampling grid
    values : np.ndarray
        values, shape (height, width); masked pixels carry no meaning
    mask : np.ndarray
        True where the value is defined
    fluence : np.ndarray | None, optional
        per-pixel radial weight F(r) the values were computed with, by default None
    """
    grid: PixelGrid
    values: np.ndarray
    mask: np.ndarray
    fluence: np.ndarray | None = None

    def __post_init__(self) -> None:
        if np.shape(self.values) != self.grid.shape or np.shape(self.mask) != self.grid.shape:
            raise ValueError(
                f"Map arrays must have the grid shape {self.grid.shape}.")

    def defined(self) -> np.ndarray:
        "Values of the defined pixels, flattened."
        return np.asarray(self.values)[np.asarray(self.mask, dtype=bool)]

    def masked(self) -> np.ma.MaskedArray:
        return np.ma.MaskedArray(self.values, mask=~np.asarray(self.mask, dtype=bool))


@dataclass(frozen=True, eq=False)
class HomCurve:
    """Bucket-bucket coincidences as a function of delay.

    Parameters
    ----------
    delays : np.ndarray
        delays, in seconds
    counts : np.ndarray
        rates (probabilities per pair) or sampled counts
    """
    delays: np.ndarray
    counts: np.ndarray

    def __post_init__(self) -> None:
        if np.shape(self.delays) != np.shape(self.counts):
            raise ValueError(
                "Delays and counts of a HOM curve must have the same length.")
        if np.any(np.asarray(self.counts) < 0):
            raise ValueError("Counts of a HOM curve must be nonnegative.")


def _angular_nodes(n_phi: int) -> np.ndarray:
    if n_phi < MIN_QUADRATURE:
        raise ValueError(
            f"Quadrature grid must hold at least {MIN_QUADRATURE} angles, got {n_phi}.")
    # uniform periodic trapezoid rule: equal weights on 2 pi k / n
    return 2*np.pi*np.arange(n_phi)/n_phi


def _angular_moments(biphoton: BiphotonInput, projection: ProjectionPair, n_phi: int) -> tuple[float, float]:
    """Angle-averaged incoherent and interference parts of the coincidence density,
    so that the bucket rate at delay dt is out - chi^2(dt) cross."""
    nodes: np.ndarray = _angular_nodes(n_phi)
    at_zero: np.ndarray = coincidence_at_delay(
        biphoton, projection, nodes[:, None], nodes[None, :], 0.)
    far: np.ndarray = coincidence_at_delay(
        biphoton, projection, nodes[:, None], nodes[None, :], np.inf)
    out_mean: float = float(np.mean(far))
    return out_mean, out_mean - float(np.mean(at_zero))


def bucket_bucket_rate(
    biphoton: BiphotonInput,
    projection: ProjectionPair,
    delay: float | None = None,
    n_phi: int = DEFAULT_QUADRATURE,
) -> float:
    """Coincidence rate of two bucket detectors, integrating both azimuthal angles.

    Parameters
    ----------
    biphoton : BiphotonInput
        the input pair
    projection : ProjectionPair
        polarizer settings
    delay : float | None, optional
        delay in seconds, by default the delay of biphoton
    n_phi : int, optional
        angles per arm of the trapezoid rule, by default 512

    Returns
    -------
    float
        rate per generated pair

    Raises
    ------
    ValueError
        quadrature grid smaller than 8
    """
    delay = biphoton.delay if delay is None else delay
    out_mean, cross_mean = _angular_moments(biphoton, projection, n_phi)
    damping: float = temporal_overlap(biphoton.mode_a.envelope, delay)**2
    radial_weight: float = biphoton.mode_a.radial.total_fluence()**2
    return max(out_mean - damping*cross_mean, 0.)*radial_weight


def hom_scan(
    biphoton: BiphotonInput,
    projection: ProjectionPair,
    delays: Iterable[float],
    n_phi: int = DEFAULT_QUADRATURE,
) -> HomCurve:
    """Bucket-bucket rate for each delay of a scan.

    Raises
    ------
    ValueError
        empty delay list
    """
    delays = np.asarray(list(delays), dtype=float)
    if delays.size == 0:
        raise ValueError("A HOM scan needs at least one delay.")
    out_mean, cross_mean = _angular_moments(biphoton, projection, n_phi)
    damping: np.ndarray = np.asarray(temporal_overlap(
        biphoton.mode_a.envelope, delays))**2
    radial_weight: float = biphoton.mode_a.radial.total_fluence()**2
    logger.debug("HOM scan over %d delays, out=%g cross=%g",
                 delays.size, out_mean, cross_mean)
    return HomCurve(delays, np.clip(out_mean - damping*cross_mean, 0., None)*radial_weight)


def camera_bucket_map(
    biphoton: BiphotonInput,
    projection: ProjectionPair,
    delay: float | None,
    grid: PixelGrid,
    n_phi: int = DEFAULT_QUADRATURE,
    threads: int | None = None,
) -> ScalarMap:
    """Coincidences between a camera in the first arm and a bucket detector in the second arm.
    Each pixel holds F(r) times the phi2-average of the coincidence density at its angle phi1.

    Parameters
    ----------
    biphoton : BiphotonInput
        the input pair
    projection : ProjectionPair
        polarizer settings (p1 before the camera)
    delay : float | None
        delay in seconds, None for the delay of biphoton
    grid : PixelGrid
        camera geometry, in the length units of the radial profile
    n_phi : int, optional
        angles of the bucket arm quadrature, by default 512
    threads : int | None, optional
        worker threads for rows, by default thread_count()

    Returns
    -------
    ScalarMap
        coincidence map, pixels with F(r) below 1e-6 of the peak fluence are masked

    Raises
    ------
    ValueError
        no pixel of the grid sees the mode
    """
    delay = biphoton.delay if delay is None else delay
    nodes: np.ndarray = _angular_nodes(n_phi)
    radius, angle = grid.polar()
    profile = biphoton.mode_a.radial
    weights: np.ndarray = profile.fluence(radius)
    mask: np.ndarray = weights >= FLUENCE_FLOOR*profile.peak_fluence()
    if not mask.any():
        raise ValueError(
            f"Grid {grid.width}x{grid.height} (scale {grid.scale}) does not cover the mode profile.")

    def row_density(row: int) -> np.ndarray:
        return np.mean(coincidence_at_delay(biphoton, projection, angle[row][:, None], nodes[None, :], delay), axis=1)

    rows: list = futures_collector(
        row_density, [(row,) for row in range(grid.height)], num_processes=threads)
    logger.debug("Camera map %dx%d at delay %g s with %d bucket angles",
                 grid.width, grid.height, delay, n_phi)
    return ScalarMap(grid, weights*np.vstack(rows), mask, weights)


def visibility_map(map_out: ScalarMap, map_in: ScalarMap) -> ScalarMap:
    """Per-pixel visibility (out - in) / out.

    Parameters
    ----------
    map_out : ScalarMap
        coincidences of temporally distinguishable photons
    map_in : ScalarMap
        coincidences of temporally tuned photons

    Returns
    -------
    ScalarMap
        visibility, defined where both maps are defined and out >= 1e-12

    Raises
    ------
    ValueError
        the maps do not share their grid
    """
    if map_out.grid != map_in.grid:
        raise ValueError("Visibility needs two maps on the same grid.")
    out: np.ndarray = np.asarray(map_out.values, dtype=float)
    mask: np.ndarray = np.asarray(map_out.mask, dtype=bool) & np.asarray(
        map_in.mask, dtype=bool) & (out >= UNDEFINED_THRESHOLD)
    values: np.ndarray = np.zeros(map_out.grid.shape)
    values[mask] = (out[mask] - np.asarray(map_in.values, dtype=float)[mask])/out[mask]
    return ScalarMap(map_out.grid, values, mask, map_out.fluence)


def camera_integrated_rate(coincidence_map: ScalarMap) -> float:
    """Pixel-sum counterpart of the bucket rate: sum of values over sum of fluence weights.

    Raises
    ------
    ValueError
        the map does not carry its fluence weights
    """
    if coincidence_map.fluence is None:
        raise ValueError("Map carries no fluence weights.")
    return float(np.sum(coincidence_map.values)/np.sum(coincidence_map.fluence))


def _cell_poisson(seed: int, index: int, rate: float) -> int:
    # one Philox key per cell, mixed from (seed, index)
    generator: np.random.Generator = np.random.Generator(
        np.random.Philox(np.random.SeedSequence([seed, index])))
    return int(generator.poisson(rate))


def sample_poisson(data: ScalarMap | HomCurve, mean_total_counts: float, seed: int) -> ScalarMap | HomCurve:
    """Draws shot-noise counts from a deterministic intensity.
    The intensity is scaled so that its total is mean_total_counts; cell i then draws from its own
    Philox generator seeded with (seed, i), so cells are independent and do not depend on evaluation order.

    Parameters
    ----------
    data : ScalarMap | HomCurve
        nonnegative intensity; for maps only defined pixels are sampled
    mean_total_counts : float
        expected total number of counts
    seed : int
        nonnegative seed

    Returns
    -------
    ScalarMap | HomCurve
        same container holding integer counts

    Raises
    ------
    ValueError
        nonpositive total, negative intensity or negative seed
    """
    if mean_total_counts <= 0.:
        raise ValueError(
            f"Mean total counts must be positive, got {mean_total_counts}.")
    if seed < 0:
        raise ValueError(f"Seed must be nonnegative, got {seed}.")
    if isinstance(data, ScalarMap):
        intensity: np.ndarray = np.where(
            data.mask, np.asarray(data.values, dtype=float), 0.)
    else:
        intensity: np.ndarray = np.asarray(data.counts, dtype=float)
    if np.any(intensity < 0.):
        raise ValueError("Poisson sampling needs a nonnegative intensity.")
    total: float = float(intensity.sum())
    rates: np.ndarray = intensity/total * \
        mean_total_counts if total > 0. else np.zeros_like(intensity)
    counts: np.ndarray = np.array(
        [_cell_poisson(seed, index, rate) for index, rate in enumerate(rates.ravel())], dtype=np.int64
    ).reshape(rates.shape)
    if isinstance(data, ScalarMap):
        return replace(data, values=counts)
    return HomCurve(np.asarray(data.delays), counts)


@dataclass(frozen=True)
class HomFit:
    """Result of fitting baseline (1 - V exp(-((dt - t0)/s)^2)) to a HOM curve.

    Parameters
    ----------
    visibility : float
        V, positive for a dip and negative for a peak
    visibility_error : float
        standard error of V
    center : float
        t0, in seconds
    width : float
        s, in seconds (the coherence time of the envelope)
    baseline : float
        rate far from the dip
    """
    visibility: float
    visibility_error: float
    center: float
    width: float
    baseline: float


def _dip_model(parameters: np.ndarray, delay: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    "Mean counts and their gradient with respect to (baseline, visibility, center, width)."
    baseline, visibility, center, width = parameters
    offset: np.ndarray = (delay - center)/width
    shape: np.ndarray = np.exp(-offset**2)
    mean: np.ndarray = baseline*(1 - visibility*shape)
    gradient: np.ndarray = np.stack([
        1 - visibility*shape,
        -baseline*shape,
        -baseline*visibility*shape*2*offset/width,
        -baseline*visibility*shape*2*offset**2/width,
    ])
    return mean, gradient


def fit_hom_curve(curve: HomCurve, width_guess: float | None = None) -> HomFit:
    """Poisson maximum-likelihood fit of baseline (1 - V exp(-((dt - t0)/s)^2)) to a HOM curve.
    V is bounded above by 1; its standard error comes from the Fisher information at the optimum.

    Parameters
    ----------
    curve : HomCurve
        sampled or deterministic curve with at least 5 delays
    width_guess : float | None, optional
        initial width in seconds, by default an eighth of the scanned range

    Returns
    -------
    HomFit
        fitted parameters

    Raises
    ------
    ValueError
        too few points, or a curve without counts
    RuntimeError
        the optimizer did not converge
    """
    delays: np.ndarray = np.asarray(curve.delays, dtype=float)
    counts: np.ndarray = np.asarray(curve.counts, dtype=float)
    if delays.size < 5:
        raise ValueError("Fitting a HOM curve needs at least 5 delays.")
    if not np.any(counts > 0.):
        raise ValueError("Cannot fit a HOM curve without counts.")
    # dimensionless fit: delays in units of time_scale, counts in units of the edge mean
    time_scale: float = width_guess if width_guess is not None else (
        float(np.ptp(delays))/8 or 1.)
    edge: int = max(1, delays.size//8)
    count_scale: float = float(np.mean(
        np.concatenate([counts[:edge], counts[-edge:]]))) or float(np.max(counts))
    x: np.ndarray = (delays - delays.mean())/time_scale
    y: np.ndarray = counts/count_scale
    extremum: int = int(np.argmax(np.abs(y - 1.)))

    def negative_log_likelihood(parameters: np.ndarray) -> tuple[float, np.ndarray]:
        mean, gradient = _dip_model(parameters, x)
        mean = np.maximum(mean, 1e-300)
        return float(np.sum(mean - y*np.log(mean))), gradient @ (1 - y/mean)

    result = minimize(
        negative_log_likelihood,
        x0=np.array([1., min(1 - y[extremum], 1.), x[extremum], 1.]),
        jac=True,
        method='L-BFGS-B',
        bounds=[(1e-9, None), (None, 1.), (x.min(), x.max()), (1e-3, None)],
    )
    if not np.all(np.isfinite(result.x)):
        raise RuntimeError(f"HOM curve fit did not converge: {result.message}")
    if not result.success:
        logger.warning("HOM curve fit stopped early: %s", result.message)
    baseline, visibility, center, width = result.x
    mean, gradient = _dip_model(
        np.array([baseline*count_scale, visibility, center, width]), x)
    information: np.ndarray = (gradient/np.maximum(mean, 1e-12)) @ gradient.T
    covariance: np.ndarray = np.linalg.pinv(information)
    return HomFit(
        visibility=float(visibility),
        visibility_error=float(np.sqrt(abs(covariance[1, 1]))),
        center=float(center*time_scale + delays.mean()),
        width=float(width*time_scale),
        baseline=float(baseline*count_scale),
    )


@dataclass(frozen=True)
class AzimuthalFit:
    """Result of fitting offset + amplitude cos(2 (phi - orientation)) to a map.

    Parameters
    ----------
    offset : float
        azimuthal mean
    amplitude : float
        nonnegative modulation depth
    orientation : float
        angle of the first lobe maximum, in (-pi/2, pi/2]; the second lobe sits at orientation + pi
    """
    offset: float
    amplitude: float
    orientation: float

    @property
    def lobes(self) -> tuple[float, float]:
        return self.orientation, self.orientation + np.pi


def fit_azimuthal_modulation(scalar_map: ScalarMap, normalize: bool = True) -> AzimuthalFit:
    """Least-squares fit of a + b cos 2phi + c sin 2phi over the defined pixels.

    Parameters
    ----------
    scalar_map : ScalarMap
        coincidence, count or visibility map
    normalize : bool, optional
        divide values by the fluence weights before fitting, by default True

    Returns
    -------
    AzimuthalFit
        offset, amplitude and lobe orientation
    """
    _, angle = scalar_map.grid.polar()
    mask: np.ndarray = np.asarray(scalar_map.mask, dtype=bool)
    values: np.ndarray = np.asarray(scalar_map.values, dtype=float)[mask]
    if normalize and scalar_map.fluence is not None:
        values = values/np.asarray(scalar_map.fluence)[mask]
    phi: np.ndarray = angle[mask]
    design: np.ndarray = np.column_stack(
        [np.ones_like(phi), np.cos(2*phi), np.sin(2*phi)])
    (offset, cosine, sine), *_ = np.linalg.lstsq(design, values, rcond=None)
    orientation: float = float(np.arctan2(sine, cosine)/2)
    if orientation <= -np.pi/2:
        orientation += np.pi
    return AzimuthalFit(float(offset), float(np.hypot(cosine, sine)), orientation)
