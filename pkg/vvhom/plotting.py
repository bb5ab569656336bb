"Colormap palettes and the panel figure of a run"
import matplotlib as mpl
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.colors import rgb2hex
from matplotlib.figure import Figure
import numpy as np
from vvhom.detectors import HomCurve, ScalarMap

VISIBILITY_CMAP: str = 'coolwarm'
COINCIDENCE_CMAP: str = 'inferno'


def get_palette(number_of_colors: int, cmap_name: str = 'viridis', as_hex: bool = False) -> list:
    """Samples a matplotlib colormap into number_of_colors entries.
    The P6 visibility images index it from -1 (first entry) to +1 (last entry) through palette_bytes.

    Parameters
    ----------
    number_of_colors : int
        number of colors needed
    cmap_name : str, optional
        name of the matplotlib colormap, by default 'viridis'
    as_hex : bool, optional
        if colors shall be returned as hex strings instead of rgba tuples, by default False

    Returns
    -------
    list
        palette of colors

    Raises
    ------
    ValueError
        the colormap does not exist
    """
    try:
        colormap = mpl.colormaps[cmap_name].resampled(number_of_colors)
    except KeyError as exc:
        raise ValueError(
            f"The colormap {cmap_name} is not a valid colormap") from exc
    return [
        rgb2hex(colormap(x)) if as_hex else colormap(x) for x in range(number_of_colors)
    ]


def palette_bytes(number_of_colors: int = 256, cmap_name: str = VISIBILITY_CMAP) -> np.ndarray:
    "Palette as an (n, 3) uint8 array, for binary image writers."
    return np.rint(np.array(get_palette(number_of_colors, cmap_name))[:, :3]*255).astype(np.uint8)


def _show_map(axis, scalar_map: ScalarMap, cmap_name: str, limits: tuple[float, float] | None, title: str) -> None:
    image = axis.imshow(
        np.where(scalar_map.mask, np.asarray(scalar_map.values, dtype=float), np.nan),
        cmap=cmap_name,
        vmin=None if limits is None else limits[0],
        vmax=None if limits is None else limits[1],
        origin='upper',
    )
    axis.set_title(title)
    axis.set_xticks([])
    axis.set_yticks([])
    axis.figure.colorbar(image, ax=axis, fraction=.046)


def draw_panel(
    curve: HomCurve,
    map_in: ScalarMap,
    map_out: ScalarMap,
    visibility: ScalarMap,
    output_path: str,
    title: str = '',
    sigma: float | None = None,
) -> str:
    """Draws one experiment panel: HOM curve on top, in and out coincidence maps, visibility map below.

    Parameters
    ----------
    curve : HomCurve
        bucket-bucket coincidences versus delay
    map_in : ScalarMap
        camera-bucket coincidences of tuned photons
    map_out : ScalarMap
        camera-bucket coincidences of detuned photons
    visibility : ScalarMap
        visibility map
    output_path : str
        where to save the PNG
    title : str, optional
        figure title, by default ''
    sigma : float | None, optional
        coherence time used to express delays in units of sigma, by default None (seconds)

    Returns
    -------
    str
        output_path
    """
    figure: Figure = Figure(figsize=(9, 7), layout='constrained')
    FigureCanvasAgg(figure)
    grid = figure.add_gridspec(2, 3)
    hom_axis = figure.add_subplot(grid[0, :])
    delays: np.ndarray = np.asarray(curve.delays, dtype=float)
    hom_axis.plot(delays/sigma if sigma else delays,
                  curve.counts, 'o-', color='tab:blue', markersize=3)
    hom_axis.set_xlabel("delay (sigma)" if sigma else "delay (s)")
    hom_axis.set_ylabel("coincidences")
    _show_map(figure.add_subplot(grid[1, 0]), map_in, COINCIDENCE_CMAP, None, "in")
    _show_map(figure.add_subplot(grid[1, 1]), map_out, COINCIDENCE_CMAP, None, "out")
    _show_map(figure.add_subplot(grid[1, 2]), visibility, VISIBILITY_CMAP, (-1., 1.), "visibility")
    if title:
        figure.suptitle(title)
    # fixed metadata keeps the file identical between runs
    figure.savefig(output_path, dpi=100, metadata={'Software': None})
    return output_path
