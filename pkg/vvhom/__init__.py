'Spatially structured Hong-Ou-Mandel interference with a polarization quantum eraser'
__version__: str = "0.1.0"
