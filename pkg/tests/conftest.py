"Shared fixtures: the radial / pi input pair, a camera grid and the eight projection pairs"
import numpy as np
import pytest
from vvhom.abstractions import Configuration
from vvhom.detectors import PixelGrid
from vvhom.interference import BiphotonInput, ProjectionPair
from vvhom.modes import RadialProfile, make_vv_mode


@pytest.fixture
def radial_pi() -> BiphotonInput:
    "Radial mode in port A, pi mode in port B, first-order ring of waist 1."
    return BiphotonInput(make_vv_mode('radial'), make_vv_mode('pi'))


@pytest.fixture
def camera_pair() -> BiphotonInput:
    "Radial / pi pair with a ring sized for the camera_grid fixture."
    profile: RadialProfile = RadialProfile(waist=6.)
    return BiphotonInput(make_vv_mode('radial', radial=profile), make_vv_mode('pi', radial=profile))


@pytest.fixture
def camera_grid() -> PixelGrid:
    return PixelGrid(24, 24)


@pytest.fixture
def projections() -> dict[Configuration, ProjectionPair]:
    return {configuration: ProjectionPair.from_configuration(configuration) for configuration in Configuration}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
