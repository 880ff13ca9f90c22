"""Mutual information of Boolean functions under binary symmetric channel noise."""
from ._accel import BACKEND
from .hypercube import (
    BooleanFunction,
    FourierSpectrum,
    NoiseParams,
    RealFunction,
    apply_noise,
    apply_noise_direct,
    inverse_wht,
    level_weight,
    point_vector,
    wht,
)
from .info import capacity, coordinate_mi, ent_functional, mutual_information, sum_coordinate_mi

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BooleanFunction",
    "FourierSpectrum",
    "NoiseParams",
    "RealFunction",
    "apply_noise",
    "apply_noise_direct",
    "capacity",
    "coordinate_mi",
    "ent_functional",
    "inverse_wht",
    "level_weight",
    "mutual_information",
    "point_vector",
    "sum_coordinate_mi",
    "wht",
]
