"""Explicit constants and numerical checks for Harnack and fast-diffusion estimates."""
__version__ = "0.1.0"

from .core_params import ParamSet, Profile, derive_params
from .lognum import TowerScalar

__all__ = ["__version__", "ParamSet", "Profile", "TowerScalar", "derive_params"]
