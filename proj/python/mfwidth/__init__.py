"""Multifractal spectral-width analysis of audio signals."""

from ._mfwidth import *  # noqa: F401,F403
from ._mfwidth import MfdfaConfig, mfdfa


def spectral_width(samples, **options):
    """Width of the fitted singularity spectrum with default grids.

    Keyword options override MfdfaConfig fields of the same name.
    """
    samples = list(map(float, samples))
    config = MfdfaConfig.defaults_for(len(samples))
    for key, value in options.items():
        if not hasattr(config, key):
            raise TypeError(f"unknown option {key!r}")
        setattr(config, key, value)
    return mfdfa(samples, config).spectrum.width
