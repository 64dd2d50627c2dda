"""Significance testing for band-limited coherence between two time series.

A filter bank splits each signal into complex band coefficients; coherence
at each band is then tested with a closed-form GLM likelihood-ratio test
or with circular-shift / phase-randomisation surrogates.
"""

from .coherence import CoherenceSpectrum, coherence, coherence_at
from .decompose import (
    BandParams,
    BandRep,
    BandTransformer,
    Signal,
    band_power,
    band_powers,
    decompose,
    peak_frequency,
)
from .estimators import GLMCoherenceTest, SurrogateCoherenceTest
from .glm import GlmFit, GlmTestResult, deviance, fit, glm_pvalue, glm_spectrum
from .surrogate import SurrogateConfig, SurrogateTestResult, surrogate_pvalue, surrogate_spectrum

__version__ = "0.1.0"

__all__ = [
    "BandParams",
    "BandRep",
    "BandTransformer",
    "CoherenceSpectrum",
    "GLMCoherenceTest",
    "GlmFit",
    "GlmTestResult",
    "Signal",
    "SurrogateCoherenceTest",
    "SurrogateConfig",
    "SurrogateTestResult",
    "band_power",
    "band_powers",
    "coherence",
    "coherence_at",
    "decompose",
    "deviance",
    "fit",
    "glm_pvalue",
    "glm_spectrum",
    "peak_frequency",
    "surrogate_pvalue",
    "surrogate_spectrum",
]
