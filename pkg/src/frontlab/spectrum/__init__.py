"""Essential spectrum, Evans function and the eigenvalue oracle."""

from frontlab.spectrum.essential import (
    char_roots,
    classify_regime,
    dispersion_table,
    distance_to_essential_spectrum,
    stability_verdict,
    tip_lambda_superslow,
)
from frontlab.spectrum.evans import (
    LinearizationContext,
    assemble_A,
    asymptotic_system,
    evaluate_evans,
    evans_compound,
    evans_scan,
    gamma_double_from_stability,
    lambda_edge_predict,
    t2_jump_matching,
    winding_count,
)
from frontlab.spectrum.oracle import discrete_spectrum_oracle, parity_check
from frontlab.spectrum.types import (
    AsymptoticSystem,
    DispersionPoint,
    EdgePrediction,
    EvansEvaluation,
    EvansMethod,
    OracleEigenvalue,
    ParityClass,
    SpectralRegime,
    SpectrumReport,
)

__all__ = [
    "AsymptoticSystem",
    "DispersionPoint",
    "EdgePrediction",
    "EvansEvaluation",
    "EvansMethod",
    "LinearizationContext",
    "OracleEigenvalue",
    "ParityClass",
    "SpectralRegime",
    "SpectrumReport",
    "assemble_A",
    "asymptotic_system",
    "char_roots",
    "classify_regime",
    "discrete_spectrum_oracle",
    "dispersion_table",
    "distance_to_essential_spectrum",
    "evaluate_evans",
    "evans_compound",
    "evans_scan",
    "gamma_double_from_stability",
    "lambda_edge_predict",
    "parity_check",
    "stability_verdict",
    "t2_jump_matching",
    "tip_lambda_superslow",
    "winding_count",
]
