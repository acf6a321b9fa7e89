"""Result records of the spectral analyses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class SpectralRegime(str, Enum):
    ALL_REAL = "AllReal"
    TWO_COMPLEX_BANDS = "TwoComplexBands"
    MERGED_COMPLEX_BAND = "MergedComplexBand"
    BOUNDARY_H0_ZERO = "Boundary_H0_zero"
    BOUNDARY_KMINUS_ZERO = "Boundary_kminus_zero"


class EvansMethod(str, Enum):
    COMPOUND_MATRIX = "CompoundMatrix"
    JUMP_MATCHING = "JumpMatching"
    ANALYTIC_LEADING_ORDER = "AnalyticLeadingOrder"


class ParityClass(str, Enum):
    U_ODD_V_EVEN = "u_odd_v_even"
    U_EVEN_V_ODD = "u_even_v_odd"
    MIXED = "mixed"


@dataclass(frozen=True)
class DispersionPoint:
    k: float
    lambda1: complex
    lambda2: complex


@dataclass(frozen=True)
class StabilityMargins:
    g1: float                       # must be < 0
    h_margin: float                 # H0 + G1 - 2 tau, must be < 0
    max_re_lambda: float            # sampled max over k of Re lambda_1


@dataclass(frozen=True)
class SpectrumReport:
    stable: bool
    regime: SpectralRegime
    k_minus: float | None
    k_plus: float | None
    tip_lambda_plus: complex
    tip_lambda_minus: complex
    margin: float


@dataclass(frozen=True)
class AsymptoticSystem:
    lam: complex
    exponents: tuple[complex, complex, complex, complex]       # Lambda_1..Lambda_4
    minus: np.ndarray               # columns E-_1..E-_4 (U -> -1)
    plus: np.ndarray                # columns E+_1..E+_4 (U -> +1)

    @property
    def growth(self) -> complex:
        """Lambda_1 + Lambda_2, the growth rate of the unstable 2-plane."""
        return self.exponents[0] + self.exponents[1]


@dataclass(frozen=True)
class EvansEvaluation:
    lam: complex
    mantissa: complex
    rescale_log: float              # D = mantissa * exp(rescale_log)
    method: EvansMethod
    t1: complex = complex("nan")
    t2: complex = complex("nan")

    @property
    def D(self) -> complex:
        if self.mantissa == 0:
            return 0j
        if self.rescale_log + math.log(abs(self.mantissa)) > 700.0:
            return complex("inf")
        return self.mantissa * math.exp(self.rescale_log)


@dataclass(frozen=True)
class EdgePrediction:
    v0: float
    lambda_tilde_edge: float
    lambda_edge: float
    exists: bool


@dataclass(frozen=True)
class OracleEigenvalue:
    value: complex
    error_estimate: float
    label: str                      # "point" or "cluster"
    parity: ParityClass
    distance_to_essential: float
