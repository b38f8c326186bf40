"""Fractional Poisson operators on the line and their differential transforms."""

from .estimators import DifferentialTransform, MaximalDifferentialTransform, PoissonSmoother
from .exceptions import (
    DegenerateDenominatorError,
    EvaluationError,
    FitDegenerateError,
    NonConvergenceError,
    OutOfRangeError,
    ScanExhaustedError,
)
from .funcspace import (
    AlternatingShellsBothSided,
    AlternatingShellsUnit,
    Combination,
    Constant,
    Grid,
    GridSampled,
    Indicator,
    Shifted,
    SmoothBump,
    bmo_seminorm,
    eval_at,
    lp_weighted_norm,
    weak_l1_profile,
)
from .kernel import (
    KernelEval,
    MultiplierEval,
    bound_sweep,
    kernel_dvalue,
    kernel_value,
    lemma21_check,
    multiplier_m,
    multiplier_TN,
)
from .lab import ExperimentConfig, ExperimentReport, run_experiment
from .lacunary import LacunarySpec, WindowPair, normalize
from .maximal import WeightSample, check_a1_minus, check_ap_minus, m_minus, m_minus_q, m_plus
from .poisson import PoissonParams, dleft_frac, poisson_apply, poisson_dtau
from .quad import QuadConfig, QuadResult, integrate_halfline, integrate_interval
from .transform import TransformField, cotlar_ratio, maximal_truncated, transform_apply

__version__ = "0.1.0"
