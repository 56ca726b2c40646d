"""Ball averages, square functions and pointwise gradients on the periodic torus."""

from .grid import GridFunction, ScaleLadder, SpectralField, forward_transform, inverse_transform, lp_norm, make_ladder
from .kernels import (
    FilterBank,
    a_function,
    apply_ball_average,
    apply_filter,
    apply_higher_average,
    ball_difference,
    ball_multiplier,
    build_filter_bank,
    higher_multiplier,
    validate_direct,
)
from .functionals import NormReport, SpaceParams, TimeSpaceField, evaluate
from .synth import GeneratorSpec, analytic_ball_average, generate, standard_corpus, weierstrass
from .pointwise import GradientCandidate, Variant, extract_gradient, hajlasz_verify, hl_maximal, verify_implications
from .analysis import EquivalenceReport, SlopeFit, equivalence_study, estimate_alpha

__version__ = "0.1.0"
