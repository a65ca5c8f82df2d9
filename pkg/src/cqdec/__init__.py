"""cqdec: numerical laboratory for sequential yes/no decoding of cq channels."""

from .bounds import (
    BoundCheck,
    BoundReport,
    GammaBound,
    MeasurementBudget,
    check_amplitude_lower_bound,
    check_trace_power_bounds,
    gamma_lower_bound,
    measurement_budget,
    rate_condition,
)
from .budgets import DEFAULT_BUDGETS, Budgets
from .channel import CQChannel, builtin_channel, fixture_channels, holevo_chi, make_channel
from .codebook import Codebook, codebook_to_text, parse_codebook_text, sample_codebook
from .decoder import (
    ABORT_ATYPICAL,
    ABORT_EXHAUSTED,
    DECODED,
    DecoderPlan,
    ErrorReport,
    POVMSet,
    Transcript,
    amplitude_chain,
    average_amplitude,
    build_plan,
    build_povm,
    exact_error_probability,
    simulate_trial,
    subspace_variant_projectors,
    transcript_probability,
    verify_mixture_identity,
)
from .errors import ConfigError, CqdecError, ResourceBudgetError, ValidationError
from .linalg import (
    ProductVector,
    SpectralDecomposition,
    expand,
    product_inner,
    product_vector,
    shannon_entropy,
    spectral_decompose,
    von_neumann_entropy,
)
from .pgm import PGMSet, build_pgm, pgm_error_probability
from .typicality import (
    ConditionalTypicalSet,
    MaskedHermitian,
    TypicalModel,
    TypicalSet,
    TypicalityParams,
    build_rho_tilde,
    build_typical_model,
    classical_typical_set,
    conditional_typical_outputs,
    subordination_gap,
)

__version__ = "0.1.0"
