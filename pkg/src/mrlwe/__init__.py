"""Multivariate ring-LWE toolkit.

Arithmetic in tensor products of cyclotomic rings (NTT/CRT slot transforms,
automorphisms), the canonical Kronecker embedding and its geometry, Gaussian
error machinery, m-RLWE sample distributions, and executable forms of the
search-to-decision transformations with statistical test harnesses.

Research artifact: correctness-first, no constant-time guarantees, no
production security claims.
"""

from .params import (
    RingParams,
    SecurityParams,
    validate,
    check_theorem_rates,
    index_map,
    index_unmap,
    format_params,
    parse_params,
)
from .ring import (
    RingElement,
    AutomorphismIndex,
    ring_element,
    from_slot_values,
    add,
    sub,
    neg,
    mul,
    mul_schoolbook,
    to_slots,
    from_slots,
    apply_automorphism,
    slot_permutation,
    invert,
    crt_basis,
)
from .embedding import (
    EmbeddedVector,
    DualScale,
    sigma,
    sigma_inverse,
    lp_norm,
    trace,
    norm_field,
    h_basis,
    dual_lattice_check,
)
from .gaussian import (
    GaussianSpec,
    UpsilonDraw,
    sample_continuous,
    sample_upsilon,
    sample_discrete_gaussian,
    discretize,
    smoothing_bound,
)
from .rlwe import (
    RlweSample,
    DiscreteRlweSample,
    SecretKey,
    HybridLevel,
    sample_rlwe,
    sample_uniform_pair,
    sample_hybrid,
    to_discrete,
    to_normal_form,
)
from .reductions import (
    Oracle,
    ReductionTranscript,
    transport_to_ideal,
    search_from_qi,
    decision_from_search_step,
    solve_qi_with_wdlwe,
    worst_to_average_randomize,
    spherical_randomize,
    hybrid_walk,
)
from .stats import (
    TestVerdict,
    LatticeInstance,
    chi_square_uniform,
    distinguisher_advantage,
    brute_force_lambda1,
    minkowski_witness,
    tv_estimate,
)

__version__ = "0.1.0"
