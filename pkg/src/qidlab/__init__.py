"""Identification codes over classical-quantum channels.

Exact construction and verification of simultaneous ID codes built from a
transmission code and a bounded-intersection set family, plus the
resolvability tools (M-type approximation, information densities, measured
distances) behind the matching upper bound.
"""

__version__ = "0.1.0"

from .channel import (
    CQChannel,
    WordDistribution,
    all_words,
    holevo_capacity,
    holevo_quantity,
    induced_channel,
    make_channel,
    mixed_output,
    word_state,
)
from .core import (
    POM,
    DensityOperator,
    Effect,
    FiniteDistribution,
    basis_pom,
    basis_state,
    coarsen,
    maximally_mixed,
    measure,
    pom_tensor,
    product_basis_pom,
    pure_state,
    tensor,
    trivial_pom,
    validate_density,
    validate_distribution,
    validate_effect,
    validate_pom,
    variational_distance,
    von_neumann_entropy,
)
from .families import (
    FamilyParams,
    SetFamily,
    brute_force_max_family,
    build_family_greedy,
    lemma_bound,
    verify_family,
)
from .idcodes import (
    QIDCodeGeneral,
    SimQIDCode,
    build_simultaneous_id_code,
    proposition_error_bounds,
    size_bound_proposition,
    verify_id_code,
)
from .resolvability import (
    MTypeDistribution,
    d1_mu_bound_check,
    d_E,
    id_separation_check,
    information_density_enumerate,
    mtype_count_bound,
    random_selection_resolve,
    resolution,
    sup_information_rate_estimate,
)
from .settings import Settings, get_settings, override
from .transmission import (
    QCode,
    build_code_exhaustive,
    build_code_random_coding,
    verify_qcode,
)
