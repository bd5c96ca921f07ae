"""Numerical laboratory for permutation-invariant limit theorems.

Exact Prohorov/transport metrics on atomic measures, lacunary
trigonometric Monte Carlo, windowed limit-theorem objects, and
conditionally-i.i.d. mixture simulation, all with reproducible seeding.
"""

__version__ = "0.1.0"

from .errors import LabError
from .measures import (
    DiscreteMeasure,
    EmpiricalSample,
    MixedNormal,
    RandomMeasure,
    empirical_measure,
)
from .metrics import (
    Coupling,
    ks_distance,
    mixture_bound_check,
    prohorov_distance,
    prohorov_oracle,
    random_measure_bound_check,
    strassen_coupling,
    wasserstein2,
)
from .sequences import (
    GapReport,
    IndexSequence,
    Permutation,
    apply_permutation,
    block_interleave_permutation,
    check_erdos,
    check_hadamard,
    count_diophantine,
    diophantine_growth_scan,
    gen_erdos,
    gen_hadamard,
    identity_permutation,
    random_permutation,
    reverse_permutation,
)
from .lacunary import (
    FixedPointX,
    FourierFunction,
    clt_sample,
    f_sum,
    frac_mul,
    lil_trajectory,
    trig_sum,
)
from .framework import (
    RegularLimitTheorem,
    ThinningPlan,
    lipschitz_probe,
    limit_convergence_check,
    make_clt,
    make_trimmed_clt,
    mc_tolerance,
    plan_thinning,
    simulate_fk,
    statistic_stability_check,
)
from .exchangeable import (
    DrawnSequence,
    ExchangeableModel,
    PerturbSpec,
    PermutationInvarianceReport,
    conditional_noise_check,
    draw_sequence,
    model_from_json,
    model_to_json,
    permuted_statistic,
    mixture_approximation_check,
    strong_law_trajectory,
    permutation_invariance_check,
)

__all__ = [
    "LabError",
    "DiscreteMeasure",
    "EmpiricalSample",
    "MixedNormal",
    "RandomMeasure",
    "empirical_measure",
    "Coupling",
    "ks_distance",
    "mixture_bound_check",
    "prohorov_distance",
    "prohorov_oracle",
    "random_measure_bound_check",
    "strassen_coupling",
    "wasserstein2",
    "GapReport",
    "IndexSequence",
    "Permutation",
    "apply_permutation",
    "block_interleave_permutation",
    "check_erdos",
    "check_hadamard",
    "count_diophantine",
    "diophantine_growth_scan",
    "gen_erdos",
    "gen_hadamard",
    "identity_permutation",
    "random_permutation",
    "reverse_permutation",
    "FixedPointX",
    "FourierFunction",
    "clt_sample",
    "f_sum",
    "frac_mul",
    "lil_trajectory",
    "trig_sum",
    "RegularLimitTheorem",
    "ThinningPlan",
    "lipschitz_probe",
    "limit_convergence_check",
    "make_clt",
    "make_trimmed_clt",
    "mc_tolerance",
    "plan_thinning",
    "simulate_fk",
    "statistic_stability_check",
    "DrawnSequence",
    "ExchangeableModel",
    "PerturbSpec",
    "PermutationInvarianceReport",
    "conditional_noise_check",
    "draw_sequence",
    "model_from_json",
    "model_to_json",
    "permuted_statistic",
    "mixture_approximation_check",
    "strong_law_trajectory",
    "permutation_invariance_check",
]
