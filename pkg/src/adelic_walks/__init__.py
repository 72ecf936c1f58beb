"""Simulation and verification toolkit for p-adic and adelic random walks.

Exact sparse-digit arithmetic on the lattice Q_p/Z_p, heavy-tailed jump
sampling, scaled walk trajectories and their adelic products, closed-form
survival probabilities and limits, Skorokhod-style modulus diagnostics,
and a seeded Monte Carlo experiment harness that checks the simulations
against the closed forms.
"""

from adelic_walks.padic import (
    AdelePoint,
    PrimeMismatchError,
    QpDigits,
    RadialValue,
    adelic_abs,
    ceil_log,
    gp_add,
    gp_neg,
    largest_power_below,
    qp_abs,
    qp_shift,
    rational_valuation_oracle,
)
from adelic_walks.sampling import (
    JumpLaw,
    RngStream,
    sample_jump,
    sample_radius,
    sample_sphere_point,
    sphere_cardinality,
)
from adelic_walks.oracles import (
    SeriesTolerance,
    SigmaSpec,
    adelic_sup_lower_bound,
    adelic_survival_bound,
    diffusion_constant,
    limit_ball_prob,
    limit_radial_moment,
    prime_tail_sum,
    primes_up_to,
    scaled_step_count,
    sup_survival_limit,
    sup_survival_prob,
    walk_sup_ball_prob,
)
from adelic_walks.walks import (
    AdelicPath,
    SinglePrimePath,
    WalkParams,
    choose_prime_cutoff,
    path_value,
    simulate_adelic,
    simulate_single,
    sup_scaled_norm,
)
from adelic_walks.skorokhod import (
    LatticeSteps,
    Norm,
    Partition,
    adelic_modulus,
    brute_force_modulus,
    modified_modulus,
    oscillation,
    path_sup_norm,
)

__version__ = "0.1.0"

__all__ = [
    "AdelePoint",
    "PrimeMismatchError",
    "QpDigits",
    "RadialValue",
    "adelic_abs",
    "ceil_log",
    "gp_add",
    "gp_neg",
    "largest_power_below",
    "qp_abs",
    "qp_shift",
    "rational_valuation_oracle",
    "JumpLaw",
    "RngStream",
    "sample_jump",
    "sample_radius",
    "sample_sphere_point",
    "sphere_cardinality",
    "SeriesTolerance",
    "SigmaSpec",
    "adelic_sup_lower_bound",
    "adelic_survival_bound",
    "diffusion_constant",
    "limit_ball_prob",
    "limit_radial_moment",
    "prime_tail_sum",
    "primes_up_to",
    "scaled_step_count",
    "sup_survival_limit",
    "sup_survival_prob",
    "walk_sup_ball_prob",
    "AdelicPath",
    "SinglePrimePath",
    "WalkParams",
    "choose_prime_cutoff",
    "path_value",
    "simulate_adelic",
    "simulate_single",
    "sup_scaled_norm",
    "LatticeSteps",
    "Norm",
    "Partition",
    "adelic_modulus",
    "brute_force_modulus",
    "modified_modulus",
    "oscillation",
    "path_sup_norm",
    "__version__",
]
