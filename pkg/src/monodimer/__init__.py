"""Monomer-dimer model: exact enumeration, tree recursions and population dynamics."""
from ._backend import backend_name
from .exact import (
    ExactModel,
    enumerate_matchings,
    log_partition_function,
    matching_polynomial,
    monomer_density,
    monomer_probability,
    partition_function,
    pressure_bounds,
    pressure_per_particle,
)
from .fixedpoint import (
    Population,
    bounds_curve,
    contraction_diagnostic,
    iterate_population,
    pressure_er,
    pressure_general,
    root_density,
    solve_fixed_point,
    unimodularity_identity_check,
)
from .graph import Graph, RootedTree, ball, sample_erdos_renyi, sample_galton_watson
from .offspring import OffspringDistribution, parse_offspring, unimodular_offspring
from .tree import (
    correlation_sign_report,
    empirical_density_bracket,
    localisation_bounds,
    tree_fundamental_check,
    tree_log_partition_function,
    truncated_sequence,
)

__version__ = "0.1.0"
