"""Causal discovery on an entanglement-controlled delayed-choice interferometer."""

from .discovery import CIOracle, Pattern, find_separating_set, ic_star
from .distributions import (
    CIRelation,
    CISet,
    JointDistribution,
    all_ci_relations,
    condition,
    is_conditionally_independent,
    marginalize,
    semigraphoid_closure,
)
from .enumeration import (
    DetectionOrdering,
    assumes_objectivity,
    enumerate_structures,
    expand_edge,
    hidden_variable_count,
    is_superluminal_free,
    no_go_report,
)
from .graphs import CausalGraph, CPTParameters, d_separated, factorized_joint, markov_consistent, to_dot, v_structures
from .qsim import (
    CircuitParams,
    StateVector,
    apply_delayed_choice_circuit,
    build_initial_state,
    closed_form_state,
    joint_distribution,
    particle_state,
    wave_state,
)

__version__ = "0.1.0"
