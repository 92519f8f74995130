"""Numerical verification of Lieb-Robinson bounds for finite spin-1/2 lattices."""

from .algebra import Observable, commutator, conditional_expectation, embed, operator_norm, pauli
from .bounds import (BoundEvaluation, certify, g_a, heisenberg_velocity_bound, lr_bound,
                     lr_bound_corollary, optimal_velocity, velocity)
from .dynamics import DynamicsEngine, commutator_norm_grid, diagonalize, evolve, evolve_taylor
from .geometry import DecayFunction, MetricGraph, f_norm, lattice_f_norm
from .model import Interaction, build_hamiltonian, heisenberg_interaction, interaction_norm

__version__ = "0.1.0"

__all__ = [
    "Observable", "commutator", "conditional_expectation", "embed", "operator_norm", "pauli",
    "BoundEvaluation", "certify", "g_a", "heisenberg_velocity_bound", "lr_bound",
    "lr_bound_corollary", "optimal_velocity", "velocity",
    "DynamicsEngine", "commutator_norm_grid", "diagonalize", "evolve", "evolve_taylor",
    "DecayFunction", "MetricGraph", "f_norm", "lattice_f_norm",
    "Interaction", "build_hamiltonian", "heisenberg_interaction", "interaction_norm",
]
