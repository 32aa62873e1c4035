"""Simulation and design of edge-dependent synchronization gains for networked diffusion PDEs."""

__version__ = "0.1.0"

from .fem import FemModel, build_fem, interpolate, l2_inner, l2_norm
from .graph import (EdgeGains, Topology, complete_topology, deviation_operator,
                    laplacian_from_gains, five_agent_topology, project_to_theta)
from .mateq import is_hurwitz, kappa_margin, solve_are, solve_lyapunov
from .network import AggregateSystem, assemble_augmented, assemble_closed_loop, control_signal
from .sim import (SimTrace, cost_J1, cost_J2, pairwise_difference_check, simulate_adaptive,
                  simulate_constant)
from .designs import (CostReport, design1_optimize, design2_optimize, design3_lqr,
                      static_gains)

__all__ = [
    "FemModel", "build_fem", "interpolate", "l2_inner", "l2_norm",
    "EdgeGains", "Topology", "complete_topology", "deviation_operator",
    "laplacian_from_gains", "five_agent_topology", "project_to_theta",
    "is_hurwitz", "kappa_margin", "solve_are", "solve_lyapunov",
    "AggregateSystem", "assemble_augmented", "assemble_closed_loop", "control_signal",
    "SimTrace", "cost_J1", "cost_J2", "pairwise_difference_check", "simulate_adaptive",
    "simulate_constant",
    "CostReport", "design1_optimize", "design2_optimize", "design3_lqr", "static_gains",
]
