from .contact import ContactLagrangian, herglotz_rhs, integrate_full
from .reconstruction import reconstruct
from .reduction import integrate_reduced, lph_rhs, reduce_lagrangian
from .scenarios import build_scenario
from .simulation import simulate

__all__ = [
    "ContactLagrangian",
    "build_scenario",
    "herglotz_rhs",
    "integrate_full",
    "integrate_reduced",
    "lph_rhs",
    "reconstruct",
    "reduce_lagrangian",
    "simulate",
]
