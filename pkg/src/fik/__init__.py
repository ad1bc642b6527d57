"""Decision procedure, countermodels and tooling for the modal logic FIK."""

from .calculus import BudgetExceeded, Provable, Unprovable, prove, prove_sequent
from .formula import ParseError, parse, render
from .kripke import Model, find_countermodel_bruteforce, forces, validate_model
from .sequent import Sequent, parse_sequent

__all__ = [
    "prove", "prove_sequent", "Provable", "Unprovable", "BudgetExceeded", "parse", "render",
    "ParseError", "Model", "forces", "validate_model", "find_countermodel_bruteforce",
    "Sequent", "parse_sequent",
]
__version__ = "0.1.0"
