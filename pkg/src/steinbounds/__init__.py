"""Difference-operator calculus, exact Hoeffding decompositions, Stein
kernels, and Monte Carlo Berry-Esseen bound estimation for functionals of
binomial point processes."""

from .core import (
    Distribution,
    FiniteAlphabet,
    Functional,
    SeedPolicy,
    UnitCube,
    alphabet,
    cube,
    enumerate_configurations,
    sample_iid,
)

__version__ = "0.1.0"

__all__ = [
    "Distribution", "FiniteAlphabet", "UnitCube", "Functional", "SeedPolicy",
    "alphabet", "cube", "sample_iid", "enumerate_configurations",
    "__version__",
]
