"""Planted 3-regular 3-XORSAT benchmark suite."""

from .instances import (
    GenerationFailure,
    IsingInstance,
    QuboInstance,
    XorsatInstance,
    clause_gadget,
    generate_instance,
    ising_energy,
    ising_to_qubo,
    qubo_value,
    sample_3regular,
    to_ising,
)

__all__ = [
    "GenerationFailure",
    "IsingInstance",
    "QuboInstance",
    "XorsatInstance",
    "clause_gadget",
    "generate_instance",
    "ising_energy",
    "ising_to_qubo",
    "qubo_value",
    "sample_3regular",
    "to_ising",
]

__version__ = "0.1.0"
