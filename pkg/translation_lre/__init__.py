# translation_lre/__init__.py

"""
Translation-invariant long-range entanglement numerics

Counting bounds on the span of shallow-circuit states with translation symmetry,
together with dense numerical oracles that check each bound on small rings.
"""

from .errors import (
    TranslationLREError,
    DomainError,
    ResourceLimitError,
    StructuralError,
    PreconditionError,
    UsageError,
)
from .config import SweepConfig
from .statevector import RingSpec, StateVector, DensityOperator
from .timps import TimpsTensor, SpanEstimate
from .circuits import TwoSiteGate, BrickworkCircuit, BlockFactorization
from .correlations import LocalOperator
from .reports import BoundReport
from .cli import run_command

__version__ = "1.0.0"
__author__ = "Translation-Invariant LRE Team"

__all__ = [
    "TranslationLREError",
    "DomainError",
    "ResourceLimitError",
    "StructuralError",
    "PreconditionError",
    "UsageError",
    "SweepConfig",
    "RingSpec",
    "StateVector",
    "DensityOperator",
    "TimpsTensor",
    "SpanEstimate",
    "TwoSiteGate",
    "BrickworkCircuit",
    "BlockFactorization",
    "LocalOperator",
    "BoundReport",
    "run_command",
]
