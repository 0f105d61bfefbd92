"""Sum-distinct sequences over size-capped subset families in Z^k."""

__version__ = "0.1.0"

from .errors import (CapacityError, ConstructionError, ContractError, DistinctSumsError,
                     DomainError, DomainWarning, InputError)
from .model import FamilySpec, Sequence, binary_entropy, f_entropy, family_size, subset_sum
from .verifier import CollisionReport, PairConstraint, find_collisions, verify

__all__ = [
    "CapacityError", "ConstructionError", "ContractError", "DistinctSumsError", "DomainError",
    "DomainWarning", "InputError", "FamilySpec", "Sequence", "binary_entropy", "f_entropy",
    "family_size", "subset_sum", "CollisionReport", "PairConstraint", "find_collisions", "verify",
]
