"""Explicit sequences: powers of two, the one-extra-element sequence, the
base-plus-tail augmentations, and the coordinate-block lift to Z^k."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import ConstructionError, ContractError, InputError
from .model import Sequence
from .verifier import PairConstraint, verify

LUNNON_FILE = "lunnon-67.json"


@dataclass(frozen=True)
class BaseSequence:
    """Strictly increasing positive integers meant to be fully sum-distinct."""

    values: tuple[int, ...]
    certified_sum_distinct: bool = False
    name: str = ""

    def __post_init__(self):
        vals = tuple(self.values)
        if not vals:
            raise InputError("base sequence is empty")
        if any(isinstance(v, bool) or not isinstance(v, int) or v < 1 for v in vals):
            raise InputError("base values must be positive integers")
        if any(a >= b for a, b in zip(vals, vals[1:])):
            raise InputError("base values must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @property
    def length(self) -> int:
        return len(self.values)

    def to_sequence(self) -> Sequence:
        return Sequence.from_ints(self.values, max(self.values))

    def to_dict(self) -> dict:
        out = self.to_sequence().to_dict()
        out["certified"] = self.certified_sum_distinct
        out["name"] = self.name
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "BaseSequence":
        seq = Sequence.from_dict(data)
        certified = data.get("certified", False)
        if not isinstance(certified, bool):
            raise InputError("field 'certified' must be a boolean")
        return cls(seq.values, certified, str(data.get("name", "")))


def certify(base: BaseSequence) -> BaseSequence:
    """Run the full power-set check; returns a certified copy or raises."""
    report = verify(base.to_sequence(), PairConstraint.family(1))
    if not report.distinct:
        raise ConstructionError(
            f"base {base.name or base.values} is not sum-distinct: "
            f"{report.witness[0]} vs {report.witness[1]}")
    return BaseSequence(base.values, True, base.name)


def load_base(path, recheck: bool = True) -> BaseSequence:
    """Read a base from Sequence JSON carrying ``certified``.

    Files are re-verified unless ``recheck`` is off; an uncertified file is
    certified here when verification succeeds.
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc.msg}") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    base = BaseSequence.from_dict(data)
    if recheck or not base.certified_sum_distinct:
        base = certify(base)
    return base


def lunnon_base(directory=None) -> BaseSequence:
    """The length-67 base from ``lunnon-67.json``; the values must be supplied
    from the literature, none are bundled."""
    directory = Path(directory) if directory is not None else Path(__file__).parent / "data"
    path = directory / LUNNON_FILE
    if not path.exists():
        raise InputError(f"no {LUNNON_FILE} found in {directory}; supply the 67 values")
    data = json.loads(path.read_text())
    base = BaseSequence.from_dict(data)
    if base.length != 67:
        raise InputError(f"{path} holds {base.length} values, expected 67")
    if not base.certified_sum_distinct:
        raise ContractError(f"{path} is not marked certified")
    return base


def powers_of_two(n: int) -> Sequence:
    if n < 1:
        raise InputError(f"n must be positive, got {n}")
    return Sequence.from_ints((1 << i for i in range(n)), 1 << (n - 1))


def powers_of_two_base(n: int) -> BaseSequence:
    # unique binary representation makes this sum-distinct without a check
    return BaseSequence(tuple(1 << i for i in range(n)), True, "powers2")


def _quaternary_run(start: int, stop) -> int:
    """sum of 4^j over integers j with start <= j < stop (stop may be fractional)."""
    total = 0
    j = start
    while j < stop:
        total += 1 << (2 * j)
        j += 1
    return total


def tail_element(m) -> int:
    """Sum of 4^j for 0 <= j < m/2 - 1: the extra element of the length-m
    powers-of-two extension (alternating bits 1010...1 in binary)."""
    return _quaternary_run(0, Fraction(m, 2) - 1)


def tilde_sigma(n: int) -> Sequence:
    """(1, 2, ..., 2^(n-2), b_n) with b_n = sum_{j < n/2 - 1} 4^j."""
    if n < 6:
        raise InputError(f"tilde_sigma needs n >= 6, got {n}")
    vals = [1 << i for i in range(n - 1)] + [tail_element(n)]
    return Sequence.from_ints(vals, max(vals))


def conway_guy_base(length: int) -> BaseSequence:
    """Differences u_len - u_i of the Conway-Guy recurrence, certified by the verifier."""
    if not isinstance(length, int) or not 1 <= length <= 40:
        raise InputError(f"length must lie in [1, 40], got {length!r}")
    u = [0, 1]
    for r in range(1, length):
        u.append(2 * u[r] - u[r - math.floor(0.5 + math.sqrt(2 * r))])
    vals = tuple(sorted(u[length] - u[i] for i in range(length)))
    return certify(BaseSequence(vals, False, f"conway-guy-L{length}"))


def _scaled_block(base: BaseSequence, m: int) -> list[int]:
    """c_{i,m}: powers 2^0..2^(m-L-1) followed by 2^(m-L) times the base."""
    low = m - base.length
    return [1 << i for i in range(low)] + [v << low for v in base.values]


def augment_base(base: BaseSequence, n: int, mode: str = "single") -> Sequence:
    """Append one (single) or two (double) alternating-bit elements below a
    scaled sum-distinct base."""
    if not base.certified_sum_distinct:
        raise ContractError(f"base {base.name or base.values} is not certified sum-distinct")
    L = base.length
    if mode == "single":
        if n < L + 9:
            raise InputError(f"single augmentation needs n >= L + 9 = {L + 9}, got {n}")
        vals = _scaled_block(base, n - 1)
        vals.append(_quaternary_run(0, Fraction(n - L - 1, 2) - 1))
    elif mode == "double":
        if n < 2 * L + 11:
            raise InputError(f"double augmentation needs n >= 2L + 11 = {2 * L + 11}, got {n}")
        half = (n - L - 2) // 2
        vals = _scaled_block(base, n - 2)
        vals.append(_quaternary_run(0, Fraction(half, 2) - 1))
        vals.append(_quaternary_run(math.ceil(Fraction(half, 2)) - 1, Fraction(n - L - 2, 2) - 1))
    else:
        raise InputError(f"mode must be 'single' or 'double', got {mode!r}")
    return Sequence.from_ints(vals, max(vals))


def lift_to_k(base_seq: Sequence, k: int) -> Sequence:
    """k blocks; block j carries the scalar sequence in coordinate j."""
    if not isinstance(k, int) or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    if base_seq.k != 1:
        raise InputError(f"lift needs a scalar sequence, got k={base_seq.k}")
    elems = []
    for j in range(k):
        for v in base_seq.values:
            vec = [0] * k
            vec[j] = v
            elems.append(tuple(vec))
    return Sequence(k, tuple(elems), base_seq.declared_bound)
