"""Core types: sequences in Z^k, the size-capped family F_{lambda,n}, entropies."""

from __future__ import annotations

import json
import math
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence as Seq

import mpmath
from mpmath import mpf

from .errors import InputError

DEFAULT_PRECISION_BITS = 64
_DECIMAL = re.compile(r"^[0-9]+$")


def precision_bits(prec: int | None = None) -> int:
    """Working precision for real-valued evaluations (``DSL_PRECISION_BITS``)."""
    if prec is not None:
        return int(prec)
    raw = os.environ.get("DSL_PRECISION_BITS")
    if raw is None:
        return DEFAULT_PRECISION_BITS
    try:
        bits = int(raw)
    except ValueError:
        raise InputError(f"DSL_PRECISION_BITS must be an integer, got {raw!r}") from None
    if bits < 24:
        raise InputError(f"DSL_PRECISION_BITS too small: {bits}")
    return bits


def as_fraction(x) -> Fraction:
    """Exact rational from int, Fraction, decimal/ratio string or float.

    Floats go through their shortest repr so that ``0.3`` means 3/10.
    """
    if isinstance(x, bool):
        raise InputError(f"not a rational: {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InputError(f"not a finite rational: {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"cannot parse rational {x!r}") from None
    if isinstance(x, mpmath.mpf):
        man, exp = x.man_exp
        return Fraction(man) * Fraction(2) ** exp
    raise InputError(f"not a rational: {x!r}")


def to_mpf(x) -> mpf:
    if isinstance(x, mpmath.mpf):
        return x
    q = as_fraction(x)
    return mpf(q.numerator) / q.denominator


@dataclass(frozen=True)
class Sequence:
    """n vectors of Z^k with nonnegative big-integer coordinates, in input order."""

    k: int
    elements: tuple[tuple[int, ...], ...]
    declared_bound: int | None = None

    def __post_init__(self):
        if not isinstance(self.k, int) or self.k < 1:
            raise InputError(f"dimension k must be a positive integer, got {self.k!r}")
        elems = tuple(tuple(v) for v in self.elements)
        if not elems:
            raise InputError("a sequence needs at least one element")
        for i, v in enumerate(elems, start=1):
            if len(v) != self.k:
                raise InputError(f"element {i} has {len(v)} coordinates, expected {self.k}")
            for c in v:
                if isinstance(c, bool) or not isinstance(c, int):
                    raise InputError(f"element {i} has a non-integer coordinate {c!r}")
                if c < 0:
                    raise InputError(f"element {i} has a negative coordinate {c}")
                if self.declared_bound is not None and c > self.declared_bound:
                    raise InputError(
                        f"element {i} coordinate {c} exceeds declared bound {self.declared_bound}")
        if self.declared_bound is not None and self.declared_bound < 0:
            raise InputError("declared bound must be nonnegative")
        object.__setattr__(self, "elements", elems)

    @classmethod
    def from_ints(cls, values: Iterable[int], declared_bound: int | None = None) -> "Sequence":
        return cls(1, tuple((v,) for v in values), declared_bound)

    @classmethod
    def tight(cls, k: int, elements) -> "Sequence":
        """Build with declared_bound set to the largest coordinate."""
        elems = tuple(tuple(v) for v in elements)
        bound = max((c for v in elems for c in v), default=0)
        return cls(k, elems, bound)

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def values(self) -> tuple[int, ...]:
        """Scalar view, only for k = 1."""
        if self.k != 1:
            raise InputError("scalar view requires k = 1")
        return tuple(v[0] for v in self.elements)

    def max_coordinate(self) -> int:
        return max(c for v in self.elements for c in v)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "elements": [[str(c) for c in v] for v in self.elements],
            "bound": None if self.declared_bound is None else str(self.declared_bound),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Sequence":
        if not isinstance(data, dict):
            raise InputError("sequence JSON must be an object")
        try:
            k = data["k"]
            raw = data["elements"]
        except KeyError as exc:
            raise InputError(f"sequence JSON lacks field {exc.args[0]!r}") from None
        if not isinstance(k, int) or isinstance(k, bool):
            raise InputError("field 'k' must be an integer")
        if not isinstance(raw, list):
            raise InputError("field 'elements' must be a list")
        elems = tuple(tuple(_parse_int(c) for c in _as_list(v)) for v in raw)
        n = data.get("n", len(elems))
        if n != len(elems):
            raise InputError(f"field 'n'={n} disagrees with {len(elems)} elements")
        bound = data.get("bound")
        return cls(k, elems, None if bound is None else _parse_int(bound))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Sequence":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed JSON: {exc.msg} at line {exc.lineno}") from None
        return cls.from_dict(data)


def _as_list(v):
    if not isinstance(v, list):
        raise InputError(f"element must be a list of coordinates, got {v!r}")
    return v


def _parse_int(c) -> int:
    if isinstance(c, int) and not isinstance(c, bool):
        return c
    if isinstance(c, str) and _DECIMAL.match(c):
        return int(c)
    raise InputError(f"expected a nonnegative decimal string, got {c!r}")


@dataclass(frozen=True)
class FamilySpec:
    """The family of subsets of {1..n} with at most floor(lambda*n) members."""

    lam: Fraction
    n: int

    def __post_init__(self):
        lam = as_fraction(self.lam)
        if not 0 < lam <= 1:
            raise InputError(f"lambda must lie in (0, 1], got {lam}")
        if not isinstance(self.n, int) or self.n < 1:
            raise InputError(f"n must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "lam", lam)

    def max_size(self) -> int:
        return math.floor(self.lam * self.n)

    def family_size(self) -> int:
        return sum(math.comb(self.n, i) for i in range(self.max_size() + 1))


def family_size(spec: FamilySpec) -> int:
    return spec.family_size()


IndexSet = tuple[int, ...]


def index_set(members: Iterable[int], n: int | None = None) -> IndexSet:
    """Sorted 1-based index tuple; rejects duplicates and, given n, out-of-range entries."""
    out = sorted(members)
    if len(set(out)) != len(out):
        raise InputError(f"duplicate indices in {out}")
    for i in out:
        if isinstance(i, bool) or not isinstance(i, int):
            raise InputError(f"index {i!r} is not an integer")
        if i < 1 or (n is not None and i > n):
            raise InputError(f"index {i} outside [1, {n}]")
    return tuple(out)


def subset_sum(seq: Sequence, a: Iterable[int]) -> tuple[int, ...]:
    idx = index_set(a, seq.n)
    total = [0] * seq.k
    for i in idx:
        for j, c in enumerate(seq.elements[i - 1]):
            total[j] += c
    return tuple(total)


def _xlog2x(p: mpf) -> mpf:
    return mpf(0) if p == 0 else p * mpmath.log(p, 2)


def shannon_entropy(probs: Seq, prec: int | None = None) -> mpf:
    """Entropy in bits of a probability vector, with 0*log 0 = 0."""
    with mpmath.workprec(precision_bits(prec)):
        return -mpmath.fsum(_xlog2x(to_mpf(p)) for p in probs)


def binary_entropy(x, prec: int | None = None) -> mpf:
    with mpmath.workprec(precision_bits(prec)):
        xv = _checked_unit(x)
        return -(_xlog2x(xv) + _xlog2x(1 - xv))


def f_entropy(lam, prec: int | None = None) -> mpf:
    """H(lam, lam, 1 - 2 lam): the exponential rate of the upper bounds."""
    with mpmath.workprec(precision_bits(prec)):
        exact = lam if isinstance(lam, mpmath.mpf) else as_fraction(lam)
        if not (0 < exact and exact * 3 <= 1):
            raise InputError(f"f(lambda) needs 0 < lambda <= 1/3, got {lam}")
        lv = to_mpf(exact)
        return -(2 * _xlog2x(lv) + _xlog2x(1 - 2 * lv))


def _checked_unit(x) -> mpf:
    exact = x if isinstance(x, mpmath.mpf) else as_fraction(x)
    if not 0 <= exact <= 1:
        raise InputError(f"argument must lie in [0, 1], got {x}")
    return to_mpf(exact)
