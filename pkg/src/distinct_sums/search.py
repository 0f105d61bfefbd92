"""Constructive searches: sample-and-delete, and exact minimal M at tiny scale."""

from __future__ import annotations

import itertools
import json
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .bounds import deletion_budget, pigeonhole_min_M
from .errors import CapacityError, DomainError, DomainWarning, InputError
from .model import FamilySpec, Sequence, as_fraction
from .verifier import PairConstraint, find_collisions, verify

DEFAULT_RETRIES = 10
DEFAULT_SEARCH_BUDGET = 10 ** 9
COLLISION_LIMIT = 100_000


@dataclass(frozen=True)
class SearchOutcome:
    status: str
    sequence: Sequence | None
    attempts: int
    removed: int
    rng_seed: int | None
    elapsed: float = field(default=0.0, compare=False)
    m_min: int | None = None
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        # elapsed is left out so identical runs serialize identically
        return {
            "status": self.status,
            "sequence": None if self.sequence is None else self.sequence.to_dict(),
            "attempts": self.attempts,
            "removed": self.removed,
            "rng_seed": self.rng_seed,
            "m_min": self.m_min,
            "params": self.params,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "SearchOutcome":
        seq = data.get("sequence")
        return cls(data["status"], None if seq is None else Sequence.from_dict(seq),
                   data["attempts"], data["removed"], data.get("rng_seed"),
                   m_min=data.get("m_min"), params=data.get("params", {}))


# --- randomized sample-and-delete ---------------------------------------

def _generator(seed: int, retry: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, retry])))


def sample_uniform(rng: np.random.Generator, count: int, M: int) -> list[int]:
    """``count`` integers in [1, M] by modular reduction of wide raw words.

    Each draw concatenates enough 64-bit words to exceed M by 64 bits, so the
    modulo bias is below 2^-64 and no draw is ever rejected.
    """
    words = (M.bit_length() + 63) // 64 + 1
    raw = rng.bit_generator.random_raw(count * words).tolist()
    out = []
    for i in range(count):
        x = 0
        for w in raw[i * words:(i + 1) * words]:
            x = (x << 64) | w
        out.append(x % M + 1)
    return out


def greedy_cover(pairs, limit: int | None = None) -> list[int] | None:
    """Indices hitting every pair, most-covering index first (ties to the
    smaller index). None once the cover would exceed ``limit``."""
    live = [set(a) | set(b) for a, b in pairs]
    cover = []
    while live:
        if limit is not None and len(cover) >= limit:
            return None
        counts: dict[int, int] = {}
        for s in live:
            for i in s:
                counts[i] = counts.get(i, 0) + 1
        best = min(counts, key=lambda i: (-counts[i], i))
        cover.append(best)
        live = [s for s in live if best not in s]
    return sorted(cover)


def _check_common(n, k, lam):
    if not isinstance(n, int) or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    if not isinstance(k, int) or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    return as_fraction(lam)


def random_construct(n: int, k: int, lam, M: int, seed: int,
                     max_retries: int = DEFAULT_RETRIES) -> SearchOutcome:
    """Sample n + tau vectors in [1, M]^k, delete a hitting set of the
    collisions and keep the first n survivors if they verify."""
    start = time.perf_counter()
    q = _check_common(n, k, lam)
    if not 0 < q < Fraction(1, 3):
        raise DomainError(f"random construction needs 0 < lambda < 1/3, got {q}")
    if isinstance(M, bool) or not isinstance(M, int) or M < 1:
        raise InputError(f"M must be a positive integer, got {M!r}")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise InputError(f"seed must be a nonnegative integer, got {seed!r}")
    if max_retries < 1:
        raise InputError("max_retries must be at least 1")
    floor_bound = pigeonhole_min_M(n, k, q)
    if M < floor_bound:
        warnings.warn(f"M={M} is below the pigeonhole bound {floor_bound}", DomainWarning,
                      stacklevel=2)
    t = deletion_budget(q)
    n_prime = n + t
    m = FamilySpec(q, n).max_size()
    final = PairConstraint.family(q)
    params = {"n": n, "k": k, "lambda": str(q), "M": str(M), "tau": t, "n_prime": n_prime,
              "max_retries": max_retries, "history": []}
    removed = 0
    for retry in range(max_retries):
        rng = _generator(seed, retry)
        flat = sample_uniform(rng, n_prime * k, M)
        elems = [tuple(flat[i * k:(i + 1) * k]) for i in range(n_prime)]
        if m == 0:
            pairs, truncated = [], False
        else:
            wide = Sequence(k, tuple(elems))
            pairs, truncated = find_collisions(wide, PairConstraint.family(Fraction(m, n_prime)),
                                               limit=COLLISION_LIMIT)
        cover = None if truncated else greedy_cover(pairs, limit=t)
        params["history"].append({"collisions": len(pairs), "truncated": truncated,
                                  "cover": None if cover is None else len(cover)})
        if cover is None:
            continue
        removed = len(cover)
        dropped = {i - 1 for i in cover}
        kept = [e for i, e in enumerate(elems) if i not in dropped][:n]
        seq = Sequence(k, tuple(kept), M)
        if verify(seq, final).distinct:
            return SearchOutcome("found", seq, retry + 1, removed, seed,
                                 time.perf_counter() - start, params=params)
    return SearchOutcome("failed", None, max_retries, removed, seed,
                         time.perf_counter() - start, params=params)


# --- exact minimal M -------------------------------------------------------

def _encoder(k: int, radix: int):
    weights = [radix ** j for j in range(k)]
    return lambda v: sum(c * w for c, w in zip(v, weights))


def _first_sequence(n, cands, keys, m):
    """Lexicographically least nondecreasing choice of n candidates whose
    subsets of size <= m have pairwise different sums; returns (indices, nodes)."""
    by_size = [[0]] + [[] for _ in range(m)]
    seen = {0}
    chosen: list[int] = []
    nodes = 0

    def extend(start):
        nonlocal nodes
        if len(chosen) == n:
            return True
        for ci in range(start, len(cands)):
            nodes += 1
            a = keys[ci]
            fresh = [[s + a for s in by_size[j - 1]] for j in range(1, m + 1)]
            if any(x in seen for level in fresh for x in level):
                continue
            for j, level in enumerate(fresh, start=1):
                by_size[j].extend(level)
                seen.update(level)
            chosen.append(ci)
            if extend(ci):
                return True
            chosen.pop()
            for j, level in enumerate(fresh, start=1):
                del by_size[j][len(by_size[j]) - len(level):]
                seen.difference_update(level)
        return False

    return (list(chosen) if extend(0) else None), nodes


def search_space(n: int, k: int, M_max: int) -> int:
    return (M_max + 1) ** (n * k)


def exact_min_M(n: int, k: int, lam, M_max: int,
                budget: int = DEFAULT_SEARCH_BUDGET) -> SearchOutcome:
    """Smallest M <= M_max admitting an M-bounded F_{lam,n}-sum-distinct sequence.

    The witness is the lexicographically least nondecreasing one at that M.
    """
    start = time.perf_counter()
    q = _check_common(n, k, lam)
    fam = FamilySpec(q, n)
    if isinstance(M_max, bool) or not isinstance(M_max, int) or M_max < 0:
        raise InputError(f"M_max must be a nonnegative integer, got {M_max!r}")
    space = search_space(n, k, M_max)
    if space > budget:
        raise CapacityError(f"search space {space} exceeds the budget {budget}")
    m = fam.max_size()
    params = {"n": n, "k": k, "lambda": str(q), "M_max": M_max}
    nodes = 0
    for M in range(M_max + 1):
        cands = list(itertools.product(range(M + 1), repeat=k))
        encode = _encoder(k, max(1, m * M + 1))
        keys = [encode(v) for v in cands]
        picked, visited = _first_sequence(n, cands, keys, m)
        nodes += visited
        if picked is not None:
            seq = Sequence(k, tuple(cands[i] for i in picked), M)
            if not verify(seq, PairConstraint.family(q)).distinct:
                raise AssertionError(f"exact search produced a colliding sequence {seq}")
            return SearchOutcome("found", seq, nodes, 0, None, time.perf_counter() - start,
                                 m_min=M, params=params)
    return SearchOutcome("exhausted", None, nodes, 0, None, time.perf_counter() - start,
                         params=params)


def pigeonhole_consistent(outcome: SearchOutcome) -> bool:
    p = outcome.params
    return outcome.m_min is None or outcome.m_min >= pigeonhole_min_M(p["n"], p["k"], p["lambda"])


__all__ = ["SearchOutcome", "random_construct", "exact_min_M", "greedy_cover",
           "sample_uniform", "search_space", "pigeonhole_consistent"]
