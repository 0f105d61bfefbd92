"""Exact F_{lambda,n}-sum-distinctness checks with canonical collision witnesses.

A disjoint pair (A1, A2) is encoded as a signed vector eps in {-1, 0, +1}^n with
A1 = {eps = +1}, A2 = {eps = -1}; the pair collides when eps . seq equals the
target (zero, or the offset in shifted mode). Two engines search that space:

* ``exhaustive`` walks supports s = 1, 2, ... and evaluates every signed vector
  of that support, stopping at the first level with a hit;
* ``mitm`` enumerates signed partial sums of the two index halves, keeps the
  support counts alongside, and joins on complementary sums.

Both return the same canonical witness: the least pair under
(|A1| + |A2|, A1, A2) after orienting each pair (see ``canonical_pair``).
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from .errors import CapacityError, InputError
from .model import FamilySpec, IndexSet, Sequence, as_fraction, index_set, subset_sum

DEFAULT_MEMORY_BUDGET = 1 << 30
EXHAUSTIVE_AUTO_LIMIT = 1 << 26
EXHAUSTIVE_HARD_LIMIT = 1 << 31
MITM_BYTES_PER_ROW = 64
_CHUNK_CELLS = 1 << 22
_JOIN_CHUNK = 1 << 22
_INT64_SAFE = 1 << 61


@dataclass(frozen=True)
class PairConstraint:
    """Which disjoint pairs must have different sums.

    ``family``: each side has at most floor(lam*n) members.
    ``pair_sum_cap``: |A1| + |A2| < cap (cap may be fractional).
    ``shifted``: S(A1) != S(A2) + offset whenever |A1| + |A2| < cap.
    """

    mode: str
    lam: Fraction | None = None
    cap: Fraction | None = None
    offset: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.mode == "family":
            if self.lam is None or self.cap is not None or self.offset is not None:
                raise InputError("family constraint takes lambda only")
            lam = as_fraction(self.lam)
            if not 0 < lam <= 1:
                raise InputError(f"lambda must lie in (0, 1], got {lam}")
            object.__setattr__(self, "lam", lam)
        elif self.mode in ("pair_sum_cap", "shifted"):
            if self.cap is None or self.lam is not None:
                raise InputError(f"{self.mode} constraint needs a cap and no lambda")
            cap = as_fraction(self.cap)
            if cap <= 0:
                raise InputError(f"pair cap must be positive, got {cap}")
            object.__setattr__(self, "cap", cap)
            if self.mode == "shifted":
                if self.offset is None:
                    raise InputError("shifted constraint needs an offset")
                off = (self.offset,) if isinstance(self.offset, int) else tuple(self.offset)
                if not off or any(isinstance(c, bool) or not isinstance(c, int) for c in off):
                    raise InputError(f"offset must be an integer vector, got {self.offset!r}")
                object.__setattr__(self, "offset", off)
            elif self.offset is not None:
                raise InputError("pair_sum_cap constraint takes no offset")
        else:
            raise InputError(f"unknown constraint mode {self.mode!r}")

    @classmethod
    def family(cls, lam) -> "PairConstraint":
        return cls("family", lam=lam)

    @classmethod
    def pair_sum_cap(cls, cap) -> "PairConstraint":
        return cls("pair_sum_cap", cap=cap)

    @classmethod
    def shifted(cls, offset, cap) -> "PairConstraint":
        return cls("shifted", cap=cap, offset=offset)

    @property
    def oriented(self) -> bool:
        return self.mode == "shifted"

    def limits(self, n: int) -> tuple[int, int, int]:
        """(max |A1|, max |A2|, max |A1|+|A2|) for a length-n sequence."""
        if self.mode == "family":
            m = FamilySpec(self.lam, n).max_size()
            return m, m, 2 * m
        total = math.ceil(self.cap) - 1
        return total, total, total

    def target(self, k: int) -> tuple[int, ...]:
        if self.mode != "shifted":
            return (0,) * k
        if len(self.offset) != k:
            raise InputError(f"offset has {len(self.offset)} coordinates, sequence has k={k}")
        return self.offset

    def to_dict(self) -> dict:
        out: dict = {"mode": self.mode}
        if self.lam is not None:
            out["lambda"] = str(self.lam)
        if self.cap is not None:
            out["cap"] = str(self.cap)
        if self.offset is not None:
            out["offset"] = [str(c) for c in self.offset]
        return out


@dataclass(frozen=True)
class CollisionReport:
    status: str
    witness: tuple[IndexSet, IndexSet] | None
    pairs_examined: int
    engine: str
    constraint: PairConstraint
    witness_sums: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    @property
    def distinct(self) -> bool:
        return self.status == "distinct"

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "engine": self.engine,
            "pairs_examined": self.pairs_examined,
            "constraint": self.constraint.to_dict(),
            "witness": None,
        }
        if self.witness is not None:
            a1, a2 = self.witness
            s1, s2 = self.witness_sums
            out["witness"] = {
                "A1": list(a1),
                "A2": list(a2),
                "sum_A1": [str(c) for c in s1],
                "sum_A2": [str(c) for c in s2],
            }
        return out


def memory_budget(budget: int | None = None) -> int:
    if budget is not None:
        return int(budget)
    raw = os.environ.get("DSL_MEMORY_BUDGET")
    if raw is None:
        return DEFAULT_MEMORY_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"DSL_MEMORY_BUDGET must be an integer, got {raw!r}") from None


# --- canonical ordering ----------------------------------------------------

def _bits(mask: int) -> IndexSet:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def canonical_pair(plus: IndexSet, minus: IndexSet, oriented: bool) -> tuple[IndexSet, IndexSet]:
    """Orient an unordered collision: the smaller side first, ties broken by
    putting the side that holds the largest index first. Shifted pairs keep
    their orientation (A1 is the side carrying the offset)."""
    if oriented:
        return plus, minus
    if len(plus) != len(minus):
        return (plus, minus) if len(plus) < len(minus) else (minus, plus)
    top = max(plus + minus)
    return (plus, minus) if top in plus else (minus, plus)


def _witness_key(pair: tuple[IndexSet, IndexSet]):
    a1, a2 = pair
    return (len(a1) + len(a2), a1, a2)


def _best_witness(masks: Iterable[tuple[int, int]], oriented: bool):
    best = None
    for pm, nm in masks:
        pair = canonical_pair(_bits(int(pm)), _bits(int(nm)), oriented)
        if best is None or _witness_key(pair) < _witness_key(best):
            best = pair
    return best


# --- encoding k-dim sums as scalars -----------------------------------------

def _encode(seq: Sequence, target: tuple[int, ...]):
    """Map vectors onto scalars with a balanced mixed radix.

    Every signed partial sum of coordinate j lies in [-T_j, T_j] with T_j the
    coordinate total, so digits in that range with radix 2*T_j + 1 are unique.
    Returns (keys, target_key) or None if the target is outside the box.
    """
    totals = [sum(v[j] for v in seq.elements) for j in range(seq.k)]
    if any(abs(t) > T for t, T in zip(target, totals)):
        return None
    weights = []
    w = 1
    for T in totals:
        weights.append(w)
        w *= 2 * T + 1
    keys = [sum(c * wj for c, wj in zip(v, weights)) for v in seq.elements]
    tkey = sum(c * wj for c, wj in zip(target, weights))
    dtype = np.int64 if w < _INT64_SAFE else object
    return np.array(keys, dtype=dtype), (np.int64(tkey) if dtype is np.int64 else tkey)


# --- counting --------------------------------------------------------------

def signed_count(h: int, max_p: int, max_q: int, max_total: int) -> int:
    """Number of signed vectors on h indices obeying the support limits."""
    total = 0
    for p in range(min(h, max_p) + 1):
        for q in range(min(h - p, max_q, max_total - p) + 1):
            total += math.comb(h, p) * math.comb(h - p, q)
    return total


def _level_patterns(s: int, max_p: int, max_q: int, symmetric: bool) -> np.ndarray:
    """Sign patterns (rows) for support s; with symmetry the last sign is +."""
    rows = []
    for signs in itertools.product((1, -1), repeat=s):
        if symmetric and signs[-1] != 1:
            continue
        p = signs.count(1)
        if p <= max_p and s - p <= max_q:
            rows.append(signs)
    return np.array(rows, dtype=np.int64).reshape(len(rows), s)


def _pattern_count(s: int, max_p: int, max_q: int, symmetric: bool) -> int:
    lo, hi = max(0, s - max_q), min(s, max_p)
    if symmetric:
        return sum(math.comb(s - 1, p - 1) for p in range(max(lo, 1), hi + 1))
    return sum(math.comb(s, p) for p in range(lo, hi + 1))


def exhaustive_count(n: int, constraint: PairConstraint) -> int:
    """Signed vectors the exhaustive engine evaluates when no collision stops it."""
    max_p, max_q, max_total = constraint.limits(n)
    symmetric = not constraint.oriented
    return sum(math.comb(n, s) * _pattern_count(s, max_p, max_q, symmetric)
               for s in range(1, min(n, max_total) + 1))


# --- engines ---------------------------------------------------------------

def _exhaustive(keys, tkey, n, constraint):
    max_p, max_q, max_total = constraint.limits(n)
    symmetric = not constraint.oriented
    examined = 0
    for s in range(1, min(n, max_total) + 1):
        level = math.comb(n, s) * _pattern_count(s, max_p, max_q, symmetric)
        if level == 0:
            continue
        if examined + level > EXHAUSTIVE_HARD_LIMIT:
            raise CapacityError(
                f"exhaustive engine would examine more than {EXHAUSTIVE_HARD_LIMIT} signed "
                f"vectors at support s={s} (n={n}); use the mitm engine")
        pats = _level_patterns(s, max_p, max_q, symmetric)
        pos_mask = pats == 1
        hits = []
        rows_per_chunk = max(1, _CHUNK_CELLS // len(pats))
        combos = itertools.combinations(range(n), s)
        while True:
            block = list(itertools.islice(combos, rows_per_chunk))
            if not block:
                break
            idx = np.array(block, dtype=np.int64)
            vals = keys[idx]
            if vals.dtype == object:
                sums = vals.dot(pats.T.astype(object))
            else:
                sums = vals @ pats.T
            r, c = np.nonzero(sums == tkey)
            for ri, ci in zip(r.tolist(), c.tolist()):
                chosen = idx[ri]
                pm = sum(1 << int(i) for i, pos in zip(chosen, pos_mask[ci]) if pos)
                nm = sum(1 << int(i) for i, pos in zip(chosen, pos_mask[ci]) if not pos)
                hits.append((pm, nm))
        examined += level
        if hits:
            return _best_witness(hits, constraint.oriented), examined
    return None, examined


def _half_table(keys, idx, max_p, max_q, max_total):
    dtype = keys.dtype
    key = np.zeros(1, dtype=dtype)
    p = np.zeros(1, dtype=np.int16)
    q = np.zeros(1, dtype=np.int16)
    pm = np.zeros(1, dtype=np.uint64)
    nm = np.zeros(1, dtype=np.uint64)
    for i in idx:
        a = keys[i]
        bit = np.uint64(1 << i)
        room = (p + q) < max_total
        up = room & (p < max_p)
        down = room & (q < max_q)
        key = np.concatenate([key, key[up] + a, key[down] - a])
        p, q = (np.concatenate([p, p[up] + 1, p[down]]),
                np.concatenate([q, q[up], q[down] + 1]))
        pm, nm = (np.concatenate([pm, pm[up] | bit, pm[down]]),
                  np.concatenate([nm, nm[up], nm[down] | bit]))
    return key, p, q, pm, nm


def _common_ids(left, right):
    """Map two key arrays into one int64 id space (needed for object keys)."""
    if left.dtype != object and right.dtype != object:
        return left.astype(np.int64), right.astype(np.int64)
    allk = np.concatenate([left.astype(object), right.astype(object)])
    _, inv = np.unique(allk, return_inverse=True)
    inv = inv.astype(np.int64).ravel()
    return inv[: len(left)], inv[len(left):]


def _join_chunks(a, b) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield index pairs (ia, ib) with a[ia] == b[ib], in bounded chunks."""
    order = np.argsort(b, kind="stable")
    bs = b[order]
    lo = np.searchsorted(bs, a, side="left")
    hi = np.searchsorted(bs, a, side="right")
    cnt = hi - lo
    nz = np.nonzero(cnt)[0]
    if len(nz) == 0:
        return
    csum = np.cumsum(cnt[nz])
    start = 0
    while start < len(nz):
        base = csum[start - 1] if start else 0
        stop = int(np.searchsorted(csum, base + _JOIN_CHUNK, side="right"))
        stop = max(stop, start + 1)
        rows = nz[start:stop]
        c = cnt[rows]
        ia = np.repeat(rows, c)
        offs = np.arange(int(c.sum())) - np.repeat(np.cumsum(c) - c, c)
        ib = order[np.repeat(lo[rows], c) + offs]
        yield ia, ib
        start = stop


def _unique_rows(key, p, q):
    pq = p.astype(np.int64) * 4096 + q.astype(np.int64)
    order = np.lexsort((pq, key))
    k2, pq2 = key[order], pq[order]
    keep = np.ones(len(order), dtype=bool)
    keep[1:] = (k2[1:] != k2[:-1]) | (pq2[1:] != pq2[:-1])
    return k2[keep], (pq2[keep] // 4096), (pq2[keep] % 4096)


def mitm_rows(n: int, constraint: PairConstraint) -> tuple[int, int]:
    max_p, max_q, max_total = constraint.limits(n)
    h = n // 2
    return signed_count(h, max_p, max_q, max_total), signed_count(n - h, max_p, max_q, max_total)


def _check_mitm_budget(n, constraint, budget):
    rl, rr = mitm_rows(n, constraint)
    need = (rl + rr) * MITM_BYTES_PER_ROW
    if need <= budget:
        return
    smallest = n
    for m in range(1, n + 1):
        a, b = mitm_rows(m, constraint)
        if (a + b) * MITM_BYTES_PER_ROW > budget:
            smallest = m
            break
    raise CapacityError(
        f"mitm half-space of {rl}+{rr} rows needs ~{need} bytes, over the memory budget "
        f"of {budget} bytes; smallest refusing length n={smallest}")


def _mitm(keys, tkey, n, constraint):
    max_p, max_q, max_total = constraint.limits(n)
    h = n // 2
    kl, pl, ql, pml, nml = _half_table(keys, range(h), max_p, max_q, max_total)
    kr, pr, qr, pmr, nmr = _half_table(keys, range(h, n), max_p, max_q, max_total)
    need_r = tkey - kr
    idl, idr = _common_ids(kl, need_r)
    examined = len(kl) + len(kr)

    # minimal total support over distinct (sum, |A1|, |A2|) classes
    ul, upl, uql = _unique_rows(idl, pl, ql)
    ur, upr, uqr = _unique_rows(idr, pr, qr)
    best = None
    for ia, ib in _join_chunks(ul, ur):
        p = upl[ia] + upr[ib]
        q = uql[ia] + uqr[ib]
        t = p + q
        ok = (p <= max_p) & (q <= max_q) & (t <= max_total) & (t >= 1)
        examined += len(ia)
        if ok.any():
            m = int(t[ok].min())
            best = m if best is None else min(best, m)
    if best is None:
        return None, examined

    # all witnesses at that support, then the canonical one
    tl = pl + ql
    tr = pr + qr
    sl = np.nonzero(tl <= best)[0]
    sr = np.nonzero(tr <= best)[0]
    masks = []
    for ia, ib in _join_chunks(idl[sl], idr[sr]):
        a, b = sl[ia], sr[ib]
        p = pl[a] + pr[b]
        q = ql[a] + qr[b]
        ok = (p + q == best) & (p <= max_p) & (q <= max_q)
        if ok.any():
            masks.extend(zip((pml[a[ok]] | pmr[b[ok]]).tolist(),
                             (nml[a[ok]] | nmr[b[ok]]).tolist()))
    return _best_witness(masks, constraint.oriented), examined


def _select_engine(n, constraint, engine):
    if engine not in ("auto", "exhaustive", "mitm"):
        raise InputError(f"unknown engine {engine!r}")
    if engine != "auto":
        return engine
    return "exhaustive" if exhaustive_count(n, constraint) <= EXHAUSTIVE_AUTO_LIMIT else "mitm"


def verify(seq: Sequence, constraint: PairConstraint, engine: str = "auto",
           memory_budget_bytes: int | None = None) -> CollisionReport:
    """Decide whether ``seq`` separates every pair allowed by ``constraint``."""
    if not isinstance(constraint, PairConstraint):
        raise InputError("constraint must be a PairConstraint")
    n = seq.n
    if n > 63:
        raise CapacityError(f"sequences longer than 63 are not searchable (n={n})")
    engine = _select_engine(n, constraint, engine)
    target = constraint.target(seq.k)
    enc = _encode(seq, target)
    if enc is None:
        return CollisionReport("distinct", None, 0, engine, constraint)
    keys, tkey = enc
    if engine == "mitm":
        _check_mitm_budget(n, constraint, memory_budget(memory_budget_bytes))
        witness, examined = _mitm(keys, tkey, n, constraint)
    else:
        witness, examined = _exhaustive(keys, tkey, n, constraint)
    if witness is None:
        return CollisionReport("distinct", None, examined, engine, constraint)
    sums = (subset_sum(seq, witness[0]), subset_sum(seq, witness[1]))
    expected = tuple(b + t for b, t in zip(sums[1], target))
    if sums[0] != expected:
        raise AssertionError(f"witness {witness} does not re-verify")
    return CollisionReport("collision", witness, examined, engine, constraint, sums)


def find_collisions(seq: Sequence, constraint: PairConstraint, limit: int = 100_000,
                    memory_budget_bytes: int | None = None) -> tuple[list, bool]:
    """All colliding disjoint pairs (canonically oriented, sorted).

    Returns (pairs, truncated); truncated is True when more than ``limit``
    pairs exist, in which case only the first ``limit`` found are kept.
    """
    n = seq.n
    if n > 63:
        raise CapacityError(f"sequences longer than 63 are not searchable (n={n})")
    target = constraint.target(seq.k)
    enc = _encode(seq, target)
    if enc is None:
        return [], False
    keys, tkey = enc
    _check_mitm_budget(n, constraint, memory_budget(memory_budget_bytes))
    max_p, max_q, max_total = constraint.limits(n)
    h = n // 2
    kl, pl, ql, pml, nml = _half_table(keys, range(h), max_p, max_q, max_total)
    kr, pr, qr, pmr, nmr = _half_table(keys, range(h, n), max_p, max_q, max_total)
    idl, idr = _common_ids(kl, tkey - kr)
    found = set()
    truncated = False
    for ia, ib in _join_chunks(idl, idr):
        p = pl[ia] + pr[ib]
        q = ql[ia] + qr[ib]
        t = p + q
        ok = (p <= max_p) & (q <= max_q) & (t <= max_total) & (t >= 1)
        for pm, nm in zip((pml[ia[ok]] | pmr[ib[ok]]).tolist(),
                          (nml[ia[ok]] | nmr[ib[ok]]).tolist()):
            found.add(canonical_pair(_bits(pm), _bits(nm), constraint.oriented))
            if len(found) > limit:
                truncated = True
                break
        if truncated:
            break
    pairs = sorted(found, key=_witness_key)[:limit]
    return pairs, truncated


def check_shifted_distinct(seq: Sequence, offset, cap) -> CollisionReport:
    return verify(seq, PairConstraint.shifted(offset, cap))


def binary_weight_property(a1: Iterable[int], a2: Iterable[int], n: int) -> tuple[IndexSet, bool]:
    """With d_i = 2^(i-1), find A3 with S(A3) = S(A1) + S(A2) and test |A1|+|A2| >= |A3|."""
    s1 = index_set(a1, n)
    s2 = index_set(a2, n)
    total = sum(1 << (i - 1) for i in s1) + sum(1 << (i - 1) for i in s2)
    if total >> n:
        raise InputError(f"S(A1)+S(A2)={total} carries past position {n}")
    a3 = _bits(total)
    return a3, len(s1) + len(s2) >= len(a3)
