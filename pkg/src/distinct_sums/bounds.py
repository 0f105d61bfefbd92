"""Lower and upper bounds on the smallest admissible M.

Every bound is returned as ``value = factor_Cn * 2**(exponent_per_n * n)``.
Bounds carrying a (1+o(1)) factor are flagged ``asymptotic`` and are never a
finite-n certificate; ``pigeonhole_min_M`` is the certificate-grade one.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, replace
from fractions import Fraction

import mpmath
import numpy as np
from mpmath import mpf

from .errors import DomainError, InputError
from .model import FamilySpec, as_fraction, binary_entropy, f_entropy, precision_bits, to_mpf

DIRECT_CONSTANT = Fraction("0.22096")
BOHMAN_CONSTANT = Fraction("0.22002")
CROSSOVER_BRACKET = (Fraction(1, 10), Fraction(3, 25))

LOWER_SOURCES = ("trivial", "harper", "harper_k", "variance")
UPPER_SOURCES = ("nullstellensatz", "probabilistic", "direct_quarter", "direct_eighth",
                 "bohman_ref", "powers2_ref")


@dataclass(frozen=True)
class BoundResult:
    kind: str
    source: str
    value: mpf
    factor_Cn: mpf
    exponent_per_n: mpf
    asymptotic: bool
    n: int
    k: int
    lam: Fraction

    def as_float(self) -> float:
        return float(self.value)

    def as_fraction(self) -> Fraction:
        return as_fraction(self.value)

    def log2_value(self) -> mpf:
        return mpmath.log(self.factor_Cn, 2) + self.exponent_per_n * self.n


def _result(kind, source, factor, rate, asymptotic, n, k, lam):
    value = factor * mpmath.power(2, rate * n)
    return BoundResult(kind, source, +value, +factor, +rate, asymptotic, n, k, lam)


def _check_nk(n, k):
    if not isinstance(n, int) or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    if not isinstance(k, int) or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")


def _lam(lam, lo_open=Fraction(0), hi=Fraction(1)) -> Fraction:
    q = as_fraction(lam)
    if not lo_open < q <= hi:
        raise DomainError(f"lambda must lie in ({lo_open}, {hi}], got {q}")
    return q


# --- lower bounds ----------------------------------------------------------

def pigeonhole_min_M(n: int, k: int, lam) -> int:
    """Smallest M with (floor(lam*n)*M + 1)^k >= |F_{lam,n}|.

    Each coordinate of a family sum lies in [0, floor(lam*n)*M], so the
    distinct sums need that many lattice points.
    """
    _check_nk(n, k)
    fam = FamilySpec(_lam(lam), n)
    m = fam.max_size()
    size = fam.family_size()
    root = _ceil_root(size, k)
    if m == 0:
        return 0
    return -(-(root - 1) // m)


def _ceil_root(x: int, k: int) -> int:
    """Smallest integer r >= 0 with r**k >= x."""
    r = int(round(x ** (1.0 / k))) if x < 1 << 1000 else 1 << (x.bit_length() // k)
    while r ** k < x:
        r += 1
    while r > 0 and (r - 1) ** k >= x:
        r -= 1
    return r


def trivial_lower_bound(n: int, k: int, lam, exact: bool = False,
                        prec: int | None = None) -> BoundResult:
    _check_nk(n, k)
    q = _lam(lam)
    with mpmath.workprec(precision_bits(prec)):
        if exact:
            fam = FamilySpec(q, n)
            m = fam.max_size()
            rate = mpf(1) / k
            if m == 0:
                value = mpf(0)
            else:
                value = (mpmath.root(fam.family_size(), k) - 1) / m
            factor = value / mpmath.power(2, rate * n)
            return _result("lower", "trivial", factor, rate, False, n, k, q)
        ceil_ln = math.ceil(q * n)
        lv = to_mpf(q)
        if q < Fraction(1, 2):
            factor = 1 / (ceil_ln * mpmath.root(2 * mpmath.pi * n * lv * (1 - lv), k))
            rate = binary_entropy(q, prec) / k
        elif q < 1:
            factor = mpmath.power(2, mpf(-1) / k) / ceil_ln
            rate = mpf(1) / k
        else:
            factor = mpf(1) / n
            rate = mpf(1) / k
        return _result("lower", "trivial", factor, rate, True, n, k, q)


def harper_lower_bound(n: int, k: int, lam, prec: int | None = None) -> BoundResult:
    _check_nk(n, k)
    q = _lam(lam)
    if q < Fraction(1, 2):
        raise DomainError(f"Harper route needs lambda >= 1/2, got {q}")
    with mpmath.workprec(precision_bits(prec)):
        if k == 1:
            if q == Fraction(1, 2):
                factor = 1 / mpmath.sqrt(2 * mpmath.pi * n)
            else:
                factor = mpmath.sqrt(2 / (mpmath.pi * n))
            return _result("lower", "harper", factor, mpf(1), True, n, k, q)
        if q == Fraction(1, 2):
            raise DomainError("the k > 1 Harper bound covers lambda > 1/2 only")
        factor = mpmath.root(2 / mpmath.pi, k) * mpmath.power(n, mpf(1) / (2 * k) - 1)
        return _result("lower", "harper_k", factor, mpf(1) / k, True, n, k, q)


def variance_lower_bound(n: int, k: int, lam, prec: int | None = None) -> BoundResult:
    _check_nk(n, k)
    q = _lam(lam)
    if q < Fraction(1, 2):
        raise DomainError(f"variance bound needs lambda >= 1/2, got {q}")
    with mpmath.workprec(precision_bits(prec)):
        factor = (mpmath.sqrt(4 / (mpmath.pi * n * (k + 2)))
                  * mpmath.power(mpmath.gamma(mpf(k) / 2 + 1), mpf(1) / k))
        if q < 1:
            factor *= mpmath.power(2, mpf(-1) / k)
        return _result("lower", "variance", factor, mpf(1) / k, True, n, k, q)


# --- pair counting ---------------------------------------------------------

def _below_third(lam) -> Fraction:
    q = as_fraction(lam)
    if not 0 < q < Fraction(1, 3):
        raise DomainError(f"this bound needs 0 < lambda < 1/3, got {q}")
    return q


def pair_count_bound(n: int, lam, anchored: bool, prec: int | None = None) -> mpf:
    """Upper bound on disjoint unordered pairs with both sides of size <= lam*n
    (all of them, or only those covering a fixed index when anchored)."""
    _check_nk(n, 1)
    q = _below_third(lam)
    with mpmath.workprec(precision_bits(prec)):
        lv = to_mpf(q)
        growth = mpmath.power(2, f_entropy(q, prec) * n)
        if anchored:
            return +(lv ** 3 * n * n * growth)
        return +(lv ** 2 * n * n / 2 * growth)


def count_pairs(n: int, lam, anchored: bool, method: str = "formula") -> int:
    """Exact number of unordered pairs {A1, A2} of distinct disjoint subsets
    of [1, n], each of size <= floor(lam*n); anchored pairs must cover index 1.

    ``method="enumerate"`` labels every index +/-/0 explicitly (n <= 16).
    """
    m = FamilySpec(as_fraction(lam), n).max_size()
    if method == "formula":
        if anchored:
            return sum(math.comb(n - 1, i - 1) * math.comb(n - i, j)
                       for i in range(1, m + 1) for j in range(0, m + 1) if i + j <= n)
        ordered = sum(math.comb(n, i) * math.comb(n - i, j)
                      for i in range(m + 1) for j in range(m + 1) if i + j <= n)
        return (ordered - 1) // 2
    if method != "enumerate":
        raise InputError(f"unknown method {method!r}")
    if n > 16:
        raise InputError("enumeration is limited to n <= 16")
    # rows of {0, 1, 2} labels: 1 -> A1, 2 -> A2
    labels = np.array(list(itertools.product((0, 1, 2), repeat=n)), dtype=np.int8)
    size1 = (labels == 1).sum(axis=1)
    size2 = (labels == 2).sum(axis=1)
    ok = (size1 <= m) & (size2 <= m) & ((size1 + size2) > 0)
    if anchored:
        ok &= labels[:, 0] != 0
    # each unordered pair appears twice, as (A1, A2) and (A2, A1)
    return int(ok.sum()) // 2


# --- upper bounds ----------------------------------------------------------

def nullstellensatz_upper_bound(n: int, lam, prec: int | None = None) -> BoundResult:
    _check_nk(n, 1)
    q = _below_third(lam)
    with mpmath.workprec(precision_bits(prec)):
        lv = to_mpf(q)
        factor = lv ** 3 * n * n
        return _result("upper", "nullstellensatz", factor, f_entropy(q, prec), False, n, 1, q)


def deletion_budget(lam, prec: int | None = None) -> int:
    """tau = ceil(1 / (2^f(lam) - 1)), the number of elements deleted after sampling."""
    q = as_fraction(lam)
    if not 0 < q <= Fraction(1, 3):
        raise DomainError(f"deletion budget needs 0 < lambda <= 1/3, got {q}")
    with mpmath.workprec(precision_bits(prec) + 32):
        f = f_entropy(q)
        return int(mpmath.ceil(1 / mpmath.expm1(f * mpmath.ln2)))


def deletion_tradeoff(lam, t: int, prec: int | None = None) -> mpf:
    """g(t) = 2^(f(lam) t) / t."""
    with mpmath.workprec(precision_bits(prec)):
        return mpmath.power(2, f_entropy(lam, prec) * t) / t


def comparison_holds(lam, prec: int | None = None) -> bool:
    """lam < 2^(f tau) / (2 tau): the k = 1 nullstellensatz bound beats the sampled one."""
    q = as_fraction(lam)
    tau = deletion_budget(q, prec)
    with mpmath.workprec(precision_bits(prec)):
        return to_mpf(q) < mpmath.power(2, f_entropy(q, prec) * tau) / (2 * tau)


def probabilistic_upper_bound(n: int, k: int, lam, prec: int | None = None) -> BoundResult:
    _check_nk(n, k)
    q = _below_third(lam)
    tau = deletion_budget(q, prec)
    with mpmath.workprec(precision_bits(prec)):
        lv = to_mpf(q)
        f = f_entropy(q, prec)
        factor = mpmath.root(lv ** 2 * n * n / (2 * tau) * mpmath.power(2, f * tau), k)
        return _result("upper", "probabilistic", factor, f / k, True, n, k, q)


def direct_upper_bound(n: int, lam, prec: int | None = None) -> BoundResult:
    _check_nk(n, 1)
    q = as_fraction(lam)
    if not 0 < q < Fraction(1, 4):
        raise DomainError(f"direct construction needs 0 < lambda < 1/4, got {q}")
    if q < Fraction(1, 8):
        source, const = "direct_eighth", DIRECT_CONSTANT / 4
    else:
        source, const = "direct_quarter", DIRECT_CONSTANT / 2
    with mpmath.workprec(precision_bits(prec)):
        return _result("upper", source, to_mpf(const), mpf(1), True, n, 1, q)


def bohman_reference(n: int, lam=1, prec: int | None = None) -> BoundResult:
    _check_nk(n, 1)
    q = _lam(lam)
    with mpmath.workprec(precision_bits(prec)):
        return _result("upper", "bohman_ref", to_mpf(BOHMAN_CONSTANT), mpf(1), True, n, 1, q)


def powers2_reference(n: int, lam=1, prec: int | None = None) -> BoundResult:
    _check_nk(n, 1)
    q = _lam(lam)
    with mpmath.workprec(precision_bits(prec)):
        return _result("upper", "powers2_ref", mpf(1) / 2, mpf(1), False, n, 1, q)


def lift_upper_bound(result: BoundResult, k: int) -> BoundResult:
    """Re-index a scalar bound at (n', lam') to (k n', k, lam'/k); M is unchanged."""
    if result.k != 1:
        raise InputError("only scalar (k = 1) bounds can be lifted")
    if not isinstance(k, int) or k < 1:
        raise InputError(f"k must be a positive integer, got {k!r}")
    if k == 1:
        return result
    return replace(result, n=result.n * k, k=k, lam=result.lam / k,
                   exponent_per_n=result.exponent_per_n / k)


def crossover_lambda(tol=mpf("1e-12"), prec: int | None = None) -> mpf:
    """Root of f(lam) = 1 on the bracket (0.1, 0.12), by bisection."""
    with mpmath.workprec(max(precision_bits(prec), 64)):
        lo, hi = to_mpf(CROSSOVER_BRACKET[0]), to_mpf(CROSSOVER_BRACKET[1])
        if not (f_entropy(lo) < 1 < f_entropy(hi)):
            raise AssertionError("crossover bracket does not straddle f = 1")
        while hi - lo > tol:
            mid = (lo + hi) / 2
            if f_entropy(mid) < 1:
                lo = mid
            else:
                hi = mid
        return (lo + hi) / 2


# --- tables ----------------------------------------------------------------

TABLE_COLUMNS = ("lambda", "source", "kind", "C_n", "exponent_per_n", "value", "asymptotic")


def _lifted(fn, n, k, lam, prec):
    """Scalar bound at (n/k, k*lam) lifted to dimension k."""
    if n % k:
        raise DomainError(f"n={n} is not a multiple of k={k}")
    return lift_upper_bound(fn(n // k, lam * k, prec=prec), k)


def _candidates(n, k, lam, prec):
    yield "lower", "trivial", lambda: trivial_lower_bound(n, k, lam, prec=prec)
    if k == 1:
        yield "lower", "harper", lambda: harper_lower_bound(n, k, lam, prec=prec)
    else:
        yield "lower", "harper_k", lambda: harper_lower_bound(n, k, lam, prec=prec)
    yield "lower", "variance", lambda: variance_lower_bound(n, k, lam, prec=prec)

    def nul(m, q, prec):
        return nullstellensatz_upper_bound(m, q, prec=prec)

    def quarter(m, q, prec):
        r = direct_upper_bound(m, q, prec=prec)
        if r.source != "direct_quarter":
            with mpmath.workprec(precision_bits(prec)):
                r = _result("upper", "direct_quarter", to_mpf(DIRECT_CONSTANT / 2), mpf(1),
                            True, m, 1, r.lam)
        return r

    def eighth(m, q, prec):
        if not as_fraction(q) < Fraction(1, 8):
            raise DomainError("the quarter-constant construction needs lambda < 1/8")
        return direct_upper_bound(m, q, prec=prec)

    yield "upper", "nullstellensatz", lambda: _lifted(nul, n, k, lam, prec)
    yield "upper", "probabilistic", lambda: probabilistic_upper_bound(n, k, lam, prec=prec)
    yield "upper", "direct_quarter", lambda: _lifted(quarter, n, k, lam, prec)
    yield "upper", "direct_eighth", lambda: _lifted(eighth, n, k, lam, prec)
    yield "upper", "bohman_ref", lambda: _lifted(bohman_reference, n, k, lam, prec)
    yield "upper", "powers2_ref", lambda: _lifted(powers2_reference, n, k, lam, prec)


def bound_table(n: int, k: int, lambda_grid, prec: int | None = None) -> list[dict]:
    """One row per (lambda, source); inapplicable bounds keep None cells."""
    _check_nk(n, k)
    rows = []
    for raw in lambda_grid:
        lam = as_fraction(raw)
        if not 0 < lam <= 1:
            raise InputError(f"grid value {lam} outside (0, 1]")
        for kind, source, make in _candidates(n, k, lam, prec):
            try:
                res = make()
            except DomainError:
                res = None
            rows.append({"lambda": lam, "source": source, "kind": kind, "result": res})
    return rows


def _fmt(x, prec) -> str:
    digits = max(15, int(precision_bits(prec) * 0.30103))
    return mpmath.nstr(x, digits, min_fixed=-5, max_fixed=30)


def table_records(rows, prec: int | None = None) -> list[dict]:
    out = []
    for row in rows:
        res = row["result"]
        out.append({
            "lambda": str(row["lambda"]),
            "source": row["source"],
            "kind": row["kind"],
            "C_n": "" if res is None else _fmt(res.factor_Cn, prec),
            "exponent_per_n": "" if res is None else _fmt(res.exponent_per_n, prec),
            "value": "" if res is None else _fmt(res.value, prec),
            "asymptotic": "" if res is None else str(res.asymptotic).lower(),
        })
    return out


def table_to_csv(rows, prec: int | None = None) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(table_records(rows, prec))
    return buf.getvalue()


def table_to_json(rows, prec: int | None = None) -> str:
    recs = table_records(rows, prec)
    for r in recs:
        for key in ("C_n", "exponent_per_n", "value", "asymptotic"):
            if r[key] == "":
                r[key] = None
    return json.dumps(recs, indent=2) + "\n"
