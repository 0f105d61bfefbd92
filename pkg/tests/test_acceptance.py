"""The fourteen acceptance checks, one test each, at their stated tolerances.

A line per criterion is printed in the terminal summary.
"""

import json
import math
import time
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from conftest import criterion
from distinct_sums.bounds import (comparison_holds, count_pairs, crossover_lambda, deletion_budget,
                                  deletion_tradeoff, harper_lower_bound, pair_count_bound,
                                  pigeonhole_min_M, probabilistic_upper_bound,
                                  variance_lower_bound)
from distinct_sums.cli import dispatch
from distinct_sums.constructions import augment_base, conway_guy_base, tilde_sigma
from distinct_sums.model import Sequence, f_entropy
from distinct_sums.search import SearchOutcome, exact_min_M, random_construct
from distinct_sums.verifier import (PairConstraint, binary_weight_property, exhaustive_count,
                                    verify)

GOLDEN = Path(__file__).parent / "golden"


def test_c01_tilde_sigma_pair_cap():
    with criterion(1, "tilde_sigma(n) distinct under |A1|+|A2| < n/2, n in [6,24], mitm, <= 60 s"):
        t0 = time.perf_counter()
        for n in range(6, 25):
            rep = verify(tilde_sigma(n), PairConstraint.pair_sum_cap(math.ceil(n / 2)), engine="mitm")
            assert rep.distinct, (n, rep.witness)
        assert time.perf_counter() - t0 <= 60


def test_c02_tightness_witness():
    with criterion(2, "cap n/2+1 yields canonical witness ({n}, {1,3,...,n-3}), even n in [6,16]"):
        for n in range(6, 17, 2):
            rep = verify(tilde_sigma(n), PairConstraint.pair_sum_cap(n // 2 + 1))
            assert rep.status == "collision"
            assert rep.witness == ((n,), tuple(range(1, n - 2, 2))), (n, rep.witness)


def test_c03_shifted_distinct():
    with criterion(3, "tilde_sigma(n) shifted by 2^(n-1) distinct under cap (n-1)/2, n in [6,20], <= 60 s"):
        t0 = time.perf_counter()
        for n in range(6, 21):
            rep = verify(tilde_sigma(n), PairConstraint.shifted(1 << (n - 1), Fraction(n - 1, 2)))
            assert rep.distinct, (n, rep.witness)
        assert time.perf_counter() - t0 <= 60


def test_c04_binary_weight_exhaustive():
    with criterion(4, "|A1|+|A2| >= |A3| for all A1, A2 in [1,10], <= 10 s"):
        t0 = time.perf_counter()
        n = 10
        # all 2^20 mask pairs at once; popcount of the sum is |A3|
        masks = np.arange(1 << n, dtype=np.int64)
        pop = np.array([bin(m).count("1") for m in range(1 << (n + 1))])
        total = masks[:, None] + masks[None, :]
        lhs = pop[masks][:, None] + pop[masks][None, :]
        assert total.size == 1 << 20
        assert np.all(lhs >= pop[total]), "weight inequality broken"
        # and the operation itself on carry-free pairs
        rng = np.random.default_rng(0)
        for a, b in rng.integers(0, 1 << n, size=(2000, 2)).tolist():
            if a + b >= 1 << n:
                continue
            s1 = tuple(i + 1 for i in range(n) if a >> i & 1)
            s2 = tuple(i + 1 for i in range(n) if b >> i & 1)
            a3, holds = binary_weight_property(s1, s2, n)
            assert holds and sum(1 << (i - 1) for i in a3) == a + b
        assert time.perf_counter() - t0 <= 10


def test_c05_crossover():
    with criterion(5, "crossover_lambda() = 0.113546 +- 1e-6"):
        lam = crossover_lambda()
        assert abs(lam - mpmath.mpf("0.113546")) <= 1e-6
        assert abs(f_entropy(lam) - 1) <= 1e-9


def test_c06_comparison_and_tau():
    with criterion(6, "comparison inequality and tau minimality on 1000 points in (0,1/3], <= 5 s"):
        t0 = time.perf_counter()
        for i in range(1, 1001):
            lam = Fraction(i, 3000)
            assert comparison_holds(lam), lam
            tau = deletion_budget(lam)
            g = deletion_tradeoff(lam, tau)
            assert g <= deletion_tradeoff(lam, tau + 1), lam
            if tau > 1:
                assert g <= deletion_tradeoff(lam, tau - 1), lam
        assert time.perf_counter() - t0 <= 5


def test_c07_pair_counts():
    with criterion(7, "enumerated pair counts <= anchored/unanchored bounds, n <= 14, 4 lambdas, <= 120 s"):
        t0 = time.perf_counter()
        for lam in (Fraction(1, 8), Fraction(1, 6), Fraction(1, 4), Fraction(3, 10)):
            for n in range(1, 15):
                for anchored in (True, False):
                    exact = count_pairs(n, lam, anchored, method="enumerate")
                    assert exact == count_pairs(n, lam, anchored)
                    assert exact <= pair_count_bound(n, lam, anchored), (n, lam, anchored)
        assert time.perf_counter() - t0 <= 120


def test_c08_harper_factor():
    with criterion(8, "harper factor = sqrt(2/pi)/sqrt(n) to 1e-12; lambda=1/2 factor is half"):
        for n in (1, 2, 5, 10, 50, 100, 1000):
            full = harper_lower_bound(n, 1, 1).factor_Cn
            assert abs(full - mpmath.sqrt(2 / mpmath.pi) / mpmath.sqrt(n)) <= 1e-12
            half = harper_lower_bound(n, 1, Fraction(1, 2)).factor_Cn
            assert abs(half - full / 2) <= 1e-12 * full


def test_c09_variance_simplification():
    with criterion(9, "variance bound = 2^n/sqrt(3n) to 1e-12 relative"):
        for n in (1, 3, 10, 40, 200):
            got = variance_lower_bound(n, 1, 1).value
            want = mpmath.power(2, n) / mpmath.sqrt(3 * n)
            assert abs(got / want - 1) <= 1e-12


def _golden_outcome(name: str, outcome: SearchOutcome):
    path = GOLDEN / name
    text = outcome.dumps()
    if not path.exists():
        path.write_text(text)
    assert path.read_text() == text, f"golden mismatch for {name}"


def test_c10_exact_ground_truth():
    with criterion(10, "exact_min_M(3,1,1)=4, (1,1,1)=1, M_min >= pigeonhole for n <= 5, <= 120 s"):
        t0 = time.perf_counter()
        o3 = exact_min_M(3, 1, 1, 10)
        o1 = exact_min_M(1, 1, 1, 10)
        assert o3.m_min == 4 and o1.m_min == 1
        _golden_outcome("exact_n3_k1_lam1.json", o3)
        _golden_outcome("exact_n1_k1_lam1.json", o1)
        for n in range(1, 6):
            for lam in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(2, 3), Fraction(1)):
                out = exact_min_M(n, 1, lam, 20)
                assert out.status == "found"
                assert out.m_min >= pigeonhole_min_M(n, 1, lam), (n, lam)
        _golden_outcome("exact_n4_k1_lam1_2.json", exact_min_M(4, 1, Fraction(1, 2), 20))
        assert time.perf_counter() - t0 <= 120


def test_c11_random_construct():
    with criterion(11, "random_construct(10,2,0.2) at ceil(probabilistic bound): >= 15/20 found, all re-verify"):
        t0 = time.perf_counter()
        lam = Fraction(1, 5)
        M = int(mpmath.ceil(probabilistic_upper_bound(10, 2, lam).value))
        found = 0
        for seed in range(20):
            out = random_construct(10, 2, lam, M, seed)
            if out.status == "found":
                found += 1
                assert out.sequence.max_coordinate() <= M
                rep = verify(out.sequence, PairConstraint.family(lam), engine="exhaustive")
                assert rep.distinct
        assert found >= 15, found
        assert time.perf_counter() - t0 <= 600


def test_c12_augmented_conway_guy():
    with criterion(12, "augment_base(conway_guy_base(8), 24, single) distinct at lambda=0.24, <= 10 min"):
        t0 = time.perf_counter()
        seq = augment_base(conway_guy_base(8), 24, "single")
        rep = verify(seq, PairConstraint.family(Fraction(24, 100)), engine="mitm")
        assert time.perf_counter() - t0 <= 600
        assert rep.distinct, f"collision {rep.witness} with sums {rep.witness_sums}"


def _random_instance(rng):
    while True:
        n = int(rng.integers(2, 19))
        k = int(rng.integers(1, 3))
        elems = [tuple(int(c) for c in rng.integers(1, 4097, size=k)) for _ in range(n)]
        kind = ("family", "pair_sum_cap", "shifted")[int(rng.integers(0, 3))]
        if kind == "family":
            lam = (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2), Fraction(3, 4), Fraction(1))
            con = PairConstraint.family(lam[int(rng.integers(0, len(lam)))])
        elif kind == "pair_sum_cap":
            con = PairConstraint.pair_sum_cap(int(rng.integers(2, n + 2)))
        else:
            # plant an offset that some small pair realizes, or a random one
            if rng.random() < 0.5:
                idx = rng.permutation(n)[:int(rng.integers(1, min(n, 4) + 1))]
                cut = int(rng.integers(0, len(idx) + 1))
                off = tuple(sum(elems[i][j] for i in idx[:cut]) - sum(elems[i][j] for i in idx[cut:])
                            for j in range(k))
            else:
                off = tuple(int(c) for c in rng.integers(-20000, 20000, size=k))
            con = PairConstraint.shifted(off, int(rng.integers(2, n + 2)))
        if exhaustive_count(n, con) <= 1 << 25:
            return Sequence(k, tuple(elems)), con


def test_c13_engine_equivalence():
    with criterion(13, "exhaustive and mitm agree on 500 random instances, n <= 18, <= 10 min"):
        t0 = time.perf_counter()
        rng = np.random.default_rng(20241015)
        collisions = 0
        for _ in range(500):
            seq, con = _random_instance(rng)
            a = verify(seq, con, engine="exhaustive")
            b = verify(seq, con, engine="mitm")
            assert (a.status, a.witness) == (b.status, b.witness), (seq, con, a, b)
            collisions += a.status == "collision"
        assert 0 < collisions < 500
        assert time.perf_counter() - t0 <= 600


def _run(argv):
    code = dispatch(argv)
    assert code == 0, argv
    return code


def test_c14_cli_determinism(workdir):
    with criterion(14, "every CLI path is digest-identical on re-run and repro passes"):
        paths = [
            ["construct", "--family", "powers2", "--n", "6", "--out", "p2.json"],
            ["construct", "--family", "tilde", "--n", "10", "--out", "tilde.json"],
            ["construct", "--family", "conway-guy", "--base-length", "8", "--out", "cg.json"],
            ["construct", "--family", "direct1", "--base", "cg.json", "--n", "24", "--out", "d1.json"],
            ["construct", "--family", "direct2", "--base-length", "1", "--n", "16", "--out", "d2.json"],
            ["construct", "--family", "lift", "--base", "p2.json", "--k", "2", "--out", "lift.json"],
            ["verify", "--input", "tilde.json", "--pair-cap", "5", "--out", "v1.json"],
            ["verify", "--input", "tilde.json", "--pair-cap", "6", "--engine", "mitm", "--out", "v2.json"],
            ["verify", "--input", "tilde.json", "--pair-cap", "9/2", "--shifted", "512", "--out", "v3.json"],
            ["verify", "--input", "lift.json", "--lambda", "1/2", "--out", "v4.json"],
            ["bounds", "--n", "40", "--k", "1", "--grid", "1/20:1:1/20", "--format", "csv", "--out", "b.csv"],
            ["bounds", "--n", "40", "--k", "2", "--lambda", "0.1", "--format", "json", "--out", "b.json"],
            ["search", "exact", "--n", "4", "--k", "1", "--lambda", "1", "--max-m", "10",
             "--golden", "g-exact.json", "--out", "se.json"],
            ["search", "random", "--n", "8", "--k", "2", "--lambda", "1/4", "--m", "300",
             "--seed", "7", "--golden", "g-rand.json", "--out", "sr.json"],
        ]
        for argv in paths:
            _run(argv)
            out = argv[argv.index("--out") + 1]
            first = Path(out).read_bytes()
            _run(argv)
            assert Path(out).read_bytes() == first, argv
            manifest = json.loads(Path(out + ".manifest.json").read_text())
            assert manifest["outputs"][out]
            assert dispatch(["repro", out + ".manifest.json"]) == 0, argv
        assert dispatch(["search", "random", "--n", "8", "--k", "2", "--lambda", "1/4",
                         "--m", "300"]) == 1
