"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict with the measured numbers;
the lines are printed at the end of the pytest run (see conftest) and when
this file is run as a script.
"""

import math
import random
import sys
import time

import numpy as np
import pytest

from alphahash.baselines import debruijn_hash_all, locally_nameless_hash_all, structural_hash_all
from alphahash.expr import Var, node_paths, oracle_classes, partition_of, resolve, uniquify
from alphahash.hashing import (HashContext, OpCounter, Pos, Role, _mix, classes, hash_all,
                               vm_alter, vm_empty, vm_remove)
from alphahash.expr import Name
from alphahash.incremental import annotate, rewrite
from alphahash.lab import (bench, collide, gen_balanced, gen_unbalanced, loglog_slope, medians)
from alphahash.linear import LinearFn, lf_compose, linear_hash_all
from alphahash.summary_ref import rebuild_ref, summarise_ref
from alphahash.summary_tagged import rebuild_tagged, summarise_tagged
from alphahash.expr import alpha_equiv
from alphahash.vectors import CONFUSED_INDEX, RENAMED, SHIFTED_FREE

REPORT: dict[int, str] = {}


def report(criterion: int, ok: bool, detail: str):
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    REPORT[criterion] = line
    print(line)
    assert ok, line


def corpus(family, count=1000, max_n=300, seed=0):
    gen = {"balanced": gen_balanced, "unbalanced": gen_unbalanced}[family]
    rng = random.Random(f"{family}:{seed}")
    return [uniquify(gen(rng.getrandbits(32), rng.randint(1, max_n))) for _ in range(count)]


@pytest.fixture(scope="module")
def corpora():
    return {f: corpus(f) for f in ("balanced", "unbalanced")}


def test_1_oracle_equivalence(corpora):
    ctx = HashContext(width=64)
    t0 = time.perf_counter()
    mismatches = 0
    for exprs in corpora.values():
        for e in exprs:
            got = partition_of(classes(hash_all(ctx, e)).values())
            mismatches += got != partition_of(oracle_classes(e))
    secs = time.perf_counter() - t0
    report(1, mismatches == 0 and secs < 120,
           f"{mismatches} mismatches over 2x1000 expressions (n <= 300), {secs:.1f}s")


def test_2_invertibility(corpora):
    failures = {"reference": 0, "tagged": 0}
    for exprs in corpora.values():
        for e in exprs:
            failures["reference"] += not alpha_equiv(rebuild_ref(summarise_ref(e)), e)
            failures["tagged"] += not alpha_equiv(rebuild_tagged(summarise_tagged(e)), e)
    report(2, not any(failures.values()),
           f"roundtrip failures: reference {failures['reference']}, tagged {failures['tagged']}")


def same(fn, ctx, vector):
    d = dict(fn(ctx, vector.expr).items())
    return d[vector.left] == d[vector.right]


def test_3_baseline_truth_table(corpora):
    ctx = HashContext()
    checks = {
        "structural false negative": not same(structural_hash_all, ctx, RENAMED),
        "de Bruijn false negative": not same(debruijn_hash_all, ctx, SHIFTED_FREE),
        "de Bruijn false positive": same(debruijn_hash_all, ctx, CONFUSED_INDEX),
        "locally nameless = oracle": all(
            partition_of(classes(locally_nameless_hash_all(ctx, e)).values())
            == partition_of(oracle_classes(e))
            for e in [RENAMED.expr, SHIFTED_FREE.expr, CONFUSED_INDEX.expr]
            + corpora["balanced"][:200] + corpora["unbalanced"][:200]),
    }
    report(3, all(checks.values()),
           ", ".join(f"{k}: {'yes' if v else 'no'}" for k, v in checks.items()))


# Locally nameless is quadratic: at 2^17 one run would take over half an
# hour here, so it is timed up to 2^14 and its slope fitted on that range.
LN_CAP = 2**14


def test_4_complexity_slopes():
    t0 = time.perf_counter()
    sizes = [2**k for k in range(10, 18)]
    recs = bench(["alpha", "locally-nameless"], "unbalanced", sizes, reps=3, seed=1,
                 caps={"locally-nameless": LN_CAP})
    secs = time.perf_counter() - t0
    med = medians(recs)
    ours = loglog_slope([(n, t) for (a, n), t in med.items() if a == "alpha"])
    ln = loglog_slope([(n, t) for (a, n), t in med.items() if a == "locally-nameless"])
    speedup = med[("locally-nameless", 2**14)] / med[("alpha", 2**14)]
    ok = ours <= 1.35 and ln >= 1.8 and speedup >= 10 and secs <= 600
    report(4, ok, f"slope ours {ours:.2f} (2^10..2^17), locally nameless {ln:.2f} "
                  f"(2^10..2^14), speedup at 2^14 {speedup:.0f}x, bench {secs:.0f}s")


def test_5_collision_lab():
    pairs = 1 << 16
    sizes = [128, 512, 1024, 4096]
    per = {}
    for mode in ("random", "adversarial"):
        for n in sizes:
            per[mode, n] = collide(HashContext(seed=1, width=16), mode, n, pairs).per_65536
    random_ok = all(per["random", n] <= 10 for n in sizes)
    bound_ok = all(per["adversarial", n] <= 10 * n for n in sizes)
    wins = 0
    for rep in range(1, 6):
        ctx = HashContext(seed=100 + rep, width=16)
        r = collide(ctx, "random", 4096, pairs).collisions
        a = collide(ctx, "adversarial", 4096, pairs).collisions
        wins += a > r
    report(5, random_ok and bound_ok and wins >= 4,
           "random per 2^16: " + ", ".join(f"n={n}: {per['random', n]:.0f}" for n in sizes)
           + "; adversarial per 2^16: "
           + ", ".join(f"n={n}: {per['adversarial', n]:.0f}" for n in sizes)
           + f"; adversarial > random at 4096 in {wins}/5 repetitions")


def test_6_xor_map_oracle():
    ctx = HashContext()
    rng = random.Random(6)
    names = [Name(f"k{i}") for i in range(16)]
    bad = 0
    m = vm_empty()
    for _ in range(10_000):
        for _ in range(rng.randint(1, 8)):
            n = rng.choice(names)
            if rng.random() < 0.35:
                m, _ = vm_remove(ctx, n, m)
            else:
                p = Pos(rng.getrandbits(64), rng.randint(1, 20))
                m = vm_alter(ctx, lambda old, p=p: p, n, m)
        bad += m.agg != m.recompute_agg(ctx)

    # Set hashes at b=8: XOR of entry hashes over two random sets of
    # (name, position) entries that share some entries but are not equal.
    gen = np.random.default_rng(8)
    ctx8 = HashContext(width=8)
    key = ctx8.keys[Role.ENTRY]
    name_h = np.array([ctx8.name_hash(Name(f"s{i}")) for i in range(64)], dtype=np.uint64)
    total = 1_000_000
    hits = 0
    for k in range(1, 9):
        cnt = total // 8
        shared = gen.integers(0, k, size=cnt)
        def entries(m):
            idx = gen.integers(0, 64, size=(cnt, m))
            pos = gen.integers(0, 2**63, size=(cnt, m), dtype=np.uint64)
            return idx, pos
        ia, pa = entries(k)
        ib, pb = entries(k)
        # Copy the first `shared` entries of A into B; B's last entry gets an
        # odd position while A's positions are even, so the sets always differ.
        cols = np.arange(k)[None, :] < shared[:, None]
        ib = np.where(cols, ia, ib)
        pa = pa * np.uint64(2)
        pb = np.where(cols, pa, pb * np.uint64(2))
        pb[:, -1] |= np.uint64(1)
        ha = np.zeros(cnt, dtype=np.uint64)
        hb = np.zeros(cnt, dtype=np.uint64)
        for j in range(k):
            ha = ha ^ _mix(key, 0xFF, 3, (name_h[ia[:, j]], pa[:, j]))
            hb = hb ^ _mix(key, 0xFF, 3, (name_h[ib[:, j]], pb[:, j]))
        hits += int(np.count_nonzero(ha == hb))
    n = (total // 8) * 8
    rate = hits / n
    p = 2 ** -8
    sigma = math.sqrt(p * (1 - p) / n)
    report(6, bad == 0 and abs(rate - p) <= 3 * sigma,
           f"{bad} aggregate mismatches over 10^4 sequences; set-hash collision rate "
           f"{rate:.6f} vs {p:.6f} (3 sigma = {3 * sigma:.6f})")


def test_7_incrementality():
    ctx = HashContext()
    means = {}
    exact = True
    for k in (10, 12, 14):
        e = gen_balanced(7, 2**k)
        t = annotate(ctx, e)
        leaves = [p for p in node_paths(e) if isinstance(resolve(e, p), Var)]
        rng = random.Random(k)
        total = 0
        for i in range(32):
            p = rng.choice(leaves)
            c = OpCounter()
            t2 = rewrite(ctx, t, p, Var(f"new{i}"), c)
            total += c.total
            if i < 4:
                exact = exact and t2.hashes == annotate(ctx, t2.expr).hashes
        means[k] = total / 32
    c = means[10] / 10**2
    extrapolated = c * 14**2
    report(7, exact and means[14] <= 3 * extrapolated,
           f"scratch-equal: {exact}; mean map ops per leaf rewrite "
           + ", ".join(f"2^{k}: {v:.1f}" for k, v in means.items())
           + f"; 2^14 vs c*(log n)^2 extrapolation {means[14] / extrapolated:.2f}x (limit 3x)")


def test_8_backend_agreement():
    ctx = HashContext(width=64)
    rng = random.Random(8)
    mismatches = 0
    for i in range(500):
        gen = gen_balanced if i % 2 else gen_unbalanced
        e = uniquify(gen(rng.getrandbits(32), rng.randint(1, 300)))
        mismatches += (partition_of(classes(linear_hash_all(ctx, e)).values())
                       != partition_of(classes(hash_all(ctx, e)).values()))

    # Linear-function algebra at b=8, evaluated independently with numpy
    # over every odd a, every b and every x.
    x = np.arange(256, dtype=np.int64)
    algebra_bad = 0
    fns = [LinearFn.make(a, b, 8) for a in range(1, 256, 2) for b in range(256)]
    A = np.array([f.a for f in fns])[:, None]
    B = np.array([f.b for f in fns])[:, None]
    Ai = np.array([f.a_inv for f in fns])[:, None]
    Bi = np.array([f.b_inv for f in fns])[:, None]
    fx = (A * x + B) % 256
    algebra_bad += int(np.count_nonzero((Ai * fx + Bi) % 256 != x))
    algebra_bad += sum(fns[i](int(v)) != int(fx[i, v]) for i in range(0, len(fns), 97) for v in x)
    ident = LinearFn.identity(8)
    grng = random.Random(88)
    for _ in range(2000):
        f, g = grng.choice(fns), grng.choice(fns)
        fg = lf_compose(f, g)
        expect = (f.a * ((g.a * x + g.b) % 256) + f.b) % 256
        algebra_bad += int(np.count_nonzero(np.array([fg(int(v)) for v in x]) != expect))
        algebra_bad += lf_compose(f, f.inverse()) != ident or lf_compose(ident, g) != g
    report(8, mismatches == 0 and algebra_bad == 0,
           f"{mismatches} partition mismatches over 500 expressions; {algebra_bad} algebra "
           f"failures over {len(fns)} functions x 256 values")


def test_9_small_to_large_bound():
    ctx = HashContext()
    C = 2.0  # alters <= n log2 n by the small-to-large argument, plus <= n removes
    worst = 0.0
    rows = []
    for family, gen in (("balanced", gen_balanced), ("unbalanced", gen_unbalanced)):
        for k in range(8, 17, 2):
            n = 2**k
            c = OpCounter()
            hash_all(ctx, gen(9, n), c)
            ratio = c.alter_remove / (n * math.log2(n))
            worst = max(worst, ratio)
            rows.append(f"{family} 2^{k}: {ratio:.3f}")
    report(9, worst <= C, f"max (alter+remove)/(n log2 n) = {worst:.3f} <= C = {C}; "
                          + ", ".join(rows))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
