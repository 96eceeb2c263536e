"""Expression generators, the collision experiment and the timing harness."""

from __future__ import annotations

import csv
import gc
import itertools
import random
import statistics
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from .baselines import ALGORITHMS as BASELINES
from .expr import App, Expression, Lam, Name, Var, alpha_equiv
from .hashing import M64, HashContext, hash_all, root_hash
from .linear import linear_hash_all

FREE = Name("free")


def _binder_names(prefix: str = "x"):
    return (Name(f"{prefix}{k}") for k in itertools.count())


def gen_balanced(seed: int, n: int) -> Expression:
    """A random expression of exactly ``n`` nodes, roughly balanced.

    Each internal step is a Lam or an App with equal probability; App splits
    the remaining budget within the middle third. Every Lam gets a fresh
    binder and leaves pick uniformly among the binders in scope, falling back
    to a single free variable at top level.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    fresh = _binder_names()
    work: list = [(n, ())]
    values: list[Expression] = []
    while work:
        item = work.pop()
        if item is None:
            a = values.pop()
            values.append(App(values.pop(), a))
            continue
        if isinstance(item, Name):
            values.append(Lam(item, values.pop()))
            continue
        budget, scope = item
        if budget == 1:
            values.append(Var(rng.choice(scope) if scope else FREE))
        elif budget == 2 or rng.random() < 0.5:
            x = next(fresh)
            work.append(x)
            work.append((budget - 1, scope + (x,)))
        else:
            rest = budget - 1
            left = rng.randint(max(1, rest // 3), max(1, min(rest - 1, (2 * rest) // 3)))
            work.append(None)
            work.append((rest - left, scope))
            work.append((left, scope))
    return values[0]


def _spine(rng: random.Random, budget: int, fresh) -> tuple[list, list[Name]]:
    """Steps of a spine-heavy context using ``budget`` nodes, outermost first.

    Steps are ("lam", binder) or ("app", side, leaf_var); leaves use binders
    already in scope above them.
    """
    steps = []
    scope: list[Name] = []
    while budget > 0:
        if budget >= 2 and rng.random() < 0.5:
            leaf = scope[rng.randrange(len(scope))] if scope else FREE
            steps.append(("app", rng.random() < 0.5, leaf))
            budget -= 2
        else:
            x = next(fresh)
            scope.append(x)
            steps.append(("lam", x))
            budget -= 1
    return steps, scope


def _wrap(steps: list, e: Expression) -> Expression:
    for step in reversed(steps):
        if step[0] == "lam":
            e = Lam(step[1], e)
        elif step[1]:
            e = App(e, Var(step[2]))
        else:
            e = App(Var(step[2]), e)
    return e


def gen_unbalanced(seed: int, n: int) -> Expression:
    """A spine of ``n`` nodes: nested lambdas and applications of the spine
    to a single variable, on either side. Depth is at least ``n / 2``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    steps, scope = _spine(rng, n - 1, _binder_names())
    leaf = scope[rng.randrange(len(scope))] if scope else FREE
    return _wrap(steps, Var(leaf))


def adversarial_bases(x: Name) -> tuple[Expression, Expression]:
    e1 = Lam(x, App(Var(x), App(Var(x), Var(x))))
    e2 = Lam(x, App(App(Var(x), Var(x)), Var(x)))
    return e1, e2


def gen_adversarial_pair(seed: int, n: int) -> tuple[Expression, Expression]:
    """Two closed six-node expressions that are not alpha-equivalent, wrapped
    in the same random spine of Lam and App nodes up to ``n`` nodes."""
    if n < 9:
        raise ValueError("adversarial pairs need n >= 9")
    rng = random.Random(seed)
    fresh = _binder_names()
    steps, _ = _spine(rng, n - 6, fresh)
    e1, e2 = adversarial_bases(next(fresh))
    return _wrap(steps, e1), _wrap(steps, e2)


FAMILIES: dict[str, Callable[[int, int], Expression]] = {
    "balanced": gen_balanced,
    "unbalanced": gen_unbalanced,
}


# ---------------------------------------------------------------------------
# Collisions

@dataclass
class CollideResult:
    mode: str
    width: int
    n: int
    pairs: int
    collisions: int

    @property
    def per_65536(self) -> float:
        return self.collisions * 65536 / self.pairs if self.pairs else 0.0

    def row(self) -> dict:
        return {"mode": self.mode, "width": self.width, "n": self.n, "pairs": self.pairs,
                "collisions": self.collisions,
                "collisions_per_65536": f"{self.per_65536:.3f}"}


COLLIDE_FIELDS = ["mode", "width", "n", "pairs", "collisions", "collisions_per_65536"]


def _expression_pair(mode: str, n: int, seed: int) -> tuple[Expression, Expression]:
    if mode == "adversarial":
        return gen_adversarial_pair(seed, n)
    if mode != "random":
        raise ValueError(f"unknown collision mode {mode!r}")
    rng = random.Random(seed)
    while True:
        a = gen_balanced(rng.getrandbits(63), n)
        b = gen_balanced(rng.getrandbits(63), n)
        if not alpha_equiv(a, b):
            return a, b


def collide(ctx: HashContext, mode: str, n: int, pairs: int, lanes: int = 16384) -> CollideResult:
    """Count root-hash collisions over ``pairs`` (expression pair, seed) samples.

    Each expression pair is hashed under ``lanes`` independent seeds at once,
    so ``pairs`` samples use ``ceil(pairs / lanes)`` expression pairs. Seeds
    and expressions are derived from ``ctx.seed``; ``ctx.width`` sets the
    hash width. Random mode never counts an alpha-equivalent pair.
    """
    import numpy as np

    base = int(ctx.seed) & M64
    collisions = 0
    done = 0
    k = 0
    while done < pairs:
        m = min(lanes, pairs - done)
        seeds = (np.arange(done, done + m, dtype=np.uint64)
                 + np.uint64((base * 0x9E3779B97F4A7C15) & M64))
        batch = HashContext.batch(seeds, ctx.width)
        a, b = _expression_pair(mode, n, random.Random(f"{base}:{mode}:{n}:{k}").getrandbits(63))
        collisions += int(np.count_nonzero(root_hash(batch, a) == root_hash(batch, b)))
        done += m
        k += 1
    return CollideResult(mode, ctx.width, n, pairs, collisions)


def write_collide_csv(results: Iterable[CollideResult], out) -> None:
    w = csv.DictWriter(out, fieldnames=COLLIDE_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in results:
        w.writerow(r.row())


# ---------------------------------------------------------------------------
# Timing

ALGOS: dict[str, Callable] = {
    "alpha": hash_all,
    "alpha-linear": linear_hash_all,
    **BASELINES,
}

BENCH_FIELDS = ["algo", "family", "n", "rep", "nanos"]


@dataclass(frozen=True)
class BenchRecord:
    algo: str
    family: str
    n: int
    rep: int
    nanos: int


def bench(algos: Sequence[str], family: str, sizes: Sequence[int], reps: int = 5,
          seed: int = 0, caps: Optional[dict[str, int]] = None, warmup: int = 1,
          ctx: Optional[HashContext] = None) -> list[BenchRecord]:
    """Time annotating every node of one generated expression per size.

    Expressions are built before timing starts; class extraction is not
    timed. ``caps`` bounds the largest size run for an algorithm. GC is off
    while timing.
    """
    ctx = ctx or HashContext()
    gen = FAMILIES[family]
    caps = caps or {}
    for a in algos:
        if a not in ALGOS:
            raise ValueError(f"unknown algorithm {a!r}")
    records = []
    for n in sizes:
        e = gen(seed, n)
        for a in algos:
            if n > caps.get(a, n):
                continue
            fn = ALGOS[a]
            for _ in range(warmup):
                fn(ctx, gen(seed + 1, min(n, 256)))
            for rep in range(reps):
                gc_was = gc.isenabled()
                gc.disable()
                try:
                    t0 = time.perf_counter_ns()
                    fn(ctx, e)
                    t1 = time.perf_counter_ns()
                finally:
                    if gc_was:
                        gc.enable()
                records.append(BenchRecord(a, family, n, rep, t1 - t0))
    return records


def medians(records: Iterable[BenchRecord]) -> dict[tuple[str, int], float]:
    """Median nanos per ``(algo, n)``."""
    groups: dict[tuple[str, int], list[int]] = {}
    for r in records:
        groups.setdefault((r.algo, r.n), []).append(r.nanos)
    return {k: statistics.median(v) for k, v in groups.items()}


def loglog_slope(points: Iterable[tuple[float, float]]) -> float:
    """Least-squares slope of log(y) against log(x)."""
    import numpy as np

    xs, ys = zip(*points)
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


def write_bench_csv(records: Iterable[BenchRecord], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(BENCH_FIELDS)
    for r in records:
        w.writerow([r.algo, r.family, r.n, r.rep, r.nanos])
