"""Hashing e-summaries: structures and position trees are represented only by
their hash codes, and a variable map's hash is the XOR of its entry hashes.

All combiners are keyed by role and salted with the size of the object being
built. The arithmetic is written so that it runs unchanged on Python ints
and on numpy ``uint64`` arrays; a context built with :meth:`HashContext.batch`
evaluates one hash per seed in a single pass, which the collision experiments
rely on.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

from pyrsistent import PMap, pmap

from .expr import App, Expression, Lam, Name, Var, node_paths, preorder

__all__ = [
    "Role", "HashContext", "OpCounter", "Pos", "HashedVarMap", "HashedSummary",
    "HashedTree", "combine", "name_hash", "entry_hash", "vm_empty",
    "vm_singleton", "vm_alter", "vm_remove", "hash_summary", "summary_var",
    "summary_lam", "summary_app", "hash_all", "classes", "to_hex",
    "root_summary", "root_hash", "DEFAULT_SEED", "WIDTHS",
]

M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_C1 = 0xBF58476D1CE4E5B9
_C2 = 0x94D049BB133111EB

DEFAULT_SEED = 0x5EED
WIDTHS = (8, 16, 32, 64)


class Role(enum.IntEnum):
    NAME = 0
    SVAR = 1
    SLAM = 2
    SAPP = 3
    PT_HERE = 4
    PT_JOIN = 5
    ENTRY = 6
    TOP = 7
    # baselines
    ST_VAR = 8
    ST_LAM = 9
    ST_APP = 10
    DB_BOUND = 11
    DB_LAM = 12
    DB_APP = 13
    # linear backend
    LIN_BOTH = 14
    LIN_LEFT_A = 15
    LIN_LEFT_B = 16
    LIN_RIGHT_A = 17
    LIN_RIGHT_B = 18
    LIN_WEIGHT = 19
    LIN_OFFSET = 20


def _fmix(h):
    h = h ^ (h >> 30)
    h = (h * _C1) & M64
    h = h ^ (h >> 27)
    h = (h * _C2) & M64
    return h ^ (h >> 31)


def _mix(key, mask, size, inputs):
    h = key ^ ((size * _GOLDEN) & M64)
    for x in inputs:
        h = ((h ^ x) * _C1) & M64
        h = h ^ (h >> 31)
    return _fmix(h) & mask


def _text_digest(text: str) -> int:
    return int.from_bytes(hashlib.blake2b(text.encode(), digest_size=8).digest(), "little")


class HashContext:
    """A seeded family of keyed combiners producing ``width``-bit codes.

    Identical ``(seed, width)`` pairs give identical hashes on every run and
    platform. Names hash through their text, never through interning ids.
    """

    def __init__(self, seed: int = DEFAULT_SEED, width: int = 64):
        if width not in WIDTHS:
            raise ValueError(f"hash width must be one of {WIDTHS}, got {width}")
        self.seed = seed
        self.width = width
        self.mask = (1 << width) - 1
        self.batched = False
        self.keys = [_fmix((seed + (int(r) + 1) * _GOLDEN) & M64) for r in Role]
        self._names: dict[Name, object] = {}
        self._init_constants()

    @classmethod
    def batch(cls, seeds, width: int = 64) -> "HashContext":
        """One context evaluating every hash for all ``seeds`` at once; hash
        codes become ``uint64`` arrays with one lane per seed."""
        import numpy as np

        seeds = np.asarray(seeds, dtype=np.uint64)
        self = cls.__new__(cls)
        if width not in WIDTHS:
            raise ValueError(f"hash width must be one of {WIDTHS}, got {width}")
        self.seed = seeds
        self.width = width
        self.mask = (1 << width) - 1
        self.batched = True
        self.keys = [_fmix(seeds + np.uint64(((int(r) + 1) * _GOLDEN) & M64)) for r in Role]
        self._names = {}
        self._init_constants()
        return self

    def lane(self, i: int) -> "HashContext":
        """The scalar context for one seed of a batched context."""
        return HashContext(int(self.seed[i]), self.width)

    def _init_constants(self):
        self.svar = self.combine(Role.SVAR, 1)
        self.here = self.combine(Role.PT_HERE, 1)

    def combine(self, role: Role, size: int, *inputs):
        return _mix(self.keys[role], self.mask, size, inputs)

    def name_hash(self, n: Name):
        h = self._names.get(n)
        if h is None:
            h = self._names[n] = self.combine(Role.NAME, 1, _text_digest(n.text))
        return h

    def hex(self, h: int) -> str:
        return format(int(h), f"0{self.width // 4}x")

    def __repr__(self):
        return f"HashContext(seed={self.seed!r}, width={self.width})"


def combine(ctx: HashContext, role: Role, size: int, inputs) -> int:
    return _mix(ctx.keys[role], ctx.mask, size, inputs)


def name_hash(ctx: HashContext, n: Name):
    return ctx.name_hash(n)


def to_hex(ctx: HashContext, h) -> str:
    return ctx.hex(h)


@dataclass
class OpCounter:
    """Counts variable-map operations, split the way the complexity lemmas
    split them."""

    singleton: int = 0
    alter: int = 0
    remove: int = 0

    @property
    def alter_remove(self) -> int:
        return self.alter + self.remove

    @property
    def total(self) -> int:
        return self.singleton + self.alter + self.remove


# ---------------------------------------------------------------------------
# Position trees and variable maps

class Pos(NamedTuple):
    """A position tree, held as its hash and its constructor count."""

    hash: int
    size: int


def here(ctx: HashContext) -> Pos:
    return Pos(ctx.here, 1)


def join(ctx: HashContext, tag: int, big: Optional[Pos], small: Pos) -> Pos:
    if big is None:
        sz = 1 + small.size
        return Pos(_mix(ctx.keys[Role.PT_JOIN], ctx.mask, sz, (tag, 0, 0, small.hash)), sz)
    sz = 1 + big.size + small.size
    return Pos(_mix(ctx.keys[Role.PT_JOIN], ctx.mask, sz, (tag, 1, big.hash, small.hash)), sz)


def entry_hash(ctx: HashContext, n: Name, pos: Pos):
    return _mix(ctx.keys[Role.ENTRY], ctx.mask, pos.size + 1, (ctx.name_hash(n), pos.hash))


@dataclass(frozen=True)
class HashedVarMap:
    entries: PMap = field(default_factory=pmap)
    agg: int = 0

    @property
    def count(self) -> int:
        return len(self.entries)

    def __len__(self):
        return len(self.entries)

    def get(self, n: Name) -> Optional[Pos]:
        return self.entries.get(n)

    def recompute_agg(self, ctx: HashContext) -> int:
        """XOR of all entry hashes, from scratch."""
        h = 0
        for n, pos in self.entries.items():
            h = h ^ entry_hash(ctx, n, pos)
        return h


def vm_empty() -> HashedVarMap:
    return HashedVarMap()


def vm_singleton(ctx: HashContext, n: Name, pos: Pos, counter: OpCounter = None) -> HashedVarMap:
    if counter is not None:
        counter.singleton += 1
    return HashedVarMap(pmap({n: pos}), entry_hash(ctx, n, pos))


def vm_alter(ctx: HashContext, f: Callable[[Optional[Pos]], Pos], n: Name,
             m: HashedVarMap, counter: OpCounter = None) -> HashedVarMap:
    if counter is not None:
        counter.alter += 1
    old = m.entries.get(n)
    new = f(old)
    agg = m.agg ^ entry_hash(ctx, n, new)
    if old is not None:
        agg = agg ^ entry_hash(ctx, n, old)
    return HashedVarMap(m.entries.set(n, new), agg)


def vm_remove(ctx: HashContext, n: Name, m: HashedVarMap,
              counter: OpCounter = None) -> tuple[HashedVarMap, Optional[Pos]]:
    if counter is not None:
        counter.remove += 1
    old = m.entries.get(n)
    if old is None:
        return m, None
    return HashedVarMap(m.entries.remove(n), m.agg ^ entry_hash(ctx, n, old)), old


# ---------------------------------------------------------------------------
# Summaries

@dataclass(frozen=True)
class HashedSummary:
    struct_hash: int
    struct_depth: int
    struct_size: int
    varmap: HashedVarMap


def hash_summary(ctx: HashContext, s: HashedSummary):
    return _mix(ctx.keys[Role.TOP], ctx.mask, s.struct_size, (s.struct_hash, s.varmap.agg))


def _slam_hash(ctx, size, occ: Optional[Pos], body_hash):
    if occ is None:
        return _mix(ctx.keys[Role.SLAM], ctx.mask, size, (0, 0, body_hash))
    return _mix(ctx.keys[Role.SLAM], ctx.mask, size, (1, occ.hash, body_hash))


def summary_var(ctx: HashContext, n: Name, counter: OpCounter = None) -> HashedSummary:
    return HashedSummary(ctx.svar, 1, 1, vm_singleton(ctx, n, here(ctx), counter))


def summary_lam(ctx: HashContext, binder: Name, body: HashedSummary,
                counter: OpCounter = None) -> HashedSummary:
    vm, occ = vm_remove(ctx, binder, body.varmap, counter)
    sz = body.struct_size + 1
    return HashedSummary(_slam_hash(ctx, sz, occ, body.struct_hash), body.struct_depth + 1, sz, vm)


def summary_app(ctx: HashContext, left: HashedSummary, right: HashedSummary,
                counter: OpCounter = None) -> HashedSummary:
    """Fold the smaller child map into the larger one, stamping each folded
    entry with a join tagged by this node's depth. Ties count as left-bigger."""
    left_bigger = left.varmap.count >= right.varmap.count
    depth = 1 + max(left.struct_depth, right.struct_depth)
    sz = 1 + left.struct_size + right.struct_size
    sh = _mix(ctx.keys[Role.SAPP], ctx.mask, sz,
              (int(left_bigger), left.struct_hash, right.struct_hash))
    big, small = (left.varmap, right.varmap) if left_bigger else (right.varmap, left.varmap)
    vm = big
    for n, p in small.entries.items():
        vm = vm_alter(ctx, lambda mp, p=p: join(ctx, depth, mp, p), n, vm, counter)
    return HashedSummary(sh, depth, sz, vm)


# ---------------------------------------------------------------------------
# Whole-expression pass

@dataclass
class HashedTree:
    """An expression with one hash code per node, listed in preorder."""

    expr: Expression
    hashes: list
    ctx: HashContext

    @property
    def root(self):
        return self.hashes[0]

    def paths(self) -> list[str]:
        return node_paths(self.expr)

    def items(self) -> list[tuple[str, object]]:
        return list(zip(self.paths(), self.hashes))


def hash_all(ctx: HashContext, e: Expression, counter: OpCounter = None) -> HashedTree:
    """Hash every subexpression of ``e`` modulo alpha-equivalence.

    This is the production pass: the same summaries as :func:`summary_app`
    and friends, but child maps are plain dicts that the parent consumes and
    mutates in place, since no intermediate summary outlives its parent.
    Map values are ``(pos_hash, pos_size, entry_hash)``. Binders must be
    unique.
    """
    return HashedTree(e, _hash_pass(ctx, e, counter, True), ctx)


def root_hash(ctx: HashContext, e: Expression, counter: OpCounter = None):
    """The hash of ``e`` alone; same value as ``hash_all(ctx, e).root``."""
    return _hash_pass(ctx, e, counter, False)


def _hash_pass(ctx, e, counter, every):
    nodes = preorder(e)
    n = len(nodes)
    hashes = [0] * n
    mask = ctx.mask
    k_slam, k_sapp, k_join, k_entry, k_top = (
        ctx.keys[Role.SLAM], ctx.keys[Role.SAPP], ctx.keys[Role.PT_JOIN],
        ctx.keys[Role.ENTRY], ctx.keys[Role.TOP])
    svar, here_h = ctx.svar, ctx.here
    name_hash = ctx.name_hash
    mix = _mix
    # Hash codes may be numpy lanes, so XOR is never applied in place.
    # Children sit after their parent in preorder, so walking backwards with a
    # value stack sees the arg summary pushed before the fun summary.
    stack: list = []
    singles = removes = alters = 0
    for i in range(n - 1, -1, -1):
        node = nodes[i]
        t = type(node)
        if t is Var:
            v = node.name
            eh = mix(k_entry, mask, 2, (name_hash(v), here_h))
            s = (svar, 1, 1, {v: (here_h, 1, eh)}, eh)
            singles += 1
        elif t is Lam:
            sh, d, sz, vm, agg = stack.pop()
            sz += 1
            occ = vm.pop(node.binder, None)
            removes += 1
            if occ is None:
                sh = mix(k_slam, mask, sz, (0, 0, sh))
            else:
                agg = agg ^ occ[2]
                sh = mix(k_slam, mask, sz, (1, occ[0], sh))
            s = (sh, d + 1, sz, vm, agg)
        else:
            sh1, d1, sz1, vm1, agg1 = stack.pop()
            sh2, d2, sz2, vm2, agg2 = stack.pop()
            sz = 1 + sz1 + sz2
            d = 1 + (d1 if d1 > d2 else d2)
            if len(vm1) >= len(vm2):
                sh = mix(k_sapp, mask, sz, (1, sh1, sh2))
                big, small, agg = vm1, vm2, agg1
            else:
                sh = mix(k_sapp, mask, sz, (0, sh1, sh2))
                big, small, agg = vm2, vm1, agg2
            alters += len(small)
            for v, (p, psz, _) in small.items():
                old = big.get(v)
                if old is None:
                    jsz = 1 + psz
                    j = mix(k_join, mask, jsz, (d, 0, 0, p))
                else:
                    agg = agg ^ old[2]
                    jsz = 1 + old[1] + psz
                    j = mix(k_join, mask, jsz, (d, 1, old[0], p))
                eh = mix(k_entry, mask, jsz + 1, (name_hash(v), j))
                agg = agg ^ eh
                big[v] = (j, jsz, eh)
            s = (sh, d, sz, big, agg)
        if every:
            hashes[i] = mix(k_top, mask, s[2], (s[0], s[4]))
        stack.append(s)
    if counter is not None:
        counter.singleton += singles
        counter.alter += alters
        counter.remove += removes
    if every:
        return hashes
    s = stack[0]
    return mix(k_top, mask, s[2], (s[0], s[4]))


def root_summary(ctx: HashContext, e: Expression) -> HashedSummary:
    """The persistent-map summary of ``e``, built with the functional map
    operations (slower than :func:`hash_all`, used for cross-checks)."""
    values: list[HashedSummary] = []
    for node in reversed(preorder(e)):
        t = type(node)
        if t is Var:
            values.append(summary_var(ctx, node.name))
        elif t is Lam:
            values.append(summary_lam(ctx, node.binder, values.pop()))
        else:
            left = values.pop()
            values.append(summary_app(ctx, left, values.pop()))
    return values[0]


def classes(tree: HashedTree) -> dict[object, list[str]]:
    """Group node paths by hash code; groups keep preorder."""
    groups: dict[object, list[str]] = {}
    for path, h in zip(tree.paths(), tree.hashes):
        groups.setdefault(h, []).append(path)
    return groups
