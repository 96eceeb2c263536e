"""Variable maps with a lazy invertible linear transform instead of tagged
joins.

At an App every value of the left map becomes ``f_L(value)`` and every
value of the right map ``f_R(value)``, with keys in both combined by a
nonlinear "both" hash. Applying ``f_L`` to a whole map is O(1): the map keeps
a pending transform ``f`` (with its inverse) and stores ``f^-1(v)`` for a
logical value ``v``. Only the smaller map's entries are touched.

Map hash. XOR of nonlinear entry hashes cannot follow a lazy transform, so
the map hash here is an additive aggregate mod ``2^b``::

    agg = sum(w(k) * v_k + c(k))   with w(k) odd, c(k) random per name

Under ``v -> a*v + b`` for all entries the weighted sum ``S = sum w(k)*v_k``
becomes ``a*S + b*W`` with ``W = sum w(k)``, so whole-map transforms keep
the aggregate current in O(1). Per-entry updates adjust ``S``, ``W`` and
``C = sum c(k)`` by the entry's contribution, as XOR maps do.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from pyrsistent import PMap, pmap

from .expr import App, Expression, Lam, Name, Var, preorder
from .hashing import (HashContext, HashedSummary, HashedTree, OpCounter, Role, _mix,
                      hash_summary)


@dataclass(frozen=True)
class LinearFn:
    """``x -> a*x + b`` modulo ``2^width`` with ``a`` odd, carried with its
    inverse."""

    a: int
    b: int
    a_inv: int
    b_inv: int
    mask: int

    @classmethod
    def make(cls, a: int, b: int, width: int) -> "LinearFn":
        mask = (1 << width) - 1
        a &= mask
        b &= mask
        if a % 2 == 0:
            raise ValueError("a must be odd to be invertible modulo 2^width")
        a_inv = pow(a, -1, 1 << width)
        return cls(a, b, a_inv, (-a_inv * b) & mask, mask)

    @classmethod
    def identity(cls, width: int) -> "LinearFn":
        return cls(1, 0, 1, 0, (1 << width) - 1)

    def __call__(self, x: int) -> int:
        return (self.a * x + self.b) & self.mask

    def inverse(self) -> "LinearFn":
        return LinearFn(self.a_inv, self.b_inv, self.a, self.b, self.mask)


def lf_apply(f: LinearFn, x: int) -> int:
    return (f.a * x + f.b) & f.mask


def lf_compose(f: LinearFn, g: LinearFn) -> LinearFn:
    """``f . g``; the inverse is ``g^-1 . f^-1``."""
    m = f.mask
    return LinearFn((f.a * g.a) & m, (f.a * g.b + f.b) & m,
                    (g.a_inv * f.a_inv) & m, (g.a_inv * f.b_inv + g.b_inv) & m, m)


class LinearScheme:
    """Per-context constants of the linear backend: the fixed transforms and
    per-name weights."""

    def __init__(self, ctx: HashContext):
        self.ctx = ctx
        self.mask = ctx.mask
        w = ctx.width
        self.left = LinearFn.make(ctx.combine(Role.LIN_LEFT_A, 1) | 1, ctx.combine(Role.LIN_LEFT_B, 1), w)
        self.right = LinearFn.make(ctx.combine(Role.LIN_RIGHT_A, 1) | 1, ctx.combine(Role.LIN_RIGHT_B, 1), w)
        self.identity = LinearFn.identity(w)
        self._weights: dict[Name, tuple[int, int]] = {}

    def weights(self, n: Name) -> tuple[int, int]:
        wc = self._weights.get(n)
        if wc is None:
            h = self.ctx.name_hash(n)
            wc = self._weights[n] = (self.ctx.combine(Role.LIN_WEIGHT, 1, h) | 1,
                                     self.ctx.combine(Role.LIN_OFFSET, 1, h))
        return wc

    def both(self, left: int, right: int) -> int:
        return _mix(self.ctx.keys[Role.LIN_BOTH], self.mask, 1, (left, right))


@dataclass(frozen=True)
class LazyVarMap:
    scheme: LinearScheme = field(repr=False, compare=False)
    entries: PMap = field(default_factory=pmap)  # Name -> stored (pre-transform) value
    pending: Optional[LinearFn] = None
    sum_w: int = 0
    sum_wv: int = 0
    sum_c: int = 0

    @classmethod
    def empty(cls, scheme: LinearScheme) -> "LazyVarMap":
        return cls(scheme, pmap(), scheme.identity)

    @property
    def count(self) -> int:
        return len(self.entries)

    def __len__(self):
        return len(self.entries)

    @property
    def agg(self) -> int:
        return (self.sum_wv + self.sum_c) & self.scheme.mask

    def lookup(self, n: Name) -> Optional[int]:
        stored = self.entries.get(n)
        return None if stored is None else self.pending(stored)

    def items(self):
        """Logical ``(name, value)`` pairs."""
        f = self.pending
        return ((n, f(v)) for n, v in self.entries.items())

    def set(self, n: Name, value: int) -> "LazyVarMap":
        mask = self.scheme.mask
        w, c = self.scheme.weights(n)
        old = self.lookup(n)
        sum_w, sum_c, sum_wv = self.sum_w, self.sum_c, self.sum_wv
        if old is None:
            sum_w = (sum_w + w) & mask
            sum_c = (sum_c + c) & mask
        else:
            sum_wv -= w * old
        sum_wv = (sum_wv + w * value) & mask
        stored = lf_apply(self.pending.inverse(), value)
        return replace(self, entries=self.entries.set(n, stored),
                       sum_w=sum_w, sum_wv=sum_wv, sum_c=sum_c)

    def remove(self, n: Name) -> tuple["LazyVarMap", Optional[int]]:
        old = self.lookup(n)
        if old is None:
            return self, None
        mask = self.scheme.mask
        w, c = self.scheme.weights(n)
        return replace(self, entries=self.entries.remove(n),
                       sum_w=(self.sum_w - w) & mask,
                       sum_wv=(self.sum_wv - w * old) & mask,
                       sum_c=(self.sum_c - c) & mask), old

    def recompute_agg(self) -> int:
        total = 0
        for n, v in self.items():
            w, c = self.scheme.weights(n)
            total += w * v + c
        return total & self.scheme.mask


def lazy_map_all(f: LinearFn, m: LazyVarMap) -> LazyVarMap:
    """Apply ``f`` to every value of ``m`` in O(1)."""
    mask = m.scheme.mask
    return replace(m, pending=lf_compose(f, m.pending),
                   sum_wv=(f.a * m.sum_wv + f.b * m.sum_w) & mask)


def _lam(ctx, scheme, binder, body: HashedSummary, counter):
    vm, occ = body.varmap.remove(binder)
    if counter is not None:
        counter.remove += 1
    sz = body.struct_size + 1
    if occ is None:
        sh = _mix(ctx.keys[Role.SLAM], ctx.mask, sz, (0, 0, body.struct_hash))
    else:
        sh = _mix(ctx.keys[Role.SLAM], ctx.mask, sz, (1, occ, body.struct_hash))
    return HashedSummary(sh, body.struct_depth + 1, sz, vm)


def _app(ctx, scheme: LinearScheme, left: HashedSummary, right: HashedSummary, counter):
    m1, m2 = left.varmap, right.varmap
    left_bigger = m1.count >= m2.count
    if left_bigger:
        big, small, f_big, f_small = m1, m2, scheme.left, scheme.right
    else:
        big, small, f_big, f_small = m2, m1, scheme.right, scheme.left
    out = lazy_map_all(f_big, big)
    for n, v in small.items():
        old = big.lookup(n)
        if old is None:
            val = f_small(v)
        elif left_bigger:
            val = scheme.both(old, v)
        else:
            val = scheme.both(v, old)
        out = out.set(n, val)
    if counter is not None:
        counter.alter += small.count
    sz = 1 + left.struct_size + right.struct_size
    sh = _mix(ctx.keys[Role.SAPP], ctx.mask, sz, (left.struct_hash, right.struct_hash))
    return HashedSummary(sh, 1 + max(left.struct_depth, right.struct_depth), sz, out)


def _summaries(ctx: HashContext, e: Expression, counter: OpCounter = None):
    scheme = LinearScheme(ctx)
    empty = LazyVarMap.empty(scheme)
    nodes = preorder(e)
    out = [None] * len(nodes)
    stack: list[HashedSummary] = []
    for i in range(len(nodes) - 1, -1, -1):
        node = nodes[i]
        t = type(node)
        if t is Var:
            if counter is not None:
                counter.singleton += 1
            s = HashedSummary(ctx.svar, 1, 1, empty.set(node.name, ctx.here))
        elif t is Lam:
            s = _lam(ctx, scheme, node.binder, stack.pop(), counter)
        else:
            left = stack.pop()
            s = _app(ctx, scheme, left, stack.pop(), counter)
        out[i] = s
        stack.append(s)
    return out


def summarise_linear(ctx: HashContext, e: Expression, counter: OpCounter = None) -> HashedSummary:
    return _summaries(ctx, e, counter)[0]


def linear_hash_all(ctx: HashContext, e: Expression, counter: OpCounter = None) -> HashedTree:
    return HashedTree(e, [hash_summary(ctx, s) for s in _summaries(ctx, e, counter)], ctx)
