"""Per-node summaries kept alive so that a subtree replacement only
recomputes the new subtree and the path back to the root.

Summaries use persistent maps, so a parent's map shares structure with its
bigger child's map instead of consuming it. Rewriting returns a new tree;
every node off the spine is the same object as before.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from pyrsistent import PSet, pset

from .expr import App, Expression, Lam, Name, Var, all_names, binders, uniquify
from .hashing import (HashContext, HashedSummary, OpCounter, hash_summary, summary_app,
                      summary_lam, summary_var)


class FreshnessError(ValueError):
    """A replacement would reuse a name already present in the tree."""


@dataclass(frozen=True, eq=False)
class ANode:
    expr: Expression
    children: tuple  # () for Var, (body,) for Lam, (fun, arg) for App
    summary: HashedSummary
    hash: int


@dataclass(frozen=True, eq=False)
class AnnotatedExpr:
    root: ANode
    names: PSet  # every name in the expression; replacement binders must avoid these
    ctx: HashContext

    @property
    def expr(self) -> Expression:
        return self.root.expr

    def nodes(self) -> list[tuple[str, ANode]]:
        """Every annotated node with its path, in preorder."""
        out = []
        stack = [("", self.root)]
        while stack:
            path, node = stack.pop()
            out.append((path, node))
            ch = node.children
            if len(ch) == 1:
                stack.append((path + "b", ch[0]))
            elif len(ch) == 2:
                stack.append((path + "a", ch[1]))
                stack.append((path + "f", ch[0]))
        return out

    @property
    def hashes(self) -> list:
        return [n.hash for _, n in self.nodes()]

    def items(self) -> list[tuple[str, int]]:
        return [(p, n.hash) for p, n in self.nodes()]

    def node_at(self, path: str) -> ANode:
        return _walk(self.root, path)[-1]


def _annotate_nodes(ctx: HashContext, e: Expression, counter: OpCounter = None) -> ANode:
    work: list = [e]
    values: list[ANode] = []
    # Expressions are visited first, then revisited (wrapped in a tuple) once
    # their children are on the value stack.
    while work:
        item = work.pop()
        if type(item) is tuple:
            node = item[0]
            if type(node) is Lam:
                body = values.pop()
                s = summary_lam(ctx, node.binder, body.summary, counter)
                values.append(ANode(node, (body,), s, hash_summary(ctx, s)))
            else:
                arg = values.pop()
                fun = values.pop()
                s = summary_app(ctx, fun.summary, arg.summary, counter)
                values.append(ANode(node, (fun, arg), s, hash_summary(ctx, s)))
            continue
        t = type(item)
        if t is Var:
            s = summary_var(ctx, item.name, counter)
            values.append(ANode(item, (), s, hash_summary(ctx, s)))
        elif t is Lam:
            work.append((item,))
            work.append(item.body)
        else:
            work.append((item,))
            work.append(item.arg)
            work.append(item.fun)
    return values[0]


def annotate(ctx: HashContext, e: Expression, counter: OpCounter = None) -> AnnotatedExpr:
    """Hash every node of ``e`` (binders unique), keeping each summary."""
    return AnnotatedExpr(_annotate_nodes(ctx, e, counter), pset(all_names(e)), ctx)


def _walk(root: ANode, path: str) -> list[ANode]:
    spine = [root]
    node = root
    for i, step in enumerate(path):
        ch = node.children
        if step == "b" and len(ch) == 1:
            node = ch[0]
        elif step == "f" and len(ch) == 2:
            node = ch[0]
        elif step == "a" and len(ch) == 2:
            node = ch[1]
        else:
            raise ValueError(f"path {path!r} does not resolve at step {i}")
        spine.append(node)
    return spine


def check_fresh(t: AnnotatedExpr, replacement: Expression):
    bs = binders(replacement)
    if len(set(bs)) != len(bs):
        raise FreshnessError("replacement binds some name more than once")
    clash = sorted(n.text for n in bs if n in t.names)
    if clash:
        raise FreshnessError(f"replacement binders already used in the tree: {', '.join(clash)}")


def rewrite(ctx: HashContext, t: AnnotatedExpr, at: str, replacement: Expression,
            counter: OpCounter = None) -> AnnotatedExpr:
    """Replace the subtree at path ``at`` and recompute the new subtree and
    its ancestors; everything else is shared with ``t``.

    The replacement's binders must be distinct from each other and from every
    name in ``t`` (see :func:`freshen`).
    """
    spine = _walk(t.root, at)
    check_fresh(t, replacement)
    new = _annotate_nodes(ctx, replacement, counter)
    for parent, step in zip(reversed(spine[:-1]), reversed(at)):
        if step == "b":
            e = Lam(parent.expr.binder, new.expr)
            s = summary_lam(ctx, e.binder, new.summary, counter)
            new = ANode(e, (new,), s, hash_summary(ctx, s))
        else:
            fun, arg = (new, parent.children[1]) if step == "f" else (parent.children[0], new)
            e = App(fun.expr, arg.expr)
            s = summary_app(ctx, fun.summary, arg.summary, counter)
            new = ANode(e, (fun, arg), s, hash_summary(ctx, s))
    # Names of the removed subtree stay reserved; that is conservative but keeps
    # the update independent of the removed subtree's size.
    return AnnotatedExpr(new, t.names.update(all_names(replacement)), ctx)


_NUMBERED = re.compile(r"(\D*)(\d+)$")


def freshen(t: AnnotatedExpr, replacement: Expression, prefix: str = "v") -> Expression:
    """Rename the replacement's binders to ``<prefix><k>`` with ``k`` past
    every such name already in ``t``."""
    start = 0
    for n in t.names:
        m = _NUMBERED.match(n.text)
        if m and m.group(1) == prefix:
            start = max(start, int(m.group(2)) + 1)
    return uniquify(replacement, start=start, prefix=prefix)


def changed_paths(old: AnnotatedExpr, new: AnnotatedExpr) -> list[tuple[str, Optional[int], int]]:
    """``(path, old hash or None, new hash)`` for every node of ``new`` that is
    not shared with ``old``, in preorder."""
    before = {p: n for p, n in old.nodes()}
    out = []
    for p, n in new.nodes():
        o = before.get(p)
        if o is not n:
            out.append((p, None if o is None else o.hash, n.hash))
    return out
