"""E-summaries with smaller-subtree merging.

At each App only the smaller child map is folded into the larger, each
folded entry wrapped in a Join stamped with the App's structure tag (its
depth). Entries only in the larger map are left alone; the tag is what lets
:func:`rebuild_tagged` tell the two apart again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from .expr import App, Expression, Lam, Name, Var, preorder
from .hashing import OpCounter
from .summary_ref import StructureError, find_singleton_vm, fresh_names


@dataclass(frozen=True)
class Here:
    pass


@dataclass(frozen=True)
class Join:
    tag: int
    big: Optional["TagPosTree"]
    small: "TagPosTree"


TagPosTree = Union[Here, Join]
HERE = Here()


@dataclass(frozen=True)
class SVar:
    depth: int = field(default=1, repr=False)


@dataclass(frozen=True)
class SLam:
    occ: Optional[TagPosTree]
    body: "TagStructure"
    depth: int = field(repr=False, compare=False, default=0)


@dataclass(frozen=True)
class SApp:
    left_bigger: bool
    left: "TagStructure"
    right: "TagStructure"
    depth: int = field(repr=False, compare=False, default=0)


TagStructure = Union[SVar, SLam, SApp]
SVAR = SVar()


def mk_slam(occ: Optional[TagPosTree], body: TagStructure) -> SLam:
    return SLam(occ, body, body.depth + 1)


def mk_sapp(left_bigger: bool, left: TagStructure, right: TagStructure) -> SApp:
    return SApp(left_bigger, left, right, 1 + max(left.depth, right.depth))


def structure_tag(s: TagStructure) -> int:
    return s.depth


@dataclass(frozen=True)
class TagESummary:
    structure: TagStructure
    varmap: dict  # Name -> TagPosTree


def alter_vm(f: Callable[[Optional[TagPosTree]], TagPosTree], key: Name, m: dict,
             counter: OpCounter = None) -> dict:
    """Bind ``key`` to ``f(previous binding or None)``.

    Updates ``m`` in place and returns it: the summariser owns the bigger
    child's map and never looks at it again after folding into it.
    """
    if counter is not None:
        counter.alter += 1
    m[key] = f(m.get(key))
    return m


def summarise_tagged(e: Expression, counter: OpCounter = None) -> TagESummary:
    values: list[tuple] = []
    for node in reversed(preorder(e)):
        t = type(node)
        if t is Var:
            if counter is not None:
                counter.singleton += 1
            values.append((SVAR, {node.name: HERE}))
        elif t is Lam:
            body, vm = values.pop()
            if counter is not None:
                counter.remove += 1
            occ = vm.pop(node.binder, None)
            values.append((mk_slam(occ, body), vm))
        else:
            s1, vm1 = values.pop()
            s2, vm2 = values.pop()
            left_bigger = len(vm1) >= len(vm2)
            st = mk_sapp(left_bigger, s1, s2)
            tag = structure_tag(st)
            big, small = (vm1, vm2) if left_bigger else (vm2, vm1)
            for v, p in small.items():
                alter_vm(lambda mp, p=p: Join(tag, mp, p), v, big, counter)
            values.append((st, big))
    st, vm = values[0]
    return TagESummary(st, vm)


def rebuild_tagged(s: TagESummary) -> Expression:
    fresh = fresh_names({n.text for n in s.varmap})
    work: list = [(s.structure, s.varmap)]
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
        st, vm = item
        t = type(st)
        if t is SVar:
            values.append(Var(find_singleton_vm(vm, HERE)))
        elif t is SLam:
            x = next(fresh)
            inner = dict(vm)
            if st.occ is not None:
                inner[x] = st.occ
            work.append(x)
            work.append((st.body, inner))
        elif t is SApp:
            tag = structure_tag(st)
            small_m, big_m = {}, {}
            for k, p in vm.items():
                if type(p) is Join and p.tag == tag:
                    small_m[k] = p.small
                    if p.big is not None:
                        big_m[k] = p.big
                elif type(p) is Join and p.tag > tag:
                    raise StructureError(
                        f"join tagged {p.tag} for {k.text} found under structure tagged {tag}")
                else:
                    big_m[k] = p
            vm1, vm2 = (big_m, small_m) if st.left_bigger else (small_m, big_m)
            work.append(None)
            work.append((st.right, vm2))
            work.append((st.left, vm1))
        else:
            raise StructureError(f"not a structure: {st!r}")
    return values[0]
