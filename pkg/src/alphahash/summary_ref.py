"""The invertible e-summary with the four-constructor position tree.

Every App merges both child maps in full, so this is quadratic on unbalanced
inputs. It stays as the correctness oracle for the faster variants.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional, Union

from .expr import App, Expression, Lam, Name, Var, preorder


class StructureError(ValueError):
    """A summary that no expression could have produced."""


# Position trees ------------------------------------------------------------

@dataclass(frozen=True)
class Here:
    pass


@dataclass(frozen=True)
class LeftOnly:
    child: "RefPosTree"


@dataclass(frozen=True)
class RightOnly:
    child: "RefPosTree"


@dataclass(frozen=True)
class Both:
    left: "RefPosTree"
    right: "RefPosTree"


RefPosTree = Union[Here, LeftOnly, RightOnly, Both]
HERE = Here()


# Structures ----------------------------------------------------------------

@dataclass(frozen=True)
class SVar:
    pass


@dataclass(frozen=True)
class SLam:
    occ: Optional[RefPosTree]
    body: "RefStructure"


@dataclass(frozen=True)
class SApp:
    left: "RefStructure"
    right: "RefStructure"


RefStructure = Union[SVar, SLam, SApp]
RefVarMap = dict  # Name -> RefPosTree
SVAR = SVar()


@dataclass(frozen=True)
class RefESummary:
    structure: RefStructure
    varmap: RefVarMap


def merge_vm(on_left: Callable, on_right: Callable, on_both: Callable,
             m1: RefVarMap, m2: RefVarMap) -> RefVarMap:
    out = {}
    for k, p in m1.items():
        q = m2.get(k)
        out[k] = on_left(p) if q is None else on_both(p, q)
    for k, q in m2.items():
        if k not in m1:
            out[k] = on_right(q)
    return out


def summarise_ref(e: Expression) -> RefESummary:
    values: list[RefESummary] = []
    for node in reversed(preorder(e)):
        t = type(node)
        if t is Var:
            values.append(RefESummary(SVAR, {node.name: HERE}))
        elif t is Lam:
            body = values.pop()
            vm = dict(body.varmap)
            occ = vm.pop(node.binder, None)
            values.append(RefESummary(SLam(occ, body.structure), vm))
        else:
            f = values.pop()
            a = values.pop()
            vm = merge_vm(LeftOnly, RightOnly, Both, f.varmap, a.varmap)
            values.append(RefESummary(SApp(f.structure, a.structure), vm))
    return values[0]


def _pick_left(p: RefPosTree) -> Optional[RefPosTree]:
    if type(p) is LeftOnly:
        return p.child
    if type(p) is Both:
        return p.left
    return None


def _pick_right(p: RefPosTree) -> Optional[RefPosTree]:
    if type(p) is RightOnly:
        return p.child
    if type(p) is Both:
        return p.right
    return None


def find_singleton_vm(vm: RefVarMap, here=HERE) -> Name:
    if len(vm) != 1:
        raise StructureError(f"variable position expects exactly one variable, found {len(vm)}")
    (n, p), = vm.items()
    if p != here:
        raise StructureError(f"variable {n.text} does not occur here")
    return n


def fresh_names(taken: set[str], prefix: str = "r"):
    for k in itertools.count():
        text = f"{prefix}{k}"
        if text not in taken:
            yield Name(text)


def rebuild_ref(s: RefESummary) -> Expression:
    """Reconstruct an expression alpha-equivalent to whatever produced ``s``.
    Binders get fresh names ``r0, r1, ...`` in preorder."""
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
            values.append(Var(find_singleton_vm(vm)))
        elif t is SLam:
            x = next(fresh)
            inner = dict(vm)
            if st.occ is not None:
                inner[x] = st.occ
            work.append(x)
            work.append((st.body, inner))
        elif t is SApp:
            m1, m2 = {}, {}
            for k, p in vm.items():
                left, right = _pick_left(p), _pick_right(p)
                if left is None and right is None:
                    raise StructureError(f"position of {k.text} does not split at an application")
                if left is not None:
                    m1[k] = left
                if right is not None:
                    m2[k] = right
            work.append(None)
            work.append((st.right, m2))
            work.append((st.left, m1))
        else:
            raise StructureError(f"not a structure: {st!r}")
    return values[0]
