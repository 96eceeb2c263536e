"""Fixed expressions that tell the hashing algorithms apart.

Arithmetic is spelled with free variables (``add``, ``mul``, ``one``,
``foo``) applied curried, since the language has no primitives.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Expression, parse


@dataclass(frozen=True)
class Vector:
    name: str
    text: str
    left: str  # paths of the two subterms being compared
    right: str
    equivalent: bool

    @property
    def expr(self) -> Expression:
        return parse(self.text)


RENAMED = Vector(
    "renamed lambdas",
    "(app (lam x (app (app add x) y)) (lam p (app (app add p) y)))",
    "f", "a", True)

# \t. foo (\x. x+t) (\y. \x. x+t): both (\x. x+t) are equivalent, but t gets
# different de Bruijn indices in the two places.
SHIFTED_FREE = Vector(
    "shifted free variable",
    "(lam t (app (app foo (lam x (app (app add x) t))) (lam y (lam x (app (app add x) t)))))",
    "bfa", "bab", True)

# \t. foo (\x. t*(x+1)) (\y. \x. y*(x+1)): the two inner lambdas differ, but
# t and y both become index 2.
CONFUSED_INDEX = Vector(
    "confused index",
    "(lam t (app (app foo (lam x (app (app mul t) (app (app add x) one))))"
    " (lam y (lam x (app (app mul y) (app (app add x) one))))))",
    "bfa", "bab", False)

VECTORS = (RENAMED, SHIFTED_FREE, CONFUSED_INDEX)

# Whether each algorithm gives the two compared subterms equal hashes.
TRUTH_TABLE = {
    RENAMED.name: {"structural": False, "debruijn": True, "locally-nameless": True, "alpha": True},
    SHIFTED_FREE.name: {"structural": True, "debruijn": False, "locally-nameless": True,
                        "alpha": True},
    CONFUSED_INDEX.name: {"structural": False, "debruijn": True, "locally-nameless": False,
                          "alpha": False},
}
