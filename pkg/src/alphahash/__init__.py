"""Hashing lambda terms modulo alpha-equivalence."""

from .expr import (App, Expression, Lam, Name, ParseError, Var, alpha_equiv, oracle_classes,
                   parse, to_text, uniquify)
from .hashing import HashContext, classes, hash_all, root_hash
from .incremental import annotate, rewrite
from .linear import linear_hash_all

__all__ = [
    "App", "Expression", "Lam", "Name", "ParseError", "Var", "alpha_equiv", "oracle_classes",
    "parse", "to_text", "uniquify", "HashContext", "classes", "hash_all", "root_hash",
    "annotate", "rewrite", "linear_hash_all",
]
