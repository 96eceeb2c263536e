"""Lambda-calculus expressions: names, AST, parsing, printing and the
brute-force alpha-equivalence oracle.

Every traversal here is iterative. The unbalanced benchmark family has depth
proportional to its size, far beyond Python's recursion limit.
"""

from __future__ import annotations

import itertools
import re
import threading
from collections import defaultdict
from typing import Iterator, Union

__all__ = [
    "Name", "name", "Var", "Lam", "App", "Expression", "ParseError",
    "parse", "to_text", "uniquify", "alpha_equiv", "subexpressions",
    "oracle_classes", "size", "depth", "free_vars", "binders", "all_names",
    "resolve", "format_path", "parse_path", "replace_at", "partition_of",
]


class Name:
    """An interned identifier. One object exists per distinct text, so
    equality is identity and costs O(1)."""

    __slots__ = ("text", "id")

    _table: dict[str, "Name"] = {}
    _lock = threading.Lock()
    _counter = itertools.count()

    def __new__(cls, text: str) -> "Name":
        found = cls._table.get(text)
        if found is not None:
            return found
        with cls._lock:
            found = cls._table.get(text)
            if found is None:
                found = object.__new__(cls)
                found.text = text
                found.id = next(cls._counter)
                cls._table[text] = found
            return found

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return self.id

    def __lt__(self, other: "Name") -> bool:
        return self.text < other.text

    def __repr__(self):
        return f"Name({self.text!r})"

    def __str__(self):
        return self.text

    def __reduce__(self):
        return (Name, (self.text,))


def name(text: Union[str, Name]) -> Name:
    return text if isinstance(text, Name) else Name(text)


class Expression:
    __slots__ = ()

    def __eq__(self, other):
        if not isinstance(other, Expression):
            return NotImplemented
        return _structurally_equal(self, other)

    def __hash__(self):
        h = 0
        for node in _preorder(self):
            if type(node) is Var:
                h = hash((h, 0, node.name.id))
            elif type(node) is Lam:
                h = hash((h, 1, node.binder.id))
            else:
                h = hash((h, 2))
        return h

    def __repr__(self):
        return f"<{to_text(self)}>"

    def __str__(self):
        return to_text(self)


class Var(Expression):
    __slots__ = ("name",)

    def __init__(self, name_: Union[str, Name]):
        self.name = name(name_)


class Lam(Expression):
    __slots__ = ("binder", "body")

    def __init__(self, binder: Union[str, Name], body: Expression):
        self.binder = name(binder)
        self.body = body


class App(Expression):
    __slots__ = ("fun", "arg")

    def __init__(self, fun: Expression, arg: Expression):
        self.fun = fun
        self.arg = arg


def _structurally_equal(a: Expression, b: Expression) -> bool:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        tx = type(x)
        if tx is not type(y):
            return False
        if tx is Var:
            if x.name is not y.name:
                return False
        elif tx is Lam:
            if x.binder is not y.binder:
                return False
            stack.append((x.body, y.body))
        else:
            stack.append((x.arg, y.arg))
            stack.append((x.fun, y.fun))
    return True


def _preorder(e: Expression) -> Iterator[Expression]:
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        t = type(node)
        if t is Lam:
            stack.append(node.body)
        elif t is App:
            stack.append(node.arg)
            stack.append(node.fun)


def preorder(e: Expression) -> list[Expression]:
    """All nodes of ``e`` in preorder (node, fun subtree, arg subtree)."""
    return list(_preorder(e))


def size(e: Expression) -> int:
    return sum(1 for _ in _preorder(e))


def depth(e: Expression) -> int:
    best = 0
    stack = [(e, 1)]
    while stack:
        node, d = stack.pop()
        if d > best:
            best = d
        t = type(node)
        if t is Lam:
            stack.append((node.body, d + 1))
        elif t is App:
            stack.append((node.fun, d + 1))
            stack.append((node.arg, d + 1))
    return best


def subtree_sizes(nodes: list[Expression]) -> list[int]:
    """Sizes of every node, given the preorder list of a tree."""
    sizes = [1] * len(nodes)
    pending: list[int] = []
    for i in range(len(nodes) - 1, -1, -1):
        t = type(nodes[i])
        if t is Lam:
            sizes[i] = 1 + pending.pop()
        elif t is App:
            sizes[i] = 1 + pending.pop() + pending.pop()
        pending.append(sizes[i])
    return sizes


def free_vars(e: Expression) -> set[Name]:
    out: set[Name] = set()
    # (node, bound) with bound as a frozenset keeps scoping exact under shadowing
    stack = [(e, frozenset())]
    while stack:
        node, bound = stack.pop()
        t = type(node)
        if t is Var:
            if node.name not in bound:
                out.add(node.name)
        elif t is Lam:
            stack.append((node.body, bound | {node.binder}))
        else:
            stack.append((node.fun, bound))
            stack.append((node.arg, bound))
    return out


def binders(e: Expression) -> list[Name]:
    return [n.binder for n in _preorder(e) if type(n) is Lam]


def all_names(e: Expression) -> set[Name]:
    out = set()
    for node in _preorder(e):
        t = type(node)
        if t is Var:
            out.add(node.name)
        elif t is Lam:
            out.add(node.binder)
    return out


# ---------------------------------------------------------------------------
# Text form

KEYWORDS = frozenset({"lam", "app"})
_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[A-Za-z_][A-Za-z0-9_']*|.")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


def _tokens(text: str):
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        tok = m.group()
        col = m.start() - line_start + 1
        if tok[0].isspace() or tok[0] == ";":
            nl = tok.count("\n")
            if nl:
                line += nl
                line_start = m.start() + tok.rfind("\n") + 1
            continue
        if tok not in "()" and not _IDENT.match(tok):
            raise ParseError(f"unexpected character {tok!r}", line, col)
        yield tok, line, col
    yield None, line, len(text) - line_start + 1


# Header slots per frame kind, and how many sub-expressions follow them.
_FIXED = {"lam": 4, "app": 3}
_ARITY = {"lam": 1, "app": 2}


def parse(text: str) -> Expression:
    """Parse the fully parenthesised form::

        expr := IDENT | (lam IDENT expr) | (app expr expr)
    """
    toks = _tokens(text)
    # Frames: [kind, line, col, children...]; closed when complete.
    frames: list[list] = []
    result = None

    def emit(value, line, col):
        nonlocal result
        if not frames:
            result = value
            return
        frame = frames[-1]
        if len(frame) - _FIXED[frame[0]] >= _ARITY[frame[0]]:
            raise ParseError(f"too many arguments to '{frame[0]}'", line, col)
        frame.append(value)

    for tok, line, col in toks:
        if tok is None:
            if frames:
                raise ParseError("unexpected end of input", line, col)
            if result is None:
                raise ParseError("empty input", line, col)
            return result
        if result is not None and not frames:
            raise ParseError("trailing input after expression", line, col)
        if tok == "(":
            head, hline, hcol = next(toks)
            if frames:
                frame = frames[-1]
                if len(frame) - _FIXED[frame[0]] >= _ARITY[frame[0]]:
                    raise ParseError(f"too many arguments to '{frame[0]}'", line, col)
            if head == "lam":
                binder, bline, bcol = next(toks)
                if binder is None or binder in "()" or binder in KEYWORDS:
                    raise ParseError("expected binder name after 'lam'", bline, bcol)
                frames.append(["lam", line, col, Name(binder)])
            elif head == "app":
                frames.append(["app", line, col])
            else:
                raise ParseError(f"expected 'lam' or 'app', got {head!r}", hline, hcol)
        elif tok == ")":
            if not frames:
                raise ParseError("unbalanced ')'", line, col)
            frame = frames.pop()
            kind, args = frame[0], frame[3:]
            if kind == "lam":
                if len(args) != 2:
                    raise ParseError("'lam' takes a binder and one body", line, col)
                emit(Lam(args[0], args[1]), frame[1], frame[2])
            else:
                if len(args) != 2:
                    raise ParseError("'app' takes exactly two expressions", line, col)
                emit(App(args[0], args[1]), frame[1], frame[2])
        else:
            if tok in KEYWORDS:
                raise ParseError(f"reserved word {tok!r} used as a variable", line, col)
            emit(Var(Name(tok)), line, col)
    raise AssertionError("unreachable")


def to_text(e: Expression) -> str:
    """Canonical text: ``x``, ``(lam x body)``, ``(app f a)``."""
    out: list[str] = []
    stack: list = [e]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            out.append(item)
            continue
        t = type(item)
        if t is Var:
            out.append(item.name.text)
        elif t is Lam:
            out.append(f"(lam {item.binder.text} ")
            stack.append(")")
            stack.append(item.body)
        else:
            out.append("(app ")
            stack.append(")")
            stack.append(item.arg)
            stack.append(" ")
            stack.append(item.fun)
    return "".join(out)


# ---------------------------------------------------------------------------
# Paths: strings over b (Lam body), f (App fun), a (App arg); root is "".

def format_path(path: str) -> str:
    return path or "-"


def parse_path(text: str) -> str:
    if text in ("-", "ε", ""):
        return ""
    if set(text) - set("bfa"):
        raise ValueError(f"invalid path {text!r}: steps must be b, f or a")
    return text


def resolve(e: Expression, path: str) -> Expression:
    node = e
    for i, step in enumerate(path):
        t = type(node)
        if step == "b" and t is Lam:
            node = node.body
        elif step == "f" and t is App:
            node = node.fun
        elif step == "a" and t is App:
            node = node.arg
        else:
            raise ValueError(f"path {path!r} does not resolve at step {i}")
    return node


def replace_at(e: Expression, path: str, replacement: Expression) -> Expression:
    spine = []
    node = e
    for step in path:
        spine.append(node)
        node = resolve(node, step)
    new = replacement
    for parent, step in zip(reversed(spine), reversed(path)):
        if step == "b":
            new = Lam(parent.binder, new)
        elif step == "f":
            new = App(new, parent.arg)
        else:
            new = App(parent.fun, new)
    return new


def subexpressions(e: Expression) -> list[tuple[str, Expression]]:
    """Every node with its path, in preorder."""
    out = []
    stack = [("", e)]
    while stack:
        path, node = stack.pop()
        out.append((path, node))
        t = type(node)
        if t is Lam:
            stack.append((path + "b", node.body))
        elif t is App:
            stack.append((path + "a", node.arg))
            stack.append((path + "f", node.fun))
    return out


def node_paths(e: Expression) -> list[str]:
    return [p for p, _ in subexpressions(e)]


# ---------------------------------------------------------------------------
# Renaming and the alpha-equivalence oracle

def uniquify(e: Expression, start: int = 0, prefix: str = "v") -> Expression:
    """Rename binders to ``<prefix><k>`` in preorder, leaving free variables
    alone. Generated names skip any that occur free in ``e``."""
    taken = {n.text for n in free_vars(e)}
    counter = itertools.count(start)

    def fresh() -> Name:
        while True:
            text = f"{prefix}{next(counter)}"
            if text not in taken:
                return Name(text)

    env: dict[Name, Name] = {}
    # Work items: ("visit", node) or ("build", kind, payload) or ("restore", old)
    work: list = [("visit", e)]
    values: list[Expression] = []
    while work:
        item = work.pop()
        tag = item[0]
        if tag == "visit":
            node = item[1]
            t = type(node)
            if t is Var:
                values.append(Var(env.get(node.name, node.name)))
            elif t is Lam:
                new = fresh()
                work.append(("lam", new, node.binder, env.get(node.binder)))
                env[node.binder] = new
                work.append(("visit", node.body))
            else:
                work.append(("app",))
                work.append(("visit", node.arg))
                work.append(("visit", node.fun))
        elif tag == "lam":
            _, new, old, saved = item
            if saved is None:
                del env[old]
            else:
                env[old] = saved
            values.append(Lam(new, values.pop()))
        else:
            arg = values.pop()
            values.append(App(values.pop(), arg))
    return values[0]


def alpha_equiv(a: Expression, b: Expression) -> bool:
    """Decide alpha-equivalence by walking both trees together, mapping each
    binder to its lambda depth."""
    env_a: dict[Name, int] = {}
    env_b: dict[Name, int] = {}
    level = 0
    stack: list = [(a, b)]
    while stack:
        item = stack.pop()
        if item[0] is None:
            _, na, sa, nb, sb = item
            level -= 1
            if sa is None:
                del env_a[na]
            else:
                env_a[na] = sa
            if sb is None:
                del env_b[nb]
            else:
                env_b[nb] = sb
            continue
        x, y = item
        tx = type(x)
        if tx is not type(y):
            return False
        if tx is Var:
            la = env_a.get(x.name)
            lb = env_b.get(y.name)
            if la != lb:
                return False
            if la is None and x.name is not y.name:
                return False
        elif tx is Lam:
            stack.append((None, x.binder, env_a.get(x.binder), y.binder, env_b.get(y.binder)))
            level += 1
            env_a[x.binder] = level
            env_b[y.binder] = level
            stack.append((x.body, y.body))
        else:
            stack.append((x.arg, y.arg))
            stack.append((x.fun, y.fun))
    return True


def oracle_classes(e: Expression) -> list[list[str]]:
    """Group all subexpression paths by pairwise alpha-equivalence.

    Nodes are pre-bucketed by (constructor, size), which alpha-equivalence
    preserves, then each node is compared against one representative per
    existing class in its bucket. Expects unique binders.
    """
    subs = subexpressions(e)
    nodes = [n for _, n in subs]
    sizes = subtree_sizes(nodes)
    buckets: dict[tuple, list[list[int]]] = defaultdict(list)
    for i, node in enumerate(nodes):
        groups = buckets[(type(node), sizes[i])]
        for group in groups:
            if alpha_equiv(nodes[group[0]], node):
                group.append(i)
                break
        else:
            groups.append([i])
    classes = [g for groups in buckets.values() for g in groups]
    classes.sort(key=lambda g: g[0])
    return [[subs[i][0] for i in g] for g in classes]


def partition_of(groups) -> frozenset:
    """Order-free view of a partition, for comparing class lists."""
    return frozenset(frozenset(g) for g in groups)
