"""The comparison hashers: structural, de Bruijn and locally nameless.

Structural and de Bruijn hashing are cheap but wrong modulo alpha; locally
nameless is right but re-hashes the whole body under every lambda.
"""

from __future__ import annotations

from .expr import App, Expression, Lam, Var, preorder, subtree_sizes
from .hashing import HashContext, HashedTree, Role, _mix


def structural_hash_all(ctx: HashContext, e: Expression) -> HashedTree:
    """Hash constructors, names and children; bound names included verbatim."""
    nodes = preorder(e)
    hashes = [0] * len(nodes)
    mask = ctx.mask
    k_var, k_lam, k_app = ctx.keys[Role.ST_VAR], ctx.keys[Role.ST_LAM], ctx.keys[Role.ST_APP]
    name_hash = ctx.name_hash
    stack: list = []
    for i in range(len(nodes) - 1, -1, -1):
        node = nodes[i]
        t = type(node)
        if t is Var:
            h = _mix(k_var, mask, 1, (name_hash(node.name),))
            sz = 1
        elif t is Lam:
            hb, sz = stack.pop()
            sz += 1
            h = _mix(k_lam, mask, sz, (name_hash(node.binder), hb))
        else:
            hf, sf = stack.pop()
            ha, sa = stack.pop()
            sz = 1 + sf + sa
            h = _mix(k_app, mask, sz, (hf, ha))
        hashes[i] = h
        stack.append((h, sz))
    return HashedTree(e, hashes, ctx)


def binding_info(e: Expression):
    """Preorder nodes plus, per node, the preorder index of the binding Lam
    (-1 if free or not a Var) and the number of enclosing lambdas, counting a
    Lam itself."""
    nodes = []
    binder_of = []
    lam_depth = []
    env: dict = {}
    depth = 0
    stack: list = [e]
    while stack:
        node = stack.pop()
        if type(node) is tuple:
            _, name, saved = node
            depth -= 1
            if saved is None:
                del env[name]
            else:
                env[name] = saved
            continue
        i = len(nodes)
        nodes.append(node)
        t = type(node)
        if t is Var:
            binder_of.append(env.get(node.name, -1))
            lam_depth.append(depth)
        elif t is Lam:
            depth += 1
            binder_of.append(-1)
            lam_depth.append(depth)
            stack.append(("exit", node.binder, env.get(node.binder)))
            env[node.binder] = i
            stack.append(node.body)
        else:
            binder_of.append(-1)
            lam_depth.append(depth)
            stack.append(node.arg)
            stack.append(node.fun)
    return nodes, binder_of, lam_depth


def _db_bound(ctx: HashContext, cache: dict, index: int):
    h = cache.get(index)
    if h is None:
        h = cache[index] = _mix(ctx.keys[Role.DB_BOUND], ctx.mask, 1, (index,))
    return h


def debruijn_hash_all(ctx: HashContext, e: Expression) -> HashedTree:
    """Hash each node's de Bruijn form in its context: bound occurrences
    become 1-based counts of lambdas out to their binder, free ones keep
    their names. The index depends on lambdas above the node, which is why
    equal subterms can hash apart and distinct ones together."""
    nodes, binder_of, lam_depth = binding_info(e)
    hashes = [0] * len(nodes)
    mask = ctx.mask
    k_var, k_lam, k_app = ctx.keys[Role.ST_VAR], ctx.keys[Role.DB_LAM], ctx.keys[Role.DB_APP]
    bound: dict = {}
    stack: list = []
    for i in range(len(nodes) - 1, -1, -1):
        node = nodes[i]
        t = type(node)
        if t is Var:
            b = binder_of[i]
            if b < 0:
                h = _mix(k_var, mask, 1, (ctx.name_hash(node.name),))
            else:
                h = _db_bound(ctx, bound, lam_depth[i] - lam_depth[b] + 1)
            sz = 1
        elif t is Lam:
            hb, sz = stack.pop()
            sz += 1
            h = _mix(k_lam, mask, sz, (hb,))
        else:
            hf, sf = stack.pop()
            ha, sa = stack.pop()
            sz = 1 + sf + sa
            h = _mix(k_app, mask, sz, (hf, ha))
        hashes[i] = h
        stack.append((h, sz))
    return HashedTree(e, hashes, ctx)


def locally_nameless_hash_all(ctx: HashContext, e: Expression) -> HashedTree:
    """Hash every node as its own subtree de-Bruijn-ised in isolation.

    Apps and Vars combine compositionally; each Lam re-walks its entire body
    so that occurrences of its binder can be replaced by indices. That walk
    makes the whole pass quadratic on deeply nested lambdas.
    """
    nodes, binder_of, lam_depth = binding_info(e)
    sizes = subtree_sizes(nodes)
    n = len(nodes)
    hashes = [0] * n
    mask = ctx.mask
    k_var, k_lam, k_app = ctx.keys[Role.ST_VAR], ctx.keys[Role.DB_LAM], ctx.keys[Role.DB_APP]
    bound: dict = {}
    free = [0] * n
    for i, node in enumerate(nodes):
        if type(node) is Var:
            free[i] = _mix(k_var, mask, 1, (ctx.name_hash(node.name),))
    for i in range(n - 1, -1, -1):
        t = type(nodes[i])
        if t is Var:
            hashes[i] = free[i]
        elif t is App:
            f = i + 1
            a = f + sizes[f]
            hashes[i] = _mix(k_app, mask, sizes[i], (hashes[f], hashes[a]))
        else:
            # Re-hash the body with every binder at or below i as an index.
            stack = []
            for j in range(i + sizes[i] - 1, i, -1):
                tj = type(nodes[j])
                if tj is Var:
                    b = binder_of[j]
                    if b >= i:
                        stack.append(_db_bound(ctx, bound, lam_depth[j] - lam_depth[b] + 1))
                    else:
                        stack.append(free[j])
                elif tj is Lam:
                    stack.append(_mix(k_lam, mask, sizes[j], (stack.pop(),)))
                else:
                    hf = stack.pop()
                    stack.append(_mix(k_app, mask, sizes[j], (hf, stack.pop())))
            hashes[i] = _mix(k_lam, mask, sizes[i], (stack.pop(),))
    return HashedTree(e, hashes, ctx)


ALGORITHMS = {
    "structural": structural_hash_all,
    "debruijn": debruijn_hash_all,
    "locally-nameless": locally_nameless_hash_all,
}
