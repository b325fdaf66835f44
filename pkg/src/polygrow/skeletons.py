"""Skeletons of pointed factorization trees, segments, seeds, and diagnostics.

The skeleton of a tree with distinguished leaves is its restriction to the
closure of those leaves under parents, leftmost siblings and rightmost
siblings, together with flags recording which retained nodes were extremal or
consecutive siblings in the original tree.  Whether a pointed word satisfies a
query can be decided from the skeleton alone; the elided middle children of a
wide node all carry the node's idempotent, so each dotted gap contributes that
idempotent once.
"""

from dataclasses import dataclass

from .fft import Inner, Leaf, build_fft
from .semigroups import Profile, accept_profile
from .words import select_tuples


class SeedUniquenessError(RuntimeError):
    """Two distinct completions of a seed assignment inside one skeleton."""


class TreeIndex:
    """Navigation tables (parents, siblings, leaf order) for a tree."""

    def __init__(self, tree):
        self.tree = tree
        self.nodes = []
        self.parent = {}
        self.children = {}
        self.pos_in_parent = {}
        self.leaf_of_position = {}

        def visit(node, parent_id, pos):
            nid = len(self.nodes)
            self.nodes.append(node)
            self.parent[nid] = parent_id
            self.pos_in_parent[nid] = pos
            self.children[nid] = []
            if parent_id is not None:
                self.children[parent_id].append(nid)
            if isinstance(node, Inner):
                for i, c in enumerate(node.children):
                    visit(c, nid, i)
            else:
                self.leaf_of_position[len(self.leaf_of_position) + 1] = nid
            return nid

        visit(tree, None, 0)

    def node(self, nid):
        return self.nodes[nid]

    def is_leftmost(self, nid):
        return self.pos_in_parent[nid] == 0

    def is_rightmost(self, nid):
        p = self.parent[nid]
        return p is None or self.pos_in_parent[nid] == len(self.children[p]) - 1

    def leftmost_sibling(self, nid):
        p = self.parent[nid]
        return nid if p is None else self.children[p][0]

    def rightmost_sibling(self, nid):
        p = self.parent[nid]
        return nid if p is None else self.children[p][-1]

    def next_sibling(self, nid):
        p = self.parent[nid]
        if p is None:
            return None
        sibs = self.children[p]
        i = self.pos_in_parent[nid]
        return sibs[i + 1] if i + 1 < len(sibs) else None


@dataclass(frozen=True)
class Skeleton:
    """Closure of the distinguished leaves with inherited flags and linkage.

    `children[n]` lists retained children in original order; `linked[n][i]` is
    True when retained children i and i+1 were consecutive siblings in the
    original tree.  `label[n]` is a letter for leaves and a semigroup element
    for inner nodes; `distinguished` maps variables to leaf node ids.
    """

    root: int
    nodes: frozenset
    labels: dict
    is_leaf: dict
    children: dict
    linked: dict
    leftmost: dict
    rightmost: dict
    distinguished: dict

    @property
    def canonical_key(self):
        def ser(n):
            here = (
                "L" if self.is_leaf[n] else "N",
                self.labels[n],
                self.leftmost[n],
                self.rightmost[n],
                tuple(sorted(v for v, d in self.distinguished.items() if d == n)),
            )
            kids = tuple(ser(c) for c in self.children[n])
            return (here, tuple(self.linked[n]), kids)

        return ser(self.root)

    def variables_at(self, n):
        return frozenset(v for v, d in self.distinguished.items() if d == n)


def skeleton(tree, assignment):
    """Skeleton of `tree` with leaves distinguished by `assignment` (var -> position)."""
    if not assignment:
        raise ValueError("skeletons need at least one distinguished leaf")
    idx = tree if isinstance(tree, TreeIndex) else TreeIndex(tree)
    distinguished = {}
    for v, p in assignment.items():
        if p not in idx.leaf_of_position:
            raise ValueError(f"variable {v} points outside the yield ({p})")
        distinguished[v] = idx.leaf_of_position[p]
    closure = set(distinguished.values())
    todo = list(closure)
    while todo:
        n = todo.pop()
        for m in (
            idx.parent[n],
            idx.leftmost_sibling(n),
            idx.rightmost_sibling(n),
        ):
            if m is not None and m not in closure:
                closure.add(m)
                todo.append(m)
    labels = {}
    is_leaf = {}
    children = {}
    linked = {}
    leftmost = {}
    rightmost = {}
    root = None
    for n in closure:
        node = idx.node(n)
        is_leaf[n] = isinstance(node, Leaf)
        labels[n] = node.letter if is_leaf[n] else node.label
        leftmost[n] = idx.is_leftmost(n)
        rightmost[n] = idx.is_rightmost(n)
        kids = [c for c in idx.children[n] if c in closure]
        children[n] = tuple(kids)
        linked[n] = tuple(
            idx.next_sibling(kids[i]) == kids[i + 1] for i in range(len(kids) - 1)
        )
        if idx.parent[n] is None:
            root = n
    return Skeleton(
        root=root,
        nodes=frozenset(closure),
        labels=labels,
        is_leaf=is_leaf,
        children=children,
        linked=linked,
        leftmost=leftmost,
        rightmost=rightmost,
        distinguished=distinguished,
    )


def skeleton_key(recognizer, word, positions, variables):
    """Canonical key of the skeleton of the canonical tree for (word, tuple)."""
    tree = build_fft(recognizer, word)
    assignment = dict(zip(variables, positions))
    return skeleton(tree, assignment).canonical_key


class SkeletonGapError(ValueError):
    pass


def reconstruct_profile(recognizer, skel: Skeleton) -> Profile:
    """Profile of the underlying pointed word, read off the skeleton alone.

    Every elided run of siblings sits under a wide node and collapses to the
    node's idempotent label; binary nodes never lose children to the closure
    because both their children are extremal siblings.
    """
    sg = recognizer.semigroup
    groups = []
    gaps = []
    acc = [None]

    def push(value):
        acc[0] = value if acc[0] is None else sg.product(acc[0], value)

    def flush():
        gaps.append(acc[0])
        acc[0] = None

    def visit(n):
        if skel.is_leaf[n]:
            vars_here = skel.variables_at(n)
            if vars_here:
                flush()
                groups.append((skel.labels[n], vars_here))
            else:
                push(recognizer.letter_value[skel.labels[n]])
            return
        kids = skel.children[n]
        if not kids:
            # a retained sibling with no distinguished descendants
            push(skel.labels[n])
            return
        if not skel.leftmost[kids[0]] or not skel.rightmost[kids[-1]]:
            raise SkeletonGapError(
                "extremal children missing from the closure; gap not reconstructible"
            )
        for i, c in enumerate(kids):
            visit(c)
            if i + 1 < len(kids) and not skel.linked[n][i]:
                push(skel.labels[n])

    visit(skel.root)
    flush()
    return Profile(tuple(groups), tuple(gaps))


def eval_via_skeleton(recognizer, skel: Skeleton) -> bool:
    """Query verdict computed from the skeleton alone."""
    return accept_profile(recognizer, reconstruct_profile(recognizer, skel))


# ---------------------------------------------------------------------------
# Segments and seeds


def movable_intervals(skel: Skeleton):
    """Maximal linked-closed sibling sets avoiding extremal siblings."""
    intervals = []
    for n in sorted(skel.nodes):
        kids = skel.children.get(n, ())
        if len(kids) < 3:
            continue
        runs = []
        cur = [kids[0]]
        for i in range(len(kids) - 1):
            if skel.linked[n][i]:
                cur.append(kids[i + 1])
            else:
                runs.append(cur)
                cur = [kids[i + 1]]
        runs.append(cur)
        for run in runs:
            if any(skel.leftmost[c] or skel.rightmost[c] for c in run):
                continue
            intervals.append(tuple(run))
    return intervals


def _descendants(skel, nodes):
    out = set(nodes)
    todo = list(nodes)
    while todo:
        n = todo.pop()
        for c in skel.children.get(n, ()):
            if c not in out:
                out.add(c)
                todo.append(c)
    return frozenset(out)


@dataclass(frozen=True)
class Segment:
    interval: tuple
    members: frozenset

    def captured_variables(self, skel):
        return frozenset(
            v for v, n in skel.distinguished.items() if n in self.members
        )


def segments(skel: Skeleton):
    """(all segments, inclusion-minimal segments); a laminar family."""
    segs = [
        Segment(iv, _descendants(skel, iv)) for iv in movable_intervals(skel)
    ]
    minimal = [
        s
        for s in segs
        if not any(o.members < s.members for o in segs)
    ]
    return segs, minimal


def seed(skel: Skeleton):
    """One variable per minimal segment, lexicographically smallest captured."""
    _, minimal = segments(skel)
    out = set()
    for s in minimal:
        captured = s.captured_variables(skel)
        if not captured:
            raise RuntimeError("minimal segment captures no variable")
        out.add(min(captured))
    return frozenset(out)


def seed_extension(recognizer, word, skel_key, partial, variables):
    """The unique completion of `partial` matching the query and skeleton key.

    Searches every completion; two matches are a hard error because a seed
    admits at most one extension within a skeleton class.
    """
    q = recognizer.query
    variables = tuple(variables)
    free = [v for v in variables if v not in partial]
    n = len(word)
    tree = build_fft(recognizer, word) if n else None
    found = None
    from itertools import product as iproduct

    for combo in iproduct(range(1, n + 1), repeat=len(free)):
        assignment = dict(partial)
        assignment.update(dict(zip(free, combo)))
        positions = tuple(assignment[v] for v in variables)
        if not q.selects(word, positions):
            continue
        if skeleton(tree, assignment).canonical_key != skel_key:
            continue
        if found is not None:
            raise SeedUniquenessError(
                f"seed {sorted(partial.items())} extends to both "
                f"{found} and {positions} on {''.join(word)}"
            )
        found = positions
    return found


# ---------------------------------------------------------------------------
# Dependency-graph diagnostic


def dependency_graph(skel: Skeleton):
    """Edges of the functional-dependency graph over skeleton nodes.

    x -> y when y is x's parent, y is a child of x flagged leftmost or
    rightmost, or x and y are linked successor siblings (both directions).
    """
    edges = set()
    for n in skel.nodes:
        for i, c in enumerate(skel.children.get(n, ())):
            edges.add((c, n))  # child -> parent
            if skel.leftmost[c] and i == 0:
                edges.add((n, c))
            if skel.rightmost[c] and i == len(skel.children[n]) - 1:
                edges.add((n, c))
        kids = skel.children.get(n, ())
        for i in range(len(kids) - 1):
            if skel.linked[n][i]:
                edges.add((kids[i], kids[i + 1]))
                edges.add((kids[i + 1], kids[i]))
    return edges


def strongly_connected_components(nodes, edges):
    """Tarjan's algorithm; components listed in a deterministic order."""
    adj = {n: [] for n in nodes}
    for a, b in sorted(edges):
        adj[a].append(b)
    index = {}
    low = {}
    on_stack = set()
    stack = []
    out = []
    counter = [0]

    def strongconnect(v):
        work = [(v, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on_stack.add(node)
            recurse = False
            for i in range(pi, len(adj[node])):
                w = adj[node][i]
                if w not in index:
                    work[-1] = (node, i + 1)
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index[w])
            if recurse:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(frozenset(comp))
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    for v in sorted(nodes):
        if v not in index:
            strongconnect(v)
    return out


def minimal_sccs(skel: Skeleton):
    """SCCs of the dependency graph with no incoming edge from another SCC."""
    edges = dependency_graph(skel)
    comps = strongly_connected_components(skel.nodes, edges)
    comp_of = {}
    for i, comp in enumerate(comps):
        for n in comp:
            comp_of[n] = i
    incoming = {i: set() for i in range(len(comps))}
    for a, b in edges:
        if comp_of[a] != comp_of[b]:
            incoming[comp_of[b]].add(comp_of[a])
    return comps, [comps[i] for i in range(len(comps)) if not incoming[i]]


def seed_by_dependency(skel: Skeleton):
    """Diagnostic seed: lexicographically smallest variable per minimal SCC.

    The segment method is authoritative; this cross-check can disagree on
    skeletons whose dependency graph anchors every variable to the root.
    """
    _, minimal = minimal_sccs(skel)
    out = set()
    for comp in minimal:
        captured = frozenset(
            v for v, n in skel.distinguished.items() if n in comp
        )
        if captured:
            out.add(min(captured))
    return frozenset(out)


def span_certificate(skel: Skeleton, seed_vars):
    """Deterministic-move paths from seed leaves to every distinguished leaf.

    Moves are parent, previous/next linked sibling, leftmost/rightmost child;
    returns {variable: path} or None for unreachable variables.
    """
    moves = {}
    parent_of = {}
    for n in skel.nodes:
        kids = skel.children.get(n, ())
        for i, c in enumerate(kids):
            parent_of[c] = n
        for i, c in enumerate(kids):
            if i + 1 < len(kids) and skel.linked[n][i]:
                moves.setdefault(c, []).append(("next-linked-sibling", kids[i + 1]))
                moves.setdefault(kids[i + 1], []).append(("prev-linked-sibling", c))
        if kids:
            moves.setdefault(n, []).append(("leftmost-child", kids[0]))
            moves.setdefault(n, []).append(("rightmost-child", kids[-1]))
    for c, p in parent_of.items():
        moves.setdefault(c, []).append(("parent", p))

    from collections import deque

    # the root is determined with no seed knowledge, so it always anchors
    start = {skel.distinguished[v] for v in seed_vars} | {skel.root}
    paths = {n: [] for n in start}
    todo = deque(start)
    while todo:
        n = todo.popleft()
        for name, m in moves.get(n, []):
            if m not in paths:
                paths[m] = paths[n] + [name]
                todo.append(m)
    return {
        v: paths.get(skel.distinguished[v])
        for v in skel.distinguished
    }
