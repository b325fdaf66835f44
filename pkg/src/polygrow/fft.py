"""Factorization trees of bounded height for a semigroup homomorphism.

A factorization tree for a word has letters at the leaves; every inner node is
labelled by the value of its subtree's yield, and every inner node with more
than two children has all children labelled by one idempotent, which is also
the node's label.  Every word admits such a tree of height at most 3|S|-1.

The builder works by structural recursion on the subsemigroup generated by the
word's letters: letters of a maximal J-class are grouped greedily into smooth
blocks, whose products fall into the complementary ideal and recurse into a
strictly smaller semigroup; smooth blocks are decomposed by the column of the
final letter, which reduces them to words over a left group, where prefix
splitting produces the uniform idempotent runs that wide nodes require.
"""

from collections import deque
from dataclasses import dataclass
from functools import lru_cache


class FactorizationHeightError(RuntimeError):
    pass


@dataclass(frozen=True)
class Leaf:
    letter: str
    value: int

    @property
    def width(self):
        return 1

    @property
    def height(self):
        return 0

    @property
    def label(self):
        return self.value


@dataclass(frozen=True)
class Inner:
    label: int
    children: tuple
    width: int
    height: int

    @property
    def value(self):
        return self.label


def make_inner(sg, children):
    children = tuple(children)
    assert len(children) >= 2
    label = children[0].value
    for c in children[1:]:
        label = sg.product(label, c.value)
    return Inner(
        label=label,
        children=children,
        width=sum(c.width for c in children),
        height=1 + max(c.height for c in children),
    )


def tree_yield(t):
    if isinstance(t, Leaf):
        return (t.letter,)
    out = []
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            out.append(node.letter)
        else:
            stack.extend(reversed(node.children))
    return tuple(out)


def serialize(t):
    """Deterministic nested-tuple form, stable across runs."""
    if isinstance(t, Leaf):
        return ("leaf", t.letter, t.value)
    return ("node", t.label, tuple(serialize(c) for c in t.children))


# ---------------------------------------------------------------------------
# Green's relations on a subsemigroup


class _Green:
    """L-classes and J-order data for a subsemigroup T of the recognizer's
    semigroup (T given as a frozenset of element ids)."""

    def __init__(self, sg, elements):
        self.sg = sg
        self.elements = frozenset(elements)
        elems = sorted(self.elements)
        mul = sg.mul
        left = {}
        two = {}
        for x in elems:
            lx = {x} | {mul[t][x] for t in elems}
            left[x] = frozenset(lx)
            ideal = set(lx) | {mul[x][t] for t in elems}
            grew = True
            while grew:
                grew = False
                for y in list(ideal):
                    for t in elems:
                        for z in (mul[t][y], mul[y][t]):
                            if z in self.elements and z not in ideal:
                                ideal.add(z)
                                grew = True
            two[x] = frozenset(ideal)
        self._left = left
        self._two = two
        lclass_ids = {}
        self.lclass = {}
        for x in elems:
            self.lclass[x] = lclass_ids.setdefault(left[x], len(lclass_ids))
        self.jclass = {}
        jclass_sets = {}
        for x in elems:
            members = frozenset(
                y for y in elems if x in two[y] and y in two[x]
            )
            jclass_sets[x] = members
            self.jclass[x] = members

    def j_below(self, x, y):
        """x lies in the two-sided ideal generated by y."""
        return x in self._two[y]

    def maximal_jclass(self, values):
        """Deterministically chosen maximal J-class among the given values."""
        classes = {}
        for v in values:
            classes[min(self.jclass[v])] = self.jclass[v]

        def strictly_below(c1, c2):
            return self.j_below(min(c1), min(c2)) and not self.j_below(
                min(c2), min(c1)
            )

        maximal = [
            cls
            for cls in classes.values()
            if not any(
                other != cls and strictly_below(cls, other)
                for other in classes.values()
            )
        ]
        return min(maximal, key=min)


def _generated(sg, generators):
    """Subsemigroup generated by the given element ids."""
    elems = set(generators)
    todo = deque(elems)
    while todo:
        x = todo.popleft()
        for y in list(elems):
            for z in (sg.product(x, y), sg.product(y, x)):
                if z not in elems:
                    elems.add(z)
                    todo.append(z)
    return frozenset(elems)


# ---------------------------------------------------------------------------
# Construction


class _Builder:
    def __init__(self, recognizer):
        self.r = recognizer
        self.sg = recognizer.semigroup
        self._green_cache = {}
        self._gen_cache = {}

    def generated(self, values):
        key = frozenset(values)
        if key not in self._gen_cache:
            self._gen_cache[key] = _generated(self.sg, key)
        return self._gen_cache[key]

    def green(self, elements):
        if elements not in self._green_cache:
            self._green_cache[elements] = _Green(self.sg, elements)
        return self._green_cache[elements]

    # -- main recursion ----------------------------------------------------

    def construct(self, items):
        n = len(items)
        if n == 1:
            return items[0]
        if n == 2:
            return make_inner(self.sg, items)
        values = frozenset(it.value for it in items)
        T = self.generated(values)
        green = self.green(T)
        J = green.maximal_jclass(values)
        ideal = T - J
        if not ideal:
            return self.smooth(green, J, items)
        pieces = self._ideal_pieces(items, green, J)
        if len(pieces) == 1:
            return pieces[0]
        return self._pair_and_recurse(pieces)

    def _ideal_pieces(self, items, green, J):
        """Split into smooth blocks of J-letters and singleton ideal letters.

        Adjacent pieces always multiply into the ideal: smooth blocks are
        greedily maximal, so extending one by the next letter leaves J.
        """
        sg = self.sg
        pieces = []
        run = []
        runval = None
        for it in items:
            if it.value in J:
                if run:
                    newval = sg.product(runval, it.value)
                    if newval in J:
                        run.append(it)
                        runval = newval
                        continue
                    pieces.append(self.smooth(green, J, run))
                run = [it]
                runval = it.value
            else:
                if run:
                    pieces.append(self.smooth(green, J, run))
                    run = []
                pieces.append(it)
        if run:
            pieces.append(self.smooth(green, J, run))
        return pieces

    def _pair_and_recurse(self, pieces):
        pairs = []
        i = 0
        while i + 1 < len(pieces):
            pairs.append(make_inner(self.sg, (pieces[i], pieces[i + 1])))
            i += 2
        leftover = pieces[-1] if len(pieces) % 2 else None
        tree = pairs[0] if len(pairs) == 1 else self.construct(pairs)
        if leftover is not None:
            tree = make_inner(self.sg, (tree, leftover))
        return tree

    # -- smooth words (all infix values inside one J-class) -----------------

    def smooth(self, green, J, items):
        n = len(items)
        if n == 1:
            return items[0]
        if n == 2:
            return make_inner(self.sg, items)
        col = green.lclass[items[-1].value]
        if all(green.lclass[it.value] == col for it in items):
            # one column; if the head's cyclic idempotent stays in the class,
            # the whole word lives in a left group and needs no head split
            if self.sg.idempotent_power(items[0].value) in J:
                return self.leftgroup(items)
        seps = [i for i, it in enumerate(items) if green.lclass[it.value] == col]
        blocks = []
        prev = -1
        for s in seps:
            z = items[prev + 1 : s]
            if z:
                blocks.append(
                    make_inner(self.sg, (self.smooth(green, J, z), items[s]))
                )
            else:
                blocks.append(items[s])
            prev = s
        # the final item defines the column, so nothing trails the last block
        if len(blocks) == 1:
            return blocks[0]
        head, rest = blocks[0], blocks[1:]
        lg = rest[0] if len(rest) == 1 else self.leftgroup(rest)
        return make_inner(self.sg, (head, lg))

    # -- words over a left group --------------------------------------------

    def leftgroup(self, items):
        sg = self.sg
        n = len(items)
        if n == 1:
            return items[0]
        if n == 2:
            return make_inner(sg, items)
        e0 = sg.idempotent_power(items[0].value)
        gammas = []
        acc = e0
        for it in items[:-1]:
            acc = sg.product(acc, it.value)
            gammas.append(acc)
        ghat = e0 if e0 in gammas else min(gammas)
        cuts = [t for t, g in enumerate(gammas, start=1) if g == ghat]
        bounds = [0] + cuts + [n]
        pieces = [items[lo:hi] for lo, hi in zip(bounds, bounds[1:])]
        trees = [
            p[0] if len(p) == 1 else self.leftgroup(p) for p in pieces
        ]
        head, middle, tail = trees[0], trees[1:-1], trees[-1]
        if ghat == e0:
            # the head piece also carries the idempotent, join it to the run;
            # the tail joins too when it leaves the accumulated prefix fixed
            if sg.product(e0, tail.value) == e0:
                return self.leftzero([head] + middle + [tail])
            run = self.leftzero([head] + middle) if middle else head
            return make_inner(sg, (run, tail))
        if not middle:
            return make_inner(sg, (head, tail))
        run = self.leftzero(middle) if len(middle) > 1 else middle[0]
        return make_inner(sg, (head, make_inner(sg, (run, tail))))

    def leftzero(self, nodes):
        """Join nodes whose values are mutually absorbing idempotents (xy = x)."""
        sg = self.sg
        if len(nodes) == 1:
            return nodes[0]
        xhat = nodes[0].value
        segs = []
        cur = None
        for nd in nodes:
            if nd.value == xhat:
                if cur:
                    segs.append(cur)
                cur = [nd]
            else:
                cur.append(nd)
        segs.append(cur)
        seg_trees = []
        for seg in segs:
            if len(seg) == 1:
                seg_trees.append(seg[0])
            else:
                seg_trees.append(
                    make_inner(sg, (seg[0], self.leftzero(seg[1:])))
                )
        if len(seg_trees) == 1:
            return seg_trees[0]
        return make_inner(sg, seg_trees)


def _balanced_binary(sg, items):
    while len(items) > 1:
        nxt = []
        i = 0
        while i + 1 < len(items):
            nxt.append(make_inner(sg, (items[i], items[i + 1])))
            i += 2
        if len(items) % 2:
            nxt.append(items[-1])
        items = nxt
    return items[0]


def height_bound(recognizer):
    return 3 * recognizer.semigroup.size - 1


def build_fft(recognizer, word):
    """Canonical factorization tree for the word; deterministic in its inputs.

    The primary construction keeps the height bounded in terms of the
    subsemigroup generated by the word's letters; the result is checked
    against the 3|S|-1 bound and against the tree invariants, falling back to
    a balanced binary tree when that is shallower and still within bounds.
    """
    if len(word) == 0:
        raise ValueError("factorization trees require a nonempty word")
    leaves = []
    for a in word:
        if a not in recognizer.letter_value:
            raise ValueError(f"symbol {a!r} not in alphabet")
        leaves.append(Leaf(a, recognizer.letter_value[a]))
    tree = _Builder(recognizer).construct(leaves)
    bound = height_bound(recognizer)
    if tree.height > bound or validate_fft(recognizer, word, tree):
        fallback = _balanced_binary(recognizer.semigroup, leaves)
        if fallback.height <= bound and not validate_fft(
            recognizer, word, fallback
        ):
            return fallback
        raise FactorizationHeightError(
            f"no factorization tree within height {bound} found "
            f"(construction reached height {tree.height})"
        )
    return tree


def validate_fft(recognizer, word, tree):
    """All violations of the factorization-tree rules for (word, tree)."""
    sg = recognizer.semigroup
    violations = []
    got = tree_yield(tree)
    if got != tuple(word):
        violations.append({"node": "", "rule": "yield-mismatch",
                           "detail": f"yield {got!r} != word {tuple(word)!r}"})

    def visit(node, path):
        if isinstance(node, Leaf):
            expected = recognizer.letter_value.get(node.letter)
            if expected != node.value:
                violations.append({
                    "node": path, "rule": "label-mismatch",
                    "detail": f"leaf value {node.value} != h({node.letter!r})",
                })
            return node.value
        if len(node.children) < 2:
            violations.append({"node": path, "rule": "arity",
                               "detail": "inner node with fewer than 2 children"})
        vals = [visit(c, f"{path}.{i}" if path else str(i))
                for i, c in enumerate(node.children)]
        prod = vals[0]
        for v in vals[1:]:
            prod = sg.product(prod, v)
        if prod != node.label:
            violations.append({
                "node": path, "rule": "label-mismatch",
                "detail": f"label {node.label} != value of yield {prod}",
            })
        if len(node.children) > 2:
            labels = {c.label if isinstance(c, Inner) else c.value
                      for c in node.children}
            if len(labels) != 1 or next(iter(labels)) != node.label:
                violations.append({
                    "node": path, "rule": "wide-node-uniformity",
                    "detail": "children of a wide node must share the node label",
                })
            elif sg.product(node.label, node.label) != node.label:
                violations.append({
                    "node": path, "rule": "wide-node-idempotence",
                    "detail": f"label {node.label} is not idempotent",
                })
        return node.label

    visit(tree, "")
    bound = height_bound(recognizer)
    if tree.height > bound:
        violations.append({
            "node": "", "rule": "height-overflow",
            "detail": f"height {tree.height} exceeds {bound}",
        })
    return violations


def infix_value(recognizer, tree, i, j):
    """Value of the yield segment [i..j] (1-based, inclusive).

    Walks at most O(height) partially-covered nodes per side; runs of
    fully-covered children under a wide node collapse to one idempotent.
    """
    if not (1 <= i <= j <= tree.width):
        raise ValueError(f"infix [{i},{j}] out of range 1..{tree.width}")
    sg = recognizer.semigroup

    def go(node, lo):
        hi = lo + node.width - 1
        if i <= lo and hi <= j:
            return node.value
        assert isinstance(node, Inner)
        parts = []
        pos = lo
        wide = len(node.children) > 2
        run_open = False
        for c in node.children:
            clo, chi = pos, pos + c.width - 1
            pos += c.width
            if chi < i or clo > j:
                run_open = False
                continue
            if i <= clo and chi <= j:
                if wide:
                    if not run_open:
                        parts.append(node.label)
                        run_open = True
                else:
                    parts.append(c.value)
            else:
                run_open = False
                parts.append(go(c, clo))
        acc = parts[0]
        for p in parts[1:]:
            acc = sg.product(acc, p)
        return acc

    return go(tree, 1)
