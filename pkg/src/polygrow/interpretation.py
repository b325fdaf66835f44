"""String-to-string interpretations whose output positions are input tuples.

An interpretation has components, each of dimension k: label queries pick the
k-tuples of input positions that become output positions (at most one label
per tuple), and pairwise order queries arrange the picked tuples into the
output word.  The growth of the output equals n^k for the largest component
exponent k, and the interpretation can be rebuilt over seed tuples of that
dimension without changing its semantics.
"""

import json
from dataclasses import dataclass, field
from itertools import product as iproduct

from . import parser
from .analysis import EMPTY, decompose, exponent
from .parser import Alt, Atom, Concat, LooseAtom, Star
from .semigroups import compile_query
from .words import (
    Alphabet,
    Query,
    count_tuples,
    parse_query,
    query_and,
    query_from_ast,
    query_not,
    query_or,
    select_tuples,
)


class LabelAmbiguityError(ValueError):
    pass


class OrderRelationError(ValueError):
    pass


class HorizonExceededError(RuntimeError):
    """An accepted tuple's skeleton was never seen below the horizon."""


def xvars(k):
    return tuple(f"x{i}" for i in range(1, k + 1))


def yvars(k):
    return tuple(f"y{i}" for i in range(1, k + 1))


@dataclass(frozen=True)
class Component:
    dimension: int
    labels: dict  # output letter -> Query over x1..xk


@dataclass(frozen=True)
class MsoInterpretation:
    input_alphabet: Alphabet
    output_alphabet: tuple
    empty_output: tuple
    components: tuple
    orders: dict  # (i, j) -> Query over x-vars of i and y-vars of j

    @property
    def dimension(self):
        return max((c.dimension for c in self.components), default=0)

    def label_of(self, word, ci, positions):
        comp = self.components[ci]
        hits = [
            letter
            for letter, q in sorted(comp.labels.items())
            if q.selects(word, positions)
        ]
        if len(hits) > 1:
            raise LabelAmbiguityError(
                f"component {ci} tuple {positions} carries labels {hits}"
            )
        return hits[0] if hits else None

    def selected(self, word):
        """All (component, tuple, label) triples, label queries applied."""
        out = []
        n = len(word)
        for ci, comp in enumerate(self.components):
            if comp.dimension == 0:
                label = self.label_of(word, ci, ())
                if label is not None:
                    out.append((ci, (), label))
                continue
            if n == 0:
                continue
            for pos in iproduct(range(1, n + 1), repeat=comp.dimension):
                label = self.label_of(word, ci, pos)
                if label is not None:
                    out.append((ci, pos, label))
        return out

    def order_holds(self, word, ci, pos_i, cj, pos_j):
        q = self.orders.get((ci, cj))
        if q is None:
            raise OrderRelationError(f"no order query for components ({ci},{cj})")
        named = {}
        for v, p in zip(xvars(self.components[ci].dimension), pos_i):
            named[v] = p
        for v, p in zip(yvars(self.components[cj].dimension), pos_j):
            named[v] = p
        positions = tuple(named[v] for v in q.variables)
        return q.selects(word, positions)

    def configurations(self, word):
        """Selected (component, tuple) pairs in output order."""
        return [(ci, pos) for ci, pos, _ in self._sorted_items(word)]

    def _sorted_items(self, word):
        items = self.selected(word)
        oracle = _OrderOracle(self, word)
        _audit_order(items, oracle)
        import functools

        def cmp(a, b):
            if a[:2] == b[:2]:
                return 0
            return -1 if oracle.le(a, b) else 1

        return sorted(items, key=functools.cmp_to_key(cmp))

    def eval(self, word):
        word = tuple(word)
        if not word:
            return self.empty_output
        return tuple(label for _, _, label in self._sorted_items(word))


class _OrderOracle:
    def __init__(self, interp, word):
        self.interp = interp
        self.word = word
        self.memo = {}

    def le(self, a, b):
        key = (a[0], a[1], b[0], b[1])
        if key not in self.memo:
            self.memo[key] = self.interp.order_holds(
                self.word, a[0], a[1], b[0], b[1]
            )
        return self.memo[key]


def _audit_order(items, oracle, pair_cap=250_000):
    """Totality and antisymmetry on all pairs (sampled beyond the cap),
    transitivity on a deterministic sample of triples."""
    m = len(items)
    if m <= 1:
        return
    pairs = []
    if m * (m - 1) <= pair_cap:
        pairs = [
            (items[i], items[j]) for i in range(m) for j in range(i + 1, m)
        ]
    else:
        step = max(1, (m * (m - 1)) // pair_cap)
        flat = [(i, j) for i in range(m) for j in range(i + 1, m)]
        pairs = [(items[i], items[j]) for i, j in flat[::step]]
    for a, b in pairs:
        ab, ba = oracle.le(a, b), oracle.le(b, a)
        if ab and ba:
            raise OrderRelationError(
                f"order not antisymmetric between {a[:2]} and {b[:2]}"
            )
        if not ab and not ba:
            raise OrderRelationError(
                f"order not total between {a[:2]} and {b[:2]}"
            )
    import itertools

    count = 0
    for a, b, c in itertools.islice(itertools.combinations(items, 3), 300):
        if oracle.le(a, b) and oracle.le(b, c) and not oracle.le(a, c):
            raise OrderRelationError(
                f"order not transitive on {a[:2]}, {b[:2]}, {c[:2]}"
            )
        count += 1


def eval_interpretation(interp: MsoInterpretation, word):
    return interp.eval(word)


# ---------------------------------------------------------------------------
# Growth and optimization


def component_union_query(interp, ci):
    comp = interp.components[ci]
    queries = [q for _, q in sorted(comp.labels.items())]
    if not queries:
        return None
    out = queries[0]
    for q in queries[1:]:
        out = query_or(out, q)
    return out


def interp_growth(interp: MsoInterpretation):
    """The exact growth exponent: max component exponent of the label unions."""
    best = EMPTY
    for ci in range(len(interp.components)):
        union = component_union_query(interp, ci)
        if union is None or union.is_empty():
            continue
        k = exponent(compile_query(union))
        if k == EMPTY:
            continue
        if best == EMPTY or k > best:
            best = k
    return best


def output_growth_table(interp, max_len):
    table = []
    best = 0
    for n in range(1, max_len + 1):
        for word in iproduct(interp.input_alphabet.symbols, repeat=n):
            best = max(best, len(interp.eval(word)))
        table.append((n, best))
    return table


@dataclass(frozen=True)
class OptimizedInterpretation:
    """Semantic reformulation over seed tuples observed below a horizon.

    Components are (original component, skeleton key) pairs whose positions
    are seed assignments; labels and order delegate to the original queries
    through the unique extension of each seed.  Inputs whose accepted tuples
    exhibit unseen skeletons raise HorizonExceededError.
    """

    base: MsoInterpretation
    horizon: int
    dimension: int
    parts: tuple  # (component index, skeleton key, seed variables tuple)
    recognizers: dict = field(hash=False)

    def extended_items(self, word):
        """Seed tuples extended to full tuples, batched per word.

        The per-word index realizes the same search as seed_extension: every
        accepted tuple is grouped under its skeleton key, and two tuples
        agreeing on the key's seed variables are a hard uniqueness error.
        Keys absent from the decomposition raise the horizon diagnostic.
        """
        from .fft import build_fft
        from .skeletons import SeedUniquenessError, TreeIndex, skeleton

        known = {}
        for ci, key, seed_vars in self.parts:
            known.setdefault(ci, {})[key] = seed_vars
        out = []
        for ci in sorted(known):
            rec = self.recognizers[ci]
            variables = rec.query.variables
            accepted = select_tuples(rec.query, word)
            if not accepted:
                continue
            if not variables:
                if ("no-variables",) not in known[ci]:
                    raise HorizonExceededError(
                        f"variable-free component {ci} selects beyond horizon"
                    )
                out.extend((ci, pos) for pos in accepted)
                continue
            idx = TreeIndex(build_fft(rec, word))
            vindex = {v: i for i, v in enumerate(variables)}
            groups = {}
            for pos in accepted:
                key = skeleton(idx, dict(zip(variables, pos))).canonical_key
                groups.setdefault(key, []).append(pos)
            for key, tuples in groups.items():
                if key not in known[ci]:
                    raise HorizonExceededError(
                        f"tuple {tuples[0]} of component {ci} has a skeleton "
                        f"not seen below horizon {self.horizon}"
                    )
                seed_vars = known[ci][key]
                projections = {}
                for pos in tuples:
                    p = tuple(pos[vindex[v]] for v in seed_vars)
                    if p in projections:
                        raise SeedUniquenessError(
                            f"seed tuple {p} of component {ci} extends to both "
                            f"{projections[p]} and {pos}"
                        )
                    projections[p] = pos
                out.extend((ci, pos) for pos in tuples)
        return out

    def verify(self, max_len):
        """Byte equality of optimized and original outputs up to max_len."""
        for n in range(0, max_len + 1):
            for word in iproduct(self.base.input_alphabet.symbols, repeat=n):
                if self.eval(word) != self.base.eval(word):
                    raise AssertionError(
                        f"optimized output differs on {''.join(word)!r}"
                    )
        return True

    def eval(self, word):
        word = tuple(word)
        if not word:
            return self.base.empty_output
        items = []
        for ci, pos in self.extended_items(word):
            label = self.base.label_of(word, ci, pos)
            if label is None:
                raise AssertionError("extended tuple lost its label")
            items.append((ci, pos, label))
        oracle = _OrderOracle(self.base, word)
        _audit_order(items, oracle)
        import functools

        def cmp(a, b):
            if a[:2] == b[:2]:
                return 0
            return -1 if oracle.le(a, b) else 1

        return tuple(l for _, _, l in sorted(items, key=functools.cmp_to_key(cmp)))


def optimize(interp: MsoInterpretation, horizon=8, budget=None):
    """Reformulate over seeds; the reported dimension equals the growth."""
    parts = []
    recognizers = {}
    dim = 0
    for ci in range(len(interp.components)):
        union = component_union_query(interp, ci)
        if union is None or union.is_empty():
            continue
        rec = compile_query(union)
        recognizers[ci] = rec
        for disjunct in decompose(rec, horizon, budget=budget):
            seed_vars = tuple(sorted(disjunct["seed"]))
            parts.append((ci, disjunct["skeleton"], seed_vars))
            dim = max(dim, len(seed_vars))
    return OptimizedInterpretation(
        base=interp,
        horizon=horizon,
        dimension=dim,
        parts=tuple(parts),
        recognizers=recognizers,
    )


# ---------------------------------------------------------------------------
# Stack discipline


def stacks_compatible(s1, s2):
    """Stack discipline between consecutive configurations.

    Directly compatible pairs are push/pop (one stack a prefix of the other)
    and move (equal length, equal except the head).  A compound of the three
    primitive steps is also compatible: pop to the divergence level, move the
    exposed pebble, then push fresh pebbles which start at the leftmost
    position; this is what makes the lexicographic successor admissible while
    an order that jumps two pebbles at once is not.
    """
    s1, s2 = tuple(s1), tuple(s2)
    if _is_prefix(s1, s2) or _is_prefix(s2, s1):
        return True
    if len(s1) == len(s2) and s1[:-1] == s2[:-1]:
        return True
    d = 0
    while d < min(len(s1), len(s2)) and s1[d] == s2[d]:
        d += 1
    return all(p == 1 for p in s2[d + 1 :])


def discipline_check(source, max_len, alphabet=None):
    """Violations of pebble stack discipline over all inputs up to max_len.

    `source` provides configurations(word) -> ordered (state, stack) pairs.
    """
    if alphabet is None:
        alphabet = source.input_alphabet
    violations = []
    for n in range(0, max_len + 1):
        for word in iproduct(alphabet.symbols, repeat=n):
            configs = source.configurations(word)
            for i in range(len(configs) - 1):
                if stacks_compatible(configs[i][1], configs[i + 1][1]):
                    continue
                violations.append(
                    {
                        "word": word,
                        "index": i,
                        "from": configs[i],
                        "to": configs[i + 1],
                    }
                )
    return violations


def _is_prefix(a, b):
    return len(a) <= len(b) and tuple(b[: len(a)]) == tuple(a)


# ---------------------------------------------------------------------------
# Query builders for common orders


def any_marks_star():
    return Star(LooseAtom(None, frozenset()))


def pattern_query(alphabet, variables, blocks):
    """Query: the given mark blocks occur in order, anything in between.

    Each block is (letters-or-None, frozenset-of-variables); None allows any
    letter.  Variables not mentioned are not constrained by this builder, so
    callers must cover all of them across conjunctions.
    """
    parts = [any_marks_star()]
    for letters, req in blocks:
        parts.append(LooseAtom(letters, frozenset(req)))
        parts.append(any_marks_star())
    return query_from_ast(Concat(tuple(parts)), alphabet, variables)


def prim_before(alphabet, variables, x, y):
    return pattern_query(alphabet, variables, [(None, {x}), (None, {y})])


def prim_same(alphabet, variables, x, y):
    return pattern_query(alphabet, variables, [(None, {x, y})])


def prim_label(alphabet, variables, x, letter):
    return pattern_query(alphabet, variables, [({letter}, {x})])


def prim_any(alphabet, variables):
    return query_from_ast(any_marks_star(), alphabet, variables)


def position_le(alphabet, variables, x, y):
    return query_or(
        prim_before(alphabet, variables, x, y), prim_same(alphabet, variables, x, y)
    )


def lex_order_query(alphabet, k_left, k_right=None):
    """Lexicographic <= between an x-tuple and a y-tuple of positions."""
    k_right = k_left if k_right is None else k_right
    variables = xvars(k_left) + yvars(k_right)
    k = min(k_left, k_right)
    disjuncts = []
    for i in range(k):
        conj = prim_before(alphabet, variables, f"x{i+1}", f"y{i+1}")
        for j in range(i):
            conj = query_and(
                conj, prim_same(alphabet, variables, f"x{j+1}", f"y{j+1}")
            )
        disjuncts.append(conj)
    all_eq = prim_any(alphabet, variables)
    for j in range(k):
        all_eq = query_and(
            all_eq, prim_same(alphabet, variables, f"x{j+1}", f"y{j+1}")
        )
    disjuncts.append(all_eq)
    out = disjuncts[0]
    for d in disjuncts[1:]:
        out = query_or(out, d)
    return out


# ---------------------------------------------------------------------------
# File format


def interpretation_from_dict(doc):
    input_alphabet = Alphabet(tuple(doc["input_alphabet"]))
    output_alphabet = tuple(doc["output_alphabet"])
    out_parse = Alphabet(output_alphabet)
    empty_output = out_parse.parse_word(doc.get("empty_output", ""))
    components = []
    orders = {}
    for ci, centry in enumerate(doc["components"]):
        k = int(centry["dimension"])
        labels = {}
        for letter, regex in centry.get("labels", {}).items():
            if letter not in output_alphabet:
                raise ValueError(f"label letter {letter!r} not in output alphabet")
            labels[letter] = parse_query(regex, input_alphabet, xvars(k))
        components.append(Component(dimension=k, labels=labels))
        for key, regex in centry.get("orders", {}).items():
            i, j = (int(p) for p in key.split(","))
            orders[(i, j)] = (regex, None)
    # orders may reference any pair; compile once dimensions are known
    compiled = {}
    for (i, j), (regex, _) in orders.items():
        ki = components[i].dimension
        kj = components[j].dimension
        compiled[(i, j)] = parse_query(
            regex, input_alphabet, xvars(ki) + yvars(kj)
        )
    return MsoInterpretation(
        input_alphabet=input_alphabet,
        output_alphabet=output_alphabet,
        empty_output=empty_output,
        components=tuple(components),
        orders=compiled,
    )


def load_interpretation(path):
    with open(path, encoding="utf-8") as fh:
        return interpretation_from_dict(json.load(fh))
