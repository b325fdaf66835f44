"""Transition semigroups of query automata and profile-based acceptance.

The recognizer of a query is the semigroup generated by the state functions of
the unmarked letters, together with shortest witness words for every element.
Replacing an unmarked infix by another word with the same element never changes
membership of a pointed word, which is what makes these semigroups useful for
growth analysis.
"""

from collections import deque
from dataclasses import dataclass, field

from .words import PointedWord, Query

MONOID_CAP_DEFAULT = 10_000


class MonoidBudgetExceeded(RuntimeError):
    pass


class EmptyWordError(ValueError):
    pass


@dataclass(frozen=True)
class Semigroup:
    """Finite semigroup given by a total multiplication table.

    Element ids are 0..size-1; mul[i][j] is the product "i then j".
    """

    mul: tuple

    @property
    def size(self):
        return len(self.mul)

    def product(self, x, y):
        return self.mul[x][y]

    def product_of(self, elems):
        it = iter(elems)
        try:
            acc = next(it)
        except StopIteration:
            raise EmptyWordError("empty products are not defined in the semigroup")
        for e in it:
            acc = self.mul[acc][e]
        return acc

    def idempotents(self):
        return frozenset(e for e in range(self.size) if self.mul[e][e] == e)

    def idempotent_power(self, x):
        """The unique idempotent in the cyclic subsemigroup generated by x."""
        seen = {}
        y = x
        i = 1
        while y not in seen:
            seen[y] = i
            y = self.mul[y][x]
            i += 1
        # cycle of length i - seen[y], entered at seen[y]
        start = seen[y]
        period = i - start
        power = start
        while power % period != 0 or power < start:
            power += 1
        z = x
        for _ in range(power - 1):
            z = self.mul[z][x]
        return z

    def check_associativity(self, cap=200):
        """Exhaustive associativity check; raises ValueError on failure.

        Only sizes up to `cap` are checked exhaustively (cubic cost).
        Returns True when checked, False when skipped due to size.
        """
        n = self.size
        if n > cap:
            return False
        mul = self.mul
        for a in range(n):
            for b in range(n):
                ab = mul[a][b]
                row_b = mul[b]
                row_ab = mul[ab]
                for c in range(n):
                    if row_ab[c] != mul[a][row_b[c]]:
                        raise ValueError(
                            f"multiplication not associative at ({a},{b},{c})"
                        )
        return True


@dataclass(frozen=True)
class Recognizer:
    """Semigroup recognition data for a query.

    `letter_value` maps each symbol to the element of its unmarked letter,
    `functions[s]` is the state function of element s on the query DFA, and
    `witness[s]` is a shortest word with value s (ties broken lexicographically
    in alphabet order).  The image of nonempty words is the whole semigroup by
    construction, recorded explicitly in `image`.
    """

    query: Query
    semigroup: Semigroup
    letter_value: dict
    functions: tuple
    witness: dict

    @property
    def image(self):
        return frozenset(range(self.semigroup.size))

    def h_value(self, word):
        if len(word) == 0:
            raise EmptyWordError("h is defined on nonempty words only")
        vals = []
        for a in word:
            if a not in self.letter_value:
                raise ValueError(f"symbol {a!r} not in alphabet")
            vals.append(self.letter_value[a])
        return self.semigroup.product_of(vals)

    def apply(self, element, state):
        """Run the state function of `element` from `state`."""
        return self.functions[element][state]

    def idempotents(self):
        return self.semigroup.idempotents()


def compile_query(q: Query, monoid_cap=MONOID_CAP_DEFAULT) -> Recognizer:
    """Transition semigroup of the unmarked letters, with shortest witnesses."""
    dfa = q.dfa
    letter_fn = {
        a: dfa.letter_function((a, frozenset())) for a in q.alphabet.symbols
    }
    index = {}
    functions = []
    witnesses = []
    order = []
    for a in q.alphabet.symbols:
        f = letter_fn[a]
        if f not in index:
            index[f] = len(functions)
            functions.append(f)
            witnesses.append((a,))
            order.append(index[f])
    letter_value = {a: index[letter_fn[a]] for a in q.alphabet.symbols}
    # BFS closure by witness length; within a layer extensions come in
    # lexicographic order, so the first witness found is length-lex minimal.
    frontier = deque(range(len(functions)))
    while frontier:
        x = frontier.popleft()
        fx = functions[x]
        for a in q.alphabet.symbols:
            fa = letter_fn[a]
            g = tuple(fa[s] for s in fx)
            if g not in index:
                if len(functions) >= monoid_cap:
                    raise MonoidBudgetExceeded(
                        f"transition semigroup exceeds the cap of {monoid_cap}"
                    )
                index[g] = len(functions)
                functions.append(g)
                witnesses.append(witnesses[x] + (a,))
                frontier.append(index[g])
    size = len(functions)
    mul = tuple(
        tuple(
            index[tuple(functions[y][s] for s in functions[x])]
            for y in range(size)
        )
        for x in range(size)
    )
    sg = Semigroup(mul)
    return Recognizer(
        query=q,
        semigroup=sg,
        letter_value=letter_value,
        functions=tuple(functions),
        witness={i: witnesses[i] for i in range(size)},
    )


@dataclass(frozen=True)
class Profile:
    """Order, labels and variable sets of the distinguished positions, plus the
    semigroup values of the separating infixes (None encodes an empty infix)."""

    groups: tuple  # of (letter, frozenset of variables)
    gaps: tuple  # of element ids or None, length len(groups)+1

    def __post_init__(self):
        if len(self.gaps) != len(self.groups) + 1:
            raise ValueError("gap count must be one more than group count")


def profile_of(r: Recognizer, pw: PointedWord) -> Profile:
    if pw.variables != r.query.var_set:
        raise ValueError("pointed word variables differ from the query's")
    positions = {}
    for v, p in pw.assignment.items():
        positions.setdefault(p, set()).add(v)
    cut_points = sorted(positions)
    groups = tuple(
        (pw.word[p - 1], frozenset(positions[p])) for p in cut_points
    )
    gaps = []
    bounds = [0] + cut_points + [len(pw.word) + 1]
    for lo, hi in zip(bounds, bounds[1:]):
        infix = pw.word[lo : hi - 1]
        gaps.append(r.h_value(infix) if infix else None)
    return Profile(groups, tuple(gaps))


def accept_profile(r: Recognizer, p: Profile) -> bool:
    """Run the query DFA symbolically on a profile."""
    seen = set()
    for _, g in p.groups:
        if not g:
            raise ValueError("profile group with empty variable set")
        if g & seen:
            raise ValueError("profile groups do not partition the variables")
        seen |= g
    if seen != r.query.var_set:
        raise ValueError("profile groups do not cover the query variables")
    dfa = r.query.dfa
    state = dfa.initial
    for i, (letter, grp) in enumerate(p.groups):
        if p.gaps[i] is not None:
            state = r.apply(p.gaps[i], state)
        state = dfa.delta[(state, (letter, grp))]
    if p.gaps[-1] is not None:
        state = r.apply(p.gaps[-1], state)
    return state in dfa.accepting
