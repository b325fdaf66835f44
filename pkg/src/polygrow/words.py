"""Alphabets, pointed words, and regular position queries.

A query over variables X selects pointed words: words with one distinguished
position per variable.  Queries are stored as complete DFAs over the marked
alphabet and are always intersected with the well-formedness language (every
variable marks exactly one position) at construction time.
"""

import os
from dataclasses import dataclass, field
from itertools import product as iproduct
from typing import NamedTuple

from . import automata, parser
from .automata import DFA, NFA, marked_alphabet, mark_subsets, well_formedness_dfa

DEFAULT_BUDGET = 5_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, attempted, budget):
        super().__init__(
            f"enumeration of {attempted} cases exceeds the budget of {budget}"
        )
        self.attempted = attempted
        self.budget = budget


def current_budget(override=None):
    if override is not None:
        return override
    return int(os.environ.get("POLYGROW_BUDGET", DEFAULT_BUDGET))


class MarkedLetter(NamedTuple):
    letter: str
    marks: frozenset


@dataclass(frozen=True)
class Alphabet:
    """Ordered finite set of printable symbol tokens."""

    symbols: tuple

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("alphabet must be nonempty")
        if len(set(self.symbols)) != len(self.symbols):
            raise ValueError("alphabet symbols must be distinct")
        for s in self.symbols:
            if not s or any(c.isspace() for c in s) or not s.isprintable():
                raise ValueError(f"bad alphabet symbol {s!r}")

    def __contains__(self, sym):
        return sym in self.symbols

    def __iter__(self):
        return iter(self.symbols)

    def parse_word(self, text):
        """Parse CLI text into a word (tuple of symbols).

        Whitespace-separated tokens are used when present; otherwise, if all
        symbols are single characters, the text is read character by character.
        """
        if text == "":
            return ()
        if any(c.isspace() for c in text):
            toks = tuple(text.split())
        elif all(len(s) == 1 for s in self.symbols):
            toks = tuple(text)
        else:
            toks = (text,)
        for t in toks:
            if t not in self.symbols:
                raise ValueError(f"symbol {t!r} not in alphabet")
        return toks


@dataclass(frozen=True)
class PointedWord:
    """A word plus a finite map from variable names to 1-based positions."""

    word: tuple
    assignment: dict = field(default_factory=dict)

    def __post_init__(self):
        for v, p in self.assignment.items():
            if not 1 <= p <= len(self.word):
                raise ValueError(f"variable {v} points outside the word ({p})")
        if not self.word and self.assignment:
            raise ValueError("empty word admits no distinguished positions")

    @property
    def variables(self):
        return frozenset(self.assignment)

    def marked(self):
        """The marked-word expansion: one marked letter per position."""
        marks = [set() for _ in self.word]
        for v, p in self.assignment.items():
            marks[p - 1].add(v)
        return tuple(
            (a, frozenset(g)) for a, g in zip(self.word, marks)
        )


class VariableOverlap(ValueError):
    pass


def concat_pointed(u: PointedWord, v: PointedWord) -> PointedWord:
    """Concatenate pointed words with disjoint variable sets."""
    shared = u.variables & v.variables
    if shared:
        raise VariableOverlap(f"shared variables: {sorted(shared)}")
    offset = len(u.word)
    assignment = dict(u.assignment)
    assignment.update({v_: p + offset for v_, p in v.assignment.items()})
    return PointedWord(u.word + v.word, assignment)


@dataclass(frozen=True)
class Query:
    """A set of pointed words, recognized by a complete DFA over marked letters.

    `trimmed` records whether intersecting with the well-formedness language
    removed words the raw construction accepted.
    """

    alphabet: Alphabet
    variables: tuple
    dfa: DFA
    trimmed: bool = False

    @property
    def var_set(self):
        return frozenset(self.variables)

    def marked_word(self, word, positions):
        """Marked expansion of `word` with `positions` aligned to variables."""
        marks = [set() for _ in word]
        for v, p in zip(self.variables, positions):
            marks[p - 1].add(v)
        return tuple((a, frozenset(g)) for a, g in zip(word, marks))

    def selects(self, word, positions):
        return self.dfa.accepts(self.marked_word(word, positions))

    def accepts_pointed(self, pw: PointedWord):
        if pw.variables != self.var_set:
            raise ValueError("pointed word variables differ from the query's")
        return self.dfa.accepts(pw.marked())

    def is_empty(self):
        return self.dfa.is_empty()


def _finish_query(alphabet, variables, raw_dfa):
    """Intersect with well-formedness, minimize, and detect trimming."""
    wf = well_formedness_dfa(alphabet.symbols, variables)
    trimmed = not automata.product(raw_dfa, wf, "minus").is_empty()
    dfa = automata.minimize(automata.product(raw_dfa, wf, "and"))
    return Query(alphabet, tuple(sorted(variables)), dfa, trimmed)


def query_from_ast(ast, alphabet, variables):
    """Compile a regex AST into a Query."""
    letters = marked_alphabet(alphabet.symbols, variables)
    nfa = NFA(letters)
    start, accept = parser.ast_to_nfa(ast, nfa, list(alphabet.symbols))
    nfa.initial = start
    nfa.accepting = {accept}
    return _finish_query(alphabet, variables, nfa.determinize())


def parse_query(text, alphabet, variables):
    """Parse regex source into a Query over the given alphabet and variables."""
    if isinstance(alphabet, (list, tuple)):
        alphabet = Alphabet(tuple(alphabet))
    ast = parser.parse_regex(text, alphabet.symbols, variables)
    return query_from_ast(ast, alphabet, variables)


def query_from_dfa(dfa, alphabet, variables):
    """Wrap an explicit DFA (over the full marked alphabet) as a Query."""
    return _finish_query(alphabet, tuple(sorted(variables)), dfa)


def query_and(q1, q2):
    _check_compatible(q1, q2)
    dfa = automata.minimize(automata.product(q1.dfa, q2.dfa, "and"))
    return Query(q1.alphabet, q1.variables, dfa, q1.trimmed or q2.trimmed)


def query_or(q1, q2):
    _check_compatible(q1, q2)
    dfa = automata.minimize(automata.product(q1.dfa, q2.dfa, "or"))
    return Query(q1.alphabet, q1.variables, dfa, q1.trimmed or q2.trimmed)


def query_not(q):
    """Complement within the well-formed universe."""
    wf = well_formedness_dfa(q.alphabet.symbols, q.variables)
    dfa = automata.minimize(automata.product(automata.complement(q.dfa), wf, "and"))
    return Query(q.alphabet, q.variables, dfa, q.trimmed)


def _check_compatible(q1, q2):
    if q1.alphabet != q2.alphabet or q1.variables != q2.variables:
        raise ValueError("queries over different alphabets or variable sets")


def select_tuples(q: Query, word):
    """All assignments selected by `q` on `word`.

    Returns position tuples aligned with the query's sorted variable order, in
    lexicographic order.  Enumerates all |w|^|X| assignments and runs the DFA.
    """
    k = len(q.variables)
    n = len(word)
    if k == 0:
        marked = tuple((a, frozenset()) for a in word)
        return [()] if q.dfa.accepts(marked) else []
    if n == 0:
        return []
    out = []
    for positions in iproduct(range(1, n + 1), repeat=k):
        if q.selects(word, positions):
            out.append(positions)
    return out


def count_tuples(q: Query, word):
    """Number of selected assignments, computed by dynamic programming.

    Agrees with len(select_tuples(q, word)) but runs in time polynomial in the
    word length (states x mark subsets per position) instead of |w|^|X|.
    """
    n = len(word)
    k = len(q.variables)
    if n == 0:
        return 1 if (k == 0 and q.dfa.initial in q.dfa.accepting) else 0
    subsets = mark_subsets(q.variables)
    full = frozenset(q.variables)
    state = {(q.dfa.initial, frozenset()): 1}
    for a in word:
        nxt = {}
        for (s, used), c in state.items():
            for g in subsets:
                if g & used:
                    continue
                key = (q.dfa.delta[(s, (a, g))], used | g)
                nxt[key] = nxt.get(key, 0) + c
        state = nxt
    return sum(
        c for (s, used), c in state.items() if used == full and s in q.dfa.accepting
    )


def parse_query_file(text):
    """Query file: lines `alphabet: a b c`, `vars: x1 x2`, `query: <regex>`."""
    alphabet = None
    variables = None
    regex = None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise ValueError(f"bad query-file line {line!r}")
        key, _, rest = line.partition(":")
        key = key.strip()
        if key == "alphabet":
            alphabet = Alphabet(tuple(rest.split()))
        elif key == "vars":
            variables = tuple(rest.split())
        elif key == "query":
            regex = rest.strip()
        else:
            raise ValueError(f"unknown query-file key {key!r}")
    if alphabet is None or regex is None:
        raise ValueError("query file needs `alphabet:` and `query:` lines")
    return parse_query(regex, alphabet, variables or ())


def load_query_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_query_file(fh.read())


def growth_table(q: Query, max_len, budget=None):
    """Entries (n, max tuple count over all words of length <= n), 1 <= n <= max_len."""
    budget = current_budget(budget)
    sigma = len(q.alphabet.symbols)
    k = max(1, len(q.variables))
    attempted = sum(sigma ** n * n ** k for n in range(1, max_len + 1))
    if attempted > budget:
        raise BudgetExceeded(attempted, budget)
    best = 0
    table = []
    for n in range(1, max_len + 1):
        for word in iproduct(q.alphabet.symbols, repeat=n):
            best = max(best, count_tuples(q, word))
        table.append((n, best))
    return table
