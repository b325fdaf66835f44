"""Deterministic and nondeterministic automata over marked alphabets.

A marked letter is a pair (symbol, frozenset of variable names).  Queries are
recognized by complete DFAs over the alphabet ``symbols x subsets(variables)``.
"""

from collections import deque
from dataclasses import dataclass
from itertools import chain, combinations


def mark_subsets(variables):
    """All frozensets of the variable collection, smallest first."""
    vs = sorted(variables)
    return [frozenset(c) for r in range(len(vs) + 1) for c in combinations(vs, r)]


def marked_alphabet(symbols, variables):
    """The full marked alphabet, in a canonical order."""
    return [(a, g) for a in symbols for g in mark_subsets(variables)]


@dataclass(frozen=True)
class DFA:
    """Complete deterministic automaton.

    States are 0..n-1, `delta` maps (state, letter) -> state and is total over
    `alphabet`, which is an ordered tuple of letters.
    """

    n_states: int
    alphabet: tuple
    delta: dict
    initial: int
    accepting: frozenset

    def step(self, state, letter):
        return self.delta[(state, letter)]

    def run(self, word, start=None):
        q = self.initial if start is None else start
        for letter in word:
            q = self.delta[(q, letter)]
        return q

    def accepts(self, word):
        return self.run(word) in self.accepting

    def letter_function(self, letter):
        """The state transformation performed by one letter."""
        return tuple(self.delta[(q, letter)] for q in range(self.n_states))

    def reachable_states(self):
        seen = {self.initial}
        todo = deque([self.initial])
        while todo:
            q = todo.popleft()
            for a in self.alphabet:
                r = self.delta[(q, a)]
                if r not in seen:
                    seen.add(r)
                    todo.append(r)
        return seen

    def is_empty(self):
        return not (self.reachable_states() & self.accepting)

    def some_accepted_word(self, max_len=None):
        """A shortest accepted word, or None. BFS, letters in alphabet order."""
        if self.initial in self.accepting:
            return ()
        seen = {self.initial}
        todo = deque([(self.initial, ())])
        while todo:
            q, w = todo.popleft()
            if max_len is not None and len(w) >= max_len:
                continue
            for a in self.alphabet:
                r = self.delta[(q, a)]
                if r in seen:
                    continue
                if r in self.accepting:
                    return w + (a,)
                seen.add(r)
                todo.append((r, w + (a,)))
        return None


class NFA:
    """Thompson-style NFA with epsilon moves, used only as a construction aid."""

    def __init__(self, alphabet):
        self.alphabet = list(alphabet)
        self.n = 0
        self.eps = {}
        self.trans = {}
        self.initial = None
        self.accepting = set()

    def new_state(self):
        s = self.n
        self.n += 1
        self.eps[s] = set()
        self.trans[s] = {}
        return s

    def add_eps(self, p, q):
        self.eps[p].add(q)

    def add_arc(self, p, letter, q):
        self.trans[p].setdefault(letter, set()).add(q)

    def eps_closure(self, states):
        out = set(states)
        todo = list(states)
        while todo:
            s = todo.pop()
            for t in self.eps[s]:
                if t not in out:
                    out.add(t)
                    todo.append(t)
        return frozenset(out)

    def determinize(self):
        """Subset construction; the result is complete (an implicit sink)."""
        alphabet = tuple(self.alphabet)
        start = self.eps_closure({self.initial})
        index = {start: 0}
        order = [start]
        delta = {}
        todo = deque([start])
        while todo:
            s = todo.popleft()
            i = index[s]
            for a in alphabet:
                nxt = set()
                for p in s:
                    nxt |= self.trans[p].get(a, set())
                t = self.eps_closure(nxt)
                if t not in index:
                    index[t] = len(order)
                    order.append(t)
                    todo.append(t)
                delta[(i, a)] = index[t]
        accepting = frozenset(
            i for s, i in index.items() if s & self.accepting
        )
        return DFA(len(order), alphabet, delta, 0, accepting)


def minimize(dfa):
    """Moore partition refinement followed by canonical renumbering."""
    states = range(dfa.n_states)
    block = {q: (q in dfa.accepting) for q in states}
    n_blocks = 2 if 0 < len(dfa.accepting) < dfa.n_states else 1
    if n_blocks == 1:
        block = {q: 0 for q in states}
    while True:
        sig = {}
        for q in states:
            sig[q] = (block[q],) + tuple(
                block[dfa.delta[(q, a)]] for a in dfa.alphabet
            )
        new_ids = {}
        new_block = {}
        for q in states:
            new_block[q] = new_ids.setdefault(sig[q], len(new_ids))
        if len(new_ids) == len(set(block.values())):
            block = new_block
            break
        block = new_block
    # quotient automaton
    delta = {}
    for q in states:
        for a in dfa.alphabet:
            delta[(block[q], a)] = block[dfa.delta[(q, a)]]
    accepting = frozenset(block[q] for q in dfa.accepting)
    quotient = DFA(
        len(set(block.values())), dfa.alphabet, delta, block[dfa.initial], accepting
    )
    return canonical_renumber(quotient)


def canonical_renumber(dfa):
    """Renumber states in BFS discovery order from the initial state.

    Unreachable states are dropped; the result is deterministic in the input,
    which makes downstream serializations stable.
    """
    index = {dfa.initial: 0}
    order = [dfa.initial]
    todo = deque([dfa.initial])
    while todo:
        q = todo.popleft()
        for a in dfa.alphabet:
            r = dfa.delta[(q, a)]
            if r not in index:
                index[r] = len(order)
                order.append(r)
                todo.append(r)
    delta = {}
    for q in order:
        for a in dfa.alphabet:
            delta[(index[q], a)] = index[dfa.delta[(q, a)]]
    accepting = frozenset(index[q] for q in dfa.accepting if q in index)
    return DFA(len(order), dfa.alphabet, delta, 0, accepting)


def product(d1, d2, mode):
    """Product of two complete DFAs over the same alphabet.

    mode 'and' intersects the languages, 'or' unites, 'minus' subtracts.
    """
    assert d1.alphabet == d2.alphabet
    alphabet = d1.alphabet
    index = {(d1.initial, d2.initial): 0}
    order = [(d1.initial, d2.initial)]
    delta = {}
    todo = deque(order)
    while todo:
        (p, q) = todo.popleft()
        i = index[(p, q)]
        for a in alphabet:
            t = (d1.delta[(p, a)], d2.delta[(q, a)])
            if t not in index:
                index[t] = len(order)
                order.append(t)
                todo.append(t)
            delta[(i, a)] = index[t]
    def accepts(pq):
        a1 = pq[0] in d1.accepting
        a2 = pq[1] in d2.accepting
        if mode == "and":
            return a1 and a2
        if mode == "or":
            return a1 or a2
        if mode == "minus":
            return a1 and not a2
        raise ValueError(mode)
    accepting = frozenset(index[pq] for pq in order if accepts(pq))
    return DFA(len(order), alphabet, delta, 0, accepting)


def complement(dfa):
    return DFA(
        dfa.n_states,
        dfa.alphabet,
        dfa.delta,
        dfa.initial,
        frozenset(range(dfa.n_states)) - dfa.accepting,
    )


def well_formedness_dfa(symbols, variables):
    """Accepts marked words in which every variable marks exactly one position."""
    alphabet = tuple(marked_alphabet(symbols, variables))
    full = frozenset(variables)
    subsets = mark_subsets(variables)
    index = {s: i for i, s in enumerate(subsets)}
    dead = len(subsets)
    delta = {}
    for s in subsets:
        for (a, g) in alphabet:
            if g & s:
                delta[(index[s], (a, g))] = dead
            else:
                delta[(index[s], (a, g))] = index[s | g]
    for (a, g) in alphabet:
        delta[(dead, (a, g))] = dead
    return DFA(dead + 1, alphabet, delta, index[frozenset()], frozenset({index[full]}))
