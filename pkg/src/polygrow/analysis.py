"""Exact growth exponents of queries via idempotent pump patterns.

A query has growth of order n^k exactly when some selected pointed word factors
as w0 (e1 v1 e1) w1 ... (ek vk ek) wk, where each vi carries a nonempty set of
variables, ei is vi with the variables removed, and each ei maps to an
idempotent.  Pumping the middle blocks yields at least (n-2)^k selected tuples
in words of linear length, and the skeleton decomposition shows no larger k is
possible.  The decision procedure below searches for the pattern by
reachability over (dfa state, block bookkeeping) pairs.
"""

from dataclasses import dataclass
from itertools import product as iproduct

from .fft import build_fft
from .skeletons import TreeIndex, seed, skeleton
from .words import BudgetExceeded, count_tuples, current_budget, select_tuples

IDENTITY = None  # adjoined identity for empty products inside a block


@dataclass(frozen=True)
class Free:
    """An unpointed chunk realizing a semigroup element."""

    element: int


@dataclass(frozen=True)
class Group:
    """One marked position: a letter carrying a nonempty variable set."""

    letter: str
    variables: frozenset


@dataclass(frozen=True)
class VBlock:
    """A pumpable block: moves multiply to the flanking idempotent."""

    idempotent: int
    moves: tuple


@dataclass(frozen=True)
class PumpPattern:
    """Alternating out-segments (move tuples) and pumpable blocks.

    `segments` has length 2k+1: even entries are out-segment move tuples,
    odd entries are VBlocks.  `witness` maps semigroup elements to concrete
    words used when the pattern is realized.
    """

    k: int
    segments: tuple
    witness: dict

    def _chunk(self, moves):
        out = []
        for m in moves:
            if isinstance(m, Free):
                out.extend(self.witness[m.element])
            else:
                out.append(m.letter)
        return tuple(out)

    def block_word(self, i):
        """The unpointed word of the i-th pumpable block (value = idempotent)."""
        return self._chunk(self.segments[2 * i + 1].moves)

    def realize(self, n):
        """The word w0 u1^n w1 ... uk^n wk; its length is linear in n."""
        out = []
        for i, seg in enumerate(self.segments):
            if i % 2 == 0:
                out.extend(self._chunk(seg))
            else:
                out.extend(self.block_word(i // 2) * n)
        return tuple(out)

    def base_pointed(self):
        """The selected pointed word witnessing the pattern: each pumpable
        block appears as idempotent-flank, marked copy, idempotent-flank."""
        word = []
        assignment = {}
        for i, seg in enumerate(self.segments):
            if i % 2 == 0:
                for m in seg:
                    if isinstance(m, Free):
                        word.extend(self.witness[m.element])
                    else:
                        word.append(m.letter)
                        for v in m.variables:
                            assignment[v] = len(word)
            else:
                flank = self.block_word(i // 2)
                word.extend(flank)
                for m in seg.moves:
                    if isinstance(m, Free):
                        word.extend(self.witness[m.element])
                    else:
                        word.append(m.letter)
                        for v in m.variables:
                            assignment[v] = len(word)
                word.extend(flank)
        return tuple(word), assignment


EMPTY = "empty"


def _moves(r):
    """All moves available to the pattern search, in a deterministic order."""
    q = r.query
    frees = [Free(s) for s in range(r.semigroup.size)]
    groups = []
    from .automata import mark_subsets

    for a in q.alphabet.symbols:
        for g in mark_subsets(q.variables):
            if g:
                groups.append(Group(a, g))
    return frees, groups


def _search(r, k):
    """Reachability search for a pump pattern with exactly k blocks.

    States are (dfa state, mode, blocks done); mode is either OUT or a tuple
    (partial product or None, chosen idempotent, saw a marked position).  The
    query DFA already enforces that every variable is used exactly once.
    Returns the accepting search node and parent links, or None.
    """
    sg = r.semigroup
    dfa = r.query.dfa
    frees, groups = _moves(r)
    idems = sorted(sg.idempotents())
    start = (dfa.initial, "out", 0)
    parents = {start: None}
    frontier = [start]
    while frontier:
        nxt = []
        for node in frontier:
            state, mode, done = node
            succ = []
            if mode == "out":
                for mv in frees:
                    succ.append(((r.apply(mv.element, state), "out", done), mv))
                for mv in groups:
                    succ.append(
                        ((dfa.delta[(state, (mv.letter, mv.variables))], "out", done), mv)
                    )
                if done < k:
                    for e in idems:
                        succ.append(
                            ((r.apply(e, state), (IDENTITY, e, False), done), ("enter", e))
                        )
            else:
                partial, e, saw = mode
                for mv in frees:
                    p = mv.element if partial is IDENTITY else sg.product(partial, mv.element)
                    succ.append(((r.apply(mv.element, state), (p, e, saw), done), mv))
                for mv in groups:
                    val = r.letter_value[mv.letter]
                    p = val if partial is IDENTITY else sg.product(partial, val)
                    succ.append(
                        ((dfa.delta[(state, (mv.letter, mv.variables))], (p, e, True), done), mv)
                    )
                if saw and partial == e:
                    succ.append(((r.apply(e, state), "out", done + 1), ("exit", e)))
            for child, mv in succ:
                if child not in parents:
                    parents[child] = (node, mv)
                    nxt.append(child)
        frontier = nxt
    for state in dfa.accepting:
        goal = (state, "out", k)
        if goal in parents:
            return goal, parents
    return None


def exponent(r):
    """Largest block count k admitting a pump pattern, or "empty".

    The block count is capped by the number of variables, since each block
    needs a nonempty variable set and the sets are disjoint.
    """
    best = EMPTY
    for k in range(len(r.query.variables) + 1):
        if _search(r, k) is not None:
            best = k
    return best


def pump_witness(r, k) -> PumpPattern:
    """A pump pattern with k blocks, extracted from the decision procedure."""
    if k == EMPTY or k < 1:
        raise ValueError("pump witnesses exist only for exponents >= 1")
    hit = _search(r, k)
    if hit is None:
        raise ValueError(f"no pump pattern with {k} blocks exists")
    goal, parents = hit
    path = []
    node = goal
    while parents[node] is not None:
        node, mv = parents[node]
        path.append(mv)
    path.reverse()
    segments = []
    out = []
    block = None
    block_e = None
    for mv in path:
        if isinstance(mv, tuple) and mv[0] == "enter":
            segments.append(tuple(out))
            out = []
            block = []
            block_e = mv[1]
        elif isinstance(mv, tuple) and mv[0] == "exit":
            segments.append(VBlock(block_e, tuple(block)))
            block = None
        elif block is not None:
            block.append(mv)
        else:
            out.append(mv)
    segments.append(tuple(out))
    pattern = PumpPattern(k=k, segments=tuple(segments), witness=dict(r.witness))
    word, assignment = pattern.base_pointed()
    positions = tuple(assignment[v] for v in r.query.variables)
    if not r.query.selects(word, positions):
        raise AssertionError("extracted pump pattern is not selected by the query")
    return pattern


def _ordered_partitions(vars_set):
    """All sequences of disjoint nonempty subsets covering vars_set."""
    if not vars_set:
        return [()]
    out = []
    items = sorted(vars_set)
    from itertools import combinations

    for r_ in range(1, len(items) + 1):
        for first in combinations(items, r_):
            rest = vars_set - set(first)
            for tail in _ordered_partitions(rest):
                out.append((frozenset(first),) + tail)
    return out


def exponent_bruteforce(r):
    """Test oracle: exhaustive enumeration of pump-pattern shapes.

    Independent of the reachability search.  Variables are first distributed
    over the pattern's slots, then every move sequence with at most one free
    chunk between marked positions is tried.  Intended for small semigroups
    and at most two variables; complexity grows quickly beyond that.
    """
    q = r.query
    sg = r.semigroup
    variables = frozenset(q.variables)
    letters = list(q.alphabet.symbols)
    chunk_options = [()] + [(Free(s),) for s in range(sg.size)]

    def slot_sequences(slot_vars):
        """Move tuples using exactly `slot_vars`, groups in every arrangement."""
        seqs = []
        for parts in _ordered_partitions(slot_vars):
            letter_choices = iproduct(letters, repeat=len(parts))
            for chosen in letter_choices:
                groups = [Group(a, g) for a, g in zip(chosen, parts)]
                for chunks in iproduct(chunk_options, repeat=len(parts) + 1):
                    seq = list(chunks[0])
                    for g, c in zip(groups, chunks[1:]):
                        seq.append(g)
                        seq.extend(c)
                    seqs.append(tuple(seq))
        return seqs

    def value_of(moves):
        acc = IDENTITY
        for m in moves:
            v = m.element if isinstance(m, Free) else r.letter_value[m.letter]
            acc = v if acc is IDENTITY else sg.product(acc, v)
        return acc

    def check(segments):
        pattern = PumpPattern(
            k=sum(1 for s in segments if isinstance(s, VBlock)),
            segments=tuple(segments),
            witness=dict(r.witness),
        )
        word, assignment = pattern.base_pointed()
        positions = tuple(assignment[v] for v in q.variables)
        return q.selects(word, positions)

    def admits(k):
        if k == 0:
            return not q.is_empty()
        # distribute variables over 2k+1 slots; block slots need >= 1 variable
        slot_count = 2 * k + 1
        from itertools import product as slots_product

        def distributions():
            items = sorted(variables)
            for assign in slots_product(range(slot_count), repeat=len(items)):
                slots = [frozenset(
                    v for v, s in zip(items, assign) if s == i
                ) for i in range(slot_count)]
                if all(slots[2 * i + 1] for i in range(k)):
                    yield slots
        for slots in distributions():
            options = [slot_sequences(s) for s in slots]

            def rec(i, segments):
                if i == slot_count:
                    return check(segments)
                for seq in options[i]:
                    if i % 2 == 1:
                        e = value_of(seq)
                        if e is IDENTITY or sg.product(e, e) != e:
                            continue
                        seg = VBlock(e, seq)
                    else:
                        seg = seq
                    if rec(i + 1, segments + [seg]):
                        return True
                return False

            if rec(0, []):
                return True
        return False

    best = EMPTY
    for k in range(len(variables) + 1):
        if admits(k):
            best = k
    return best


# ---------------------------------------------------------------------------
# Skeleton decomposition and the combined report


def decompose(r, horizon, budget=None):
    """Observed skeleton disjuncts over all words up to the horizon.

    Returns a list of dicts with the canonical skeleton key, its seed, and an
    example (word, tuple); every accepted tuple belongs to exactly one key.
    """
    q = r.query
    budget = current_budget(budget)
    sigma = len(q.alphabet.symbols)
    kvars = max(1, len(q.variables))
    attempted = sum(sigma ** n * n ** kvars for n in range(1, horizon + 1))
    if attempted > budget:
        raise BudgetExceeded(attempted, budget)
    variables = tuple(q.variables)
    found = {}
    for n in range(1, horizon + 1):
        for word in iproduct(q.alphabet.symbols, repeat=n):
            tuples = select_tuples(q, word)
            if not tuples:
                continue
            if not variables:
                key = ("no-variables",)
                if key not in found:
                    found[key] = {
                        "skeleton": key,
                        "seed": frozenset(),
                        "example": (word, ()),
                    }
                continue
            tree = build_fft(r, word)
            idx = TreeIndex(tree)
            for pos in tuples:
                sk = skeleton(idx, dict(zip(variables, pos)))
                key = sk.canonical_key
                if key not in found:
                    found[key] = {
                        "skeleton": key,
                        "seed": seed(sk),
                        "example": (word, pos),
                    }
    return sorted(found.values(), key=lambda d: repr(d["skeleton"]))


def crosscheck(r, horizon, budget=None, pump_range=range(3, 9)):
    """Combined report: exponent, seed sizes, growth ratios, pump check.

    The multiplication table is validated first so corrupted recognizers are
    reported before any analysis runs.
    """
    report = {"flags": []}
    try:
        checked = r.semigroup.check_associativity()
        report["associativity"] = "checked" if checked else "skipped (size)"
    except ValueError as err:
        report["associativity"] = f"FAILED: {err}"
        report["flags"].append("associativity-failure")
        return report
    k = exponent(r)
    report["exponent"] = k
    disjuncts = decompose(r, horizon, budget=budget)
    report["disjuncts"] = len(disjuncts)
    max_seed = max((len(d["seed"]) for d in disjuncts), default=None)
    report["max_seed_size"] = max_seed
    if k == EMPTY:
        if disjuncts:
            report["flags"].append("empty-exponent-but-disjuncts-found")
        return report
    if max_seed is not None and max_seed > k:
        report["flags"].append("seed-size-exceeds-exponent")
    table = []
    best = 0
    for n in range(1, horizon + 1):
        for word in iproduct(r.query.alphabet.symbols, repeat=n):
            best = max(best, count_tuples(r.query, word))
        table.append((n, best))
    report["growth_table"] = table
    ratios = [
        (n, c / n ** k if k > 0 else c) for n, c in table if c > 0
    ]
    report["growth_ratios"] = ratios
    if ratios:
        first = ratios[0][1]
        peak = max(v for _, v in ratios)
        report["ratio_bound"] = peak
        if k > 0 and peak > max(8.0, 8.0 * first):
            report["flags"].append("growth-ratio-diverging")
    if k >= 1:
        pattern = pump_witness(r, k)
        pump = []
        ok = True
        for n in pump_range:
            word = pattern.realize(n)
            c = count_tuples(r.query, word)
            need = (n - 2) ** k
            pump.append({"n": n, "length": len(word), "count": c, "bound": need})
            if c < need:
                ok = False
        report["pump_check"] = pump
        if not ok:
            report["flags"].append("pump-lower-bound-failure")
        lengths = [p["length"] for p in pump]
        diffs = {b - a for a, b in zip(lengths, lengths[1:])}
        if len(diffs) > 1:
            report["flags"].append("pump-length-not-linear")
    return report
