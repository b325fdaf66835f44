"""Reference string functions, shipped machines, and atom-block encodings.

The reference functions are direct implementations used as oracles for the
machines and interpretations: squaring, block squaring, map power, atom
squaring, and the alternating product on trees.  Atom blocks encode atoms over
a finite alphabet as ``< a^n >``; deatomization turns an atom function into
the unique finite-alphabet function commuting with every such encoding.
"""

from dataclasses import dataclass, field
from itertools import product as iproduct

from .pebble import ATOM_UNDER_HEAD, Atom, PebbleMachine, Rule, is_atom

OPEN, CLOSE, UNIT, SEP = "<", ">", "a", "|"


def ref_square(w):
    """w repeated |w| times."""
    w = tuple(w)
    return w * len(w)


def _parse_blocks(w):
    """Block lengths of an input in (< a* >)*, or None when ill-formatted."""
    blocks = []
    i = 0
    w = tuple(w)
    while i < len(w):
        if w[i] != OPEN:
            return None
        i += 1
        count = 0
        while i < len(w) and w[i] == UNIT:
            count += 1
            i += 1
        if i == len(w) or w[i] != CLOSE:
            return None
        blocks.append(count)
        i += 1
    return blocks


def ref_block_square(w):
    """All pairs of unit blocks, lexicographically; empty on bad format."""
    blocks = _parse_blocks(w)
    if blocks is None:
        return ()
    out = []
    for i in blocks:
        for j in blocks:
            out.extend([OPEN] + [UNIT] * i + [SEP] + [UNIT] * j + [CLOSE])
    return tuple(out)


def ref_map_power(w):
    """a^{n1} b ... a^{nk} b maps to (a^{n1} b)^k ... (a^{nk} b)^k."""
    w = tuple(w)
    blocks = []
    count = 0
    for letter in w:
        if letter == "a":
            count += 1
        elif letter == "b":
            blocks.append(count)
            count = 0
        else:
            return ()
    if count:
        return ()  # trailing units without a terminator
    k = len(blocks)
    out = []
    for n in blocks:
        out.extend((("a",) * n + ("b",)) * k)
    return tuple(out)


def ref_atom_square(w):
    """a1..an maps to a1 a1 a1 a2 ... ai aj ... an an, pairs lexicographic."""
    w = tuple(w)
    for letter in w:
        if not is_atom(letter):
            raise ValueError(f"atom squaring expects atoms, got {letter!r}")
    out = []
    for x in w:
        for y in w:
            out.extend([x, y])
    return tuple(out)


# ---------------------------------------------------------------------------
# Trees and the alternating product


@dataclass(frozen=True)
class LabeledTree:
    label: object
    children: tuple = ()

    @property
    def height(self):
        return 0 if not self.children else 1 + max(c.height for c in self.children)

    def is_balanced(self):
        depths = set()

        def walk(node, d):
            if not node.children:
                depths.add(d)
            for c in node.children:
                walk(c, d + 1)

        walk(self, 0)
        return len(depths) <= 1

    def leaves(self):
        if not self.children:
            return (self.label,)
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return tuple(out)


def alt_product(s: LabeledTree, t: LabeledTree) -> LabeledTree:
    """Root pair (label of t, label of s); children recurse with the swap
    alt_product(t_i, s) over t's children, which doubles the height."""
    label = (t.label, s.label)
    if not t.children:
        return LabeledTree(label)
    return LabeledTree(label, tuple(alt_product(ti, s) for ti in t.children))


def alt_square(t: LabeledTree) -> LabeledTree:
    return alt_product(t, t)


def encode_tree(t: LabeledTree):
    """Preorder token encoding: label tokens, then < children > if any."""
    toks = []
    label = t.label
    if isinstance(label, tuple):
        toks.extend(label)
    else:
        toks.append(label)
    if t.children:
        toks.append(OPEN)
        for c in t.children:
            toks.extend(encode_tree(c))
        toks.append(CLOSE)
    return tuple(toks)


def decode_tree(tokens):
    """Inverse of encode_tree for single-token labels."""
    tokens = list(tokens)

    def parse(i):
        label = tokens[i]
        i += 1
        children = []
        if i < len(tokens) and tokens[i] == OPEN:
            i += 1
            while tokens[i] != CLOSE:
                child, i = parse(i)
                children.append(child)
            i += 1
        return LabeledTree(label, tuple(children)), i

    tree, i = parse(0)
    if i != len(tokens):
        raise ValueError("trailing tokens after tree")
    return tree


# ---------------------------------------------------------------------------
# Shipped machines


def atom_square_machine() -> PebbleMachine:
    """Three pebbles, six states, computes atom squaring.

    The bottom two pebbles enumerate all pairs lexicographically; only the
    atom under the head can be emitted, so a third pebble walks to the first
    pebble's position whenever its atom is needed.
    """
    R = Rule
    rules = (
        # A: outer loop entry, stack [i]; start the inner loop
        R("A", (), "push", (), "B"),
        # B: stack [i, j]; fetch atom i with a helper pebble
        R("B", (), "push", (), "C"),
        # C: walk the helper to pebble 1, emit its atom, drop the helper
        R("C", (("same", (1, 3)),), "pop", (ATOM_UNDER_HEAD,), "D"),
        R("C", (), "move-right", (), "C"),
        # D: stack [i, j], head on j; emit atom j and advance the inner loop
        R("D", (("rightmost", (2,)),), "pop", (ATOM_UNDER_HEAD,), "E"),
        R("D", (), "move-right", (ATOM_UNDER_HEAD,), "B"),
        # E: stack [i]; advance the outer loop or finish
        R("E", (("rightmost", (1,)),), "stop", (), "E"),
        R("E", (), "move-right", (), "F"),
        # F: fresh inner loop for the next i
        R("F", (), "push", (), "B"),
    )
    return PebbleMachine(
        pebbles=3,
        states=("A", "B", "C", "D", "E", "F"),
        initial="A",
        input_alphabet=(),
        output_alphabet=(),
        empty_output=(),
        atoms=True,
        rules=rules,
    )


def alt_square_machine(k: int) -> PebbleMachine:
    """2k+1 pebbles computing the encoded alternating square of balanced
    height-k atom-labelled trees; ill-formatted inputs give empty output.

    Phase one sweeps the input once, checking the token grammar with a depth
    counter in the state.  Phase two runs 2k nested loops: loop pebble p walks
    the children of pebble p-2's node (the root for p <= 2); every visited
    node emits the atom pair (pebble p-1, pebble p) via a helper pebble, plus
    brackets around each non-leaf output node.
    """
    if k < 1:
        raise ValueError("alternating-square machines need k >= 1")
    rules = []
    states = []

    def add(state, guard, action, output, nxt):
        for s in (state, nxt):
            if s not in states:
                states.append(s)
        rules.append(Rule(state, tuple(guard), action, tuple(output), nxt))

    def reject(state):
        add(state, [], "stop", (), state)

    def depth_of(p):
        return (p + 1) // 2

    AUH = ATOM_UNDER_HEAD

    # ---- validation sweep --------------------------------------------------
    # vlabel@d: head must be a node label (an atom) at depth d
    # vopen@d:  head must be '<' whose inside is a depth-d child list
    # vafter@d: head follows a complete depth-d subtree: sibling label or '>'
    add("vlabel@0", [("label", (1, OPEN))], "stop", (), "vlabel@0")
    add("vlabel@0", [("label", (1, CLOSE))], "stop", (), "vlabel@0")
    add("vlabel@0", [("rightmost", (1,))], "stop", (), "vlabel@0")
    add("vlabel@0", [], "move-right", (), "vopen@1")
    for d in range(1, k + 1):
        add(f"vopen@{d}", [("label", (1, OPEN)), ("rightmost", (1,))],
            "stop", (), f"vopen@{d}")
        add(f"vopen@{d}", [("label", (1, OPEN))], "move-right", (), f"vlabel@{d}")
        reject(f"vopen@{d}")
        add(f"vlabel@{d}", [("label", (1, OPEN))], "stop", (), f"vlabel@{d}")
        add(f"vlabel@{d}", [("label", (1, CLOSE))], "stop", (), f"vlabel@{d}")
        add(f"vlabel@{d}", [("rightmost", (1,))], "stop", (), f"vlabel@{d}")
        if d < k:
            add(f"vlabel@{d}", [], "move-right", (), f"vopen@{d+1}")
        else:
            add(f"vlabel@{d}", [], "move-right", (), f"vafter@{k}")
    for d in range(k, 0, -1):
        if d == 1:
            add(f"vafter@{d}", [("label", (1, CLOSE)), ("rightmost", (1,))],
                "move-left", (), "rewind")
            add(f"vafter@{d}", [("label", (1, CLOSE))], "stop", (), f"vafter@{d}")
        else:
            add(f"vafter@{d}", [("label", (1, CLOSE)), ("rightmost", (1,))],
                "stop", (), f"vafter@{d}")
            add(f"vafter@{d}", [("label", (1, CLOSE))], "move-right", (), f"vafter@{d-1}")
        add(f"vafter@{d}", [("label", (1, OPEN))], "stop", (), f"vafter@{d}")
        add(f"vafter@{d}", [("rightmost", (1,))], "stop", (), f"vafter@{d}")
        # a sibling node at depth d starts with its label
        if d < k:
            add(f"vafter@{d}", [], "move-right", (), f"vopen@{d+1}")
        else:
            add(f"vafter@{d}", [], "move-right", (), f"vafter@{k}")

    # ---- rewind and the root -----------------------------------------------
    add("rewind", [("leftmost", (1,))], "move-right", (AUH, AUH, OPEN), "root2")
    add("rewind", [], "move-left", (), "rewind")
    add("root2", [], "move-right", (), "visit@1")

    # ---- the 2k nested loops ----------------------------------------------
    for p in range(1, 2 * k + 1):
        d = depth_of(p)
        # visit@p: head (pebble p) on a node label; emit the pair
        add(f"visit@{p}", [], "push", (), f"fetch@{p}")
        if p == 1:
            # the previous coordinate is the root, where pushes land
            add(f"fetch@{p}", [], "pop", (AUH,), f"second@{p}")
        else:
            add(f"fetch@{p}", [("same", (p - 1, p + 1))], "pop", (AUH,), f"second@{p}")
            add(f"fetch@{p}", [], "move-right", (), f"fetch@{p}")
        if p < 2 * k:
            add(f"second@{p}", [], "push", (AUH, OPEN), f"descend@{p+1}")
        else:
            add(f"second@{p}", [], "move-right", (AUH,), f"check@{p}")
        # advance@p: head back on the node label; step over its subtree
        if d == k:
            add(f"advance@{p}", [], "move-right", (), f"check@{p}")
        else:
            # bracket skip with a bounded counter (subtree height is k - d)
            add(f"advance@{p}", [], "move-right", (), f"skip@{p}.0")
            add(f"skip@{p}.0", [("label", (p, OPEN))], "move-right", (), f"skip@{p}.1")
            for c in range(1, k - d + 1):
                sk = f"skip@{p}.{c}"
                if c < k - d:
                    add(sk, [("label", (p, OPEN))], "move-right", (), f"skip@{p}.{c+1}")
                if c == 1:
                    add(sk, [("label", (p, CLOSE))], "move-right", (), f"check@{p}")
                else:
                    add(sk, [("label", (p, CLOSE))], "move-right", (), f"skip@{p}.{c-1}")
                add(sk, [], "move-right", (), sk)
        # check@p: head on a sibling label, or on '>' ending the loop
        if p == 1:
            add(f"check@{p}", [("label", (p, CLOSE))], "stop", (CLOSE,), f"check@{p}")
        else:
            add(f"check@{p}", [("label", (p, CLOSE))], "pop", (CLOSE,), f"advance@{p-1}")
        # otherwise the head already sits on the next node's label, which is
        # exactly where visit@p starts
        add(f"check@{p}", [], "push", (), f"fetch@{p}")
    # descend@q: fresh loop pebble q walks to its parent, then two steps right
    for q in range(2, 2 * k + 1):
        if q == 2:
            add(f"descend@{q}", [], "move-right", (), f"enter@{q}")
        else:
            add(f"descend@{q}", [("same", (q - 2, q))], "move-right", (), f"enter@{q}")
            add(f"descend@{q}", [], "move-right", (), f"descend@{q}")
        add(f"enter@{q}", [], "move-right", (), f"visit@{q}")

    return PebbleMachine(
        pebbles=2 * k + 1,
        states=tuple(states),
        initial="vlabel@0",
        input_alphabet=(OPEN, CLOSE),
        output_alphabet=(OPEN, CLOSE, UNIT, SEP),
        empty_output=(),
        atoms=True,
        rules=tuple(rules),
    )


def example_machines(k=1):
    """The shipped machines keyed by name."""
    return {
        "atom_square_3peb": atom_square_machine(),
        f"alt_square({k})": alt_square_machine(k),
    }


# ---------------------------------------------------------------------------
# Atom representations and deatomization


@dataclass(frozen=True)
class AtomRepresentation:
    """Injective map from atom ids to block lengths; atom i becomes <a^len>."""

    lengths: dict

    def __post_init__(self):
        vals = list(self.lengths.values())
        if any(v < 1 for v in vals):
            raise ValueError("block lengths must be at least 1")
        if len(set(vals)) != len(vals):
            raise ValueError("atom representation must be injective")

    def encode_atom(self, atom):
        if atom.ident not in self.lengths:
            raise ValueError(f"no block length for atom {atom}")
        return (OPEN,) + (UNIT,) * self.lengths[atom.ident] + (CLOSE,)

    def decode_length(self, length):
        for ident, n in self.lengths.items():
            if n == length:
                return Atom(ident)
        raise ValueError(f"no atom with block length {length}")


def encode_atoms(word, rep: AtomRepresentation):
    out = []
    for letter in word:
        if is_atom(letter):
            out.extend(rep.encode_atom(letter))
        else:
            if letter in (OPEN, CLOSE, UNIT):
                raise ValueError(f"letter {letter!r} clashes with block symbols")
            out.append(letter)
    return tuple(out)


def decode_atoms(word, rep: AtomRepresentation):
    out = []
    i = 0
    word = tuple(word)
    while i < len(word):
        if word[i] == OPEN:
            j = i + 1
            count = 0
            while j < len(word) and word[j] == UNIT:
                count += 1
                j += 1
            if j == len(word) or word[j] != CLOSE:
                raise ValueError(f"malformed block at position {i+1}")
            out.append(rep.decode_length(count))
            i = j + 1
        elif word[i] in (CLOSE, UNIT):
            raise ValueError(f"stray block symbol at position {i+1}")
        else:
            out.append(word[i])
            i += 1
    return tuple(out)


def _parse_block_occurrences(word):
    """Split a block word into letters and block occurrences."""
    pieces = []
    i = 0
    word = tuple(word)
    while i < len(word):
        if word[i] == OPEN:
            j = i + 1
            count = 0
            while j < len(word) and word[j] == UNIT:
                count += 1
                j += 1
            if j == len(word) or word[j] != CLOSE:
                raise ValueError(f"malformed block at position {i+1}")
            pieces.append(("block", count))
            i = j + 1
        elif word[i] in (CLOSE, UNIT):
            raise ValueError(f"stray block symbol at position {i+1}")
        else:
            pieces.append(("letter", word[i]))
            i += 1
    return pieces


def deatomize(f):
    """The unique finite-alphabet companion of an atom-oblivious function.

    Each block occurrence becomes a fresh atom (occurrences of equal blocks
    get distinct atoms), f runs on the atoms, and output atoms turn back into
    their occurrence's block.
    """

    def red_f(word):
        pieces = _parse_block_occurrences(word)
        atoms_in = []
        block_of = {}
        fresh = 0
        for kind, payload in pieces:
            if kind == "block":
                fresh += 1
                block_of[fresh] = payload
                atoms_in.append(Atom(fresh))
            else:
                atoms_in.append(payload)
        result = f(tuple(atoms_in))
        out = []
        for letter in result:
            if is_atom(letter):
                if letter.ident not in block_of:
                    raise ValueError(
                        f"output atom {letter} does not come from the input"
                    )
                n = block_of[letter.ident]
                out.extend((OPEN,) + (UNIT,) * n + (CLOSE,))
            else:
                out.append(letter)
        return tuple(out)

    return red_f


def apply_atom_map(pi, word):
    """Extend an atom map to words, leaving finite letters unchanged."""
    return tuple(Atom(pi(l.ident)) if is_atom(l) else l for l in word)


def apply_representation(rep, word):
    return encode_atoms(word, rep)


def check_deatomization(f, rep: AtomRepresentation, samples):
    """Failures of rep(f(w)) == deatomize(f)(rep(w)) over the samples."""
    red_f = deatomize(f)
    failures = []
    for w in samples:
        left = encode_atoms(f(tuple(w)), rep)
        right = red_f(encode_atoms(tuple(w), rep))
        if left != right:
            failures.append({"input": tuple(w), "left": left, "right": right})
    return failures


def check_atom_oblivious(f, samples, maps):
    """Failures of pi(f(w)) == f(pi(w)) over the sampled inputs and maps."""
    failures = []
    for w in samples:
        for pi in maps:
            left = apply_atom_map(pi, f(tuple(w)))
            right = f(apply_atom_map(pi, tuple(w)))
            if left != right:
                failures.append(
                    {"input": tuple(w), "left": left, "right": right}
                )
    return failures


def pair_blocks_with_separator(word):
    """Rewrite adjacent block pairs <u><v> as <u|v>.

    The deatomization of atom squaring emits each output pair as two adjacent
    blocks, while block squaring renders a pair as one bracket group with a
    separator; this normalizer maps the former convention to the latter.
    """
    pieces = _parse_block_occurrences(word)
    if any(kind != "block" for kind, _ in pieces) or len(pieces) % 2:
        raise ValueError("expected an even sequence of blocks")
    out = []
    for i in range(0, len(pieces), 2):
        out.extend(
            (OPEN,)
            + (UNIT,) * pieces[i][1]
            + (SEP,)
            + (UNIT,) * pieces[i + 1][1]
            + (CLOSE,)
        )
    return tuple(out)


def first_two_distinct(w):
    """Equivariant but not atom-oblivious: the identity when the first two
    letters are defined and different atoms, otherwise the empty word."""
    w = tuple(w)
    if (
        len(w) >= 2
        and is_atom(w[0])
        and is_atom(w[1])
        and w[0].ident != w[1].ident
    ):
        return w
    return ()
