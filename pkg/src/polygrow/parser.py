"""Parser for the token regex grammar used in query files.

Grammar: atoms are `a`, `a[x1,x2]`, `_`, `_[x1]`; operators are juxtaposition
(concatenation), `|`, `*`, `+`, `?`, and parentheses.  Symbols are arbitrary
printable tokens not containing the reserved characters ``()|*+?[],`` or
whitespace; `_` is the any-letter wildcard.
"""

from dataclasses import dataclass

RESERVED = set("()|*+?[],")


class QuerySyntaxError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} (at offset {position})")
        self.position = position


@dataclass(frozen=True)
class Atom:
    # symbol is None for the `_` wildcard; marks is a frozenset of variables
    symbol: object
    marks: frozenset


@dataclass(frozen=True)
class LooseAtom:
    """Internal combinator atom: matches any mark set containing `required`.

    `symbols` restricts the letter (None means any letter).  Not reachable
    from the file syntax; used to build queries programmatically.
    """

    symbols: object
    required: frozenset


@dataclass(frozen=True)
class Concat:
    parts: tuple


@dataclass(frozen=True)
class Alt:
    parts: tuple


@dataclass(frozen=True)
class Star:
    inner: object


@dataclass(frozen=True)
class Plus:
    inner: object


@dataclass(frozen=True)
class Opt:
    inner: object


EMPTY = Concat(())


def _tokenize(text):
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "()|*+?":
            tokens.append((c, c, i))
            i += 1
            continue
        if c in "[],":
            raise QuerySyntaxError(f"unexpected {c!r}", i)
        start = i
        while i < n and not text[i].isspace() and text[i] not in RESERVED:
            i += 1
        sym = text[start:i]
        marks = []
        if i < n and text[i] == "[":
            i += 1
            mark_start = i
            while i < n and text[i] != "]":
                i += 1
            if i == n:
                raise QuerySyntaxError("unterminated mark list", mark_start - 1)
            body = text[mark_start:i]
            i += 1
            marks = [v.strip() for v in body.split(",")]
            if any(not v for v in marks):
                raise QuerySyntaxError("empty variable name in marks", mark_start)
        tokens.append(("atom", (sym, tuple(marks)), start))
    return tokens


class _Parser:
    def __init__(self, tokens, alphabet, variables):
        self.tokens = tokens
        self.pos = 0
        self.alphabet = alphabet
        self.variables = variables

    def peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self):
        t = self.peek()
        self.pos += 1
        return t

    def parse(self):
        node = self.alternation()
        if self.peek() is not None:
            kind, _, at = self.peek()
            raise QuerySyntaxError(f"unexpected {kind!r}", at)
        return node

    def alternation(self):
        parts = [self.concatenation()]
        while self.peek() is not None and self.peek()[0] == "|":
            self.take()
            parts.append(self.concatenation())
        return parts[0] if len(parts) == 1 else Alt(tuple(parts))

    def concatenation(self):
        parts = []
        while True:
            t = self.peek()
            if t is None or t[0] in ")|":
                break
            parts.append(self.postfix())
        if not parts:
            return EMPTY
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def postfix(self):
        node = self.primary()
        while self.peek() is not None and self.peek()[0] in "*+?":
            op = self.take()[0]
            node = {"*": Star, "+": Plus, "?": Opt}[op](node)
        return node

    def primary(self):
        t = self.take()
        if t is None:
            raise QuerySyntaxError("unexpected end of input", 0)
        kind, value, at = t
        if kind == "(":
            node = self.alternation()
            closing = self.take()
            if closing is None or closing[0] != ")":
                raise QuerySyntaxError("unbalanced parenthesis", at)
            return node
        if kind == "atom":
            sym, marks = value
            if sym != "_" and sym not in self.alphabet:
                raise QuerySyntaxError(f"unknown symbol {sym!r}", at)
            for v in marks:
                if v not in self.variables:
                    raise QuerySyntaxError(f"unknown variable {v!r}", at)
            if len(set(marks)) != len(marks):
                raise QuerySyntaxError("repeated variable in marks", at)
            return Atom(None if sym == "_" else sym, frozenset(marks))
        raise QuerySyntaxError(f"unexpected {kind!r}", at)


def parse_regex(text, alphabet, variables):
    """Parse query-regex source into an AST."""
    return _Parser(_tokenize(text), set(alphabet), set(variables)).parse()


def ast_to_nfa(ast, nfa, symbols):
    """Add the AST's fragment to `nfa`; returns (start, accept) states."""

    def expand(node):
        if isinstance(node, Atom):
            letters = symbols if node.symbol is None else [node.symbol]
            return [(a, node.marks) for a in letters]
        if isinstance(node, LooseAtom):
            letters = symbols if node.symbols is None else sorted(node.symbols)
            return [
                (a, g)
                for (a, g) in nfa.alphabet
                if a in letters and node.required <= g
            ]
        raise TypeError(node)

    def build(node):
        if isinstance(node, (Atom, LooseAtom)):
            s, t = nfa.new_state(), nfa.new_state()
            for letter in expand(node):
                nfa.add_arc(s, letter, t)
            return s, t
        if isinstance(node, Concat):
            s = t = nfa.new_state()
            for part in node.parts:
                ps, pt = build(part)
                nfa.add_eps(t, ps)
                t = pt
            return s, t
        if isinstance(node, Alt):
            s, t = nfa.new_state(), nfa.new_state()
            for part in node.parts:
                ps, pt = build(part)
                nfa.add_eps(s, ps)
                nfa.add_eps(pt, t)
            return s, t
        if isinstance(node, Star):
            s, t = nfa.new_state(), nfa.new_state()
            ps, pt = build(node.inner)
            nfa.add_eps(s, ps)
            nfa.add_eps(pt, ps)
            nfa.add_eps(s, t)
            nfa.add_eps(pt, t)
            return s, t
        if isinstance(node, Plus):
            ps, pt = build(node.inner)
            nfa.add_eps(pt, ps)
            return ps, pt
        if isinstance(node, Opt):
            s, t = nfa.new_state(), nfa.new_state()
            ps, pt = build(node.inner)
            nfa.add_eps(s, ps)
            nfa.add_eps(pt, t)
            nfa.add_eps(s, t)
            return s, t
        raise TypeError(node)

    return build(ast)
