"""Classical pebble transducers: a two-way head plus a bounded pebble stack.

Machines are deterministic with first-match rule semantics: the first rule
whose state and guard match the current configuration fires.  Guards are
conjunctions over the classical test set; actions move the head, push a pebble
onto the leftmost position, pop the head, or stop.  Machines with atoms may
emit the designated atom-under-head output symbol.
"""

import json
from dataclasses import dataclass, field

ATOM_UNDER_HEAD = "@head"


class MachineError(RuntimeError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ActionFailed(MachineError):
    pass


class LoopDetected(MachineError):
    pass


class NoMatchingRule(MachineError):
    pass


@dataclass(frozen=True)
class Atom:
    """An input letter drawn from the infinite atom supply."""

    ident: int

    def __repr__(self):
        return f"#{self.ident}"


def is_atom(letter):
    return isinstance(letter, Atom)


@dataclass(frozen=True)
class Rule:
    state: str
    guard: tuple  # of test terms, conjunctive
    action: str  # stop | move-left | move-right | push | pop
    output: tuple  # output letters, possibly ATOM_UNDER_HEAD
    next_state: str


@dataclass(frozen=True)
class PebbleMachine:
    pebbles: int
    states: tuple
    initial: str
    input_alphabet: tuple
    output_alphabet: tuple
    empty_output: tuple
    atoms: bool
    rules: tuple

    def __post_init__(self):
        if self.pebbles < 1:
            raise ValueError("a machine needs at least one pebble (the head)")
        if self.initial not in self.states:
            raise ValueError("initial state missing from the state list")
        for rule in self.rules:
            if rule.state not in self.states or rule.next_state not in self.states:
                raise ValueError(f"rule references unknown state: {rule}")
            if rule.action not in ("stop", "move-left", "move-right", "push", "pop"):
                raise ValueError(f"unknown action {rule.action!r}")

    def rules_of(self, state):
        return [r for r in self.rules if r.state == state]


# ---------------------------------------------------------------------------
# Tests


def _eval_test(term, word, stack):
    """Evaluate one guard term against the configuration."""
    name, args = term
    k = len(stack)

    def pos(i):
        return stack[i - 1] if 1 <= i <= k else None

    if name == "defined":
        return pos(args[0]) is not None
    if name == "same":
        a, b = pos(args[0]), pos(args[1])
        return a is not None and b is not None and a == b
    if name == "leftmost":
        return pos(args[0]) == 1
    if name == "rightmost":
        return pos(args[0]) == len(word)
    if name == "label":
        p = pos(args[0])
        if p is None:
            return False
        letter = word[p - 1]
        return (not is_atom(letter)) and letter == args[1]
    raise ValueError(f"unknown test {name!r}")


def parse_test(text):
    """Parse test terms like 'same(1,3)', 'label(2,a)', 'leftmost(1)'."""
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ValueError(f"bad test term {text!r}")
    name, body = text[:-1].split("(", 1)
    name = name.strip()
    parts = [p.strip() for p in body.split(",")]
    if name in ("defined", "leftmost", "rightmost"):
        return (name, (int(parts[0]),))
    if name == "same":
        return (name, (int(parts[0]), int(parts[1])))
    if name == "label":
        return (name, (int(parts[0]), parts[1]))
    raise ValueError(f"unknown test {name!r}")


# ---------------------------------------------------------------------------
# Running


@dataclass(frozen=True)
class RunTrace:
    configurations: tuple  # of (state, stack tuple)
    outputs: tuple  # per-step output tuples, aligned with steps taken
    status: str  # stopped | failed-action | step-budget


def step_budget(machine, n):
    return len(machine.states) * sum(n ** i for i in range(1, machine.pebbles + 1)) + 1


def run(machine: PebbleMachine, word):
    """Simulate the machine; returns (output word, trace).

    Raises ActionFailed or LoopDetected (the exception carries the partial
    trace) when an action fails or the step budget proves nontermination.
    """
    word = tuple(word)
    for letter in word:
        if is_atom(letter):
            if not machine.atoms:
                raise ValueError("atom input on a machine without atoms")
        elif letter not in machine.input_alphabet:
            raise ValueError(f"letter {letter!r} not in the input alphabet")
    if not word:
        return tuple(machine.empty_output), RunTrace((), (), "stopped")
    state = machine.initial
    stack = (1,)
    configs = [(state, stack)]
    outputs = []
    out = []
    budget = step_budget(machine, len(word))
    rules_by_state = {s: machine.rules_of(s) for s in machine.states}

    def emit(rule):
        chunk = []
        for sym in rule.output:
            if sym == ATOM_UNDER_HEAD:
                letter = word[stack[-1] - 1]
                if is_atom(letter):
                    chunk.append(letter)
            else:
                chunk.append(sym)
        outputs.append(tuple(chunk))
        out.extend(chunk)

    for _ in range(budget):
        rule = None
        for cand in rules_by_state[state]:
            if all(_eval_test(t, word, stack) for t in cand.guard):
                rule = cand
                break
        if rule is None:
            raise NoMatchingRule(
                f"no rule matches state {state} with stack {stack}",
                RunTrace(tuple(configs), tuple(outputs), "failed-action"),
            )
        emit(rule)
        act = rule.action
        if act == "stop":
            return tuple(out), RunTrace(tuple(configs), tuple(outputs), "stopped")
        if act == "move-left":
            if stack[-1] == 1:
                raise ActionFailed(
                    "moved off the left end",
                    RunTrace(tuple(configs), tuple(outputs), "failed-action"),
                )
            stack = stack[:-1] + (stack[-1] - 1,)
        elif act == "move-right":
            if stack[-1] == len(word):
                raise ActionFailed(
                    "moved off the right end",
                    RunTrace(tuple(configs), tuple(outputs), "failed-action"),
                )
            stack = stack[:-1] + (stack[-1] + 1,)
        elif act == "push":
            if len(stack) == machine.pebbles:
                raise ActionFailed(
                    "push at full stack",
                    RunTrace(tuple(configs), tuple(outputs), "failed-action"),
                )
            stack = stack + (1,)
        elif act == "pop":
            if len(stack) == 1:
                raise ActionFailed(
                    "pop at stack height one",
                    RunTrace(tuple(configs), tuple(outputs), "failed-action"),
                )
            stack = stack[:-1]
        state = rule.next_state
        configs.append((state, stack))
    raise LoopDetected(
        f"no termination within {budget} steps",
        RunTrace(tuple(configs), tuple(outputs), "step-budget"),
    )


class MachineConfigurations:
    """Adapter exposing a machine's run as ordered configurations."""

    def __init__(self, machine, alphabet=None):
        self.machine = machine
        from .words import Alphabet

        self.input_alphabet = alphabet or Alphabet(tuple(machine.input_alphabet))

    def configurations(self, word):
        _, trace = run(self.machine, word)
        return list(trace.configurations)


# ---------------------------------------------------------------------------
# Configuration trees


@dataclass
class ConfigNode:
    config: tuple  # (state, stack) or None for the synthetic root
    children: list = field(default_factory=list)


def config_tree(trace: RunTrace):
    """Tree over the run's configurations by stack height.

    The parent of a configuration is the most recent earlier configuration
    with a strictly smaller stack; height-one configurations attach to the
    first configuration, which acts as the root.  The tree height equals the
    maximal stack height reached.
    """
    configs = list(trace.configurations)
    if not configs:
        return None
    root = ConfigNode(configs[0])
    nodes = [root]
    stack_of = [len(configs[0][1])]
    open_chain = [root]
    for cfg in configs[1:]:
        node = ConfigNode(cfg)
        h = len(cfg[1])
        while open_chain and len(open_chain[-1].config[1]) >= h:
            open_chain.pop()
        parent = open_chain[-1] if open_chain else root
        parent.children.append(node)
        open_chain.append(node)
        nodes.append(node)
        stack_of.append(h)
    return root


def config_tree_height(trace: RunTrace):
    return max((len(c[1]) for c in trace.configurations), default=0)


# ---------------------------------------------------------------------------
# Growth


def output_growth(machine, max_len, budget=None, distinct_atoms=True):
    """Table of (n, max output length over inputs of length <= n).

    For machines with atoms, inputs are enumerated over the finite letters
    plus a fresh-atom placeholder; fresh distinct atoms are substituted, which
    is exhaustive for atom-oblivious machines.  Run errors are recorded per
    word instead of aborting.
    """
    from itertools import product as iproduct

    from .words import BudgetExceeded, current_budget

    budget = current_budget(budget)
    letters = list(machine.input_alphabet)
    if machine.atoms:
        letters = letters + ["#"]
    attempted = sum(len(letters) ** n for n in range(1, max_len + 1))
    if attempted > budget:
        raise BudgetExceeded(attempted, budget)
    table = []
    errors = []
    best = 0
    for n in range(1, max_len + 1):
        for shape in iproduct(letters, repeat=n):
            word = []
            fresh = 0
            for sym in shape:
                if sym == "#":
                    fresh += 1
                    word.append(Atom(fresh))
                else:
                    word.append(sym)
            try:
                out, _ = run(machine, tuple(word))
                best = max(best, len(out))
            except MachineError as err:
                errors.append({"word": tuple(word), "error": str(err)})
        table.append((n, best))
    return table, errors


# ---------------------------------------------------------------------------
# Words and files


def parse_machine_word(text, machine=None):
    """Parse CLI input: whitespace-separated tokens, atoms written #<int>."""
    if text.strip() == "":
        return ()
    toks = text.split()
    out = []
    for t in toks:
        if t.startswith("#"):
            out.append(Atom(int(t[1:])))
        else:
            out.append(t)
    return tuple(out)


def format_machine_word(word):
    return " ".join(f"#{l.ident}" if is_atom(l) else str(l) for l in word)


def machine_from_dict(doc):
    rules = tuple(
        Rule(
            state=r["state"],
            guard=tuple(parse_test(t) for t in r.get("guard", [])),
            action=r["action"],
            output=tuple(r.get("output", [])),
            next_state=r.get("next", r["state"]),
        )
        for r in doc["rules"]
    )
    return PebbleMachine(
        pebbles=int(doc["pebbles"]),
        states=tuple(doc["states"]),
        initial=doc["initial"],
        input_alphabet=tuple(doc.get("input_alphabet", [])),
        output_alphabet=tuple(doc.get("output_alphabet", [])),
        empty_output=tuple(doc.get("empty_output", "")),
        atoms=bool(doc.get("atoms", False)),
        rules=rules,
    )


def machine_to_dict(machine):
    return {
        "pebbles": machine.pebbles,
        "states": list(machine.states),
        "initial": machine.initial,
        "input_alphabet": list(machine.input_alphabet),
        "output_alphabet": list(machine.output_alphabet),
        "empty_output": "".join(machine.empty_output),
        "atoms": machine.atoms,
        "rules": [
            {
                "state": r.state,
                "guard": [_format_test(t) for t in r.guard],
                "action": r.action,
                "output": list(r.output),
                "next": r.next_state,
            }
            for r in machine.rules
        ],
    }


def _format_test(term):
    name, args = term
    return f"{name}({','.join(str(a) for a in args)})"


def load_machine(path):
    with open(path, encoding="utf-8") as fh:
        return machine_from_dict(json.load(fh))


def lint_unmatched(machine, word):
    """States reachable with no matching rule on the given word; a load-time
    warning helper, the simulator raises at run time regardless."""
    try:
        run(machine, word)
        return []
    except NoMatchingRule as err:
        return [err.trace.configurations[-1]]
    except MachineError:
        return []
