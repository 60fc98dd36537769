"""
Automata Module: probabilistic and non-deterministic finite automata.

Houses the generic PNFA/NFA types, the subordinate bit-encoding automaton that
spells one noise vector, the support-automaton projection, the suffix automaton
of a cyclic string and path counting on the d-regular key graph.
Symbols are small integers; bit automata use 0/1.
"""

import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Sequence, Tuple

from wepa.utils.error_handler import WatermarkError

logger = logging.getLogger(__name__)

PROB_TOL = 1e-9
INT64_MAX = 2**63 - 1

Transition = Tuple[int, int, int]


class AutomatonError(WatermarkError):
    """Raised for malformed automata or invalid automaton inputs."""
    def __init__(self, message: str):
        super().__init__(message, "invalid_automaton")


@dataclass(frozen=True)
class Pnfa:
    """
    Probabilistic non-deterministic finite automaton (Q, Σ, δ, π₀, π_f).

    `generative=True` requires every state's stopping probability plus its
    outgoing mass to equal 1; recognizing automata set it to False.
    """
    n_states: int
    alphabet: Tuple[int, ...]
    transitions: Mapping[Transition, float]
    initial: Tuple[float, ...]
    final: Tuple[float, ...]
    generative: bool = True
    _outgoing: Mapping[int, Tuple[Tuple[int, int, float], ...]] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        object.__setattr__(self, "initial", tuple(float(p) for p in self.initial))
        object.__setattr__(self, "final", tuple(float(p) for p in self.final))
        object.__setattr__(self, "transitions", MappingProxyType(dict(self.transitions)))

        if self.n_states < 1:
            raise AutomatonError(f"automaton needs at least one state, got {self.n_states}")
        if len(self.initial) != self.n_states or len(self.final) != self.n_states:
            raise AutomatonError("initial/final vectors must have one entry per state")

        symbols = set(self.alphabet)
        outgoing: Dict[int, List[Tuple[int, int, float]]] = {q: [] for q in range(self.n_states)}
        for (q, a, q2), p in self.transitions.items():
            if not (0 <= q < self.n_states and 0 <= q2 < self.n_states):
                raise AutomatonError(f"transition ({q}, {a}, {q2}) references an unknown state")
            if a not in symbols:
                raise AutomatonError(f"transition ({q}, {a}, {q2}) uses a symbol outside the alphabet")
            if not 0.0 <= p <= 1.0:
                raise AutomatonError(f"transition ({q}, {a}, {q2}) has probability {p} outside [0, 1]")
            outgoing[q].append((a, q2, float(p)))

        for p in self.initial + self.final:
            if not 0.0 <= p <= 1.0:
                raise AutomatonError(f"state probability {p} outside [0, 1]")
        if abs(sum(self.initial) - 1.0) > PROB_TOL:
            raise AutomatonError(f"initial distribution sums to {sum(self.initial)}, expected 1")

        if self.generative:
            for q in range(self.n_states):
                mass = self.final[q] + sum(p for _, _, p in outgoing[q])
                if abs(mass - 1.0) > PROB_TOL:
                    raise AutomatonError(f"state {q} is not normalized: stop + outgoing = {mass}")

        object.__setattr__(
            self, "_outgoing",
            MappingProxyType({q: tuple(edges) for q, edges in outgoing.items()})
        )

    def outgoing(self, state: int) -> Tuple[Tuple[int, int, float], ...]:
        """(symbol, target, probability) triples leaving `state`."""
        return self._outgoing[state]

    def to_document(self) -> dict:
        return {
            "states": self.n_states,
            "alphabet": list(self.alphabet),
            "transitions": [[q, a, q2, p] for (q, a, q2), p in sorted(self.transitions.items())],
            "initial": list(self.initial),
            "final": list(self.final),
            "generative": self.generative,
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Pnfa":
        try:
            return cls(
                n_states=int(doc["states"]),
                alphabet=tuple(int(a) for a in doc["alphabet"]),
                transitions={(int(q), int(a), int(q2)): float(p) for q, a, q2, p in doc["transitions"]},
                initial=tuple(doc["initial"]),
                final=tuple(doc["final"]),
                generative=bool(doc.get("generative", True)),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise AutomatonError(f"malformed automaton document: {e}")


@dataclass(frozen=True)
class Nfa:
    """Non-deterministic finite automaton (Q, Σ, δ, Q₀, Q_f)."""
    n_states: int
    alphabet: FrozenSet[int]
    transitions: FrozenSet[Transition]
    initial: FrozenSet[int]
    final: FrozenSet[int]
    _delta: Mapping[Tuple[int, int], FrozenSet[int]] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", frozenset(self.alphabet))
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "final", frozenset(self.final))

        delta: Dict[Tuple[int, int], set] = {}
        for q, a, q2 in self.transitions:
            if not (0 <= q < self.n_states and 0 <= q2 < self.n_states):
                raise AutomatonError(f"transition ({q}, {a}, {q2}) references an unknown state")
            if a not in self.alphabet:
                raise AutomatonError(f"transition ({q}, {a}, {q2}) uses a symbol outside the alphabet")
            delta.setdefault((q, a), set()).add(q2)
        for q in self.initial | self.final:
            if not 0 <= q < self.n_states:
                raise AutomatonError(f"initial/final state {q} does not exist")
        object.__setattr__(
            self, "_delta", MappingProxyType({k: frozenset(v) for k, v in delta.items()})
        )

    def step(self, states: FrozenSet[int], symbol: int) -> FrozenSet[int]:
        reached = set()
        for q in states:
            reached |= self._delta.get((q, symbol), frozenset())
        return frozenset(reached)

    def to_document(self) -> dict:
        return {
            "states": self.n_states,
            "alphabet": sorted(self.alphabet),
            "transitions": sorted([list(t) for t in self.transitions]),
            "initial": sorted(self.initial),
            "final": sorted(self.final),
        }

    @classmethod
    def from_document(cls, doc: dict) -> "Nfa":
        try:
            return cls(
                n_states=int(doc["states"]),
                alphabet=frozenset(int(a) for a in doc["alphabet"]),
                transitions=frozenset((int(q), int(a), int(q2)) for q, a, q2 in doc["transitions"]),
                initial=frozenset(int(q) for q in doc["initial"]),
                final=frozenset(int(q) for q in doc["final"]),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise AutomatonError(f"malformed automaton document: {e}")


def build_subordinate_pa(
    vocab_size: int,
    bitwidth_b: int,
    precision_c: int,
    key_bits: Sequence[Sequence[int]],
) -> Pnfa:
    """
    Build the layered automaton that spells one noise vector bit by bit.

    Layer i spells μ_i: a chain σ_{i,1..b} fixed by `key_bits[i]`, then two
    parallel Boolean paths ι (bit 0) / ι̂ (bit 1) for the c − b free bits.
    Each transition emits the bit of the state it enters. The terminal bit
    states of the last layer are the accepting states; every state splits its
    mass equally among its outgoing transitions.
    """
    if vocab_size < 1:
        raise AutomatonError(f"vocab_size must be >= 1, got {vocab_size}")
    if bitwidth_b < 1 or bitwidth_b > precision_c:
        raise AutomatonError(f"need 1 <= b <= c, got b={bitwidth_b}, c={precision_c}")
    if len(key_bits) != vocab_size or any(len(row) != bitwidth_b for row in key_bits):
        raise AutomatonError(f"key_bits must be a {vocab_size} x {bitwidth_b} bit matrix")
    if any(bit not in (0, 1) for row in key_bits for bit in row):
        raise AutomatonError("key_bits entries must be 0 or 1")

    b, c = bitwidth_b, precision_c
    free = c - b
    layer_size = b + 2 * free

    def sigma(i: int, j: int) -> int:
        return 1 + i * layer_size + (j - 1)

    def iota(i: int, j: int, bit: int) -> int:
        return 1 + i * layer_size + b + 2 * (j - b - 1) + bit

    n_states = 1 + vocab_size * layer_size
    edges: Dict[int, List[Tuple[int, int]]] = {q: [] for q in range(n_states)}

    edges[0].append((key_bits[0][0], sigma(0, 1)))
    for i in range(vocab_size):
        for j in range(1, b):
            edges[sigma(i, j)].append((key_bits[i][j], sigma(i, j + 1)))
        if free:
            tails = [iota(i, c, 0), iota(i, c, 1)]
            for bit in (0, 1):
                edges[sigma(i, b)].append((bit, iota(i, b + 1, bit)))
            for j in range(b + 1, c):
                for src in (0, 1):
                    for bit in (0, 1):
                        edges[iota(i, j, src)].append((bit, iota(i, j + 1, bit)))
        else:
            tails = [sigma(i, b)]
        if i + 1 < vocab_size:
            for tail in tails:
                edges[tail].append((key_bits[i + 1][0], sigma(i + 1, 1)))

    accepting = set(tails)
    transitions: Dict[Transition, float] = {}
    final = [0.0] * n_states
    for q, out in edges.items():
        if q in accepting:
            final[q] = 1.0
            continue
        share = 1.0 / len(out)
        for symbol, target in out:
            transitions[(q, symbol, target)] = share

    initial = [0.0] * n_states
    initial[0] = 1.0
    logger.debug(f"Subordinate PA: |V|={vocab_size}, b={b}, c={c}, {n_states} states")
    return Pnfa(n_states, (0, 1), transitions, tuple(initial), tuple(final))


def support_automaton(pa: Pnfa) -> Nfa:
    """Keep exactly the positive-probability transitions, initial and final states."""
    return Nfa(
        n_states=pa.n_states,
        alphabet=frozenset(pa.alphabet),
        transitions=frozenset(t for t, p in pa.transitions.items() if p > 0.0),
        initial=frozenset(q for q, p in enumerate(pa.initial) if p > 0.0),
        final=frozenset(q for q, p in enumerate(pa.final) if p > 0.0),
    )


def nfa_accepts(nfa: Nfa, word: Sequence[int]) -> bool:
    """True iff some path from an initial to a final state spells `word`."""
    current = nfa.initial
    for symbol in word:
        if symbol not in nfa.alphabet:
            raise AutomatonError(f"symbol {symbol!r} is not in the automaton alphabet")
        current = nfa.step(current, symbol)
        if not current:
            return False
    return bool(current & nfa.final)


def enumerate_language(nfa: Nfa, max_len: int) -> List[Tuple[int, ...]]:
    """All accepted words of length <= max_len, sorted."""
    words: List[Tuple[int, ...]] = []
    symbols = sorted(nfa.alphabet)
    stack: List[Tuple[Tuple[int, ...], FrozenSet[int]]] = [((), nfa.initial)]
    while stack:
        word, states = stack.pop()
        if states & nfa.final:
            words.append(word)
        if len(word) == max_len:
            continue
        for symbol in symbols:
            nxt = nfa.step(states, symbol)
            if nxt:
                stack.append((word + (symbol,), nxt))
    return sorted(words, key=lambda w: (len(w), w))


def pnfa_string_probability(pa: Pnfa, word: Sequence[int]) -> float:
    """Probability that `pa` generates exactly `word` (forward algorithm)."""
    alpha = list(pa.initial)
    for symbol in word:
        nxt = [0.0] * pa.n_states
        for q, weight in enumerate(alpha):
            if weight == 0.0:
                continue
            for a, q2, p in pa.outgoing(q):
                if a == symbol:
                    nxt[q2] += weight * p
        alpha = nxt
    return sum(w * f for w, f in zip(alpha, pa.final))


@dataclass(frozen=True)
class SamNode:
    length: int
    link: int
    next: Mapping[int, int]


@dataclass(frozen=True)
class SuffixAutomaton:
    """Suffix automaton; every state accepts, the root is state 0."""
    nodes: Tuple[SamNode, ...]

    @property
    def n_states(self) -> int:
        return len(self.nodes)

    def accepts(self, word: Sequence[int]) -> bool:
        state = 0
        for symbol in word:
            state = self.nodes[state].next.get(symbol, -1)
            if state < 0:
                return False
        return True

    def to_document(self) -> dict:
        return {
            "nodes": [
                {"len": n.length, "link": n.link, "next": {str(k): v for k, v in sorted(n.next.items())}}
                for n in self.nodes
            ]
        }

    @classmethod
    def from_document(cls, doc: dict) -> "SuffixAutomaton":
        try:
            return cls(tuple(
                SamNode(int(n["len"]), int(n["link"]),
                        MappingProxyType({int(k): int(v) for k, v in n["next"].items()}))
                for n in doc["nodes"]
            ))
        except (KeyError, TypeError, ValueError) as e:
            raise AutomatonError(f"malformed suffix automaton document: {e}")


class _SamBuilder:
    """Online suffix automaton construction (one Extend per symbol)."""

    def __init__(self):
        self.length: List[int] = [0]
        self.link: List[int] = [-1]
        self.next: List[Dict[int, int]] = [{}]
        self.last = 0

    def _new_state(self, length: int, link: int, nxt: Dict[int, int]) -> int:
        self.length.append(length)
        self.link.append(link)
        self.next.append(nxt)
        return len(self.length) - 1

    def extend(self, symbol: int):
        p = self.last
        cur = self._new_state(self.length[p] + 1, 0, {})
        while p != -1 and symbol not in self.next[p]:
            self.next[p][symbol] = cur
            p = self.link[p]
        if p != -1:
            q = self.next[p][symbol]
            if self.length[p] + 1 == self.length[q]:
                self.link[cur] = q
            else:
                clone = self._new_state(self.length[p] + 1, self.link[q], dict(self.next[q]))
                while p != -1 and self.next[p].get(symbol) == q:
                    self.next[p][symbol] = clone
                    p = self.link[p]
                self.link[q] = clone
                self.link[cur] = clone
        self.last = cur

    def walk(self, word: Sequence[int]) -> int:
        state = 0
        for symbol in word:
            state = self.next[state][symbol]
        return state

    def freeze(self) -> SuffixAutomaton:
        return SuffixAutomaton(tuple(
            SamNode(length, link, MappingProxyType(dict(nxt)))
            for length, link, nxt in zip(self.length, self.link, self.next)
        ))


def suffix_automaton_cyclic(s: Sequence[int], literal_wrap: bool = False) -> SuffixAutomaton:
    """
    Automaton recognizing the substrings of the infinite repetition of `s`.

    Extends over s twice, then adds a wrap edge from the last state on s₀.
    The wrap target is the state spelling s·s₀, so reading continues with s₁;
    `literal_wrap=True` instead targets the newest state after the first pass.
    At most 4|s| states; unreachable clones are kept.
    """
    s = list(s)
    if not s:
        raise AutomatonError("cyclic suffix automaton needs a non-empty string")

    builder = _SamBuilder()
    for symbol in s:
        builder.extend(symbol)
    idx = len(builder.length) - 1
    for symbol in s:
        builder.extend(symbol)

    target = idx if literal_wrap else builder.walk(s + [s[0]])
    builder.next[builder.last][s[0]] = target

    sam = builder.freeze()
    if sam.n_states > 4 * len(s):
        raise AutomatonError(f"cyclic automaton has {sam.n_states} states, above 4|s| = {4 * len(s)}")
    logger.debug(f"Cyclic suffix automaton: |s|={len(s)}, {sam.n_states} states, wrap -> {target}")
    return sam


def is_cyclic_substring(s: Sequence[int], word: Sequence[int]) -> bool:
    """Direct check: is `word` a substring of s repeated forever?"""
    s, word = list(s), list(word)
    if not s:
        raise AutomatonError("cyclic substring check needs a non-empty string")
    if not word:
        return True
    text = s * (len(word) // len(s) + 2)
    n = len(word)
    return any(text[i:i + n] == word for i in range(len(s)))


def successors(state: int, n_states: int, degree: int) -> Tuple[int, ...]:
    """Successors {state+1, ..., state+d} mod λ of the d-regular cyclic graph."""
    return tuple((state + k) % n_states for k in range(1, degree + 1))


def iter_state_paths(n_states: int, degree: int, steps: int) -> Iterator[Tuple[int, ...]]:
    """Every path start → `steps` transitions on the d-regular cyclic graph."""
    def extend(path: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
        if len(path) == steps + 1:
            yield path
            return
        for nxt in successors(path[-1], n_states, degree):
            yield from extend(path + (nxt,))

    for start in range(n_states):
        yield from extend((start,))


def count_paths(n_states: int, degree: int, steps: int, limit: Optional[int] = INT64_MAX) -> int:
    """
    Number of distinct state paths of length `steps` over all starts, λ·d^m.

    Raises when the count exceeds `limit` (signed 64-bit by default) instead of
    handing a wrapped value to fixed-width consumers; `limit=None` disables it.
    """
    if n_states < 1 or degree < 1 or steps < 0:
        raise AutomatonError(f"need lambda >= 1, d >= 1, m >= 0; got {n_states}, {degree}, {steps}")
    total = n_states * degree ** steps
    if limit is not None and total > limit:
        raise AutomatonError(f"path count lambda*d^m = {n_states}*{degree}^{steps} exceeds {limit}")
    return total
