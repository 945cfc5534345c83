"""Diagram constructions: braid closures, rational tangle closures, and the
small named knots and links the test suites lean on.

Braid closures give valid connected PD codes by construction, which makes
them the workhorse for randomized corpora.  Rational (2-bridge) diagrams are
built from twist regions; correctness of each named knot is pinned by its
determinant, crossing number and component count in the tests.
"""

from __future__ import annotations

import random
from typing import Sequence

from .diagram import ArcMarking, Diagram, _UnionFind, normalize_under_slots
from .errors import MalformedPD


def _fuse_and_relabel(crossings, labels, unions, free_loops=0) -> Diagram:
    """Glue arc labels along union pairs, drop closed loops into free_loops."""
    uf = _UnionFind(labels)
    for a, b in unions:
        uf.union(a, b)
    live = []
    seen = set()
    for c in crossings:
        for a in c:
            r = uf.find(a)
            if r not in seen:
                seen.add(r)
                live.append(r)
    loops = len({uf.find(a) for a in labels}) - len(seen)
    relabel = {r: i + 1 for i, r in enumerate(sorted(live))}
    out = [tuple(relabel[uf.find(a)] for a in c) for c in crossings]
    return normalize_under_slots(out, free_loops + loops)


def braid_closure(word: Sequence[int], strands: int) -> Diagram:
    """Close a braid word into a link diagram.

    word entries are nonzero integers +-i for the standard generators on
    `strands` strands; positions untouched by any letter close into free
    loops.
    """
    if strands < 1:
        raise MalformedPD("need at least one strand")
    for w in word:
        if w == 0 or abs(w) >= strands:
            raise MalformedPD(f"letter {w} invalid for {strands} strands")
    nxt = strands + 1
    cur = list(range(1, strands + 1))
    init = list(cur)
    crossings = []
    for w in word:
        i = abs(w) - 1
        a, b = cur[i], cur[i + 1]
        c, dd = nxt, nxt + 1
        nxt += 2
        if w > 0:
            crossings.append((a, b, dd, c))
        else:
            crossings.append((b, dd, c, a))
        cur[i], cur[i + 1] = c, dd
    labels = range(1, nxt)
    unions = [(cur[j], init[j]) for j in range(strands)]
    return _fuse_and_relabel(crossings, labels, unions)


class _Tangle:
    """Rational tangle under construction; ends are raw arc labels."""

    def __init__(self):
        self.crossings: list[tuple[int, int, int, int]] = []
        self.nw = self.ne = 1
        self.sw = self.se = 2
        self.next = 3

    def _fresh(self):
        x = self.next
        self.next += 1
        return x

    def twist_right(self, hand: int = 1):
        a, b = self.ne, self.se
        x, y = self._fresh(), self._fresh()
        if hand > 0:
            self.crossings.append((a, b, y, x))
        else:
            self.crossings.append((b, y, x, a))
        self.ne, self.se = x, y

    def twist_bottom(self, hand: int = 1):
        a, b = self.sw, self.se
        x, y = self._fresh(), self._fresh()
        if hand > 0:
            self.crossings.append((b, a, x, y))
        else:
            self.crossings.append((a, x, y, b))
        self.sw, self.se = x, y

    def numerator_closure(self) -> Diagram:
        unions = [(self.nw, self.ne), (self.sw, self.se)]
        return _fuse_and_relabel(self.crossings, range(1, self.next),
                                 unions)


def rational_link(coeffs: Sequence[int], hand: int = 1) -> Diagram:
    """Numerator closure of the rational tangle with the given twist counts.

    Twist regions alternate bottom/right starting with bottom; with a single
    handedness throughout, the diagram is alternating and its determinant is
    the continued fraction numerator of the coefficients.
    """
    if not coeffs or any(c < 0 for c in coeffs):
        raise MalformedPD("twist counts must be positive")
    # odd length makes the innermost level horizontal, so construction can
    # start from the 0-tangle; [.., a] = [.., a-1, 1] preserves the fraction
    c = list(coeffs)
    if len(c) % 2 == 0:
        if c[-1] > 1:
            c = c[:-1] + [c[-1] - 1, 1]
        else:
            c = c[:-2] + [c[-2] + 1]
    t = _Tangle()
    # inside out: level j uses right twists when j is odd, bottom when even;
    # the two families take opposite handedness to keep the diagram alternating
    for j in range(len(c), 0, -1):
        for _ in range(c[j - 1]):
            if j % 2 == 1:
                t.twist_right(hand)
            else:
                t.twist_bottom(-hand)
    return t.numerator_closure()


def continued_fraction_numerator(coeffs: Sequence[int]) -> int:
    """p for the fraction [a1, a2, ...] = a1 + 1/(a2 + 1/(...))."""
    from fractions import Fraction
    val = Fraction(coeffs[-1])
    for a in reversed(coeffs[:-1]):
        val = a + 1 / val
    return abs(val.numerator)


_NAMED = {
    "unknot": ([], None),
    "hopf": ([2], None),
    "3_1": ([3], None),
    "trefoil": ([3], None),
    "4_1": ([2, 2], None),
    "5_1": ([5], None),
    "5_2": ([3, 2], None),
    "6_1": ([4, 2], None),
    "6_2": ([3, 1, 2], None),
    "6_3": ([2, 1, 1, 2], None),
    "7_4_torus": ([7], None),
}


def small_knot(name: str) -> Diagram:
    """Named small knots and links as rational diagrams (unknot: free loop)."""
    if name not in _NAMED:
        raise KeyError(f"unknown diagram name {name!r}")
    coeffs, _ = _NAMED[name]
    if not coeffs:
        return Diagram([], free_loops=1)
    return rational_link(coeffs)


def random_braid_diagram(rng: random.Random, max_crossings: int = 7,
                         min_crossings: int = 1) -> Diagram:
    """Random connected braid-closure diagram with n <= max_crossings."""
    while True:
        strands = rng.randint(2, min(4, max(2, max_crossings)))
        length = rng.randint(max(min_crossings, strands - 1), max_crossings)
        word = [rng.choice([1, -1]) * rng.randint(1, strands - 1)
                for _ in range(length)]
        if {abs(w) for w in word} == set(range(1, strands)):
            return braid_closure(word, strands)


def random_compatible_marking(d: Diagram, rng: random.Random) -> ArcMarking:
    """Random arc marking whose induced two-fold datum has even total parity."""
    comp_bits = [rng.randint(0, 1) for _ in d.components]
    if sum(comp_bits) % 2:
        comp_bits[rng.randrange(len(comp_bits))] ^= 1
    bits = [0] * d.arc_count
    for comp, parity in zip(d.components, comp_bits):
        arcs = list(comp)
        size = rng.randint(0, len(arcs))
        if size % 2 != parity:
            size = size + 1 if size < len(arcs) else size - 1
        for a in rng.sample(arcs, size):
            bits[a - 1] = 1
    return ArcMarking(tuple(bits))


def diagram_corpus(seed: int = 2024, count: int = 500,
                   max_crossings: int = 7) -> list[Diagram]:
    """Deterministic corpus of distinct connected diagrams for acceptance runs."""
    rng = random.Random(seed)
    seen = set()
    out: list[Diagram] = []
    while len(out) < count:
        d = random_braid_diagram(rng, max_crossings=max_crossings)
        key = (d.crossings, d.free_loops)
        if key not in seen:
            seen.add(key)
            out.append(d)
    return out
