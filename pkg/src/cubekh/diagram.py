"""Planar link diagrams as PD codes: parsing, tracing, resolutions, markings.

Conventions fixed here and used everywhere else:

* A crossing is a 4-tuple of arc labels listed counterclockwise starting at
  the incoming under-strand, so slots 0 and 2 (0-indexed) hold the
  under-strand and slots 1 and 3 the over-strand.
* The 0-resolution joins slots (0,1) and (2,3); the 1-resolution joins
  slots (0,3) and (1,2).
* Crossingless unknot components cannot be written in a PD code, so a
  diagram carries a separate free_loops counter.
* Orientation is input as one +1/-1 flag per component, applied on top of
  the natural direction read off the under-strand slots; crossing signs are
  derived from the resulting arc directions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import (
    DisconnectedTrace,
    IncompatibleMarking,
    LengthMismatch,
    MalformedPD,
    NonPlanarTrace,
)

RES0_PAIRS = ((0, 1), (2, 3))
RES1_PAIRS = ((0, 3), (1, 2))


class _UnionFind:
    def __init__(self, items: Iterable):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def classes(self) -> list[tuple]:
        groups: dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), []).append(x)
        return [tuple(sorted(g)) for g in sorted(groups.values(), key=min)]


class Diagram:
    """Validated oriented link diagram.

    Attributes (read-only by convention):
        crossings: tuple of 4-tuples of arc labels.
        arc_count: number of arcs (2 * crossings when nonempty).
        free_loops: crossingless unknot components.
        components: tuple of tuples of arcs, one per link component, ordered
            by smallest arc.
        orientation: per-component +1/-1 flags relative to natural direction.
        arc_head: arc -> (crossing, slot) incidence the arc points into.
        signs: per-crossing +1/-1.
    """

    def __init__(self, crossings, free_loops: int = 0,
                 orientation: Sequence[int] | None = None):
        self.crossings = tuple(tuple(int(x) for x in c) for c in crossings)
        self.free_loops = int(free_loops)
        if self.free_loops < 0:
            raise MalformedPD("free_loops must be non-negative")
        for c in self.crossings:
            if len(c) != 4:
                raise MalformedPD(f"crossing {c} is not a 4-tuple")
        n = len(self.crossings)
        self.arc_count = 2 * n
        counts: dict[int, int] = {}
        for c in self.crossings:
            for a in c:
                counts[a] = counts.get(a, 0) + 1
        expected = set(range(1, self.arc_count + 1))
        if set(counts) != expected or any(v != 2 for v in counts.values()):
            raise MalformedPD(
                "arc labels must be 1..2n with each label appearing exactly twice")

        self._incidences: dict[int, list[tuple[int, int]]] = {a: [] for a in expected}
        for ci, c in enumerate(self.crossings):
            for s, a in enumerate(c):
                self._incidences[a].append((ci, s))

        self.components, natural_head = self._trace_components()
        if orientation is None:
            orientation = [1] * len(self.components)
        orientation = tuple(int(x) for x in orientation)
        if len(orientation) != len(self.components):
            raise MalformedPD(
                f"expected {len(self.components)} orientation flags, got {len(orientation)}")
        if any(x not in (1, -1) for x in orientation):
            raise MalformedPD("orientation flags must be +1 or -1")
        self.orientation = orientation

        self.arc_head: dict[int, tuple[int, int]] = {}
        for comp, flag in zip(self.components, self.orientation):
            for a in comp:
                head, tail = natural_head[a]
                self.arc_head[a] = head if flag == 1 else tail

        self.signs = tuple(self._crossing_sign(ci) for ci in range(n))
        self.n_plus = sum(1 for s in self.signs if s == 1)
        self.n_minus = n - self.n_plus

    # -- construction helpers -------------------------------------------------

    def _other_incidence(self, arc: int, inc: tuple[int, int]) -> tuple[int, int]:
        a, b = self._incidences[arc]
        if inc == a:
            return b
        if inc == b:
            return a
        raise MalformedPD(f"incidence {inc} not on arc {arc}")

    def _trace_components(self):
        """Walk strands, returning components and natural (head, tail) per arc."""
        n = len(self.crossings)
        if n == 0:
            return (), {}
        visited: set[int] = set()
        components: list[tuple[int, ...]] = []
        natural: dict[int, tuple[tuple[int, int], tuple[int, int]]] = {}
        for start in range(1, self.arc_count + 1):
            if start in visited:
                continue
            arc = start
            head = self._incidences[arc][0]
            path: list[tuple[int, tuple[int, int]]] = []
            while True:
                path.append((arc, head))
                ci, s = head
                exit_inc = (ci, s ^ 2)
                nxt = self.crossings[ci][s ^ 2]
                head = self._other_incidence(nxt, exit_inc)
                arc = nxt
                if arc == start and head == self._incidences[start][0]:
                    break
                if len(path) > self.arc_count:
                    raise DisconnectedTrace("strand tracing does not close up")
            arcs_in_path = [a for a, _ in path]
            if len(set(arcs_in_path)) != len(arcs_in_path):
                raise DisconnectedTrace("strand tracing repeats an arc")
            under_in = sum(1 for _, (ci, s) in path if s == 0)
            under_out = sum(1 for _, (ci, s) in path if s == 2)
            if under_in and under_out:
                raise DisconnectedTrace(
                    "under-strand directions are inconsistent along a component")
            reverse = under_out > 0
            for a, h in path:
                t = self._other_incidence(a, h)
                natural[a] = (t, h) if reverse else (h, t)
            visited.update(arcs_in_path)
            components.append(tuple(sorted(arcs_in_path)))
        components.sort(key=min)
        return tuple(components), natural

    def _crossing_sign(self, ci: int) -> int:
        c = self.crossings[ci]
        u = 1 if self.arc_head[c[0]] == (ci, 0) else -1
        o = 1 if self.arc_head[c[1]] == (ci, 1) else -1
        return u * o

    # -- basic queries ---------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.crossings)

    def component_count(self) -> int:
        return len(self.components) + self.free_loops

    def component_of(self, arc: int) -> int:
        for i, comp in enumerate(self.components):
            if arc in comp:
                return i
        raise MalformedPD(f"no such arc {arc}")

    def is_pd_connected(self) -> bool:
        """True when the underlying 4-valent graph is connected."""
        if self.n <= 1:
            return True
        uf = _UnionFind(range(self.n))
        for a, incs in self._incidences.items():
            uf.union(incs[0][0], incs[1][0])
        return len(uf.classes()) == 1

    def pd_components(self) -> list[list[int]]:
        """Connected components of the diagram graph, as crossing index lists."""
        if self.n == 0:
            return []
        uf = _UnionFind(range(self.n))
        for a, incs in self._incidences.items():
            uf.union(incs[0][0], incs[1][0])
        return [list(c) for c in uf.classes()]

    def __eq__(self, other):
        return (isinstance(other, Diagram)
                and self.crossings == other.crossings
                and self.free_loops == other.free_loops
                and self.orientation == other.orientation)

    def __hash__(self):
        return hash((self.crossings, self.free_loops, self.orientation))

    def __repr__(self):
        return (f"Diagram({list(map(list, self.crossings))}, "
                f"free_loops={self.free_loops})")


@dataclass(frozen=True)
class ResolvedState:
    """A full resolution of a diagram: circles and their arc content."""

    index: tuple[int, ...]
    circles: tuple[tuple[int, ...], ...]
    arc_to_circle: dict
    marked_circle: int | None = None

    @property
    def n_circles(self) -> int:
        return len(self.circles)


@dataclass(frozen=True)
class TwoFoldMarking:
    """Per-component parity bits with even total parity."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise IncompatibleMarking("marking bits must be 0 or 1")
        if sum(self.bits) % 2:
            raise IncompatibleMarking("total parity of a two-fold marking must be even")


@dataclass(frozen=True)
class ArcMarking:
    """Per-arc parity bits; compatible when component sums land on a valid
    two-fold marking (even total)."""

    bits: tuple[int, ...]

    @staticmethod
    def zero(d: Diagram) -> "ArcMarking":
        return ArcMarking((0,) * d.arc_count)

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise IncompatibleMarking("marking bits must be 0 or 1")

    def bit(self, arc: int) -> int:
        return self.bits[arc - 1]

    def component_parities(self, d: Diagram) -> tuple[int, ...]:
        if len(self.bits) != d.arc_count:
            raise IncompatibleMarking(
                f"marking has {len(self.bits)} bits for {d.arc_count} arcs")
        return tuple(sum(self.bit(a) for a in comp) % 2 for comp in d.components)

    def two_fold_marking(self, d: Diagram) -> TwoFoldMarking:
        """The induced two-fold marking datum; free loops always carry 0."""
        pars = self.component_parities(d)
        return TwoFoldMarking(pars + (0,) * d.free_loops)

    def is_compatible(self, d: Diagram) -> bool:
        if len(self.bits) != d.arc_count:
            return False
        return sum(self.bits) % 2 == 0


def parse_pd(text, free_loops: int = 0,
             orientation: Sequence[int] | None = None) -> Diagram:
    """Parse a PD code given as a JSON-style string or a list of 4-tuples."""
    if isinstance(text, str):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise MalformedPD(f"cannot parse PD code: {e}") from e
    else:
        data = text
    if not isinstance(data, (list, tuple)):
        raise MalformedPD("PD code must be a list of 4-tuples")
    return Diagram(data, free_loops=free_loops, orientation=orientation)


def resolve(d: Diagram, index: Sequence[int], basepoint: int | None = None) -> ResolvedState:
    """Resolve every crossing of d according to the bit-vector index.

    Circles are computed by union-find over the arc identifications each
    local resolution induces; free loops count as extra circles.  When a
    basepoint arc is given, the circle containing it is marked; for the
    empty diagram with free loops the first free loop is marked.
    """
    index = tuple(int(b) for b in index)
    if len(index) != d.n:
        raise LengthMismatch(f"expected {d.n} bits, got {len(index)}")
    if any(b not in (0, 1) for b in index):
        raise LengthMismatch("resolution bits must be 0 or 1")
    uf = _UnionFind(range(1, d.arc_count + 1))
    for ci, bit in enumerate(index):
        c = d.crossings[ci]
        for s, t in (RES0_PAIRS if bit == 0 else RES1_PAIRS):
            uf.union(c[s], c[t])
    circles = uf.classes() if d.arc_count else []
    circles.extend(() for _ in range(d.free_loops))
    arc_to_circle = {}
    for idx, circ in enumerate(circles):
        for a in circ:
            arc_to_circle[a] = idx
    marked = None
    if basepoint is not None:
        if d.arc_count:
            if basepoint not in arc_to_circle:
                raise MalformedPD(f"basepoint arc {basepoint} does not exist")
            marked = arc_to_circle[basepoint]
        elif d.free_loops:
            marked = 0
    return ResolvedState(index, tuple(circles), arc_to_circle, marked)


def mirror(d: Diagram) -> Diagram:
    """Swap over/under at every crossing, preserving component orientations."""
    new_crossings = []
    shift = []  # old slot s sits at new slot (s + shift) % 4
    for ci, c in enumerate(d.crossings):
        if d.arc_head[c[1]] == (ci, 1):
            # over-strand runs slot1 -> slot3; it becomes the incoming under
            new_crossings.append((c[1], c[2], c[3], c[0]))
            shift.append(3)
        else:
            new_crossings.append((c[3], c[0], c[1], c[2]))
            shift.append(1)
    m = Diagram(new_crossings, free_loops=d.free_loops)
    flags = []
    for comp in m.components:
        a = min(comp)
        ci, s = d.arc_head[a]
        flags.append(1 if m.arc_head[a] == (ci, (s + shift[ci]) % 4) else -1)
    return Diagram(new_crossings, free_loops=d.free_loops, orientation=flags)


def induce_marking(d: Diagram, m: ArcMarking, s: ResolvedState) -> tuple[int, ...]:
    """Per-circle parities of the arc marking on a resolved state."""
    if len(m.bits) != d.arc_count:
        raise IncompatibleMarking(
            f"marking has {len(m.bits)} bits for {d.arc_count} arcs")
    return tuple(sum(m.bit(a) for a in circ) % 2 for circ in s.circles)


# ---------------------------------------------------------------------------
# Crossing deletion, smoothing, simplification
# ---------------------------------------------------------------------------

def normalize_under_slots(crossings, free_loops: int = 0) -> Diagram:
    """Build a Diagram from raw tuples, rotating any tuple by two slots so
    each under-strand is entered at slot 0 along one consistent direction
    per component.  Needed after surgery on tuples (smoothings, fusions,
    tangle constructions) which can reverse strand directions.
    """
    crossings = [tuple(c) for c in crossings]
    incidences: dict[int, list[tuple[int, int]]] = {}
    for ci, c in enumerate(crossings):
        for s, a in enumerate(c):
            incidences.setdefault(a, []).append((ci, s))
    for a, incs in incidences.items():
        if len(incs) != 2:
            raise MalformedPD(f"arc {a} appears {len(incs)} times")

    def other(arc, inc):
        x, y = incidences[arc]
        return y if inc == x else x

    rotate = set()
    visited = set()
    for start in sorted(incidences):
        if start in visited:
            continue
        arc, head = start, incidences[start][0]
        while True:
            visited.add(arc)
            ci, s = head
            if s == 2:
                rotate.add(ci)
            nxt = crossings[ci][s ^ 2]
            head = other(nxt, (ci, s ^ 2))
            arc = nxt
            if arc == start and head == incidences[start][0]:
                break
    fixed = [((c[2], c[3], c[0], c[1]) if ci in rotate else c)
             for ci, c in enumerate(crossings)]
    return Diagram(fixed, free_loops=free_loops)


def _rebuild(d: Diagram, victims: dict[int, tuple[tuple[int, int], ...]]) -> Diagram:
    """Delete the victim crossings, fusing arcs along the given slot pairings.

    victims maps crossing index -> pairs of slots whose arcs join up when the
    crossing is removed.  Arc classes with no incidence at a surviving
    crossing become free loops.
    """
    uf = _UnionFind(range(1, d.arc_count + 1)) if d.arc_count else _UnionFind([])
    for ci, pairs in victims.items():
        c = d.crossings[ci]
        for s, t in pairs:
            uf.union(c[s], c[t])
    survivors = [ci for ci in range(d.n) if ci not in victims]
    live_classes = []
    seen = set()
    for ci in survivors:
        for a in d.crossings[ci]:
            r = uf.find(a)
            if r not in seen:
                seen.add(r)
                live_classes.append(r)
    new_loops = len({uf.find(a) for a in range(1, d.arc_count + 1)}) - len(seen)
    relabel = {r: i + 1 for i, r in enumerate(sorted(live_classes))}
    new_crossings = [tuple(relabel[uf.find(a)] for a in d.crossings[ci])
                     for ci in survivors]
    return normalize_under_slots(new_crossings, free_loops=d.free_loops + new_loops)


def smooth_crossing(d: Diagram, ci: int, bit: int) -> Diagram:
    """Replace one crossing by its 0- or 1-resolution."""
    pairs = RES0_PAIRS if bit == 0 else RES1_PAIRS
    return _rebuild(d, {ci: pairs})


def _find_r1(d: Diagram):
    for ci, c in enumerate(d.crossings):
        for s in range(4):
            if c[s] == c[(s + 1) % 4]:
                # loop arc occupies slots s, s+1; strand passes through the rest
                return ci, (((s + 3) % 4, s), ((s + 1) % 4, (s + 2) % 4))
    return None


def _find_r2(d: Diagram):
    by_pair: dict[tuple[int, int], list[int]] = {}
    for a, incs in d._incidences.items():
        c1, c2 = incs[0][0], incs[1][0]
        if c1 != c2:
            by_pair.setdefault((min(c1, c2), max(c1, c2)), []).append(a)
    for (c1, c2), arcs in sorted(by_pair.items()):
        for i in range(len(arcs)):
            for j in range(i + 1, len(arcs)):
                x, y = arcs[i], arcs[j]
                sx1 = next(s for (ci, s) in d._incidences[x] if ci == c1)
                sx2 = next(s for (ci, s) in d._incidences[x] if ci == c2)
                sy1 = next(s for (ci, s) in d._incidences[y] if ci == c1)
                sy2 = next(s for (ci, s) in d._incidences[y] if ci == c2)
                if (sx1 - sy1) % 4 not in (1, 3) or (sx2 - sy2) % 4 not in (1, 3):
                    continue
                if sx1 % 2 != sx2 % 2:
                    continue  # clasp, not a Reidemeister-2 bigon
                pairs1 = ((sx1, sx1 ^ 2), (sy1, sy1 ^ 2))
                pairs2 = ((sx2, sx2 ^ 2), (sy2, sy2 ^ 2))
                return {c1: pairs1, c2: pairs2}
    return None


def simplify_greedy(d: Diagram) -> Diagram:
    """Apply Reidemeister-1 kink and Reidemeister-2 bigon removals until none
    applies.  Link type is preserved; the result carries natural orientation."""
    while True:
        r1 = _find_r1(d)
        if r1 is not None:
            ci, pairs = r1
            d = _rebuild(d, {ci: pairs})
            continue
        r2 = _find_r2(d)
        if r2 is not None:
            d = _rebuild(d, r2)
            continue
        return d


def connect_sum(d1: Diagram, d2: Diagram, arc1: int = 1, arc2: int = 1) -> Diagram:
    """Connected sum splicing arc1 of d1 with arc2 of d2 (orientations chain)."""
    if not d1.arc_count or not d2.arc_count:
        raise MalformedPD("connect_sum requires diagrams with crossings")
    shift = d1.arc_count
    c2 = [tuple(a + shift for a in c) for c in d2.crossings]
    a2 = arc2 + shift
    # splice: tail(arc1) -> head(arc2') and tail(arc2') -> head(arc1)
    h1 = d1.arc_head[arc1]
    t1 = d1._other_incidence(arc1, h1)
    h2o = d2.arc_head[arc2]
    t2o = d2._other_incidence(arc2, h2o)
    n1 = d1.n
    h2 = (h2o[0] + n1, h2o[1])
    t2 = (t2o[0] + n1, t2o[1])
    crossings = [list(c) for c in d1.crossings] + [list(c) for c in c2]
    new_a = arc1              # tail of arc1 .. head of arc2'
    new_b = a2                # tail of arc2' .. head of arc1
    crossings[h2[0]][h2[1]] = new_a
    crossings[t2[0]][t2[1]] = new_b
    crossings[h1[0]][h1[1]] = new_b
    crossings[t1[0]][t1[1]] = new_a
    # relabel to consecutive integers
    labels = sorted({a for c in crossings for a in c})
    relabel = {a: i + 1 for i, a in enumerate(labels)}
    out = [tuple(relabel[a] for a in c) for c in crossings]
    return Diagram(out, free_loops=d1.free_loops + d2.free_loops)


def canonical_key(d: Diagram):
    """Deterministic key identifying the unoriented diagram up to arc
    relabeling; used for memoization (collisions impossible, misses cheap)."""
    n = d.n
    if n == 0:
        return (d.free_loops,)
    best = None
    for start in range(1, d.arc_count + 1):
        for hidx in (0, 1):
            order: dict[int, int] = {}
            arc, head = start, d._incidences[start][hidx]
            while True:
                if arc not in order:
                    order[arc] = len(order) + 1
                ci, s = head
                nxt = d.crossings[ci][s ^ 2]
                head = d._other_incidence(nxt, (ci, s ^ 2))
                arc = nxt
                if arc in order and head == d._incidences[start][hidx] and arc == start:
                    break
                if len(order) == d.arc_count and arc in order:
                    break
            for a in range(1, d.arc_count + 1):
                if a not in order:
                    order[a] = len(order) + 1
            tuples = []
            for c in d.crossings:
                t = tuple(order[a] for a in c)
                r = (t[2], t[3], t[0], t[1])
                tuples.append(min(t, r))
            key = (tuple(sorted(tuples)), d.free_loops)
            if best is None or key < best:
                best = key
    return best


# ---------------------------------------------------------------------------
# Combinatorial map: faces of the projection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PlanarMap:
    """Faces of the 4-valent projection, from the rotation system the PD
    tuples define (slots listed counterclockwise).

    Darts are (crossing, slot) pairs.  faces[i] is a tuple of darts;
    face_of[(c, s)] gives the face containing the corner between slots s-1
    and s at crossing c, which is also the face to the left of a strand
    entering the crossing at slot s.
    """

    faces: tuple[tuple[tuple[int, int], ...], ...]
    face_of: dict

    def face_of_corner(self, ci: int, s: int) -> int:
        """Face at the corner between slots s and s+1 of crossing ci."""
        return self.face_of[(ci, (s + 1) % 4)]

    def arc_faces(self, d: Diagram, arc: int) -> tuple[int, int]:
        """The two faces flanking an arc (equal for nugatory situations)."""
        ci, s = d._incidences[arc][0]
        return (self.face_of[(ci, s)], self.face_of[(ci, (s + 1) % 4)])


def planar_map(d: Diagram, require_planar: bool = True) -> PlanarMap:
    """Trace faces of the diagram's combinatorial map.

    Raises NonPlanarTrace when the face count violates the Euler formula for
    a genus 0 embedding (computed per connected piece of the projection).
    """
    darts = [(ci, s) for ci in range(d.n) for s in range(4)]
    theta = {}
    for a, incs in d._incidences.items():
        theta[incs[0]] = incs[1]
        theta[incs[1]] = incs[0]
    face_of = {}
    faces = []
    for start in darts:
        if start in face_of:
            continue
        orbit = []
        x = start
        while True:
            orbit.append(x)
            face_of[x] = len(faces)
            ci, s = theta[x]
            x = (ci, (s + 1) % 4)
            if x == start:
                break
        faces.append(tuple(orbit))
    if require_planar and d.n:
        # each connected piece of the projection is traced on its own sphere
        expected = d.n + 2 * len(d.pd_components())
        if len(faces) != expected:
            raise NonPlanarTrace(
                f"face count {len(faces)} != {expected}; PD code is not planar")
    return PlanarMap(tuple(faces), face_of)
