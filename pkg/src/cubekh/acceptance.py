"""Release acceptance checks.

Each criterion is a function returning (passed, detail).  The same list
drives tests/test_acceptance.py and the CLI selftest command, so the release
gate is a single source of truth.  All tolerances are exact; a failure here
is a correctness bug, not a calibration issue.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .branched import (
    link_det,
    oriented_resolution_filling,
    qa_certify,
    rank_inequality_check,
    verify_certificate,
)
from .complexes import homology_ranks, total_complex
from .corpus import (
    diagram_corpus,
    random_compatible_marking,
    small_knot,
)
from .diagram import ArcMarking, parse_pd
from .khovanov import (
    build_cube,
    hd_even_subcomplex,
    kh_complex,
    khr_ranks,
    state_sum_det,
    twisted_complex,
    vertical_then_horizontal_ranks,
    weight_ss,
)
from .linalg import det_bareiss
from .rgraded import (
    check_double_mapping_cone,
    random_lemma_instance,
    random_violating_instance,
)
from .surgery import (
    FramedLinkPresentation,
    PlumbingGraph,
    euler_char_si,
    large_surgery_family,
    plumbing_lspace_check,
    surgered_h1,
)

CORPUS_SEED = 20240
CORPUS_SIZE = 500
CORPUS_MAX_CROSSINGS = 7

_corpus_cache: list | None = None


def corpus():
    global _corpus_cache
    if _corpus_cache is None:
        _corpus_cache = diagram_corpus(CORPUS_SEED, CORPUS_SIZE,
                                       CORPUS_MAX_CROSSINGS)
    return _corpus_cache


def _basepoint_classes(d) -> list[int]:
    """One representative arc per circle-signature class."""
    cube = build_cube(d)
    seen = {}
    for arc in range(1, d.arc_count + 1):
        sig = tuple(cube.states[ix].arc_to_circle[arc] for ix in cube.vertices)
        seen.setdefault(sig, arc)
    return sorted(seen.values())


def criterion_1_khovanov_engine():
    """Khr totals equal det for unknot, Hopf link, trefoil, figure eight."""
    expected = {"unknot": 1, "hopf": 2, "3_1": 3, "4_1": 5}
    details = []
    for name, want in expected.items():
        t0 = time.time()
        d = small_knot(name)
        total = sum(khr_ranks(d).values())
        det_g = link_det(d)
        det_s = state_sum_det(d)
        elapsed = time.time() - t0
        if not (total == det_g == det_s == want):
            return False, (f"{name}: khr={total} goeritz={det_g} "
                           f"statesum={det_s} expected={want}")
        if elapsed > 1.0:
            return False, f"{name}: took {elapsed:.2f}s (budget 1s)"
        details.append(f"{name}={total}")
    return True, ", ".join(details)


def criterion_2_complex_validity():
    """d^2 = 0, horizontal/vertical commutation, basepoint independence."""
    rng = random.Random(CORPUS_SEED + 2)
    t0 = time.time()
    for d in corpus():
        kh_complex(d)                      # validates d^2 = 0 at construction
        m = random_compatible_marking(d, rng)
        twisted_complex(d, m)              # validates squares and commutation
        tables = {tuple(sorted(khr_ranks(d, basepoint=arc).items()))
                  for arc in _basepoint_classes(d)}
        if len(tables) != 1:
            return False, f"basepoint dependence on {d!r}"
    elapsed = time.time() - t0
    if elapsed > 300:
        return False, f"took {elapsed:.0f}s (budget 300s)"
    return True, f"{len(corpus())} diagrams in {elapsed:.0f}s"


def criterion_3_twisted_consistency():
    """Trivial marking gives Khr; the two dotted constructions agree."""
    rng = random.Random(CORPUS_SEED + 3)
    for d in corpus():
        hd0 = vertical_then_horizontal_ranks(twisted_complex(d, ArcMarking.zero(d)))
        collapsed: dict[int, int] = {}
        for (p, v), r in hd0.items():
            collapsed[p] = collapsed.get(p, 0) + r
        if collapsed != khr_ranks(d):
            return False, f"trivial marking mismatch on {d!r}"
        m = random_compatible_marking(d, rng)
        dc = twisted_complex(d, m)
        if vertical_then_horizontal_ranks(dc) != hd_even_subcomplex(d, m):
            return False, f"dotted constructions disagree on {d!r}"
    return True, f"{len(corpus())} diagrams, trivial + random markings"


def criterion_4_spectral_engine():
    """E^1, E^2 identifications, E-infinity totals, monotone pages, bound."""
    rng = random.Random(CORPUS_SEED + 4)
    for d in corpus():
        m = random_compatible_marking(d, rng)
        pages = weight_ss(d, m)            # asserts E^1, E^2, E-infinity totals
        for r in range(1, len(pages.pages)):
            for key, v in pages.pages[r].items():
                if v > pages.pages[r - 1].get(key, 0):
                    return False, f"non-monotone page ranks on {d!r}"
        if pages.stabilization_index > d.n + 1:
            return False, f"stabilization index {pages.stabilization_index} on {d!r}"
    return True, f"{len(corpus())} diagrams with random markings"


def criterion_5_rank_inequality():
    """det <= reduced mirror rank everywhere; equality on certified members."""
    certified = 0
    for d in corpus():
        rep = rank_inequality_check(d)
        if not rep.holds:
            return False, f"inequality fails on {d!r}"
        cert = qa_certify(d, budget=4000)
        if cert is not None:
            certified += 1
            if not rep.equality:
                return False, f"certified but not thin: {d!r}"
    return True, f"{len(corpus())} diagrams, {certified} certified equal"


def criterion_6_qa_certifier():
    """Certificates for the alternating knots through six crossings."""
    t0 = time.time()
    expected = {"3_1": 3, "4_1": 5, "5_1": 5, "5_2": 7,
                "6_1": 9, "6_2": 11, "6_3": 13}
    for name, det in expected.items():
        cert = qa_certify(small_knot(name))
        if cert is None or cert.det != det:
            return False, f"{name}: no certificate"
        if not verify_certificate(cert):
            return False, f"{name}: certificate fails re-verification"
    elapsed = time.time() - t0
    if elapsed > 60:
        return False, f"took {elapsed:.0f}s (budget 60s)"
    return True, f"7 knots certified and re-verified in {elapsed:.1f}s"


def criterion_7_surgery_arithmetic():
    """|H1| vs determinant on 1000 presentations; lens row; chi bookkeeping."""
    rng = random.Random(CORPUS_SEED + 7)
    for _ in range(1000):
        mdim = rng.randint(1, 5)
        a = [[0] * mdim for _ in range(mdim)]
        for i in range(mdim):
            for j in range(i, mdim):
                a[i][j] = a[j][i] = rng.randint(-9, 9)
        pres = FramedLinkPresentation.from_lists(a)
        v = [rng.choice([0, 1, "inf"]) for _ in range(mdim)]
        g = surgered_h1(pres, v)
        det = abs(det_bareiss(pres.filled_matrix(v)))
        if (g.order() or 0) != det:
            return False, f"order/determinant mismatch on {a}, {v}"
        if (euler_char_si(pres, v) == 0) != (g.free_rank > 0):
            return False, f"chi bookkeeping wrong on {a}, {v}"
    for p in range(1, 51):
        pres = FramedLinkPresentation.from_lists([[p]])
        if euler_char_si(pres, [0]) != p:
            return False, f"lens space order {p} wrong"
    return True, "1000 presentations + lens spaces p <= 50"


def criterion_8_plumbing():
    """Lens seeds, A_n chains, and derivation re-verification."""
    for p in range(1, 13):
        v = plumbing_lspace_check(PlumbingGraph.from_lists([p], []))
        if v.verdict != "certified" or v.h1_order != p or not v.reverify():
            return False, f"single vertex {p} failed"
    for n in range(1, 11):
        g = PlumbingGraph.from_lists([2] * n, [[i, i + 1] for i in range(n - 1)])
        v = plumbing_lspace_check(g)
        if v.verdict != "certified" or v.h1_order != n + 1 or not v.reverify():
            return False, f"A_{n} chain failed"
    for args in ((2, 3, 5), (2, 3, 9), (3, 4, 20)):
        v = large_surgery_family(*args)
        if v.verdict != "certified" or not v.reverify():
            return False, f"large surgery {args} failed"
    return True, "lens seeds, A_n chains n <= 10, large surgery chains"


def criterion_9_double_cone():
    """200 positive instances hold; 50 negative controls name hypothesis 3."""
    t0 = time.time()
    rng = random.Random(CORPUS_SEED + 9)
    for i in range(200):
        e0, e1, e2, f, g, h = random_lemma_instance(rng, 1)
        v = check_double_mapping_cone(e0, e1, e2, f, g, h, 1)
        if v.failed_hypothesis is not None or v.quasi_isomorphism is not True:
            return False, f"positive instance {i} failed: {v}"
    for i in range(50):
        e0, e1, e2, f, g, h = random_violating_instance(rng, 1)
        v = check_double_mapping_cone(e0, e1, e2, f, g, h, 1)
        if v.failed_hypothesis is None or not v.failed_hypothesis.startswith("(3)"):
            return False, f"negative control {i} not rejected as (3): {v}"
    elapsed = time.time() - t0
    if elapsed > 30:
        return False, f"took {elapsed:.0f}s (budget 30s)"
    return True, f"200 positive + 50 negative in {elapsed:.1f}s"


def criterion_10_filling():
    """Band condition of the oriented-resolution filling across the corpus."""
    for d in corpus():
        rep = oriented_resolution_filling(d)
        if not rep.band_condition_holds():
            return False, f"band condition violated on {d!r}"
    return True, f"{len(corpus())} diagrams, zero violations"


CRITERIA = (
    ("1", "Khovanov engine ranks = det on unknot/Hopf/trefoil/figure-eight",
     criterion_1_khovanov_engine),
    ("2", "d^2 = 0, commutation, basepoint independence over the corpus",
     criterion_2_complex_validity),
    ("3", "twisted/dotted consistency over the corpus",
     criterion_3_twisted_consistency),
    ("4", "spectral sequence page identifications over the corpus",
     criterion_4_spectral_engine),
    ("5", "determinant/rank inequality with equality on certified members",
     criterion_5_rank_inequality),
    ("6", "quasi-alternating certificates for knots through six crossings",
     criterion_6_qa_certifier),
    ("7", "surgery arithmetic vs determinant oracle",
     criterion_7_surgery_arithmetic),
    ("8", "plumbing and large-surgery certification",
     criterion_8_plumbing),
    ("9", "double mapping cone criterion on randomized instances",
     criterion_9_double_cone),
    ("10", "oriented-resolution filling band condition",
     criterion_10_filling),
)


@dataclass(frozen=True)
class CriterionResult:
    number: str
    name: str
    passed: bool
    detail: str


def run_all(report=print) -> list[CriterionResult]:
    results = []
    for number, name, fn in CRITERIA:
        passed, detail = fn()
        results.append(CriterionResult(number, name, passed, detail))
        status = "PASS" if passed else "FAIL"
        report(f"[{status}] criterion {number}: {name} ({detail})")
    return results
