"""Finite chain complexes over GF(2): graded, double, filtered; homology,
mapping cones, and the spectral sequence of a filtered complex.

The internal homological degree convention is that differentials raise
degree by one (cube weight in the Khovanov application).  Spectral sequence
pages are computed from explicit nested subspaces Z^r / B^r, so every rank
reported is exact and testable.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import (
    DimensionMismatch,
    FiltrationViolation,
    NotAComplex,
    NotBicomplex,
    NotChainMap,
)
from .linalg import MatF2, f2_kernel_basis, f2_rank


def block_matrix(blocks, row_dims: Sequence[int], col_dims: Sequence[int]) -> MatF2:
    """Assemble a MatF2 from a {(i, j): MatF2} block dictionary."""
    row_off = [0]
    for d in row_dims:
        row_off.append(row_off[-1] + d)
    col_off = [0]
    for d in col_dims:
        col_off.append(col_off[-1] + d)
    rows = [0] * row_off[-1]
    for (bi, bj), m in blocks.items():
        if m.nrows != row_dims[bi] or m.ncols != col_dims[bj]:
            raise DimensionMismatch(
                f"block ({bi},{bj}) is {m.nrows}x{m.ncols}, expected "
                f"{row_dims[bi]}x{col_dims[bj]}")
        for i, r in enumerate(m.rows):
            rows[row_off[bi] + i] |= r << col_off[bj]
    return MatF2(row_off[-1], col_off[-1], tuple(rows))


class GradedComplexF2:
    """Finite complex of GF(2) spaces with d raising degree by one.

    dims maps degree -> dimension; differentials maps degree k to the matrix
    of d_k : C_k -> C_{k+1}.  d*d = 0 is checked at construction.
    """

    def __init__(self, dims: Mapping[int, int], differentials: Mapping[int, MatF2],
                 labels: Mapping[int, list] | None = None, check: bool = True):
        self.dims = {k: int(v) for k, v in dims.items() if v}
        self.differentials = {}
        for k, m in differentials.items():
            src = self.dims.get(k, 0)
            tgt = self.dims.get(k + 1, 0)
            if (m.nrows, m.ncols) != (tgt, src):
                raise DimensionMismatch(
                    f"d_{k} is {m.nrows}x{m.ncols}, expected {tgt}x{src}")
            if src and tgt:
                self.differentials[k] = m
        self.labels = dict(labels) if labels else {}
        if check:
            for k, m in self.differentials.items():
                nxt = self.differentials.get(k + 1)
                if nxt is not None and not (nxt @ m).is_zero():
                    raise NotAComplex(f"d_{k+1} d_{k} != 0")

    def degrees(self) -> list[int]:
        return sorted(self.dims)

    def dim(self, k: int) -> int:
        return self.dims.get(k, 0)

    def d(self, k: int) -> MatF2:
        m = self.differentials.get(k)
        if m is None:
            return MatF2.zero(self.dim(k + 1), self.dim(k))
        return m

    def total_dim(self) -> int:
        return sum(self.dims.values())


def homology_ranks(c: GradedComplexF2) -> dict[int, int]:
    """Betti numbers: b_k = dim ker d_k - rank d_{k-1}."""
    ranks = {k: f2_rank(m) for k, m in c.differentials.items()}
    out = {}
    for k in c.degrees():
        b = c.dim(k) - ranks.get(k, 0) - ranks.get(k - 1, 0)
        if b:
            out[k] = b
    return out


@dataclass(frozen=True)
class ChainMap:
    """Degree-preserving chain map between GradedComplexF2's."""

    source: GradedComplexF2
    target: GradedComplexF2
    blocks: dict

    def __post_init__(self):
        for k in set(self.source.dims) | set(self.target.dims):
            f_k = self.block(k)
            f_k1 = self.block(k + 1)
            lhs = self.target.d(k) @ f_k
            rhs = f_k1 @ self.source.d(k)
            if lhs.rows != rhs.rows:
                raise NotChainMap(f"square at degree {k} does not commute")

    def block(self, k: int) -> MatF2:
        m = self.blocks.get(k)
        if m is None:
            return MatF2.zero(self.target.dim(k), self.source.dim(k))
        if (m.nrows, m.ncols) != (self.target.dim(k), self.source.dim(k)):
            raise DimensionMismatch(f"chain map block at degree {k} has wrong shape")
        return m


def mapping_cone(f: ChainMap) -> GradedComplexF2:
    """Cone(f)_k = S_{k+1} + T_k with d(s, t) = (d s, f s + d t)."""
    s, t = f.source, f.target
    degrees = set()
    for k in s.dims:
        degrees.add(k - 1)
    degrees.update(t.dims)
    dims = {k: s.dim(k + 1) + t.dim(k) for k in degrees}
    diffs = {}
    for k in sorted(degrees):
        blocks = {}
        if s.dim(k + 2) and s.dim(k + 1):
            blocks[(0, 0)] = s.d(k + 1)
        if t.dim(k + 1) and s.dim(k + 1):
            blocks[(1, 0)] = f.block(k + 1)
        if t.dim(k + 1) and t.dim(k):
            blocks[(1, 1)] = t.d(k)
        diffs[k] = block_matrix(blocks, [s.dim(k + 2), t.dim(k + 1)],
                                [s.dim(k + 1), t.dim(k)])
    return GradedComplexF2(dims, diffs)


def is_quasi_isomorphism(f: ChainMap) -> bool:
    return not homology_ranks(mapping_cone(f))


class DoubleComplexF2:
    """Bigraded complex with d_h : (p,q) -> (p+1,q), d_v : (p,q) -> (p,q+1).

    Over GF(2) the bicomplex condition is that d_h and d_v commute; both
    squares and the commutation are checked at construction.
    """

    def __init__(self, dims: Mapping[tuple, int], d_h: Mapping[tuple, MatF2],
                 d_v: Mapping[tuple, MatF2], labels=None, check: bool = True):
        self.dims = {pq: int(v) for pq, v in dims.items() if v}
        self.d_h = {pq: m for pq, m in d_h.items()
                    if self.dims.get(pq) and self.dims.get((pq[0] + 1, pq[1]))}
        self.d_v = {pq: m for pq, m in d_v.items()
                    if self.dims.get(pq) and self.dims.get((pq[0], pq[1] + 1))}
        self.labels = dict(labels) if labels else {}
        for pq, m in self.d_h.items():
            exp = (self.dim((pq[0] + 1, pq[1])), self.dim(pq))
            if (m.nrows, m.ncols) != exp:
                raise DimensionMismatch(f"d_h at {pq} has shape {(m.nrows, m.ncols)}")
        for pq, m in self.d_v.items():
            exp = (self.dim((pq[0], pq[1] + 1)), self.dim(pq))
            if (m.nrows, m.ncols) != exp:
                raise DimensionMismatch(f"d_v at {pq} has shape {(m.nrows, m.ncols)}")
        if check:
            for p, q in self.dims:
                if not (self.dh((p + 1, q)) @ self.dh((p, q))).is_zero():
                    raise NotBicomplex(f"d_h^2 != 0 at {(p, q)}")
                if not (self.dv((p, q + 1)) @ self.dv((p, q))).is_zero():
                    raise NotBicomplex(f"d_v^2 != 0 at {(p, q)}")
                lhs = self.dv((p + 1, q)) @ self.dh((p, q))
                rhs = self.dh((p, q + 1)) @ self.dv((p, q))
                if lhs.rows != rhs.rows:
                    raise NotBicomplex(f"d_h d_v != d_v d_h at {(p, q)}")

    def dim(self, pq) -> int:
        return self.dims.get(tuple(pq), 0)

    def dh(self, pq) -> MatF2:
        m = self.d_h.get(tuple(pq))
        if m is None:
            return MatF2.zero(self.dim((pq[0] + 1, pq[1])), self.dim(pq))
        return m

    def dv(self, pq) -> MatF2:
        m = self.d_v.get(tuple(pq))
        if m is None:
            return MatF2.zero(self.dim((pq[0], pq[1] + 1)), self.dim(pq))
        return m


def total_complex(dc: DoubleComplexF2) -> tuple[GradedComplexF2, dict]:
    """Total complex with degree p + q and differential d_h + d_v.

    Returns (complex, positions) where positions maps (p, q) to the
    coordinate offset of that summand inside its total degree.
    """
    by_total: dict[int, list[tuple]] = {}
    for p, q in sorted(dc.dims):
        by_total.setdefault(p + q, []).append((p, q))
    dims = {t: sum(dc.dim(pq) for pq in cells) for t, cells in by_total.items()}
    positions = {}
    for t, cells in by_total.items():
        off = 0
        for pq in cells:
            positions[pq] = off
            off += dc.dim(pq)
    diffs = {}
    labels = {}
    for t, cells in sorted(by_total.items()):
        if dc.labels:
            lab = []
            for pq in cells:
                lab.extend(dc.labels.get(pq, [f"{pq}:{i}" for i in range(dc.dim(pq))]))
            labels[t] = lab
        tgt_cells = by_total.get(t + 1, [])
        if not tgt_cells:
            continue
        blocks = {}
        for j, pq in enumerate(cells):
            p, q = pq
            for i, rs in enumerate(tgt_cells):
                if rs == (p + 1, q):
                    blocks[(i, j)] = dc.dh(pq)
                elif rs == (p, q + 1):
                    blocks[(i, j)] = dc.dv(pq)
        diffs[t] = block_matrix(blocks, [dc.dim(pq) for pq in tgt_cells],
                                [dc.dim(pq) for pq in cells])
    return GradedComplexF2(dims, diffs, labels=labels), positions


class FilteredComplexF2:
    """GradedComplexF2 with a non-negative filtration level per generator.

    The filtration is decreasing: F_p is spanned by generators of level >= p.
    The differential must never lower the level.
    """

    def __init__(self, complex_: GradedComplexF2, levels: Mapping[int, Sequence[int]]):
        self.complex = complex_
        self.levels = {k: tuple(int(x) for x in levels.get(k, ())) for k in complex_.dims}
        for k in complex_.dims:
            if len(self.levels[k]) != complex_.dim(k):
                raise DimensionMismatch(f"levels at degree {k} do not match dimension")
            if any(x < 0 for x in self.levels[k]):
                raise FiltrationViolation("filtration levels must be non-negative")
        for k, m in complex_.differentials.items():
            src_lv = self.levels[k]
            tgt_lv = self.levels.get(k + 1, ())
            for j in range(m.ncols):
                col_mask = 1 << j
                for i, row in enumerate(m.rows):
                    if row & col_mask and tgt_lv[i] < src_lv[j]:
                        raise FiltrationViolation(
                            f"d lowers filtration from level {src_lv[j]} to "
                            f"{tgt_lv[i]} at degree {k}")
        self.max_level = max((max(lv) for lv in self.levels.values() if lv), default=0)


@dataclass(frozen=True)
class SpectralPages:
    """Rank tables E^r_{p,t} (filtration p, total degree t) plus d^r ranks."""

    pages: tuple
    d_ranks: tuple
    stabilization_index: int

    @property
    def e_infinity(self) -> dict:
        return self.pages[-1]

    def page(self, r: int) -> dict:
        return self.pages[min(r, len(self.pages) - 1)]


def spectral_pages(fc: FilteredComplexF2, max_r: int | None = None) -> SpectralPages:
    """Spectral sequence of a filtered complex via explicit subquotients.

    E^r_{p,t} = Z^r_{p,t} / (Z^{r-1}_{p+1,t} + d Z^{r-1}_{p-r+1,t-1}) with
    Z^r_{p,t} = F_p C_t  intersect  d^{-1}(F_{p+r} C_{t+1}).  Pages stop
    changing once r exceeds the filtration length.
    """
    c = fc.complex
    pmax = fc.max_level
    r_end = pmax + 1
    if max_r is not None:
        r_end = max(r_end, max_r)
    degrees = c.degrees()

    # column form of each differential: image of a vector is an XOR of columns
    dcols: dict[int, list[int]] = {}
    for t in degrees:
        m = c.d(t)
        cols = [0] * m.ncols
        for i, row in enumerate(m.rows):
            while row:
                low = row & -row
                cols[low.bit_length() - 1] |= 1 << i
                row ^= low
        dcols[t] = cols

    def apply_d(t: int, v: int) -> int:
        cols = dcols.get(t)
        if cols is None:
            return 0
        out = 0
        while v:
            low = v & -v
            out ^= cols[low.bit_length() - 1]
            v ^= low
        return out

    def z_space(r: int, p: int, t: int) -> MatF2:
        # basis (rows) of {x in F_p C_t : d x in F_{p+r} C_{t+1}}
        n = c.dim(t)
        if n == 0:
            return MatF2.zero(0, 0)
        lv = fc.levels[t]
        constraint_rows = []
        for j in range(n):
            if lv[j] < max(p, 0):
                constraint_rows.append(1 << j)
        d_t = c.d(t)
        tgt_lv = fc.levels.get(t + 1, ())
        cutoff = p + r
        for i, row in enumerate(d_t.rows):
            if tgt_lv[i] < cutoff:
                constraint_rows.append(row)
        m = MatF2(len(constraint_rows), n, tuple(constraint_rows))
        return f2_kernel_basis(m)

    cache: dict = {}

    def z(r: int, p: int, t: int) -> MatF2:
        key = (r, p, t)
        if key not in cache:
            cache[key] = z_space(r, p, t)
        return cache[key]

    def image_under_d(basis: MatF2, t: int) -> MatF2:
        if c.dim(t + 1) == 0 or basis.nrows == 0:
            return MatF2.zero(0, c.dim(t + 1))
        return MatF2(basis.nrows, c.dim(t + 1),
                     tuple(apply_d(t, v) for v in basis.rows))

    pages = []
    d_ranks = []
    for r in range(r_end + 1):
        table: dict = {}
        dr_table: dict = {}
        for t in degrees:
            for p in range(pmax + 1):
                zn = z(r, p, t)
                if zn.nrows == 0:
                    continue
                if r == 0:
                    den = z(0, p + 1, t)
                else:
                    den = z(r - 1, p + 1, t).stack(
                        image_under_d(z(r - 1, p - r + 1, t - 1), t - 1))
                den_rank = f2_rank(den)
                rank = f2_rank(zn) - den_rank
                if rank:
                    table[(p, t)] = rank
                # induced d^r rank out of this cell
                if r and rank:
                    img = image_under_d(zn, t)
                    tgt_p = p + r
                    tden = z(r - 1, tgt_p + 1, t + 1).stack(
                        image_under_d(z(r - 1, tgt_p - r + 1, t), t))
                    dr = f2_rank(img.stack(tden)) - f2_rank(tden)
                    if dr:
                        dr_table[(p, t)] = dr
        pages.append(table)
        d_ranks.append(dr_table)

    stab = len(pages) - 1
    final = pages[-1]
    for r in range(len(pages)):
        if pages[r] == final:
            stab = r
            break
    return SpectralPages(tuple(pages), tuple(d_ranks), stab)
