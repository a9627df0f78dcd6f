"""Template-based cross-section geometries: 2D l1-ball prisms and hexagonal prisms.

Both kinds tile a 2D cross-section lattice with congruent cells (diamonds on
the x2x3-plane, hexagons on the plane normal to (1,1,1)) and sweep the cell's
shape through the grid.  A per-cell template classifies every relative
position by the set of neighboring cells that also need it (via the 3D l1
stencil reach), which yields the core piece and the 8 (ball) or 12 (hex) wing
piece kinds of each band.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from emstencil.grid import GridSpec, StencilSpec, Vertex, l1_offsets
from emstencil.layouts.base import WorkingBand
from emstencil.layouts.prism import PrismGeometry, StepDetail
from emstencil.machine import MachineConfig

Cell = tuple[int, int]


def _lattice_candidates(p, basis, det):
    """Nearby lattice cells of a 2D point, by rounded inverse + 3x3 search."""
    (a11, a21), (a12, a22) = basis  # columns v1 = (a11, a21), v2 = (a12, a22)
    pa, pb = p
    # inverse of [[a11, a12], [a21, a22]] scaled by det
    i0 = round((a22 * pa - a12 * pb) / det)
    j0 = round((-a21 * pa + a11 * pb) / det)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            yield (i0 + di, j0 + dj)


class _PlanarBase(PrismGeometry):
    """Shared machinery; subclasses fill in cell/owner/projection specifics."""

    n_phases = 1

    def __init__(self, grid: GridSpec, stencil: StencilSpec, cfg: MachineConfig, m: int):
        self.grid = grid
        self.stencil = stencil
        self.cfg = cfg
        self.m = m
        self._build_template()
        self._enumerate_cells()
        self._classify_cells()

    # ---- subclass hooks -------------------------------------------------------

    def _cell_basis(self) -> tuple[tuple[int, int], tuple[int, int]]:
        raise NotImplementedError

    def _owned(self, p) -> bool:
        """Is relative position p owned by cell (0, 0)?"""
        raise NotImplementedError

    def _template_bbox(self) -> int:
        """Positions with max-abs coordinate <= this cover the owned set."""
        raise NotImplementedError

    def _delta_rel(self, delta3d, phase) -> tuple[int, int]:
        raise NotImplementedError

    def plane_of(self, v: Vertex) -> int:
        raise NotImplementedError

    def cell_center(self, cell: Cell) -> tuple[int, int]:
        (a11, a21), (a12, a22) = self._cell_basis()
        i, j = cell
        return (i * a11 + j * a12, i * a21 + j * a22)

    # ---- template --------------------------------------------------------------

    def resolve_cell(self, p) -> Cell:
        basis = self._cell_basis()
        hits = []
        for cell in _lattice_candidates(p, basis, self._det):
            ca, cb = self.cell_center(cell)
            if self._owned((p[0] - ca, p[1] - cb)):
                hits.append(cell)
        if len(hits) != 1:
            raise AssertionError(f"ownership not unique at {p}: {hits}")
        return hits[0]

    def _build_template(self):
        (a11, a21), (a12, a22) = self._cell_basis()
        self._det = a11 * a22 - a12 * a21
        bb = self._template_bbox()
        owned = []
        for pa in range(-bb, bb + 1):
            for pb in range(-bb, bb + 1):
                if self._owned((pa, pb)):
                    owned.append((pa, pb))
        if len(owned) != self._det:
            raise AssertionError(
                f"template size {len(owned)} != lattice determinant {self._det}"
            )
        # per-phase class of each owned position: set of cell offsets needing it
        s = self.s
        deltas = l1_offsets(3, s)
        class_ids: dict[frozenset, int] = {}
        self._class_offsets: list[frozenset] = []
        self._pos_class: list[dict[tuple[int, int], int]] = []
        for phase in range(self.n_phases):
            shifts = sorted({self._delta_rel(d, phase) for d in deltas})
            mapping = {}
            for p in owned:
                users = set()
                for sh in shifts:
                    users.add(self.resolve_cell((p[0] + sh[0], p[1] + sh[1])))
                key = frozenset(users)
                cid = class_ids.get(key)
                if cid is None:
                    cid = len(self._class_offsets)
                    class_ids[key] = cid
                    self._class_offsets.append(key)
                mapping[p] = cid
            self._pos_class.append(mapping)
        self.n_classes = len(self._class_offsets)
        # scan-ordered rows: row key -> ordered (col, pos); then class segments
        rows: dict[int, list[tuple[int, tuple[int, int]]]] = {}
        for p in owned:
            r, c = self.scan_rc(p)
            rows.setdefault(r, []).append((c, p))
        self._row_keys = sorted(rows)
        self._rows = {}
        for r in self._row_keys:
            entries = sorted(rows[r])
            self._rows[r] = entries
        # per-phase, per-row class segments [(c_lo, c_hi_inclusive, class)]
        self._segments = []
        for phase in range(self.n_phases):
            segs = {}
            for r in self._row_keys:
                lst = []
                for c, p in self._rows[r]:
                    cid = self._pos_class[phase][p]
                    if lst and lst[-1][2] == cid and self._adjacent(r, lst[-1][1], c):
                        lst[-1] = (lst[-1][0], c, cid)
                    else:
                        lst.append((c, c, cid))
                segs[r] = lst
            self._segments.append(segs)
        # per-phase class totals (unclipped)
        self._class_totals = []
        for phase in range(self.n_phases):
            tot = [0] * self.n_classes
            for p in owned:
                tot[self._pos_class[phase][p]] += 1
            self._class_totals.append(tot)
        self._owned_set = set(owned)
        self.rank_reach = self._compute_rank_reach(deltas)

    def _adjacent(self, row, c_prev, c_next) -> bool:
        return c_next == c_prev + self._col_step()

    def _col_step(self) -> int:
        return 1

    def scan_rc(self, p) -> tuple[int, int]:
        raise NotImplementedError

    def pos_of_rc(self, r, c) -> tuple[int, int]:
        raise NotImplementedError

    def _compute_rank_reach(self, deltas) -> int:
        reach = 0
        W = self._rank_width()
        for phase in range(self.n_phases):
            shifts = {self._delta_rel(d, phase) for d in deltas}
            for sh in shifts:
                r, c = self.scan_rc(sh)
                r0, c0 = self.scan_rc((0, 0))
                reach = max(reach, abs((r - r0) * W + (c - c0)))
        return reach + self._col_step()

    def _rank_width(self) -> int:
        return 4 * self.m + 6

    def rank_of(self, p) -> int:
        r, c = self.scan_rc(p)
        return r * self._rank_width() + c

    # ---- cells ------------------------------------------------------------------

    def _enumerate_cells(self):
        raise NotImplementedError

    def _classify_cells(self):
        """Per-cell pruned class -> piece-key mapping (phantom neighbors dropped)."""
        existing = set(self.bands)
        self._cell_keys: dict[Cell, list] = {}
        for cell in self.bands:
            keys = []
            for cid in range(self.n_classes):
                users = []
                for off in self._class_offsets[cid]:
                    user = (cell[0] + off[0], cell[1] + off[1])
                    if user in existing:
                        users.append(user)
                keys.append(tuple(sorted(users)))
            self._cell_keys[cell] = keys

    def phase_of(self, tau: int) -> int:
        return tau % self.n_phases

    # ---- per-plane clipping (subclass provides row clip) ---------------------------

    def row_clip(self, cell: Cell, tau: int, row: int) -> Optional[tuple[int, int]]:
        """In-grid col interval (inclusive) of a template row, or None."""
        raise NotImplementedError

    def fully_interior(self, cell: Cell, tau: int) -> bool:
        raise NotImplementedError

    def plane_range(self, cell: Cell) -> tuple[int, int]:
        raise NotImplementedError

    def plane_class_counts(self, cell: Cell, tau: int) -> list[int]:
        """Count of each class at sweep plane tau (clipped to the grid)."""
        t0, t1 = self.plane_range(cell)
        if not t0 <= tau <= t1:
            return [0] * self.n_classes
        phase = self.phase_of(tau)
        if self.fully_interior(cell, tau):
            return self._class_totals[phase]
        counts = [0] * self.n_classes
        segs = self._segments[phase]
        for r in self._row_keys:
            clip = self.row_clip(cell, tau, r)
            if clip is None:
                continue
            lo, hi = clip
            for c0, c1, cid in segs[r]:
                a, b = max(c0, lo), min(c1, hi)
                if a <= b:
                    counts[cid] += self._seg_count(r, a, b)
        return counts

    def _seg_count(self, row, a, b) -> int:
        return b - a + 1

    def plane_class_elements(self, cell: Cell, tau: int):
        """Per class: scan-ordered [(rank, vertex)] at plane tau."""
        t0, t1 = self.plane_range(cell)
        out = [[] for _ in range(self.n_classes)]
        if not t0 <= tau <= t1:
            return out
        phase = self.phase_of(tau)
        segs = self._segments[phase]
        W = self._rank_width()
        for r in self._row_keys:
            clip = self.row_clip(cell, tau, r)
            if clip is None:
                continue
            lo, hi = clip
            for c0, c1, cid in segs[r]:
                a, b = max(c0, lo), min(c1, hi)
                c = a
                while c <= b:
                    p = self.pos_of_rc(r, c)
                    out[cid].append((r * W + c, self.vertex_of(cell, p, tau)))
                    c += self._col_step()
        return out

    def vertex_of(self, cell: Cell, p, tau: int) -> Vertex:
        raise NotImplementedError

    # ---- PrismGeometry protocol ---------------------------------------------------

    def piece_catalog(self):
        in_totals: dict = {}
        users_of: dict = {}
        for cell in self.bands:
            keys = self._cell_keys[cell]
            t0, t1 = self.plane_range(cell)
            for tau in range(t0, t1 + 1):
                counts = self.plane_class_counts(cell, tau)
                for cid, n in enumerate(counts):
                    if n == 0:
                        continue
                    key = (cell, keys[cid])
                    in_totals[key] = in_totals.get(key, 0) + n
                    users_of[key] = keys[cid]
        in_pieces = [(key, users_of[key], n) for key, n in sorted(in_totals.items())]
        out_pieces = [(key, (key[0],), n) for key, n in sorted(in_totals.items())]
        return in_pieces, out_pieces

    def band_steps(self, band) -> range:
        t0, t1 = self.plane_range(band)
        return range(t0 - self.s, t1 + self.s + 1)

    def _band_uses(self, band):
        """Stable per-band list of (piece_key, class_ids, source_cell)."""
        cached = getattr(self, "_band_uses_cache", None)
        if cached is None:
            cached = self._band_uses_cache = {}
        got = cached.get(band)
        if got is not None:
            return got
        uses: dict = {}
        own_keys = self._cell_keys[band]
        for cid in range(self.n_classes):
            key = (band, own_keys[cid])
            uses.setdefault(key, ([], band))[0].append(cid)
        # foreign pieces: neighbor cells whose classes include this band
        neigh: set[Cell] = set()
        for offs in self._class_offsets:
            for off in offs:
                if off != (0, 0):
                    neigh.add((band[0] - off[0], band[1] - off[1]))
                    neigh.add((band[0] + off[0], band[1] + off[1]))
        for nc in sorted(neigh):
            if nc == band or nc not in self._cell_keys:
                continue
            nkeys = self._cell_keys[nc]
            for cid in range(self.n_classes):
                if band in nkeys[cid] and len(nkeys[cid]) > 1:
                    key = (nc, nkeys[cid])
                    uses.setdefault(key, ([], nc))[0].append(cid)
        got = [(key, tuple(cids), src) for key, (cids, src) in sorted(uses.items())]
        cached[band] = got
        return got

    def band_in_keys(self, band):
        return [key for key, _, _ in self._band_uses(band)]

    def _band_out_map(self, band):
        """(out piece keys, class id -> out index) for the band, cached."""
        cached = getattr(self, "_band_out_cache", None)
        if cached is None:
            cached = self._band_out_cache = {}
        got = cached.get(band)
        if got is None:
            own_keys = self._cell_keys[band]
            keys: list = []
            cid_to_oi = []
            for cid in range(self.n_classes):
                key = (band, own_keys[cid])
                if key not in keys:
                    keys.append(key)
                cid_to_oi.append(keys.index(key))
            got = cached[band] = (keys, cid_to_oi)
        return got

    def band_out_keys(self, band):
        return self._band_out_map(band)[0]

    def step_counts(self, band, tau):
        per_cell: dict[Cell, list[int]] = {}

        def counts_for(cell):
            got = per_cell.get(cell)
            if got is None:
                got = per_cell[cell] = self.plane_class_counts(cell, tau)
            return got

        loads = []
        for key, cids, src in self._band_uses(band):
            loads.append(sum(counts_for(src)[cid] for cid in cids))
        eval_counts = self.plane_class_counts(band, tau - self.s)
        out_keys, cid_to_oi = self._band_out_map(band)
        evals = [0] * len(out_keys)
        for cid, n in enumerate(eval_counts):
            if n:
                evals[cid_to_oi[cid]] += n
        return loads, evals

    def step_detail(self, band, tau) -> StepDetail:
        per_cell: dict[Cell, list] = {}

        def elems_for(cell):
            got = per_cell.get(cell)
            if got is None:
                got = per_cell[cell] = self.plane_class_elements(cell, tau)
            return got

        in_elems = []
        for key, cids, src in self._band_uses(band):
            merged = []
            for cid in cids:
                merged.extend(elems_for(src)[cid])
            merged.sort(key=lambda t: t[0])
            in_elems.append(merged)
        eval_elems = self.plane_class_elements(band, tau - self.s)
        _, cid_to_oi = self._band_out_map(band)
        evals = []
        for cid in range(self.n_classes):
            oi = cid_to_oi[cid]
            for rank, vert in eval_elems[cid]:
                evals.append((rank, vert, oi))
        evals.sort(key=lambda t: t[0])
        return StepDetail(in_elems, evals)

    def iter_piece_vertices(self, layer, key):
        cell, users = key
        t0, t1 = self.plane_range(cell)
        cids = [
            cid for cid in range(self.n_classes) if self._cell_keys[cell][cid] == users
        ]
        for tau in range(t0, t1 + 1):
            elems = self.plane_class_elements(cell, tau)
            merged = []
            for cid in cids:
                merged.extend(elems[cid])
            merged.sort(key=lambda t: t[0])
            for _, vert in merged:
                yield vert

    def core_in_key(self, band):
        return (band, (band,))

    def piece_planes(self, key):
        return self.plane_range(key[0])

    def piece_plane_count(self, key, tau):
        cell, users = key
        counts = self.plane_class_counts(cell, tau)
        return sum(
            counts[cid]
            for cid in range(self.n_classes)
            if self._cell_keys[cell][cid] == users
        )

    def classify(self, x: Vertex):
        tau = self.plane_of(x)
        cell, p = self._cell_and_pos(x)
        cid = self._pos_class[self.phase_of(tau)][p]
        return (cell, self._cell_keys[cell][cid])

    def classify_out(self, x: Vertex):
        return self.classify(x)

    def _cell_and_pos(self, x: Vertex):
        raise NotImplementedError

    def working_bands(self):
        out = []
        for cell in self.bands:
            t0, t1 = self.plane_range(cell)
            partial = not all(
                self.fully_interior(cell, tau) for tau in (t0, t1)
            ) or not self.fully_interior(cell, (t0 + t1) // 2)
            out.append(WorkingBand(cell, self.cell_center(cell), (t0, t1), partial))
        return out


# ---------------------------------------------------------------------------
# 2D l1 ball prisms in 3D (2D block-aligned diagonal layout of the x2x3-planes)
# ---------------------------------------------------------------------------


class Ball2DIn3DGeometry(_PlanarBase):
    """Radius-m l1-ball sweep shapes in the x2x3-plane, swept along x1.

    Ball centers sit on the lattice generated by (m, m) and (0, 2m): offsets of
    m in x2 and 2m in x3, the staggered diamond tiling.  Ownership of the thin
    overlap boundary goes to the nearest center (lexicographically smallest on
    ties); the stencil reach then defines up to 8 wing classes per band.
    """

    def __init__(self, grid, stencil, cfg, m):
        if grid.n != 3:
            raise ValueError("ball-in-3D layout is three dimensional")
        super().__init__(grid, stencil, cfg, m)

    def _cell_basis(self):
        m = self.m
        return ((m, m), (0, 2 * m))

    def _template_bbox(self):
        return self.m

    def _owned(self, p):
        # nearest center in l1, ties to the lexicographically smallest cell
        d0 = abs(p[0]) + abs(p[1])
        if d0 > self.m:
            return False
        best = (d0, (0, 0))
        for cell in _lattice_candidates(p, self._cell_basis(), 2 * self.m * self.m):
            if cell == (0, 0):
                continue
            ca, cb = self.cell_center(cell)
            d = abs(p[0] - ca) + abs(p[1] - cb)
            if (d, cell) < best:
                best = (d, cell)
        return best[1] == (0, 0)

    def _delta_rel(self, delta3d, phase):
        return (delta3d[1], delta3d[2])

    def plane_of(self, v):
        return v[0]

    def scan_rc(self, p):
        # diagonals of direction (1,-1): row = pa+pb, col = pa-pb
        return (p[0] + p[1], p[0] - p[1])

    def pos_of_rc(self, r, c):
        return ((r + c) // 2, (r - c) // 2)

    def _col_step(self):
        return 2

    def _seg_count(self, row, a, b):
        return (b - a) // 2 + 1

    def _enumerate_cells(self):
        k2, k3 = self.grid.sides[1], self.grid.sides[2]
        m = self.m
        cells = []
        for i in range(-1, (k2 - 1 + m) // m + 1):
            ca = i * m
            j_lo = (-m - ca) // (2 * m) - 1
            j_hi = (k3 - 1 + m - ca) // (2 * m) + 1
            for j in range(j_lo, j_hi + 1):
                cb = ca + 2 * j * m
                if -m <= ca <= k2 - 1 + m and -m <= cb <= k3 - 1 + m:
                    if self._cell_in_grid((i, j)):
                        cells.append((i, j))
        self.bands = sorted(cells)

    def _cell_in_grid(self, cell) -> bool:
        return any(self.row_clip(cell, 0, r) is not None for r in self._row_keys)

    def plane_range(self, cell):
        return (0, self.grid.sides[0] - 1)

    def plane_class_counts(self, cell, tau):
        # the cross-section clip is plane-independent: cache per cell
        t0, t1 = self.plane_range(cell)
        if not t0 <= tau <= t1:
            return [0] * self.n_classes
        cache = getattr(self, "_cell_count_cache", None)
        if cache is None:
            cache = self._cell_count_cache = {}
        got = cache.get(cell)
        if got is None:
            got = cache[cell] = super().plane_class_counts(cell, t0)
        return got

    def piece_catalog(self):
        in_totals: dict = {}
        users_of: dict = {}
        k1 = self.grid.sides[0]
        for cell in self.bands:
            keys = self._cell_keys[cell]
            for cid, n in enumerate(self.plane_class_counts(cell, 0)):
                if n == 0:
                    continue
                key = (cell, keys[cid])
                in_totals[key] = in_totals.get(key, 0) + n * k1
                users_of[key] = keys[cid]
        in_pieces = [(key, users_of[key], n) for key, n in sorted(in_totals.items())]
        out_pieces = [(key, (key[0],), n) for key, n in sorted(in_totals.items())]
        return in_pieces, out_pieces

    def row_clip(self, cell, tau, row):
        # row r holds positions (pa, pb) with pa+pb = r, col = pa-pb; the l1
        # ball |pa|+|pb| <= m is the square max(|row|, |col|) <= m here, and
        # pa in [-ca, k2-1-ca], pb in [-cb, k3-1-cb] clip the col span.
        if abs(row) > self.m:
            return None
        ca, cb = self.cell_center(cell)
        k2, k3 = self.grid.sides[1], self.grid.sides[2]
        c_lo = max(-2 * ca - row, row - 2 * (k3 - 1 - cb), -self.m)
        c_hi = min(2 * (k2 - 1 - ca) - row, row + 2 * cb, self.m)
        # cols share the row's parity
        if (c_lo - row) % 2:
            c_lo += 1
        if (c_hi - row) % 2:
            c_hi -= 1
        if c_lo > c_hi:
            return None
        return c_lo, c_hi

    def fully_interior(self, cell, tau):
        ca, cb = self.cell_center(cell)
        k2, k3 = self.grid.sides[1], self.grid.sides[2]
        m = self.m
        return m <= ca <= k2 - 1 - m and m <= cb <= k3 - 1 - m

    def vertex_of(self, cell, p, tau):
        ca, cb = self.cell_center(cell)
        return (tau, ca + p[0], cb + p[1])

    def _cell_and_pos(self, x):
        p = (x[1], x[2])
        cell = self.resolve_cell(p)
        ca, cb = self.cell_center(cell)
        return cell, (p[0] - ca, p[1] - cb)


# ---------------------------------------------------------------------------
# Hexagonal aligned diagonal layout
# ---------------------------------------------------------------------------


def _center_path(tau: int) -> tuple[int, int, int]:
    """Cumulative unit steps cycling x1, x2, x3; sum of coords equals tau."""
    return ((tau + 2) // 3, (tau + 1) // 3, tau // 3)


class HexGeometry(_PlanarBase):
    """Hexagonal sweep shapes on planes of normal (1,1,1), cycled unit shifts.

    A sweep shape is the intersection of the radius-2m l1 ball with the lattice
    plane x1+x2+x3 = const: in plane coordinates (a, b) = (w1, -w3) it is the
    hexagon max(|a|, |b|, |a-b|) <= m of 3m^2+3m+1 vertices.  Band origins
    form the lattice generated by (2m+1, m) and (-m, m+1), which tiles the
    plane exactly; wing membership cycles with the sweep phase (tau mod 3).
    """

    n_phases = 3

    def __init__(self, grid, stencil, cfg, m):
        if grid.n != 3:
            raise ValueError("hexagonal layout is three dimensional")
        super().__init__(grid, stencil, cfg, m)

    def _cell_basis(self):
        m = self.m
        return ((2 * m + 1, m), (-m, m + 1))

    def _template_bbox(self):
        return self.m

    def _owned(self, p):
        m = self.m
        return abs(p[0]) <= m and abs(p[1]) <= m and abs(p[0] - p[1]) <= m

    def _delta_rel(self, delta3d, phase):
        e = sum(delta3d)
        c0 = _center_path(phase)
        c1 = _center_path(phase + e)
        w = (
            delta3d[0] - (c1[0] - c0[0]),
            delta3d[1] - (c1[1] - c0[1]),
            delta3d[2] - (c1[2] - c0[2]),
        )
        return (w[0], -w[2])

    def plane_of(self, v):
        return v[0] + v[1] + v[2]

    def scan_rc(self, p):
        # increasing z (= -b) first, then increasing y (= b - a): col = -a
        return (-p[1], -p[0])

    def pos_of_rc(self, r, c):
        return (-c, -r)

    def _cell3d(self, cell):
        ca, cb = self.cell_center(cell)
        return (ca, cb - ca, -cb)

    def vertex_of(self, cell, p, tau):
        base = _center_path(tau)
        c3 = self._cell3d(cell)
        return (
            base[0] + c3[0] + p[0],
            base[1] + c3[1] + (p[1] - p[0]),
            base[2] + c3[2] - p[1],
        )

    def _cell_and_pos(self, x):
        tau = self.plane_of(x)
        base = _center_path(tau)
        w = (x[0] - base[0], x[1] - base[1], x[2] - base[2])
        p = (w[0], -w[2])
        cell = self.resolve_cell(p)
        ca, cb = self.cell_center(cell)
        return cell, (p[0] - ca, p[1] - cb)

    def _feasible(self, cell, tau) -> bool:
        """Does the clipped hexagon contain any in-grid position at plane tau?"""
        a_lo, a_hi, b_lo, b_hi, d_lo, d_hi = self._abs_bounds(cell, tau)
        m = self.m
        a_lo, a_hi = max(a_lo, -m), min(a_hi, m)
        b_lo, b_hi = max(b_lo, -m), min(b_hi, m)
        d_lo, d_hi = max(d_lo, -m), min(d_hi, m)  # d = a - b
        if a_lo > a_hi or b_lo > b_hi or d_lo > d_hi:
            return False
        return a_lo - b_hi <= d_hi and d_lo <= a_hi - b_lo

    def _abs_bounds(self, cell, tau):
        """Interval constraints on (a, b, a-b) from the grid box."""
        base = _center_path(tau)
        c3 = self._cell3d(cell)
        k1, k2, k3 = self.grid.sides
        # x1 = base0 + c0 + a in [0, k1)
        a_lo, a_hi = -(base[0] + c3[0]), k1 - 1 - (base[0] + c3[0])
        # x3 = base2 + c2 - b in [0, k3)
        b_lo, b_hi = (base[2] + c3[2]) - (k3 - 1), base[2] + c3[2]
        # x2 = base1 + c1 + (b - a) in [0, k2) -> (a - b) in ...
        d_lo, d_hi = (base[1] + c3[1]) - (k2 - 1), base[1] + c3[1]
        return a_lo, a_hi, b_lo, b_hi, d_lo, d_hi

    def _enumerate_cells(self):
        k1, k2, k3 = self.grid.sides
        tmax = k1 + k2 + k3 - 3
        # flood-fill over the cell lattice starting from cells of actual grid
        # vertices; feasibility is an O(1) interval check per plane
        seeds = set()
        pts = set(itertools.product((0, k1 - 1), (0, k2 - 1), (0, k3 - 1)))
        pts.add((k1 // 2, k2 // 2, k3 // 2))
        for x in pts:
            base = _center_path(x[0] + x[1] + x[2])
            w = (x[0] - base[0], x[1] - base[1], x[2] - base[2])
            seeds.add(self.resolve_cell((w[0], -w[2])))
        cells = {}
        seen = set()
        frontier = list(seeds)
        neigh_offs = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1)]
        while frontier:
            cell = frontier.pop()
            if cell in seen:
                continue
            seen.add(cell)
            rng = self._scan_plane_range(cell, tmax)
            if rng is None:
                continue
            cells[cell] = rng
            for di, dj in neigh_offs:
                nxt = (cell[0] + di, cell[1] + dj)
                if nxt not in seen:
                    frontier.append(nxt)
        self.bands = sorted(cells)
        self._ranges = cells

    def _scan_plane_range(self, cell, tmax) -> Optional[tuple[int, int]]:
        lo = None
        for tau in range(0, tmax + 1):
            if self._feasible(cell, tau):
                lo = tau
                break
        if lo is None:
            return None
        hi = lo
        for tau in range(tmax, lo - 1, -1):
            if self._feasible(cell, tau):
                hi = tau
                break
        return lo, hi

    def plane_range(self, cell):
        rng = self._ranges.get(cell)
        if rng is None:
            return (0, -1)
        return rng

    def row_clip(self, cell, tau, row):
        # row = -b, col = -a
        a_lo, a_hi, b_lo, b_hi, d_lo, d_hi = self._abs_bounds(cell, tau)
        b = -row
        if not b_lo <= b <= b_hi:
            return None
        # a constrained by a-bounds and (a - b) bounds
        lo = max(a_lo, d_lo + b)
        hi = min(a_hi, d_hi + b)
        # template row span: |a| <= m and |a - b| <= m
        m = self.m
        lo = max(lo, -m, b - m)
        hi = min(hi, m, b + m)
        if lo > hi:
            return None
        return (-hi, -lo)

    def fully_interior(self, cell, tau):
        a_lo, a_hi, b_lo, b_hi, d_lo, d_hi = self._abs_bounds(cell, tau)
        m = self.m
        return (
            a_lo <= -m
            and a_hi >= m
            and b_lo <= -m
            and b_hi >= m
            and d_lo <= -m
            and d_hi >= m
        )
