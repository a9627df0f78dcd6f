"""Ground-truth generators kept deliberately independent of the fast paths.

naive_stencil re-evaluates the stencil with plain shifted-array sums;
brute_ball_weights counts lattice points instead of using the weight
recursions; exhaustive_isoperimetry enumerates every subset of a tiny torus
and checks the closure/core extremality statements directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from emstencil.combinatorics import VertexSet, closure, inner_core
from emstencil.grid import GridSpec, StencilSpec, Topology, l1_offsets


class BudgetExceeded(Exception):
    pass


def naive_stencil(g: GridSpec, st: StencilSpec, values: np.ndarray) -> np.ndarray:
    """output[x] = sum over the s-star of input values, wrapping mod 2^64.

    `values` must have shape g.sides; the result has the same shape and dtype
    uint64, matching the machine's Full-fidelity arithmetic bit for bit.
    """
    arr = np.ascontiguousarray(values, dtype=np.uint64).reshape(g.sides)
    out = np.zeros_like(arr)
    for d in l1_offsets(g.n, st.s):
        if g.is_torus:
            out += np.roll(arr, shift=[-di for di in d], axis=tuple(range(g.n)))
        else:
            src = []
            dst = []
            ok = True
            for di, k in zip(d, g.sides):
                lo_dst, hi_dst = max(0, -di), k - max(0, di)
                if lo_dst >= hi_dst:
                    ok = False
                    break
                src.append(slice(lo_dst + di, hi_dst + di))
                dst.append(slice(lo_dst, hi_dst))
            if ok:
                out[tuple(dst)] += arr[tuple(src)]
    return out


@dataclass(frozen=True)
class BallWeightRow:
    r: int
    ball: int
    inner_boundary: int
    inner_core: int


def brute_ball_weights(n: int, r_max: int) -> list[BallWeightRow]:
    """Ball/boundary/core weights on Z^n by explicit lattice enumeration.

    Enumerates the bounding box [-r_max-1, r_max+1]^n and applies the literal
    set definitions, so it shares nothing with the closed-form recursion it
    cross-checks.
    """
    if n > 4 or r_max > 8:
        raise ValueError("brute enumeration is capped at n <= 4, r <= 8")
    span = range(-r_max - 1, r_max + 2)
    pts = [()]
    for _ in range(n):
        pts = [p + (c,) for p in pts for c in span]
    norm = {p: sum(abs(c) for c in p) for p in pts}
    rows = []
    for r in range(r_max + 1):
        ball = {p for p in pts if norm[p] <= r}
        core = set()
        for p in ball:
            for i in range(n):
                for d in (-1, 1):
                    q = p[:i] + (p[i] + d,) + p[i + 1 :]
                    if q not in ball:
                        break
                else:
                    continue
                break
            else:
                core.add(p)
        rows.append(BallWeightRow(r, len(ball), len(ball) - len(core), len(core)))
    return rows


def _torus_distance(x, y, k):
    return sum(min(abs(a - b), k - abs(a - b)) for a, b in zip(x, y))


def torus_quasi_ball(k: int, n: int, v: int) -> VertexSet:
    """Canonical integral set of weight v filled by distance from the origin.

    Cells sorted by (torus distance to 0, lexicographic) and the first v
    taken; for exact ball weights this is the torus ball itself.
    """
    g = GridSpec((k,) * n, Topology.TORUS)
    cells = [()]
    for _ in range(n):
        cells = [c + (i,) for c in cells for i in range(k)]
    origin = (0,) * n
    cells.sort(key=lambda c: (_torus_distance(c, origin, k), c))
    return VertexSet(cells[:v], n, g)


def _torus_ball_sets(k: int, n: int, r: int) -> set:
    g = GridSpec((k,) * n, Topology.TORUS)
    origin = (0,) * n
    cells = [()]
    for _ in range(n):
        cells = [c + (i,) for c in cells for i in range(k)]
    return {c for c in cells if _torus_distance(c, origin, k) <= r}


def fractional_ball_closure_weight(k: int, n: int, v: int) -> float:
    """w(closure of b^v) on the torus Z_k^n, fractional surplus included.

    With f equal to 1 on the radius-r ball and alpha on the (r+1)-sphere, the
    closure is 1 on the whole (r+1)-ball and alpha on its fresh halo.  Torus
    ball sets are enumerated explicitly so small tori (where balls wrap) are
    handled exactly.
    """
    g = GridSpec((k,) * n, Topology.TORUS)
    r = 0
    while len(_torus_ball_sets(k, n, r)) <= v and len(_torus_ball_sets(k, n, r)) < k**n:
        r += 1
    r -= 1
    ball_r = _torus_ball_sets(k, n, r)
    if len(ball_r) == v:
        return float(len(closure(VertexSet(ball_r, n, g))))
    ball_r1 = _torus_ball_sets(k, n, r + 1)
    alpha = (v - len(ball_r)) / (len(ball_r1) - len(ball_r))
    halo = len(closure(VertexSet(ball_r1, n, g))) - len(ball_r1)
    return len(ball_r1) + alpha * halo


def fractional_ball_core_weight(k: int, n: int, v: int, s: int) -> float:
    """w(inner s-core of b^v) on the torus, using that ball cores are balls."""
    r = 0
    while len(_torus_ball_sets(k, n, r)) <= v and len(_torus_ball_sets(k, n, r)) < k**n:
        r += 1
    r -= 1
    ball_r = _torus_ball_sets(k, n, r)
    if len(ball_r) == v:
        alpha = 0.0
    else:
        ball_r1 = _torus_ball_sets(k, n, r + 1)
        alpha = (v - len(ball_r)) / (len(ball_r1) - len(ball_r))
    rc = r - s
    if rc >= 0:
        core = len(_torus_ball_sets(k, n, rc))
        if alpha:
            core += alpha * (len(_torus_ball_sets(k, n, rc + 1)) - core)
        return float(core)
    if rc == -1:
        return alpha
    return 0.0


@dataclass
class IsoperimetryVerdict:
    weight: int
    is_ball_weight: bool  # an integral ball of this weight exists on the torus
    min_closure: int
    max_core: int
    closure_bound: float  # fractional-ball closure weight (lower bound)
    core_bound: float  # fractional-ball core weight (upper bound)
    ball_is_closure_minimizer: bool
    ball_is_core_maximizer: bool
    closure_ok: bool
    core_ok: bool
    extremal_closure_set: tuple
    extremal_core_set: tuple


def exhaustive_isoperimetry(
    k: int,
    n: int,
    weight_cap: int,
    s: int = 1,
    budget: int = 10**8,
) -> list[IsoperimetryVerdict]:
    """Check the torus isoperimetric statements on every subset of Z_k^n.

    For each weight v <= weight_cap, enumerate all v-subsets and verify that
    no set has a smaller closure or a bigger inner s-core than the fractional
    ball of the same weight.  k must be even (hypothesis of the torus
    inequality).
    """
    if k < 2 or k % 2:
        raise ValueError("k must be even and >= 2")
    N = k**n
    total_visits = sum(math.comb(N, v) for v in range(1, weight_cap + 1))
    if total_visits > budget:
        raise BudgetExceeded(f"{total_visits} subsets exceed budget {budget}")

    g = GridSpec((k,) * n, Topology.TORUS)
    cells = [()]
    for _ in range(n):
        cells = [c + (i,) for c in cells for i in range(k)]
    index = {c: i for i, c in enumerate(cells)}
    nbr_mask = [0] * N
    for c in cells:
        m = 0
        for i in range(n):
            for d in (-1, 1):
                y = list(c)
                y[i] = (y[i] + d) % k
                m |= 1 << index[tuple(y)]
        nbr_mask[index[c]] = m

    verdicts = []
    for v in range(1, weight_cap + 1):
        best_closure = None
        best_closure_combo = None
        best_core = -1
        best_core_combo = None
        for combo in combinations(range(N), v):
            m = 0
            halo = 0
            for i in combo:
                m |= 1 << i
                halo |= nbr_mask[i]
            w_closure = (m | halo).bit_count()
            if best_closure is None or w_closure < best_closure:
                best_closure = w_closure
                best_closure_combo = combo
            t = m
            for _ in range(s):
                nt = 0
                x = t
                while x:
                    low = x & -x
                    i = low.bit_length() - 1
                    if nbr_mask[i] & ~t == 0:
                        nt |= low
                    x ^= low
                t = nt
            w_core = t.bit_count()
            if w_core > best_core:
                best_core = w_core
                best_core_combo = combo

        qball = torus_quasi_ball(k, n, v)
        ball_closure = len(closure(qball))
        ball_core = len(inner_core(qball, s))
        closure_bound = fractional_ball_closure_weight(k, n, v)
        core_bound = fractional_ball_core_weight(k, n, v, s)
        r = 0
        while len(_torus_ball_sets(k, n, r)) < v:
            r += 1
        verdicts.append(
            IsoperimetryVerdict(
                weight=v,
                is_ball_weight=len(_torus_ball_sets(k, n, r)) == v,
                min_closure=best_closure,
                max_core=best_core,
                closure_bound=closure_bound,
                core_bound=core_bound,
                ball_is_closure_minimizer=ball_closure == best_closure,
                ball_is_core_maximizer=ball_core == best_core,
                closure_ok=best_closure >= closure_bound - 1e-9,
                core_ok=best_core <= core_bound + 1e-9,
                extremal_closure_set=tuple(cells[i] for i in best_closure_combo),
                extremal_core_set=tuple(cells[i] for i in best_core_combo),
            )
        )
    return verdicts
