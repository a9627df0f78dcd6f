"""Exact combinatorics of l1 balls and the closure/core/boundary operators.

Weight functions use the dimension recursion

    w(b_n^(r)) = w(b_{n-1}^(r)) + 2 * sum_{l<r} w(b_{n-1}^(l)),   w(b_1^(r)) = 2r+1,

all in exact integer (or Fraction) arithmetic.  The set-level operators work on
explicit finite vertex sets, either on a torus or on the infinite lattice Z^n,
and are only meant for brute-force scale (<= ~1e5 vertices).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional

from emstencil.grid import GridSpec, Vertex


@lru_cache(maxsize=None)
def ball_weight(n: int, r: int) -> int:
    """Number of lattice points of Z^n with ||x||_1 <= r.

    n = 0 is the single empty point, which closes the dimension recursion.
    """
    if n < 0:
        raise ValueError("dimension must be >= 0")
    if r < 0:
        return 0
    if n == 0:
        return 1
    if n == 1:
        return 2 * r + 1
    return ball_weight(n - 1, r) + 2 * sum(ball_weight(n - 1, l) for l in range(r))


def boundary_weight(n: int, r: int) -> int:
    """Weight of the inner boundary of the radius-r ball: the r-shell of Z^n.

    For r >= 1 it equals w(b_{n-1}^(r)) + w(b_{n-1}^(r-1)); for r = 0 a single
    point is its own boundary.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if r < 0:
        raise ValueError("radius must be >= 0")
    if r == 0:
        return 1
    return ball_weight(n - 1, r) + ball_weight(n - 1, r - 1)


def sphere_weight(n: int, r: int) -> int:
    """Points with ||x||_1 exactly r (the new layer gained going r-1 -> r)."""
    if r == 0:
        return 1
    return ball_weight(n, r) - ball_weight(n, r - 1)


def leading_coefficients(n: int) -> tuple[Fraction, Fraction]:
    """(2^n/n!, 2^n/(n-1)!): leading coefficients of ball and boundary weights."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    import math

    return Fraction(2**n, math.factorial(n)), Fraction(2**n, math.factorial(n - 1))


def ball_polynomial(n: int) -> list[Fraction]:
    """Exact coefficients c_0..c_n with w(b_n^(r)) = sum c_i r^i for all r >= 0.

    The weight is a degree-n polynomial in r, so interpolation through the
    first n+1 radii pins it down; exact rationals keep this bit-exact.
    """
    pts = [(r, ball_weight(n, r)) for r in range(n + 1)]
    # Lagrange interpolation over Fractions.
    coeffs = [Fraction(0)] * (n + 1)
    for i, (xi, yi) in enumerate(pts):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, (xj, _) in enumerate(pts):
            if j == i:
                continue
            basis = _poly_mul_linear(basis, -xj)
            denom *= xi - xj
        scale = Fraction(yi) / denom
        for k, c in enumerate(basis):
            coeffs[k] += scale * c
    return coeffs


def _poly_mul_linear(p: list[Fraction], const: int) -> list[Fraction]:
    # p(x) * (x + const)
    out = [Fraction(0)] * (len(p) + 1)
    for i, c in enumerate(p):
        out[i] += c * const
        out[i + 1] += c
    return out


@dataclass(frozen=True)
class FractionalBall:
    """The ball b^(r,alpha): full through radius r, surplus alpha on the r+1 sphere."""

    n: int
    r: int
    alpha: Fraction

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("radius must be >= 0")
        if not 0 <= self.alpha < 1:
            raise ValueError(f"surplus must be in [0,1), got {self.alpha}")

    def weight(self) -> Fraction:
        return ball_weight(self.n, self.r) + self.alpha * sphere_weight(self.n, self.r + 1)

    def core_weight(self, s: int) -> Fraction:
        """Weight of the s-fold inner core: the core of a ball is a smaller ball."""
        if s < 0:
            raise ValueError("s must be >= 0")
        r, a = self.r, self.alpha
        if s <= r:
            return ball_weight(self.n, r - s) + a * sphere_weight(self.n, r - s + 1)
        if s == r + 1:
            return Fraction(a)
        return Fraction(0)

    def inner_boundary_weight(self, s: int) -> Fraction:
        return self.weight() - self.core_weight(s)

    def closure_weight(self) -> Fraction:
        """Weight of the one-step closure: the next larger fractional ball."""
        return ball_weight(self.n, self.r + 1) + self.alpha * sphere_weight(self.n, self.r + 2)


def ball_of_weight(n: int, v) -> FractionalBall:
    """The unique fractional ball of weight v (v may be int or Fraction).

    Weights below 1 have no (radius, surplus) representation, since the ball
    parameterization always puts a full 1 at the center.
    """
    v = Fraction(v)
    if v < 1:
        raise ValueError(f"no (r, alpha) ball of weight {v} < 1")
    r = 0
    while ball_weight(n, r) <= v:
        r += 1
    # now w(b^(r-1)) <= v < w(b^(r))
    r -= 1
    alpha = (v - ball_weight(n, r)) / sphere_weight(n, r + 1)
    return FractionalBall(n, r, alpha)


class VertexSet:
    """An explicit finite set of vertices on a torus or on Z^n.

    grid=None means the infinite lattice; otherwise the grid must be a torus
    with all sides >= 2 so the distance-1 neighborhood is well defined.
    """

    def __init__(self, members: Iterable[Vertex], n: int, grid: Optional[GridSpec] = None):
        self.n = n
        self.grid = grid
        if grid is not None:
            if not grid.is_torus:
                raise ValueError("VertexSet on a finite domain requires a torus")
            if grid.n != n:
                raise ValueError("dimension mismatch")
            if any(k < 2 for k in grid.sides):
                raise ValueError("torus sides must be >= 2")
        self.members = frozenset(tuple(m) for m in members)
        for m in self.members:
            if len(m) != n:
                raise ValueError(f"vertex {m} has wrong dimension")
            if grid is not None and not grid.contains(m):
                raise ValueError(f"vertex {m} outside torus {grid.sides}")

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, x: Vertex) -> bool:
        return tuple(x) in self.members

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, VertexSet)
            and self.members == other.members
            and self.grid == other.grid
        )

    def __le__(self, other: "VertexSet") -> bool:
        return self.members <= other.members

    def _unit_neighbors(self, x: Vertex) -> list[Vertex]:
        out = []
        for i in range(self.n):
            for d in (-1, 1):
                y = list(x)
                if self.grid is not None:
                    y[i] = (y[i] + d) % self.grid.sides[i]
                else:
                    y[i] += d
                out.append(tuple(y))
        return out

    def _spawn(self, members: Iterable[Vertex]) -> "VertexSet":
        return VertexSet(members, self.n, self.grid)


def closure(S: VertexSet) -> VertexSet:
    """S together with every vertex at distance exactly 1 from S."""
    out = set(S.members)
    for x in S.members:
        out.update(S._unit_neighbors(x))
    return S._spawn(out)


def inner_core(S: VertexSet, s: int = 1) -> VertexSet:
    """Vertices of S whose whole distance-<=s neighborhood lies in S.

    Computed by s-fold application of the one-step core operator.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    members = set(S.members)
    for _ in range(s):
        members = {
            x for x in members if all(y in members for y in S._unit_neighbors(x))
        }
    return S._spawn(members)


def inner_boundary(S: VertexSet, s: int = 1) -> VertexSet:
    """S minus its s-fold inner core."""
    core = inner_core(S, s)
    return S._spawn(S.members - core.members)


def lattice_ball(n: int, r: int, center: Optional[Vertex] = None,
                 grid: Optional[GridSpec] = None) -> VertexSet:
    """The explicit radius-r l1 ball as a VertexSet (on Z^n or a torus)."""
    if center is None:
        center = (0,) * n
    pts = []

    def rec(prefix, budget):
        if len(prefix) == n - 1:
            for d in range(-budget, budget + 1):
                pts.append(prefix + (d,))
            return
        for d in range(-budget, budget + 1):
            rec(prefix + (d,), budget - abs(d))

    rec((), r)
    if grid is None:
        verts = [tuple(c + d for c, d in zip(center, p)) for p in pts]
    else:
        verts = [
            tuple((c + d) % k for c, d, k in zip(center, p, grid.sides)) for p in pts
        ]
    return VertexSet(verts, n, grid)
