"""Vertex universe: n-dimensional grids and tori with the s-star neighborhood.

Vertices are plain tuples of ints (0-based coordinates, one per dimension).
The canonical side ordering k1 >= ... >= kn that the bound formulas assume is
checked by a helper, never forced.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator

Vertex = tuple[int, ...]

_INDEX_LIMIT = 2**63 - 1


class Topology(enum.Enum):
    GRID = "grid"
    TORUS = "torus"


@dataclass(frozen=True)
class GridSpec:
    """Dimensions, side lengths and grid-vs-torus flag."""

    sides: tuple[int, ...]
    topology: Topology = Topology.GRID

    def __post_init__(self):
        if len(self.sides) < 1:
            raise ValueError("need at least one dimension")
        if any(k < 1 for k in self.sides):
            raise ValueError(f"side lengths must be >= 1, got {self.sides}")
        object.__setattr__(self, "sides", tuple(int(k) for k in self.sides))
        total = 1
        for k in self.sides:
            total *= k
            if total > _INDEX_LIMIT:
                raise OverflowError(
                    f"vertex count exceeds 63-bit index range: sides={self.sides}"
                )

    @property
    def n(self) -> int:
        return len(self.sides)

    @property
    def is_torus(self) -> bool:
        return self.topology is Topology.TORUS

    def contains(self, x: Vertex) -> bool:
        return len(x) == self.n and all(0 <= c < k for c, k in zip(x, self.sides))

    def sides_canonically_ordered(self) -> bool:
        """True iff k1 >= k2 >= ... >= kn (the ordering the bound formulas assume)."""
        return all(a >= b for a, b in zip(self.sides, self.sides[1:]))


@dataclass(frozen=True)
class StencilSpec:
    """Radius of the s-star stencil: all y with ||y - x||_1 <= s."""

    s: int

    def __post_init__(self):
        if self.s < 1:
            raise ValueError(f"stencil radius must be >= 1, got {self.s}")

    def validate_for(self, g: GridSpec) -> None:
        """Reject stencils that are large relative to the grid (2s < min k_i)."""
        if 2 * self.s >= min(g.sides):
            raise ValueError(
                f"stencil radius {self.s} too large for sides {g.sides} (need 2s < min k_i)"
            )


def vertex_count(g: GridSpec) -> int:
    return math.prod(g.sides)


def linearize(g: GridSpec, x: Vertex) -> int:
    """Row-major index (first coordinate major)."""
    if not g.contains(x):
        raise ValueError(f"vertex {x} outside {g.sides}")
    idx = 0
    for c, k in zip(x, g.sides):
        idx = idx * k + c
    return idx


def delinearize(g: GridSpec, i: int) -> Vertex:
    if not 0 <= i < vertex_count(g):
        raise ValueError(f"index {i} out of range for {g.sides}")
    coords = []
    for k in reversed(g.sides):
        coords.append(i % k)
        i //= k
    return tuple(reversed(coords))


def l1_offsets(n: int, s: int) -> list[tuple[int, ...]]:
    """All integer offsets d with ||d||_1 <= s, in a fixed deterministic order."""
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], budget: int):
        if len(prefix) == n - 1:
            for d in range(-budget, budget + 1):
                out.append(prefix + (d,))
            return
        for d in range(-budget, budget + 1):
            rec(prefix + (d,), budget - abs(d))

    rec((), s)
    return out


def stencil_neighbors(g: GridSpec, st: StencilSpec, x: Vertex) -> list[Vertex]:
    """The s-star S_s(x), center included.

    Torus coordinates wrap (minimal per-coordinate distance); duplicates from
    tiny sides (k_i <= 2s) are removed.  Grid vertices outside the box are
    omitted, which is what gives boundary vertices their truncated stencils.
    """
    if not g.contains(x):
        raise ValueError(f"vertex {x} outside {g.sides}")
    offs = l1_offsets(g.n, st.s)
    if g.is_torus:
        seen: dict[Vertex, None] = {}
        for d in offs:
            y = tuple((c + dc) % k for c, dc, k in zip(x, d, g.sides))
            seen.setdefault(y, None)
        return list(seen.keys())
    result = []
    for d in offs:
        y = tuple(c + dc for c, dc in zip(x, d))
        if all(0 <= c < k for c, k in zip(y, g.sides)):
            result.append(y)
    return result


def iter_vertices(g: GridSpec) -> Iterator[Vertex]:
    """All vertices in row-major order."""
    n = vertex_count(g)
    for i in range(n):
        yield delinearize(g, i)
