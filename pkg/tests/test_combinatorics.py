from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from emstencil.combinatorics import (
    FractionalBall,
    VertexSet,
    ball_of_weight,
    ball_polynomial,
    ball_weight,
    boundary_weight,
    closure,
    inner_boundary,
    inner_core,
    lattice_ball,
    leading_coefficients,
    sphere_weight,
)
from emstencil.grid import GridSpec, Topology
from emstencil.oracles import brute_ball_weights


def test_ball_weight_examples():
    assert ball_weight(1, 3) == 7  # 2r+1
    assert ball_weight(2, 0) == 1
    assert ball_weight(2, 1) == 5
    assert ball_weight(3, 1) == 7


def test_boundary_weight_examples():
    assert boundary_weight(2, 3) == 12  # (2*3+1)+(2*2+1)
    assert boundary_weight(1, 2) == 2
    for n in range(1, 5):
        assert boundary_weight(n, 0) == 1


def test_leading_coefficients():
    assert leading_coefficients(2) == (Fraction(2), Fraction(4))
    assert leading_coefficients(1) == (Fraction(2), Fraction(2))
    assert leading_coefficients(3) == (Fraction(4, 3), Fraction(4))


def test_shell_identity():
    # b^(r) - b^(r-1) = Gamma b^(r) for r >= 1
    for n in range(1, 5):
        for r in range(1, 9):
            assert ball_weight(n, r) - ball_weight(n, r - 1) == boundary_weight(n, r)


def test_monotonicity():
    for n in range(1, 5):
        balls = [ball_weight(n, r) for r in range(9)]
        assert all(a < b for a, b in zip(balls, balls[1:]))
        if n >= 2:
            bounds = [boundary_weight(n, r) for r in range(9)]
            assert all(a < b for a, b in zip(bounds, bounds[1:]))


def test_brute_force_agreement():
    for n in range(1, 5):
        rows = brute_ball_weights(n, 6 if n < 4 else 4)
        for row in rows:
            assert row.ball == ball_weight(n, row.r)
            expected_core = ball_weight(n, row.r - 1) if row.r >= 1 else 0
            assert row.inner_core == expected_core
            assert row.inner_boundary == row.ball - expected_core


def test_ball_polynomial_structure():
    # degree-n polynomial, leading coefficient 2^n/n!, nonnegative lower terms
    for n in range(1, 5):
        coeffs = ball_polynomial(n)
        lead, _ = leading_coefficients(n)
        assert coeffs[n] == lead
        assert all(c >= 0 for c in coeffs)
        for r in range(9):
            assert sum(c * r**i for i, c in enumerate(coeffs)) == ball_weight(n, r)


def test_ball_of_weight_examples():
    b = ball_of_weight(2, 5)
    assert (b.r, b.alpha) == (1, 0)
    b = ball_of_weight(2, 9)
    assert (b.r, b.alpha) == (1, Fraction(1, 2))
    b = ball_of_weight(1, 1)
    assert (b.r, b.alpha) == (0, 0)


def test_fractional_ball_weight_roundtrip():
    for n in (1, 2, 3):
        for v in [Fraction(p, 4) for p in range(4, 121, 7)]:
            assert ball_of_weight(n, v).weight() == v
    with pytest.raises(ValueError):
        ball_of_weight(2, Fraction(1, 2))


def test_fractional_ball_validation():
    with pytest.raises(ValueError):
        FractionalBall(2, -1, Fraction(0))
    with pytest.raises(ValueError):
        FractionalBall(2, 1, Fraction(3, 2))


def test_closure_of_point_is_ball():
    S = VertexSet([(0, 0)], 2)
    assert len(closure(S)) == 5
    assert closure(S) == lattice_ball(2, 1)


def test_closure_of_empty():
    S = VertexSet([], 2)
    assert len(closure(S)) == 0


def test_closure_of_ball_is_next_ball():
    S = lattice_ball(2, 1)
    assert closure(S) == lattice_ball(2, 2)
    assert len(closure(S)) == ball_weight(2, 2) == 13


def test_core_of_ball_is_smaller_ball():
    S = lattice_ball(2, 2)
    assert inner_core(S, 1) == lattice_ball(2, 1)
    assert len(inner_core(S, 1)) == 5


def test_core_empties_leaves_boundary_everything():
    S = lattice_ball(2, 1)
    assert len(inner_core(S, 3)) == 0
    assert inner_boundary(S, 3) == S


def test_full_torus_is_own_core():
    g = GridSpec((4, 4), Topology.TORUS)
    S = VertexSet([(i, j) for i in range(4) for j in range(4)], 2, g)
    assert inner_core(S, 1) == S


@st.composite
def small_lattice_sets(draw):
    n = draw(st.integers(1, 3))
    pts = draw(
        st.sets(
            st.tuples(*[st.integers(-3, 3)] * n),
            min_size=0,
            max_size=12,
        )
    )
    return VertexSet(pts, n)


@settings(max_examples=60, deadline=None)
@given(small_lattice_sets())
def test_core_closure_adjunctions(S):
    # closure(core(S)) <= S and S <= core(closure(S)) for integral sets
    assert closure(inner_core(S, 1)) <= S
    assert S <= inner_core(closure(S), 1)


@settings(max_examples=40, deadline=None)
@given(small_lattice_sets())
def test_closure_grows_core_shrinks(S):
    assert S <= closure(S)
    assert inner_core(S, 1) <= S
    assert inner_boundary(S, 1).members == S.members - inner_core(S, 1).members


def test_sphere_weight():
    assert sphere_weight(2, 2) == 8
    assert sphere_weight(3, 1) == 6
    assert sphere_weight(2, 0) == 1


def test_fractional_ball_operator_identities():
    # closure of b^(r,a) is b^(r+1,a); the s-fold core is b^(r-s,a)
    for n in (1, 2, 3):
        for r in (0, 1, 3):
            for alpha in (Fraction(0), Fraction(1, 3), Fraction(7, 8)):
                b = FractionalBall(n, r, alpha)
                assert b.closure_weight() == FractionalBall(n, r + 1, alpha).weight()
                for s in range(1, r + 3):
                    expected = (
                        FractionalBall(n, r - s, alpha).weight()
                        if s <= r
                        else (alpha if s == r + 1 else Fraction(0))
                    )
                    assert b.core_weight(s) == expected
                    assert b.inner_boundary_weight(s) == b.weight() - expected
    # set-level cross-check on Z^2: integral ball core/closure weights
    for r in (1, 2):
        b = FractionalBall(2, r, Fraction(0))
        assert b.closure_weight() == len(closure(lattice_ball(2, r)))
        assert b.core_weight(1) == len(inner_core(lattice_ball(2, r), 1))
