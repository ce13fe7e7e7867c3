import math

import pytest
from hypothesis import given, strategies as st

import oracles as O
from fspl import geometry as G

C = G.DEFAULT_CONSTRAINTS
R_GRID = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5]


def test_spacing_examples():
    assert G.spacing(19, 160) == pytest.approx(7.535, abs=1e-3)
    assert G.spacing(8, 160) == pytest.approx(15.0)
    with pytest.raises(G.GeometryError, match="spacing undefined"):
        G.spacing(2, 160)


def test_active_height_examples():
    assert G.active_height(19, 180, 160) == pytest.approx(12.90, abs=0.01)
    assert G.active_height(8, 180, 160) == pytest.approx(29.27, abs=0.01)
    with pytest.raises(G.GeometryError, match="denominator nonpositive"):
        G.active_height(3, 540 * 3, 160)


def test_width_ceiling_examples():
    assert G.width_ceiling(2.0, 50, 5, 6.23) == pytest.approx(47.17, abs=0.01)
    assert G.width_ceiling(1.0, 50, 5, 6.23) == pytest.approx(22.57, abs=0.01)
    assert G.width_ceiling(3.5, 50, 5, 6.23) == pytest.approx(70.82, abs=0.02)


def test_solve_examples():
    g = G.solve_design(19, 2.0, C)
    assert g.feasible and g.violation is None
    assert g.s_p == pytest.approx(7.535, abs=1e-3)
    assert g.h_a == pytest.approx(12.90, abs=0.01)
    assert g.w_a == pytest.approx(O.width(19, 2.0), rel=1e-12)
    assert g.w_a_ceiling == pytest.approx(47.17, abs=0.01)
    assert g.R_i == pytest.approx(math.sqrt(3) / 6 * (g.w_a + 2 * 5 + 6.23))

    g20 = G.solve_design(20, 2.0, C)
    assert not g20.feasible and g20.violation == "s_p < s_p_min"
    assert g20.s_p == pytest.approx(7.20, abs=1e-9)

    g8 = G.solve_design(8, 3.5, C)
    assert not g8.feasible and g8.violation == "w_a > w_a_ceiling"
    assert g8.w_a == pytest.approx(102.4, abs=0.1)


def test_solve_rejects_small_ratio():
    with pytest.raises(G.GeometryError):
        G.solve_design(19, 0.9, C)


def test_below_n_min_is_flagged():
    g = G.solve_design(5, 1.0, C)
    assert not g.feasible


def test_max_feasible_n_examples():
    assert G.max_feasible_n(C) == 19
    assert G.max_feasible_n(C.with_(s_p_min=15.0)) == 8
    with pytest.raises(G.GeometryError, match="constraint set infeasible"):
        G.max_feasible_n(C.with_(s_p_min=200.0))


def test_max_feasible_n_is_the_flip_point():
    for s_min in [3.0, 5.0, 7.5, 10.0, 12.0, 15.0]:
        c = C.with_(s_p_min=s_min, n_min=3)
        n = G.max_feasible_n(c)
        assert G.spacing(n, c.a_l) >= s_min > G.spacing(n + 1, c.a_l)


def test_spacing_monotone_from_four():
    # spacing(3) = 17.78 < spacing(4) = 20, so the decrease starts at n = 4.
    values = [G.spacing(n, 160) for n in range(4, 101)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert G.spacing(3, 160) < G.spacing(4, 160)


def test_oracle_equivalence_on_grid():
    for n in range(8, 20):
        for r in R_GRID:
            g = G.solve_design(n, r, C)
            for got, ref in ((g.s_p, O.spacing(n)), (g.h_a, O.height(n)),
                             (g.w_a, O.width(n, r)), (g.w_a_ceiling, O.ceiling(r))):
                assert got == pytest.approx(ref, rel=1e-9)


@given(st.integers(3, 60), st.floats(1.0, 6.0))
def test_ratio_consistency(n, r):
    g = G.solve_design(n, r, C)
    assert g.w_a / g.h_a == pytest.approx(r, rel=1e-9)
    assert g.h_a > 0 and g.s_p > 0
    if g.feasible:
        assert g.s_p >= C.s_p_min and g.w_a <= g.w_a_ceiling and n >= C.n_min


def test_constraint_validation():
    with pytest.raises(G.GeometryError):
        G.DesignConstraints(R_c=-1)
    with pytest.raises(G.GeometryError):
        G.DesignConstraints(theta_n=400)
    with pytest.raises(G.GeometryError):
        G.DesignConstraints(n_min=0)
