import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from periodic_dirichlet.errors import BoundaryZero, DegenerateInput
from periodic_dirichlet.special import PeriodicSequence, f_eval, f_eval_array
from periodic_dirichlet.zerocount import (
    Rectangle,
    adaptive_gauss,
    certified_sigma_cap,
    circle_winding,
    count_zeros,
    density_table,
    distinct_zeros,
    dominance_margin,
    second_moment,
    theorem3_ratio,
    track_segment,
    winding_number,
)
from oracles import grid_winding, mp_f

ETA = PeriodicSequence([1, -1])
CHI4 = PeriodicSequence([1, 0, -1, 0])
MIXED = PeriodicSequence([1, 2, 0])
# first zeros of zeta and of L(s, chi_4), mpmath
ZETA_ZEROS = (14.1347251417346937904572519836, 21.0220396387715549926284795939, 25.0108575801456887632137909926)
CHI4_ZERO = 6.02094890469759665490251152161


def test_rectangle_parse_and_validation():
    r = Rectangle.parse("0.1, 0.9,13,15")
    assert (r.sigma1, r.sigma2, r.t1, r.t2) == (0.1, 0.9, 13, 15)
    with pytest.raises(ValueError):
        Rectangle(1, 1, 0, 1)
    with pytest.raises(ValueError):
        Rectangle.parse("1,2,3")


def test_winding_first_zeta_zero():
    rect = Rectangle(0.1, 0.9, 13, 15)
    assert winding_number(ETA, rect) == 1
    f = lambda z: mp_f([1, -1], z)
    assert grid_winding(f, (0.1, 0.9, 13, 15), 0.01) == 1


def test_winding_zero_free_region():
    a = PeriodicSequence([1, 0])
    assert winding_number(a, Rectangle(0.2, 0.8, 1, 5)) == 0
    assert grid_winding(lambda z: mp_f([1, 0], z), (0.2, 0.8, 1, 5), 0.01) == 0


def test_pole_counts():
    zeta = PeriodicSequence([1])
    rect = Rectangle(0.5, 1.5, -1, 1)
    assert winding_number(zeta, rect) == -1
    assert count_zeros(zeta, rect) == 0


def test_conjugate_pair():
    assert count_zeros(ETA, Rectangle(0.1, 0.9, -15, 15)) == 2


def test_integrality_and_refinement():
    for step in (0.1, 0.05, 0.025):
        assert count_zeros(ETA, Rectangle(0.1, 0.9, 0, 30), step=step) == 3


def test_additivity():
    whole = count_zeros(MIXED, Rectangle(0.55, 0.95, 0, 60))
    parts = count_zeros(MIXED, Rectangle(0.55, 0.95, 0, 27.5)) + count_zeros(MIXED, Rectangle(0.55, 0.95, 27.5, 60))
    assert whole == parts > 0


def test_real_sequences_even_symmetric_counts():
    for T in (30, 60):
        assert count_zeros(MIXED, Rectangle(0.55, 0.95, -T, T)) % 2 == 0


def test_zero_on_contour_is_jittered():
    # bottom edge through 1/2 + i gamma_1: the edge is moved outward, the zero is counted
    rect = Rectangle(0.1, 0.9, ZETA_ZEROS[0], 16)
    assert count_zeros(ETA, rect) == 1


def test_track_segment_reports_boundary_zero():
    z0 = complex(0.5, ZETA_ZEROS[0])
    f = lambda s: f_eval_array(ETA, s)
    with pytest.raises(BoundaryZero):
        track_segment(f, z0 - 0.3, z0 + 0.3, step=0.3)


def test_zero_sequence_rejected():
    with pytest.raises(DegenerateInput):
        winding_number(PeriodicSequence([0, 0]), Rectangle(0.1, 0.9, 0, 1))


def test_distinct_zeta_zero():
    rep = distinct_zeros(ETA, Rectangle(0.1, 0.9, 13, 15))
    assert rep.count_with_multiplicity == 1
    (z, m), = rep.distinct
    assert m == 1
    assert abs(z - complex(0.5, ZETA_ZEROS[0])) < 1e-6
    assert abs(f_eval(ETA, z)) < 1e-9


def test_distinct_chi4_zero():
    rep = distinct_zeros(CHI4, Rectangle(0.2, 0.8, 5, 7))
    (z, m), = rep.distinct
    assert m == 1 and abs(z - complex(0.5, CHI4_ZERO)) < 1e-6


def test_distinct_report_invariants():
    rect = Rectangle(0.1, 0.9, 0, 30)
    rep = distinct_zeros(ETA, rect)
    assert rep.count_with_multiplicity == sum(m for _, m in rep.distinct) == 3
    assert rep.count_distinct == 3
    for (z, _), g in zip(sorted(rep.distinct, key=lambda x: x[0].imag), ZETA_ZEROS):
        assert rect.contains(z)
        assert abs(z - complex(0.5, g)) < 1e-6
    assert rep.boundary_min_modulus > 1e-10


def test_circle_winding_double_zero():
    f = lambda s: (s - 0.3) ** 2 * (s + 2)
    assert circle_winding(f, 0.3, 0.5) == 2
    assert circle_winding(f, 0.3 + 5j, 0.5) == 0


def test_density_table_growth():
    rows = density_table(MIXED, 0.55, 0.95, [100, 200, 400])
    N = [r.N for r in rows]
    assert 0 < N[0] <= N[1] <= N[2]
    assert N[2] > N[0]
    for r in rows:
        assert r.Nprime <= r.N
        assert r.N_over_T == pytest.approx(r.N / r.T)


def test_density_table_grh_expected_zero():
    (row,) = density_table(CHI4, 0.6, 0.9, [200], with_distinct=False)
    assert row.N == 0


def test_density_table_thin_strip():
    (row,) = density_table(MIXED, 0.7, 0.7 + 1e-9, [20])
    assert row.N == 0


def test_density_table_parallel_is_deterministic():
    a = density_table(MIXED, 0.55, 0.95, [50, 100], workers=1, with_distinct=False)
    b = density_table(MIXED, 0.55, 0.95, [50, 100], workers=4, with_distinct=False)
    assert a == b


def test_adaptive_gauss_polynomial_and_oscillatory():
    assert adaptive_gauss(lambda x: x**5, 0, 2, 1e-12) == pytest.approx(64 / 6, abs=1e-11)
    assert adaptive_gauss(np.cos, 0, 100, 1e-10) == pytest.approx(math.sin(100), abs=1e-9)


def test_second_moment_homogeneity():
    r1 = second_moment(CHI4, 0.75, 50)
    r2 = second_moment(PeriodicSequence(2 * CHI4.values), 0.75, 50)
    assert r2.main_term == pytest.approx(4 * r1.main_term, rel=1e-14)
    assert r2.integral_value == pytest.approx(4 * r1.integral_value, rel=1e-6)
    assert r1.integral_value >= 0 and r1.main_term > 0


def test_second_moment_rejects_bad_input():
    with pytest.raises(ValueError):
        second_moment(CHI4, 1.2, 50)
    with pytest.raises(ValueError):
        second_moment(CHI4, 0.75, 5)


def test_dominance_margin_and_cap():
    assert dominance_margin(MIXED, 4.0) > 0
    assert dominance_margin(MIXED, 1.5) < 0
    assert certified_sigma_cap(MIXED) >= 1 + 2 / math.log(2)
    # a_1 = 0, leading term 2^-s
    assert certified_sigma_cap(PeriodicSequence([0, 1, 5])) > 4


def test_theorem3_ratio_examples():
    r = theorem3_ratio(MIXED, 0.1, 200)
    assert math.isfinite(r.ratio) and r.ratio > 0
    assert theorem3_ratio(CHI4, 0.5, 100).count == 0


def test_theorem3_ratio_monotone_in_cap():
    small = theorem3_ratio(MIXED, 0.25, 60, sigma_cap=2.0)
    large = theorem3_ratio(MIXED, 0.25, 60, sigma_cap=4.0)
    assert small.ratio <= large.ratio


@settings(max_examples=10, deadline=None)
@given(st.floats(0.15, 0.45), st.floats(0.55, 0.85), st.floats(0, 40))
def test_counts_agree_with_grid_oracle(s1, s2, t1):
    rect = (s1, s2, t1, t1 + 6)
    try:
        n = winding_number(ETA, Rectangle(*rect))
    except BoundaryZero:
        return
    f = lambda z: complex(f_eval_array(ETA, np.array([z]))[0])
    assert n == grid_winding(f, rect, 0.01)
