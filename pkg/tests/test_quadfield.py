from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.quadfield import (
    DiscMismatch, QuadInt, coset_label, discriminant_group_reps, label_element, negate_label, units, xgcd,
)

DISCS = [-3, -4, -7, -8, -11]
small = st.integers(-12, 12)
rat = st.fractions(-6, 6, max_denominator=6)


def test_gaussian_norm():
    assert QuadInt.gaussian(1, 1).norm() == 2


def test_trace_of_omega():
    for D in DISCS:
        assert QuadInt.omega(D).trace() == D


def test_half_one_plus_i_in_inverse_different():
    b = QuadInt.gaussian(Fraction(1, 2), Fraction(1, 2))
    assert b.in_inverse_different()
    assert not b.is_integral()
    assert not QuadInt.gaussian(Fraction(1, 2), 0).times_sqrt_disc().is_zero()


@pytest.mark.parametrize("D", DISCS)
def test_discriminant_group_size(D):
    reps = discriminant_group_reps(D)
    assert len(reps) == -D
    assert negate_label(D, (0, 0)) == (0, 0)
    for lab in reps:
        assert negate_label(D, negate_label(D, lab)) == lab
        assert coset_label(label_element(D, lab)) == lab


def test_gaussian_cosets():
    assert sorted(discriminant_group_reps(-4)) == [(0, 0), (0, 1), (1, 0), (1, 1)]


def test_disc_mismatch():
    with pytest.raises(DiscMismatch):
        QuadInt.omega(-4) + QuadInt.omega(-3)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(DISCS), rat, rat, small, small)
def test_inverse_different_duality(D, x, y, s1, s2):
    r = QuadInt(x, y, D)
    dual = all((r * QuadInt(Fraction(u), Fraction(v), D).conj()).trace().denominator == 1
               for u, v in ((1, 0), (0, 1)))
    assert dual == r.in_inverse_different()
    s = QuadInt(Fraction(s1), Fraction(s2), D)
    if r.in_inverse_different():
        assert (r * s.conj()).trace().denominator == 1


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(DISCS), rat, rat, rat, rat)
def test_field_axioms(D, a, b, c, d):
    z, w = QuadInt(a, b, D), QuadInt(c, d, D)
    assert (z * w).norm() == z.norm() * w.norm()
    assert z.conj().conj() == z
    assert z.norm() >= 0
    assert (z + w).conj() == z.conj() + w.conj()
    if not w.is_zero():
        assert (z / w) * w == z


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([-3, -4, -7, -8, -11]), small, small, small, small)
def test_xgcd(D, a, b, c, d):
    x, y = QuadInt(Fraction(a), Fraction(b), D), QuadInt(Fraction(c), Fraction(d), D)
    if x.is_zero() and y.is_zero():
        return
    g, s, t = xgcd(x, y)
    assert s * x + t * y == g
    assert (x / g).is_integral() and (y / g).is_integral()


def test_units():
    assert len(units(-4)) == 4
    assert len(units(-3)) == 6
    assert len(units(-7)) == 2
    assert all(u.norm() == 1 for D in DISCS for u in units(D))
