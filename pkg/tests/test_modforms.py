import cmath
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from artifact.hermitian import GammaElement, HermForm, enumerate_classes, generators
from artifact.hyperbolic import Point3
from artifact.modforms import (
    DiscGroup, HermitianGroup, QSeries, RepresentationMismatch, constant_term, general_binomial, kappa_kernel,
    rankin_cohen, restrict_to_sublattice, siegel_theta_numeric, split_lattice, theta_series, theta_unary_threehalf,
    trace_to_lattice,
)
from artifact.quadfield import discriminant_group_reps
from oracles import delta_coefficients, sigma

F = Fraction
HALF_DET_SPLIT = split_lattice(HermForm.gaussian(1, 0, 0, 1))
DET_FOUR_SPLIT = split_lattice(enumerate_classes(-4, 4, (0, 0), primitive=True).classes[0].form)


class OnePoint:
    """Trivial discriminant group, for scalar valued forms."""
    labels = ((),)

    def q_value(self, label):
        return F(0)

    def neg(self, label):
        return ()

    def zero(self):
        return ()


# ---- discriminant groups and series

def test_disc_group_sizes_and_values():
    G = DiscGroup([[2, 0, 0], [0, 2, 0], [0, 0, 2]])
    assert len(G.labels) == 8
    assert G.q_value((1, 1, 1)) == F(3, 4)
    assert G.q_value((0, 1, 1)) == F(1, 2)
    assert G.neg((1, 0, 0)) == (1, 0, 0)
    H = DiscGroup([[8, 0, 0], [0, 2, 0], [0, 0, 2]])
    assert len(H.labels) == 32
    assert H.q_value((1, 0, 0)) == F(1, 16)
    assert H.order((1, 0, 0)) == 8
    assert H.add((5, 1, 0), (3, 1, 1)) == (0, 0, 1)


def test_qseries_representation_check_and_json():
    G = DiscGroup([[2]])
    with pytest.raises(RepresentationMismatch):
        QSeries(G, {((1,), F(0)): 1}, F(1, 2), "rho").check()
    s = QSeries(G, {((1,), F(1, 4)): 2, ((0,), F(1)): 2}, F(1, 2), "rho").check()
    back = QSeries.from_json(s.to_json())
    assert back.to_json() == s.to_json()
    with pytest.raises(RepresentationMismatch):
        s + QSeries(G, {}, F(1, 2), "rho_bar")


def test_theta_series_counts():
    th = theta_series([[2, 0, 0], [0, 2, 0], [0, 0, 2]], 3)
    # Z^3 with x^2 + y^2 + z^2: r3(1) = 6, r3(2) = 12, r3(3) = 8
    assert [th.coeff((0, 0, 0), n) for n in (0, 1, 2, 3)] == [1, 6, 12, 8]
    # (Z + 1/2)^3 at 3/4: 8 vectors
    assert th.coeff((1, 1, 1), F(3, 4)) == 8
    unary = theta_series([[2]], 4)
    assert [unary.coeff((1,), F(k * k, 4)) for k in (1, 3)] == [2, 2]


def test_theta_threehalf():
    th = theta_unary_threehalf(1, 4)
    assert th.coeff((1,), F(1, 4)) == 0  # n and -n cancel
    th = theta_unary_threehalf(1, 4, D=-4)
    assert th.weight == F(3, 2)
    with pytest.raises(ValueError):
        theta_unary_threehalf(F(1, 2), 2)


# ---- splitting

def test_splitting_half_det_form():
    assert HALF_DET_SPLIT.P_gram == ((2,),)
    assert HALF_DET_SPLIT.N_minus_gram == ((2, 0, 0), (0, 2, 0), (0, 0, 2))
    assert HALF_DET_SPLIT.index == 2
    assert HALF_DET_SPLIT.fiber_over((1, 1)) == [((0,), (0, 1, 1)), ((1,), (1, 1, 1))]


def test_splitting_det_four():
    assert DET_FOUR_SPLIT.P_gram == ((8,),)
    assert sorted(DET_FOUR_SPLIT.N_minus_gram[i][i] for i in range(3)) == [2, 2, 8]
    assert DET_FOUR_SPLIT.index == 8


@pytest.mark.parametrize("split", [HALF_DET_SPLIT, DET_FOUR_SPLIT])
def test_fiber_respects_quadratic_values(split):
    herm = HermitianGroup(-4)
    for (alpha, beta), mu in split.fiber.items():
        q = split.P_group.q_value(alpha) - split.N_group.q_value(beta)
        assert (q - herm.q_value(mu)) % 1 == 0
    # the fiber is L' / (P + N), of order |L'/L| * index
    assert len(split.fiber) == 4 * split.index
    assert len(split.P_group.labels) * len(split.N_group.labels) == 4 * split.index ** 2


@pytest.mark.parametrize("split", [HALF_DET_SPLIT, DET_FOUR_SPLIT])
def test_split_determinant_identity(split):
    det_p = split.P_gram[0][0]
    G = split.N_minus_gram
    det_n = (G[0][0] * (G[1][1] * G[2][2] - G[1][2] * G[2][1]) - G[0][1] * (G[1][0] * G[2][2] - G[1][2] * G[2][0])
             + G[0][2] * (G[1][0] * G[2][1] - G[1][1] * G[2][0]))
    assert det_p * det_n == 4 * split.index ** 2


# ---- Rankin-Cohen brackets

def _eisenstein(k, cap, c):
    return {((), F(n)): (1 if n == 0 else c * sigma(k - 1, n)) for n in range(cap + 1)}


def test_rankin_cohen_e4_e6_is_delta():
    one = OnePoint()
    e4 = QSeries(one, _eisenstein(4, 6, 240), F(4), "rho")
    e6 = QSeries(one, _eisenstein(6, 6, -504), F(6), "rho")
    br = rankin_cohen(e4, e6, 1)
    # [f, g]_1 = l f' g - k f g' here, and 6 E4' E6 - 4 E4 E6' = 2 (E4^3 - E6^2) = 3456 Delta
    tau = delta_coefficients(5)
    for n in range(1, 6):
        assert br.coeff(((), ()), n) == 3456 * tau[n]


def _random_series(group, rep, data):
    sign = 1 if rep == "rho" else -1
    terms = {}
    for lab_idx, shift, coeff in data:
        lab = group.labels[lab_idx % len(group.labels)]
        e = (sign * group.q_value(lab)) % 1 + shift
        terms[(lab, e)] = F(coeff)
    return QSeries(group, terms, F(0), rep).check()


series_data = st.lists(st.tuples(st.integers(0, 40), st.integers(0, 3), st.integers(-9, 9)), min_size=1, max_size=6)


@settings(max_examples=60, deadline=None)
@given(series_data, series_data, st.integers(0, 4), st.sampled_from([F(1, 2), F(3, 2), F(-3), F(5, 2)]))
def test_rankin_cohen_antisymmetry(df, dg, n, k):
    G = DiscGroup([[4]])
    f = _random_series(G, "rho", df)
    g = _random_series(G, "rho", dg)
    fg = rankin_cohen(f, g, n, k, k)
    gf = rankin_cohen(g, f, n, k, k)
    swapped = {((lb, la), e): v for ((la, lb), e), v in gf.terms.items()}
    assert fg.terms == {key: (-1) ** n * v for key, v in swapped.items()}


def test_general_binomial():
    assert general_binomial(F(-1, 2), 2) == F(3, 8)
    assert general_binomial(5, 2) == 10


@pytest.mark.parametrize("m,n,l,expected", [(3, 1, 1, -1), (3, 1, 2, 1), (4, 2, 1, 1 - 6 * 3 + 9)])
def test_kappa_kernel(m, n, l, expected):
    assert kappa_kernel(m, n, l) == expected


# ---- restriction and trace

@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(-2, 2), st.integers(-9, 9)), min_size=1, max_size=5),
       st.lists(st.tuples(st.integers(0, 400), st.integers(-2, 2), st.integers(-9, 9)), min_size=1, max_size=12),
       st.sampled_from(["half_det", "det_four"]))
def test_restriction_trace_adjoint(df, dg, which):
    split = HALF_DET_SPLIT if which == "half_det" else DET_FOUR_SPLIT
    herm = HermitianGroup(-4)
    herm.labels = discriminant_group_reps(-4)
    f = _random_series(herm, "rho_bar", df)
    pairs = list(split.fiber) + [(a, b) for a in split.P_group.labels for b in split.N_group.labels][:5]
    terms = {}
    for idx, shift, coeff in dg:
        lab = pairs[idx % len(pairs)]
        q = split.sum_group.q_value(lab)
        terms[(lab, q % 1 + shift)] = F(coeff)
    g = QSeries(split.sum_group, terms, F(0), "rho").check()
    res = restrict_to_sublattice(f, split).check()
    tr = trace_to_lattice(g, split, herm).check()
    assert constant_term(res, g) == constant_term(f, tr)


def test_constant_term_requires_dual_reps():
    G = DiscGroup([[2]])
    a = QSeries(G, {((0,), F(0)): 1}, F(0), "rho")
    with pytest.raises(RepresentationMismatch):
        constant_term(a, a)


# ---- Siegel theta function

TAU = complex(0.13, 0.92)


def _word(seq):
    gens = generators(-4)
    out = GammaElement.from_ints(-4, (1, 0, 0, 1))
    for i in seq:
        out = out @ gens[i]
    return out


@pytest.mark.parametrize("seq", [(2,), (0, 2), (1, 2, 0), (2, 1, 2)])
def test_siegel_theta_gamma_invariant(seq):
    P = Point3(complex(0.2, 0.1), 0.9)
    a = siegel_theta_numeric(TAU, P, -4)
    b = siegel_theta_numeric(TAU, _word(seq).act_point(P), -4)
    for lab in a:
        assert abs(a[lab] - b[lab]) < 1e-10


def test_siegel_theta_translation_phase():
    P = Point3(complex(0.3, -0.1), 1.1)
    a = siegel_theta_numeric(TAU, P, -4)
    b = siegel_theta_numeric(TAU + 1, P, -4)
    herm = HermitianGroup(-4)
    for lab in a:
        assert abs(b[lab] - cmath.exp(2j * math.pi * float(herm.q_value(lab))) * a[lab]) < 1e-10


@pytest.mark.parametrize("split,P", [(HALF_DET_SPLIT, Point3(0j, 1.0)), (DET_FOUR_SPLIT, Point3(0j, 2.0))])
def test_siegel_theta_splits_at_special_point(split, P):
    """At the special point of X0 the theta function is (theta_P x conj(theta_N-))^L."""
    full = siegel_theta_numeric(TAU, P, -4, radius=7.0)
    tp = theta_series(split.P_gram, 8)
    tn = theta_series(split.N_minus_gram, 8)

    def evaluate(series, lab):
        return sum(v * cmath.exp(2j * math.pi * float(e) * TAU) for (l2, e), v in series.terms.items() if l2 == lab)

    y = TAU.imag
    for mu in discriminant_group_reps(-4):
        pred = sum(evaluate(tp, a) * evaluate(tn, b).conjugate() for a, b in split.fiber_over(mu)) * y ** 1.5
        assert abs(full[mu] - pred) < 1e-9
