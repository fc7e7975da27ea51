from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st
from sympy import Matrix

from artifact.eisenstein import (
    FitFailure, RecurrenceViolation, TernaryLattice, eis_coefficient_minus, eis_coefficient_plus,
    fit_generating_function, local_euler_polynomial, local_factor_rational_function, numeric_limit_oracle,
    rep_counts_prime_power, rep_number, rep_number_bruteforce, sigma_gamma_n,
)
from artifact.arith import SymbolicScalar
from oracles import rep_count_reference

F = Fraction
DIAG_222 = TernaryLattice.diagonal(2, 2, 2)
DIAG_822 = TernaryLattice.diagonal(8, 2, 2)

KNOWN = [
    (DIAG_222, F(1, 2), (0, 1, 1), SymbolicScalar.lvalue(8, -4, -1)),
    (DIAG_222, F(1, 4), (1, 1, 1), SymbolicScalar.log(2, -2, -1)),
    (DIAG_822, F(1), (0, 0, 0), SymbolicScalar.log(2, -2, -1)),
    (DIAG_822, F(0), (4, 0, 0), SymbolicScalar.log(2, -1, -1)),
    (DIAG_822, F(3, 4), (2, 0, 0), SymbolicScalar.lvalue(12, -2, -1)),
    (DIAG_822, F(7, 16), (3, 0, 0), SymbolicScalar.lvalue(28, -2, -1)),
    (DIAG_822, F(15, 16), (1, 0, 0), SymbolicScalar.lvalue(60, -2, -1)),
]


def gamma_vector(lat, label):
    """Rational representative G^-1 k of the coset with label k."""
    return list(Matrix(lat.gram).inv() * Matrix(label))


@st.composite
def lattices(draw):
    diag = [draw(st.sampled_from([2, 4, 6, 8])) for _ in range(3)]
    off = [draw(st.integers(-1, 1)) for _ in range(3)]
    gram = [[diag[0], off[0], off[1]], [off[0], diag[1], off[2]], [off[1], off[2], diag[2]]]
    try:
        return TernaryLattice(gram)
    except ValueError:
        assume(False)


@st.composite
def indices(draw, nonzero=False):
    lat = draw(lattices())
    gamma = draw(st.sampled_from(lat.group.labels))
    n = (-lat.group.q_value(gamma)) % 1 + draw(st.integers(0, 2))
    if nonzero:
        assume(n != 0)
    return lat, gamma, n


# ---- representation numbers

def test_rep_number_examples():
    assert rep_number(DIAG_222, (0, 0, 0), 1, 2) == 4
    assert rep_number(DIAG_222, (0, 0, 0), 1, 1) == 1
    assert rep_number(DIAG_822, (3, 1, 0), F(7, 16) + 1, 1) == 1
    with pytest.raises(ValueError):
        rep_number(DIAG_222, (0, 0, 0), 1, 0)


def test_rep_number_rejects_index_off_coset():
    with pytest.raises(ValueError):
        rep_number(DIAG_222, (1, 1, 1), 1, 2)


@pytest.mark.parametrize("lat,gamma,n", [(DIAG_222, (1, 1, 1), F(1, 4)), (DIAG_822, (1, 0, 0), F(15, 16)),
                                         (DIAG_822, (4, 0, 0), F(0)), (DIAG_822, (2, 1, 1), F(1, 4))])
@pytest.mark.parametrize("a", [2, 3, 4, 6, 8, 9])
def test_rep_number_against_reference(lat, gamma, n, a):
    expected = rep_count_reference(lat.gram, gamma_vector(lat, gamma), n, a)
    assert rep_number(lat, gamma, n, a) == expected
    assert rep_number_bruteforce(lat, gamma, n, a) == expected


@settings(max_examples=60, deadline=None)
@given(indices(), st.sampled_from([(2, 3), (3, 4), (2, 5), (4, 3), (3, 2), (5, 2)]))
def test_rep_number_multiplicative(index, ab):
    lat, gamma, n = index
    a, b = ab
    direct = rep_number_bruteforce(lat, gamma, n, a * b)
    assert direct == rep_number_bruteforce(lat, gamma, n, a) * rep_number_bruteforce(lat, gamma, n, b)
    assert rep_number(lat, gamma, n, a * b) == direct


@settings(max_examples=60, deadline=None)
@given(indices(nonzero=True), st.sampled_from([2, 3, 5]))
def test_stabilized_recurrence(index, p):
    lat, gamma, n = index
    # raises RecurrenceViolation unless N(p^(v+1)) = p^2 N(p^v) for w <= v <= w + 3
    poly = local_euler_polynomial(lat, gamma, n, p)
    assert poly[0] == 1
    assert all(c.denominator == 1 for c in poly)


def test_prime_power_counts_match_bruteforce():
    counts = rep_counts_prime_power(DIAG_822, (1, 0, 0), F(15, 16), 2, 3)
    assert counts == [rep_number_bruteforce(DIAG_822, (1, 0, 0), F(15, 16), 2 ** m) for m in range(4)]


# ---- local factors

def test_local_polynomial_degree_at_two():
    poly = local_euler_polynomial(DIAG_822, (0, 0, 0), 1, 2)
    assert len(poly) - 1 == 3
    assert poly == [1, 0, -16, 0]


def test_local_polynomial_generic_prime_is_linear():
    assert len(local_euler_polynomial(DIAG_222, (0, 0, 0), 1, 7)) == 2


def test_local_polynomial_needs_nonzero_index():
    with pytest.raises(ValueError):
        local_euler_polynomial(DIAG_822, (4, 0, 0), 0, 2)


@pytest.mark.parametrize("p", [3, 5])
def test_generic_zero_index_factor_closed_form(p):
    R = local_factor_rational_function(DIAG_222, (0, 0, 0), 0, p)
    for x in (F(1, 7), F(2, 11), F(1, p * p)):
        assert R(x) == (1 - p * p * x * x) / (1 - p ** 3 * x * x)


def test_anisotropic_factor_vanishes_at_center():
    R = local_factor_rational_function(DIAG_822, (4, 0, 0), 0, 2)
    assert R.den == (1,)
    assert R(F(1, 4)) == 0
    assert R(0) == 1


def test_fit_generating_function():
    geometric = [3 ** m for m in range(12)]
    R = fit_generating_function(geometric)
    assert R(F(1, 5)) == F(1) / (1 - F(3, 5))
    assert fit_generating_function([1, 2, 0, 0, 0, 0, 0, 0]).den == (1,)
    assert fit_generating_function([m ** 6 for m in range(12)], max_order=2) is None


def test_sigma_gamma_n():
    assert sigma_gamma_n(5, 1) == 1
    assert sigma_gamma_n(5, 3) == F(5, 3)
    # multiplicative in coprime w
    assert sigma_gamma_n(5, 12) == sigma_gamma_n(5, 4) * sigma_gamma_n(5, 3)


# ---- coefficients

@pytest.mark.parametrize("lat,n,gamma,expected", KNOWN)
def test_known_coefficients_exact(lat, n, gamma, expected):
    assert eis_coefficient_plus(lat, n, gamma).value == expected


@pytest.mark.parametrize("lat,n,gamma,expected", KNOWN)
def test_known_coefficients_against_limit_oracle(lat, n, gamma, expected):
    exact = float(eis_coefficient_plus(lat, n, gamma).value)
    oracle = float(numeric_limit_oracle(lat, n, gamma))
    assert abs(exact - oracle) <= 1e-4 * abs(oracle)


@pytest.mark.parametrize("lat", [DIAG_222, DIAG_822])
def test_all_small_coefficients_against_limit_oracle(lat):
    for gamma in lat.group.labels:
        n = (-lat.group.q_value(gamma)) % 1
        for shift in (0, 1):
            c = eis_coefficient_plus(lat, n + shift, gamma)
            oracle = float(numeric_limit_oracle(lat, n + shift, gamma))
            # exact zeros leave an O(eps^2) residue in the extrapolated oracle
            assert abs(float(c.value) - oracle) <= 1e-4 * max(abs(oracle), 1e-3), (gamma, n + shift)


@pytest.mark.parametrize("lat", [DIAG_222, DIAG_822])
def test_coefficients_even_in_coset(lat):
    for gamma in lat.group.labels:
        n = (-lat.group.q_value(gamma)) % 1
        for shift in (0, 1, 2):
            a = eis_coefficient_plus(lat, n + shift, gamma).value
            b = eis_coefficient_plus(lat, n + shift, lat.group.neg(gamma)).value
            assert a == b
        m = n - 1 if n else F(-1)
        assert eis_coefficient_minus(lat, m, gamma).value == eis_coefficient_minus(lat, m, lat.group.neg(gamma)).value


@settings(max_examples=60, deadline=None)
@given(indices())
def test_coefficient_tag_structure(index):
    lat, gamma, n = index
    try:
        c = eis_coefficient_plus(lat, n, gamma)
    except (FitFailure, RecurrenceViolation) as exc:
        pytest.fail(f"local factor failed: {exc}")
    tags = c.value.tags()
    assert len(tags) <= 1
    for t in tags:
        assert t.kind in ("L", "log")
        assert t.pi_power == -1
        if t.kind == "L":
            assert c.case == "nonsquare_disc" and t.arg > 1
        else:
            assert c.case in ("square_disc", "zero_index")


def test_minus_coefficients_carry_pi_to_minus_three_halves():
    c = eis_coefficient_minus(DIAG_222, F(-3, 4), (1, 1, 1))
    assert c.case == "negative_index"
    assert all(t.pi_power == F(-3, 2) for t in c.value.tags())
    with pytest.raises(ValueError):
        eis_coefficient_minus(DIAG_222, F(1, 4), (1, 1, 1))
    with pytest.raises(ValueError):
        eis_coefficient_plus(DIAG_222, F(-3, 4), (1, 1, 1))


def test_lattice_validation():
    with pytest.raises(ValueError):
        TernaryLattice([[2, 3, 0], [3, 2, 0], [0, 0, 2]])
    with pytest.raises(ValueError):
        TernaryLattice([[2, 0], [0, 2]])
    assert DIAG_822.det == 32 and DIAG_222.det == 8


def test_coefficient_json():
    doc = eis_coefficient_plus(DIAG_822, F(15, 16), (1, 0, 0)).to_json()
    assert doc["case"] == "nonsquare_disc"
    assert doc["value_symbolic"] == str(SymbolicScalar.lvalue(60, -2, -1))
    assert SymbolicScalar.from_json(doc["terms"]) == SymbolicScalar.lvalue(60, -2, -1)
