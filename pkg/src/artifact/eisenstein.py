"""Fourier coefficients of the weight 1/2 harmonic Maass Eisenstein series
attached to a positive definite even ternary lattice.

Cosets are DiscGroup labels k = G*gamma. For a coset gamma and index n the
counting polynomial is F(x) = Q(x - gamma) + n = Q(x) - k.x + (Q(gamma) + n),
which has integer coefficients.

Exact values come back as SymbolicScalars; `numeric_limit_oracle` evaluates
the non-holomorphic coefficient at s = 1/2 + eps with mpmath and removes the
linear error term by Richardson extrapolation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import mpmath
from sympy import divisors, factorint, mobius

from .arith import (
    SymbolicScalar, dirichlet_L_at_1, factor_discriminant, kronecker, WORKING_DPS,
)
from .modforms import DiscGroup


class RecurrenceViolation(ArithmeticError):
    pass


class FitFailure(ArithmeticError):
    pass


class PoleAtCenter(ArithmeticError):
    pass


class TernaryLattice:
    def __init__(self, gram):
        self.group = DiscGroup(gram)
        self.gram = self.group.gram
        if self.group.rank != 3:
            raise ValueError("expected a rank 3 lattice")
        minors = [self.gram[0][0],
                  self.gram[0][0] * self.gram[1][1] - self.gram[0][1] ** 2,
                  self._det()]
        if min(minors) <= 0:
            raise ValueError("Gram matrix must be positive definite")
        self.det = self._det()

    def _det(self) -> int:
        g = self.gram
        return (g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1])
                - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
                + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]))

    @staticmethod
    def diagonal(*entries) -> "TernaryLattice":
        return TernaryLattice([[entries[i] if i == j else 0 for j in range(3)] for i in range(3)])

    def __repr__(self):
        return f"TernaryLattice({self.gram})"

    def check_index(self, gamma, n) -> tuple:
        gamma = self.group.reduce(gamma)
        n = Fraction(n)
        if (n + self.group.q_value(gamma)) % 1:
            raise ValueError(f"n = {n} is not in Z - Q(gamma) for gamma = {gamma}")
        return gamma, n

    def poly(self, gamma, n) -> tuple:
        """(k, c) with F(x) = Q(x) - k.x + c."""
        gamma, n = self.check_index(gamma, n)
        c = self.group.q_exact(gamma) + n
        assert c.denominator == 1
        return gamma, int(c)

    def order(self, gamma) -> int:
        return self.group.order(gamma)


def _q(G, x) -> int:
    return sum(G[i][j] * x[i] * x[j] for i in range(3) for j in range(3)) // 2


def rep_number_bruteforce(lat: TernaryLattice, gamma, n, a: int) -> int:
    k, c = lat.poly(gamma, n)
    G = lat.gram
    return sum(1 for x in product(range(a), repeat=3)
               if (_q(G, x) - sum(ki * xi for ki, xi in zip(k, x)) + c) % a == 0)


@lru_cache(maxsize=None)
def _count(G: tuple, b: tuple, c: int, p: int, m: int) -> int:
    """#{x mod p^m : Q_G(x) + b.x + c = 0 mod p^m}."""
    if m == 0:
        return 1
    mod = p ** m
    total = 0
    for y in product(range(p), repeat=3):
        fy = _q(G, y) + sum(bi * yi for bi, yi in zip(b, y)) + c
        if fy % p:
            continue
        grad = [sum(G[i][j] * y[j] for j in range(3)) + b[i] for i in range(3)]
        if any(g % p for g in grad):
            # nonsingular: every lift mod p^k extends in p^2 ways
            total += p ** (2 * (m - 1))
            continue
        if m == 1:
            total += 1
            continue
        if fy % (p * p):
            continue
        # x = y + p u: F = F(y) + p^2 (Q(u) + (grad/p).u)
        mm = m - 2
        modn = p ** mm
        nb = tuple((g // p) % modn if modn > 1 else 0 for g in grad)
        nc = (fy // (p * p)) % modn if modn > 1 else 0
        total += p ** 3 * _count(G, nb, nc, p, mm)
    assert total <= mod ** 3
    return total


def rep_counts_prime_power(lat: TernaryLattice, gamma, n, p: int, m_max: int) -> list[int]:
    """[N(p^0), ..., N(p^m_max)]."""
    k, c = lat.poly(gamma, n)
    b = tuple(-x for x in k)
    return [_count(lat.gram, tuple(x % p ** m for x in b) if m else (0, 0, 0), c % p ** m if m else 0, p, m)
            for m in range(m_max + 1)]


def rep_number(lat: TernaryLattice, gamma, n, a: int) -> int:
    """N_{gamma,n}(a) via multiplicativity and the p-adic recursion."""
    if a < 1:
        raise ValueError("modulus must be positive")
    out = 1
    for p, e in factorint(a).items():
        out *= rep_counts_prime_power(lat, gamma, n, p, e)[e]
    return out


def w_exponent(lat: TernaryLattice, gamma, n, p: int) -> int:
    gamma, n = lat.check_index(gamma, n)
    t = 2 * lat.order(gamma) * n
    assert t.denominator == 1 and t != 0
    return 1 + 2 * _val(int(t), p)


def _val(x: int, p: int) -> int:
    x = abs(x)
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def local_euler_polynomial(lat: TernaryLattice, gamma, n, p: int, extra: int = 3) -> list[Fraction]:
    """Coefficients [c_0, ..., c_w] of L^{(p)}(X) for n != 0.

    Checks the stabilized recurrence N(p^{v+1}) = p^2 N(p^v) for w <= v <= w + extra.
    """
    if Fraction(n) == 0:
        raise ValueError("the polynomial form needs n != 0")
    w = w_exponent(lat, gamma, n, p)
    N = rep_counts_prime_power(lat, gamma, n, p, w + extra + 1)
    for v in range(w, w + extra + 1):
        if N[v + 1] != p * p * N[v]:
            raise RecurrenceViolation(f"N(p^{v + 1}) != p^2 N(p^{v}) at p={p}, gamma={gamma}, n={n}")
    coeffs = [Fraction(0)] * (w + 1)
    for v in range(w):
        coeffs[v] += N[v]
        coeffs[v + 1] -= p * p * N[v]
    coeffs[w] += N[w]
    return coeffs


@dataclass(frozen=True)
class RationalFunction:
    num: tuple  # Fraction coefficients in X
    den: tuple

    def __call__(self, x) -> Fraction:
        return _peval(self.num, x) / _peval(self.den, x)

    def derivative(self, x) -> Fraction:
        P, Q = _peval(self.num, x), _peval(self.den, x)
        dP, dQ = _peval(_pder(self.num), x), _peval(_pder(self.den), x)
        return (dP * Q - P * dQ) / (Q * Q)

    def mp(self, x):
        num = sum(mpmath.mpf(c.numerator) / c.denominator * x ** i for i, c in enumerate(self.num))
        den = sum(mpmath.mpf(c.numerator) / c.denominator * x ** i for i, c in enumerate(self.den))
        return num / den


def _peval(coeffs, x):
    out = Fraction(0)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def _pder(coeffs):
    return tuple(i * c for i, c in enumerate(coeffs))[1:] or (Fraction(0),)


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _divide_linear(coeffs, c) -> tuple:
    """coeffs / (1 - c X), assuming exact divisibility."""
    out = []
    carry = Fraction(0)
    for a in coeffs[:-1]:
        carry = a + c * carry
        out.append(carry)
    assert coeffs[-1] + c * carry == 0
    return tuple(out) or (Fraction(0),)


def _solve(A, rhs):
    """Exact Gaussian elimination; None if singular."""
    n = len(A)
    M = [list(map(Fraction, row)) + [Fraction(r)] for row, r in zip(A, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col] != 0), None)
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col] / M[col][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [M[i][n] / M[i][i] for i in range(n)]


def fit_generating_function(seq, max_order: int = 4, checks: int = 3):
    """Rational function P/Q with sum seq[m] X^m = P/Q, from a linear recurrence
    a_{m+k} = sum_i c_i a_{m+i} valid for m >= m0. Returns None if nothing fits."""
    seq = [Fraction(x) for x in seq]
    for k in range(0, max_order + 1):
        for m0 in range(0, len(seq)):
            need = m0 + 2 * k + checks
            if need > len(seq):
                break
            if k == 0:
                if all(x == 0 for x in seq[m0:]):
                    return RationalFunction(tuple(seq[:m0]) or (Fraction(0),), (Fraction(1),))
                continue
            A = [[seq[m + i] for i in range(k)] for m in range(m0, m0 + k)]
            rhs = [seq[m + k] for m in range(m0, m0 + k)]
            c = _solve(A, rhs)
            if c is None:
                continue
            ok = all(seq[m + k] == sum(ci * seq[m + i] for i, ci in enumerate(c))
                     for m in range(m0, len(seq) - k))
            if not ok:
                continue
            den = [Fraction(1)] + [-c[k - j] for j in range(1, k + 1)]
            num = _pmul(seq[: m0 + k], den)[: m0 + k]
            return RationalFunction(tuple(num), tuple(den))
    return None


def local_factor_rational_function(lat: TernaryLattice, gamma, n, p: int) -> RationalFunction:
    """L^{(p)}(X) = (1 - p^2 X) sum_m N(p^m) X^m as an exact rational function."""
    for m_max in (10, 14):
        N = rep_counts_prime_power(lat, gamma, n, p, m_max)
        gen = fit_generating_function(N)
        if gen is not None:
            root = Fraction(1, p * p)
            if _peval(gen.den, root) == 0:
                # cancel (1 - p^2 X) against the denominator so X = p^-2 stays evaluable
                return RationalFunction(gen.num, _divide_linear(gen.den, p * p))
            return RationalFunction(tuple(_pmul(gen.num, [Fraction(1), Fraction(-p * p)])), gen.den)
    raise FitFailure(f"no recurrence of order <= 4 for p={p}, gamma={gamma}, n={n}")


def sigma_gamma_n(delta0: int, w: int) -> Fraction:
    """sum_{d | w} mu(d) chi(d) d^-1 sigma_{-1}(w/d)."""
    total = Fraction(0)
    for d in divisors(w):
        mu = int(mobius(d))
        if mu:
            total += Fraction(mu * kronecker(delta0, d), d) * sum(Fraction(1, e) for e in divisors(w // d))
    return total


@dataclass(frozen=True)
class EisCoefficient:
    n: Fraction
    gamma: tuple
    value: SymbolicScalar
    case: str  # nonsquare_disc, square_disc, zero_index, negative_index

    def to_json(self) -> dict:
        return {"n": str(self.n), "coset": list(self.gamma), "case": self.case,
                "value_symbolic": str(self.value), "terms": self.value.to_json(),
                "value_numeric": float(self.value.numeric_eval())}


def _prefactor(lat: TernaryLattice, pi_power) -> SymbolicScalar:
    """-2^{3/2} * 3 / (sqrt|L'/L| * pi^pi_power)."""
    return SymbolicScalar.sqrt(Fraction(8, lat.det)) * SymbolicScalar.pi(-Fraction(pi_power), -3)


def bad_primes(lat: TernaryLattice) -> list[int]:
    return sorted(factorint(2 * lat.det))


def discriminant_of_index(lat: TernaryLattice, gamma, n) -> Fraction:
    d = lat.order(gamma)
    return 2 * d * d * Fraction(n) * lat.det


def _nonsquare_part(lat, gamma, n) -> tuple[int, Fraction]:
    """(Delta0, sigma * prod over bad p of the local factors)."""
    delta = discriminant_of_index(lat, gamma, n)
    assert delta.denominator == 1
    delta = int(delta)
    fact = factor_discriminant(delta, 2 * lat.det, allow_negative=True)
    d0 = fact.delta0
    r = sigma_gamma_n(d0, fact.w)
    for p in bad_primes(lat):
        w = w_exponent(lat, gamma, n, p)
        Nw = rep_counts_prime_power(lat, gamma, n, p, w)[w]
        r *= (1 - Fraction(kronecker(d0, p), p)) / (1 - Fraction(1, p * p)) * Fraction(Nw, p ** (2 * w))
    return d0, r


def _square_limit(lat, gamma, n, pole_order_residue: Fraction, factors) -> SymbolicScalar:
    """lim (pole) * prod_p R_p(p^{-1-2s}) / (1 + 1/p), with a simple pole of residue
    pole_order_residue in eps = s - 1/2 and R_p given exactly."""
    vanishing = []
    regular = Fraction(1)
    for p, R in factors:
        x0 = Fraction(1, p * p)
        val = R(x0)
        if val == 0:
            vanishing.append((p, R.derivative(x0) * x0 * (-2)))
        else:
            regular *= val
        regular /= (1 + Fraction(1, p))
    if not vanishing:
        raise PoleAtCenter(f"no local zero cancels the pole at gamma={gamma}, n={n}")
    if len(vanishing) > 1:
        return SymbolicScalar()
    p, dcoef = vanishing[0]
    # d/ds R(p^{-1-2s}) = R'(X) * X * (-2 log p)
    return SymbolicScalar.log(p, pole_order_residue * dcoef * regular)


class _PolyFactor:
    def __init__(self, coeffs):
        self.coeffs = tuple(coeffs)

    def __call__(self, x):
        return _peval(self.coeffs, x)

    def derivative(self, x):
        return _peval(_pder(self.coeffs), x)

    def mp(self, x):
        return sum(mpmath.mpf(c.numerator) / c.denominator * x ** i for i, c in enumerate(self.coeffs))


def eis_coefficient_plus(lat: TernaryLattice, n, gamma) -> EisCoefficient:
    gamma, n = lat.check_index(gamma, n)
    if n < 0:
        raise ValueError("c+ needs n >= 0")
    pref = _prefactor(lat, 1)
    if n == 0:
        factors = [(p, local_factor_rational_function(lat, gamma, 0, p)) for p in bad_primes(lat)]
        # zeta(4s - 1) has residue 1/4 at s = 1/2
        return EisCoefficient(n, gamma, pref * _square_limit(lat, gamma, n, Fraction(1, 4), factors), "zero_index")
    delta = discriminant_of_index(lat, gamma, n)
    if _is_square(delta):
        factors = [(p, _PolyFactor(local_euler_polynomial(lat, gamma, n, p))) for p in bad_primes(lat)]
        # zeta(2s) has residue 1/2 at s = 1/2
        return EisCoefficient(n, gamma, pref * _square_limit(lat, gamma, n, Fraction(1, 2), factors), "square_disc")
    d0, r = _nonsquare_part(lat, gamma, n)
    return EisCoefficient(n, gamma, pref * SymbolicScalar.lvalue(d0, r), "nonsquare_disc")


def eis_coefficient_minus(lat: TernaryLattice, n, gamma) -> EisCoefficient:
    gamma, n = lat.check_index(gamma, n)
    if n >= 0:
        raise ValueError("c- needs n < 0")
    d0, r = _nonsquare_part(lat, gamma, n)
    return EisCoefficient(n, gamma, _prefactor(lat, Fraction(3, 2)) * SymbolicScalar.lvalue(d0, r), "negative_index")


def _is_square(x: Fraction) -> bool:
    if x < 0:
        return False
    return all(math.isqrt(v) ** 2 == v for v in (x.numerator, x.denominator))


def eisenstein_series_plus(lat: TernaryLattice, cap):
    """Holomorphic part sum c+(n, gamma) q^n e_gamma for 0 <= n <= cap, as a rho_bar series."""
    from .modforms import QSeries
    cap = Fraction(cap)
    terms = {}
    for gamma in lat.group.labels:
        n = (-lat.group.q_value(gamma)) % 1
        while n <= cap:
            c = eis_coefficient_plus(lat, n, gamma).value
            if not c.is_zero():
                terms[(gamma, n)] = c
            n += 1
    return QSeries(lat.group, terms, Fraction(1, 2), "rho_bar")


# ---------------------------------------------------------------- oracle

def _chi_list(d0: int) -> list[int]:
    return [kronecker(d0, a) for a in range(abs(d0))]


def _coefficient_at(lat: TernaryLattice, gamma, n: Fraction, s):
    """Non-holomorphic coefficient at s, without the Whittaker factor."""
    mp = mpmath
    det_root = mp.sqrt(lat.det)
    if n == 0:
        val = (-mp.mpf(2) ** (mp.mpf(3) / 2 - 2 * s) * mp.pi * mp.gamma(2 * s - mp.mpf(1) / 2)
               / (mp.gamma(s + mp.mpf(1) / 2) * mp.gamma(s)) / det_root
               * mp.zeta(4 * s - 1) / mp.zeta(4 * s))
        for p in bad_primes(lat):
            R = local_factor_rational_function(lat, gamma, 0, p)
            val *= (1 - mp.mpf(p) ** (1 - 4 * s)) / (1 - mp.mpf(p) ** (-4 * s)) * R.mp(mp.mpf(p) ** (-1 - 2 * s))
        return val
    delta = discriminant_of_index(lat, gamma, n)
    delta_int = int(delta)
    if _is_square(delta):
        lval = mp.zeta(2 * s)
        d0 = 1
    else:
        d0 = factor_discriminant(delta_int, 2 * lat.det, allow_negative=True).delta0
        lval = mp.dirichlet(2 * s, _chi_list(d0))
    an = abs(mp.mpf(n.numerator) / n.denominator)
    gam = mp.gamma(s + mp.mpf(1) / 2) if n > 0 else mp.gamma(s)
    val = -mp.sqrt(2) * mp.pi ** (s + mp.mpf(1) / 2) * an ** (s - mp.mpf(1) / 2) / (det_root * gam)
    val *= lval / mp.zeta(4 * s)
    # local factors at every p | Delta from raw counts
    for p in sorted(factorint(abs(delta_int))):
        w = w_exponent(lat, gamma, n, p)
        N = rep_counts_prime_power(lat, gamma, n, p, w)
        X = mp.mpf(p) ** (-1 - 2 * s)
        poly = N[w] * X ** w + (1 - p * p * X) * sum(N[v] * X ** v for v in range(w))
        chi = kronecker(d0, p)
        val *= (1 - chi * mp.mpf(p) ** (-2 * s)) / (1 - mp.mpf(p) ** (-4 * s)) * poly
    return val


def numeric_limit_oracle(lat: TernaryLattice, n, gamma, eps: float = 1e-4, dps: int = WORKING_DPS):
    """Richardson extrapolation 2 c(1/2 + eps/2) - c(1/2 + eps) of the coefficient."""
    gamma, n = lat.check_index(gamma, n)
    with mpmath.workdps(dps):
        half = mpmath.mpf(1) / 2
        e = mpmath.mpf(eps)
        c1 = _coefficient_at(lat, gamma, n, half + e)
        c2 = _coefficient_at(lat, gamma, n, half + e / 2)
        return 2 * c2 - c1


__all__ = [
    "TernaryLattice", "rep_number", "rep_number_bruteforce", "rep_counts_prime_power",
    "local_euler_polynomial", "local_factor_rational_function", "sigma_gamma_n",
    "EisCoefficient", "eis_coefficient_plus", "eis_coefficient_minus",
    "eisenstein_series_plus", "numeric_limit_oracle", "RecurrenceViolation", "FitFailure",
    "PoleAtCenter", "fit_generating_function", "dirichlet_L_at_1",
]
