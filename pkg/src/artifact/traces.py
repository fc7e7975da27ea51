"""Both sides of the double trace evaluation formulas.

Analytic side: stabilizer-weighted sums of truncated Green's function values
over pairs of special points. Algebraic side: exact constant terms of
f_{P+N} times a Rankin-Cohen bracket of the unary theta series of P with
either the Eisenstein preimage (untwisted) or an ingested cusp form preimage
(partially twisted).

Normalization of the untwisted formula, with w = 1 - 2n the weight of f:

    1/2 sum_{(m,mu)} m^(n-1/2) a_f(-m, mu) tr0_{m',mu'} tr_{m,mu}(G_2n)
        = 4^n pi / binom(2n, n) * tr0_{m',mu'}(1) * CT(f_{P+N} [Theta_P, E+]_n)
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources

from sympy import bernoulli, divisors, Rational, symbols

from .arith import SymbolicScalar, fundamental_part, kronecker
from .eisenstein import TernaryLattice, eis_coefficient_plus, eisenstein_series_plus
from .hermitian import (
    HermForm, chi_D, enumerate_classes, special_point, trace_functional, valid_index,
)
from .hyperbolic import green_function
from .modforms import (
    HermitianGroup, QSeries, constant_term, kappa_kernel, rankin_cohen, restrict_to_sublattice,
    split_lattice, theta_series,
)
from .quadfield import QuadInt, negate_label


class SingularIndex(ValueError):
    pass


class MissingVarthetaData(LookupError):
    pass


class UnderdeterminedSystem(ValueError):
    pass


class UnsupportedPrincipalPart(ValueError):
    pass


@dataclass(frozen=True)
class PrincipalPart:
    """Principal part sum a_f(-m, mu) q^-m e_mu of a form of weight 1 - 2n."""
    D: int
    n: int
    entries: tuple  # ((m, mu, coefficient), ...)

    @staticmethod
    def symmetric(D: int, n: int, items) -> "PrincipalPart":
        """From (m, mu, lam) meaning lam * q^-m (e_mu + e_-mu)."""
        coeffs: dict = {}
        for m, mu, lam in items:
            for lab in (tuple(mu), negate_label(D, mu)):
                key = (Fraction(m), lab)
                coeffs[key] = coeffs.get(key, Fraction(0)) + Fraction(lam)
        return PrincipalPart(D, n, tuple(sorted((m, mu, c) for (m, mu), c in coeffs.items() if c)))

    @property
    def weight(self) -> int:
        return 1 - 2 * self.n

    @property
    def cap(self) -> Fraction:
        return max((m for m, _, _ in self.entries), default=Fraction(0))

    def check(self):
        seen = {(m, mu): c for m, mu, c in self.entries}
        for (m, mu), c in seen.items():
            if m <= 0 or not valid_index(self.D, m, mu):
                raise ValueError(f"invalid index ({m}, {mu})")
            if seen.get((m, negate_label(self.D, mu))) != c:
                raise ValueError("principal part is not symmetric under mu -> -mu")
        return self

    def check_no_singularity(self, mprime, muprime):
        mprime = Fraction(mprime)
        seen = {(m, mu) for m, mu, _ in self.entries}
        for m, mu, _ in self.entries:
            r2 = m / mprime
            r = math.isqrt(r2.numerator) if r2.denominator == 1 else 0
            if r and r * r == r2:
                from .quadfield import coset_label, label_element
                if coset_label(label_element(self.D, muprime) * r) == mu and (m, mu) in seen:
                    raise SingularIndex(f"a_f(-{m}, {mu}) != 0 meets the trace index {mprime}")

    def as_qseries(self, constant=None) -> QSeries:
        group = HermitianGroup(self.D)
        terms = {(mu, -m): c for m, mu, c in self.entries}
        if constant is not None and constant != 0:
            terms[((0, 0), Fraction(0))] = constant
        return QSeries(group, terms, Fraction(self.weight), "rho_bar").check()


def _prefactor(n: int) -> SymbolicScalar:
    return SymbolicScalar.pi(1, Fraction(4 ** n, math.comb(2 * n, n)))


def _x0(D: int, mprime, muprime, x0=None) -> HermForm:
    classes = enumerate_classes(D, mprime, muprime, primitive=True)
    if not len(classes):
        raise ValueError(f"no primitive classes of index ({mprime}, {muprime})")
    if x0 is None:
        return classes.classes[0].form
    return x0


@lru_cache(maxsize=None)
def _split(X0: HermForm):
    return split_lattice(X0)


@lru_cache(maxsize=None)
def _eisenstein(gram: tuple, cap: Fraction) -> QSeries:
    return eisenstein_series_plus(TernaryLattice(gram), cap)


def _tr0_one(D, mprime, muprime) -> Fraction:
    return trace_functional(lambda P: 1, D, mprime, muprime, "primitive")


def double_trace_rhs(D: int, pp: PrincipalPart, mprime, muprime=(0, 0), x0=None) -> SymbolicScalar:
    """Constant-term side of the untwisted formula, through the bracket of q-series."""
    pp.check()
    pp.check_no_singularity(mprime, muprime)
    X0 = _x0(D, mprime, muprime, x0)
    split = _split(X0)
    cap = pp.cap
    theta = theta_series(split.P_gram, cap)
    eis = _eisenstein(split.N_minus_gram, cap)
    bracket = rankin_cohen(theta, eis, pp.n)
    f = restrict_to_sublattice(pp.as_qseries(), split)
    ct = constant_term(f, bracket)
    out = _prefactor(pp.n) * _tr0_one(D, mprime, muprime) * ct
    unexpected = {t.arg for t in out.tags() if t.kind == "L"} - predicted_discriminants(D, pp, mprime)
    if unexpected:
        raise ArithmeticError(f"L-values at unpredicted discriminants {sorted(unexpected)}")
    return out


def double_trace_rhs_kappa(D: int, pp: PrincipalPart, mprime, muprime=(0, 0), x0=None) -> SymbolicScalar:
    """Same quantity through the kernel kappa_{m,n}(l) and single Eisenstein coefficients."""
    pp.check()
    X0 = _x0(D, mprime, muprime, x0)
    split = _split(X0)
    lat = TernaryLattice(split.N_minus_gram)
    theta = theta_series(split.P_gram, pp.cap)
    total = SymbolicScalar()
    for m, mu, coeff in pp.entries:
        for alpha, beta in split.fiber_over(mu):
            for (lab, ell), r in theta.terms.items():
                if lab != alpha or ell > m:
                    continue
                k = kappa_kernel(m, pp.n, ell)
                if k == 0:
                    continue
                total = total + eis_coefficient_plus(lat, m - ell, beta).value * (coeff * r * k)
    return SymbolicScalar.pi(1, _tr0_one(D, mprime, muprime)) * total


def lhs_weights(D: int, pp: PrincipalPart, mprime, muprime=(0, 0), twisted: bool = False) -> list:
    """[(X, Y, weight)] with LHS = sum weight * G_2n(P_X, P_Y); weights are SymbolicScalars."""
    out = []
    if twisted:
        xs = [(e.form, Fraction(chi_D(e.form), e.stab))
              for e in enumerate_classes(D, Fraction(mprime) * abs(D), (0, 0), primitive=True) if chi_D(e.form)]
    else:
        xs = [(e.form, Fraction(1, e.stab)) for e in enumerate_classes(D, mprime, muprime, primitive=True)]
    for m, mu, coeff in pp.entries:
        mw = SymbolicScalar.sqrt(m) * (m ** pp.n / m)  # m^(n - 1/2)
        for e in enumerate_classes(D, m, mu, primitive=False):
            for X, wx in xs:
                out.append((X, e.form, mw * (Fraction(1, 2) * coeff * wx / e.stab)))
    return out


@dataclass
class LhsValue:
    value: float
    bound: float
    terms: list = field(default_factory=list)


def double_trace_lhs(D: int, pp: PrincipalPart, mprime, muprime=(0, 0), twisted: bool = False,
                     T: float = 400.0, extrapolate: bool = True) -> LhsValue:
    """Weighted sum of truncated Green's function values at s = 2n."""
    s = 2 * pp.n
    total, bound, terms = [], 0.0, []
    for X, Y, w in lhs_weights(D, pp, mprime, muprime, twisted):
        g = green_function(special_point(X), special_point(Y), s, T=T, extrapolate=extrapolate, D=D)
        wf = float(w.numeric_eval())
        total.append(wf * g.value)
        bound += abs(wf) * _green_bound(g)
        terms.append({"X": X.to_json(), "Y": Y.to_json(), "weight": str(w), "green": g.value})
    return LhsValue(math.fsum(total), bound, terms)


def _green_bound(g) -> float:
    if not g.extrapolated:
        return g.tail_estimate
    last = g.partial_sums[g.truncation_bound]
    # extrapolation error is well below the size of the correction it applies
    return abs(g.value - last)


# ------------------------------------------------------------ twisted side

def scalar_eisenstein_coefficient(D: int, k: int, N: int) -> Fraction:
    """N-th coefficient of the plus-space Eisenstein series of odd weight k and
    character chi_D at level |D|, normalized to constant term 1."""
    f = abs(D)
    x = symbols("x")
    B = Rational(f) ** (k - 1) * sum(kronecker(D, a) * bernoulli(k, x).subs(x, Rational(a, f)) for a in range(1, f + 1))
    B = Fraction(int(B.p), int(B.q))
    s = sum(d ** (k - 1) * (kronecker(D, d) - kronecker(D, N // d)) for d in divisors(N))
    return -Fraction(2 * k) / B * s


def constant_term_of_f(pp: PrincipalPart) -> Fraction:
    """a_f(0, 0) from the vanishing of CT(f * E_{1+2n}); only mu = 0 indices are covered."""
    total = Fraction(0)
    for m, mu, coeff in pp.entries:
        if tuple(mu) != (0, 0):
            raise UnsupportedPrincipalPart("Eisenstein coefficients are only available on the zero coset")
        N = m * abs(pp.D)
        assert N.denominator == 1
        total += coeff * scalar_eisenstein_coefficient(pp.D, 1 + 2 * pp.n, int(N))
    return -total


# the tables give a preimage of the full cusp form, the formula needs one of half of it
TABLE_SCALE = Fraction(1, 2)


def _data_files() -> list:
    base = resources.files("artifact") / "data"
    return [json.loads(p.read_text()) for p in base.iterdir() if p.name.endswith(".json")]


def load_vartheta(D: int, mprime) -> dict:
    for d in _data_files():
        if d.get("disc") == D and Fraction(d.get("mprime")) == Fraction(mprime):
            return d
    raise MissingVarthetaData(f"no ingested preimage expansion for D={D}, m'={mprime}")


def _herm_from_coset(triple) -> HermForm:
    x, y, z = (Fraction(t) for t in triple)
    # coset (x, y, z) = (u/8, v/2, w/2) is the form [u/2, (v + i w)/2, -u/8]
    return HermForm(4 * x, QuadInt.gaussian(y, z), -x)


def vartheta_series(split, data: dict) -> QSeries:
    terms: dict = {}
    for ser in data["series"]:
        for comp in ser["components"]:
            lab = split.n_label_of_form(_herm_from_coset(comp["coset"]))
            for t in ser["terms"]:
                key = (lab, Fraction(t["exp"]))
                terms[key] = terms.get(key, 0) + TABLE_SCALE * comp["sign"] * Fraction(t["coeff"])
    return QSeries(split.N_group, terms, Fraction(1, 2), "rho_bar").check()


def twisted_partial_rhs(D: int, pp: PrincipalPart, mprime, data: dict | None = None) -> SymbolicScalar:
    pp.check()
    data = data or load_vartheta(D, mprime)
    x0 = data["x0"]
    X0 = HermForm.gaussian(x0["a"], x0["b"][0], x0["b"][1], x0["c"])
    split = _split(X0)
    for m, mu, _ in pp.entries:
        if any(r * r * Fraction(mprime) * abs(D) == m for r in range(1, 10)) and tuple(mu) == (0, 0):
            raise SingularIndex(f"a_f(-{m}, 0) meets the twisted trace index")
    vt = vartheta_series(split, data)
    lowest = min(e for _, e in vt.terms)
    cap = pp.cap - min(lowest, 0)
    top = max(e for _, e in vt.terms)
    if top < pp.cap + max(-lowest, 0):
        raise MissingVarthetaData("ingested expansion is too short for this principal part")
    theta = theta_series(split.P_gram, cap)
    bracket = rankin_cohen(theta, vt, pp.n)
    f = restrict_to_sublattice(pp.as_qseries(constant_term_of_f(pp)), split)
    support = {lab for lab, _ in f.terms}
    if any(e < 0 and lab in support for lab, e in bracket.terms):
        raise UnsupportedPrincipalPart("bracket has negative exponents where f has unknown coefficients")
    ct = constant_term(f, bracket)
    tr0 = trace_functional(lambda P: 1, D, Fraction(mprime) * abs(D), (0, 0), "primitive")
    return _prefactor(pp.n) * (chi_D(X0) * tr0) * ct



def individual_value(sum_rhs: SymbolicScalar, diff_rhs: SymbolicScalar) -> tuple:
    """(first, second) from first + second and first - second."""
    if sum_rhs is None or diff_rhs is None:
        raise UnderdeterminedSystem("need both the sum and the difference")
    return (sum_rhs + diff_rhs) / 2, (sum_rhs - diff_rhs) / 2


# ------------------------------------------------------- predictions

def predicted_discriminants(D: int, pp: PrincipalPart, mprime) -> set:
    """Fundamental parts of (4 m m' d^2 - t^2)|D| over d <= |D| and admissible t."""
    out = set()
    for m, _, _ in pp.entries:
        for d in range(1, abs(D) + 1):
            base = 4 * m * Fraction(mprime) * d * d
            t = 0
            while t * t < base:
                v = (base - t * t) * abs(D)
                if v.denominator == 1 and math.isqrt(int(v)) ** 2 != int(v):
                    out.add(fundamental_part(int(v)))
                t += 1
    return out


# ------------------------------------------------------------ registry

@dataclass(frozen=True)
class Identity:
    id: str
    kind: str  # untwisted, twisted, individual, trace_zero
    n: int = 1
    display_scale: Fraction = Fraction(1)  # displayed quantity = scale * LHS of the trace formula
    description: str = ""
    tolerance: float = 0.01


def _half_det_pp(n):
    return PrincipalPart.symmetric(-4, n, [(Fraction(1, 2), (1, 1), 1)])


def _unit_coset_pp(n):
    return PrincipalPart.symmetric(-4, n, [(1, (0, 0), 1)])


REGISTRY = {
    "ex1_n1": Identity("ex1_n1", "untwisted", 1, Fraction(96), "G_2(j, (1+i)/2 + j/sqrt2) / sqrt(1/2)"),
    "ex1_n2": Identity("ex1_n2", "untwisted", 2, Fraction(192), "G_4(j, (1+i)/2 + j/sqrt2) / sqrt(1/2)", 1e-3),
    "sec55_sum_n1": Identity("sec55_sum_n1", "untwisted", 1, Fraction(8), "G_2(j,2j) + G_2(j,(1+i)/2+j)"),
    "sec55_diff_n1": Identity("sec55_diff_n1", "twisted", 1, Fraction(8), "G_2(j,2j) - G_2(j,(1+i)/2+j)"),
    "sec55_g2_individual": Identity("sec55_g2_individual", "individual", 1, Fraction(1), "G_2(j,2j)"),
    "sec55_sum_n2": Identity("sec55_sum_n2", "untwisted", 2, Fraction(8), "G_4(j,2j) + G_4(j,(1+i)/2+j)", 1e-3),
    "sec55_diff_n2": Identity("sec55_diff_n2", "twisted", 2, Fraction(8), "G_4(j,2j) - G_4(j,(1+i)/2+j)", 1e-3),
    "sec55_g4_individual": Identity("sec55_g4_individual", "individual", 2, Fraction(1), "G_4(j,2j)", 1e-3),
    "twisted_trace_zero": Identity("twisted_trace_zero", "trace_zero", 0, Fraction(1),
                                   "tr_{m|D|, chi_D}(1) for m = 1, 2, 3", 0.0),
}


@dataclass
class VerificationReport:
    id: str
    description: str
    lhs_numeric: float
    lhs_bound: float
    rhs_symbolic: SymbolicScalar
    rhs_numeric: float
    abs_err: float
    rel_err: float
    tolerance: float
    passed: bool
    runtime: float
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"id": self.id, "description": self.description, "lhs_numeric": self.lhs_numeric,
                "lhs_bound": self.lhs_bound, "rhs_symbolic": str(self.rhs_symbolic),
                "rhs_terms": self.rhs_symbolic.to_json(), "rhs_numeric": self.rhs_numeric,
                "abs_err": self.abs_err, "rel_err": self.rel_err, "tolerance": self.tolerance,
                "pass": self.passed, "runtime": round(self.runtime, 3), "details": self.details}

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.id}: lhs={self.lhs_numeric:.8g} rhs={self.rhs_numeric:.8g} "
                f"({self.rhs_symbolic}) rel_err={self.rel_err:.2e} tol={self.tolerance:g}")


def identity_rhs(identity_id: str) -> SymbolicScalar:
    """Exact right-hand side of a registry identity in its displayed normalization."""
    ident = REGISTRY[identity_id]
    if identity_id.startswith("ex1"):
        return double_trace_rhs(-4, _half_det_pp(ident.n), 1, (0, 0)) * ident.display_scale
    if ident.kind == "untwisted":
        return double_trace_rhs(-4, _unit_coset_pp(ident.n), 4, (0, 0)) * ident.display_scale
    if ident.kind == "twisted":
        return twisted_partial_rhs(-4, _unit_coset_pp(ident.n), 1) * ident.display_scale
    if ident.kind == "individual":
        s = identity_rhs(f"sec55_sum_n{ident.n}")
        d = identity_rhs(f"sec55_diff_n{ident.n}")
        return individual_value(s, d)[0]
    return SymbolicScalar()


def _identity_lhs(ident: Identity, T: float) -> LhsValue:
    if ident.id.startswith("ex1"):
        lv = double_trace_lhs(-4, _half_det_pp(ident.n), 1, (0, 0), T=T)
    elif ident.kind in ("untwisted", "twisted"):
        lv = double_trace_lhs(-4, _unit_coset_pp(ident.n), 4 if ident.kind == "untwisted" else 1, (0, 0),
                              twisted=ident.kind == "twisted", T=T)
    else:
        from .hyperbolic import Point3
        g = green_function(Point3(0j, 1.0), Point3(0j, 2.0), 2 * ident.n, T=T, extrapolate=True)
        return LhsValue(g.value, _green_bound(g), [])
    scale = float(ident.display_scale)
    return LhsValue(lv.value * scale, lv.bound * scale, lv.terms)


def verify(identity_id: str, T: float = 400.0) -> VerificationReport:
    if identity_id not in REGISTRY:
        raise KeyError(f"unknown identity {identity_id!r}; known: {sorted(REGISTRY)}")
    ident = REGISTRY[identity_id]
    start = time.perf_counter()
    if ident.kind == "trace_zero":
        values = {m: trace_functional(lambda P: 1, -4, 4 * m, (0, 0), "twisted") for m in (1, 2, 3)}
        ok = all(v == 0 for v in values.values())
        return VerificationReport(ident.id, ident.description, 0.0, 0.0, SymbolicScalar(), 0.0, 0.0, 0.0,
                                  0.0, ok, time.perf_counter() - start,
                                  {"traces": {str(4 * m): str(v) for m, v in values.items()}})
    rhs = identity_rhs(identity_id)
    rhs_num = float(rhs.numeric_eval())
    lhs = _identity_lhs(ident, T)
    err = abs(lhs.value - rhs_num)
    rel = err / abs(rhs_num) if rhs_num else err
    return VerificationReport(ident.id, ident.description, lhs.value, lhs.bound, rhs, rhs_num, err, rel,
                              ident.tolerance, rel <= ident.tolerance, time.perf_counter() - start,
                              {"T": T, "terms": lhs.terms})


__all__ = [
    "PrincipalPart", "double_trace_rhs", "double_trace_rhs_kappa", "double_trace_lhs", "twisted_partial_rhs",
    "individual_value", "verify", "VerificationReport", "REGISTRY", "identity_rhs", "load_vartheta",
    "vartheta_series", "scalar_eisenstein_coefficient", "constant_term_of_f", "predicted_discriminants",
    "lhs_weights", "SingularIndex", "MissingVarthetaData", "UnderdeterminedSystem",
]
