"""Binary Hermitian forms over O_D as vectors of the even lattice L of
signature (1,3), together with PSL2(O_D)-class enumeration.

A form X = [a, b, c] is the matrix [[a, b], [conj(b), c]]. The lattice L has
a, c in Z and b in O_D; its dual L' has b in the inverse different. The
quadratic form is Q(X) = det(X) = ac - N(b).

Reduction: every class has a representative whose c equals the minimum of
the form over O_D^2 minus 0, with b reduced modulo c*O_D to minimal norm.
The Hermite constant in dimension 4 bounds that minimum by
sqrt(det * |D| / 2), which makes enumeration provably complete.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

from sympy import factorint, divisors

from .arith import kronecker
from .hyperbolic import Point3
from .quadfield import (
    QuadInt, coset_label, different_exponent, discriminant_group_reps, from_reduced_coords, label_element,
    nearest_integer, to_reduced_coords, units, xgcd, NORM_EUCLIDEAN, negate_label,
)


class ClosureFailure(RuntimeError):
    pass


class UnsupportedDiscriminant(ValueError):
    pass


@dataclass(frozen=True)
class HermForm:
    a: Fraction
    b: QuadInt
    c: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "c", Fraction(self.c))

    @property
    def disc(self) -> int:
        return self.b.disc

    @staticmethod
    def gaussian(a, b_re, b_im, c) -> "HermForm":
        return HermForm(a, QuadInt.gaussian(b_re, b_im), c)

    def det(self) -> Fraction:
        return self.a * self.c - self.b.norm()

    def bilinear(self, other: "HermForm") -> Fraction:
        return self.a * other.c + other.a * self.c - (self.b * other.b.conj()).trace()

    def is_positive(self) -> bool:
        return self.a > 0 and self.det() > 0

    def in_lattice(self) -> bool:
        return self.a.denominator == 1 and self.c.denominator == 1 and self.b.is_integral()

    def in_dual(self) -> bool:
        return self.a.denominator == 1 and self.c.denominator == 1 and self.b.in_inverse_different()

    def coset(self) -> tuple[int, int]:
        return coset_label(self.b)

    def content(self) -> int:
        """Largest integer r with X/r in L'."""
        beta = self.b.times_sqrt_disc()
        return math.gcd(int(self.a), int(self.c), int(beta.x), int(beta.y))

    def is_primitive(self) -> bool:
        return self.content() == 1

    def scale(self, r) -> "HermForm":
        return HermForm(self.a * r, self.b * Fraction(r), self.c * r)

    def __neg__(self):
        return self.scale(-1)

    def value(self, u: QuadInt, v: QuadInt) -> Fraction:
        """a N(u) + tr(b u conj(v)) + c N(v)."""
        return self.a * u.norm() + (self.b * u * v.conj()).trace() + self.c * v.norm()

    def key(self) -> tuple:
        """Ordering used to pick canonical representatives."""
        return (self.c, self.b.norm(), -self.b.real_part(), -self.b.sqrt_part(), self.a)

    def __repr__(self):
        return f"[{self.a}, {self.b!r}, {self.c}]"

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": [str(self.b.x), str(self.b.y)], "c": str(self.c)}


@dataclass(frozen=True)
class GammaElement:
    alpha: QuadInt
    beta: QuadInt
    gamma: QuadInt
    delta: QuadInt

    def __post_init__(self):
        if self.alpha * self.delta - self.beta * self.gamma != QuadInt.rational(self.alpha.disc, 1):
            raise ValueError("determinant must be 1")

    @staticmethod
    def from_ints(D: int, entries) -> "GammaElement":
        return GammaElement(*(e if isinstance(e, QuadInt) else QuadInt.rational(D, e) for e in entries))

    def __matmul__(self, other: "GammaElement") -> "GammaElement":
        return GammaElement(self.alpha * other.alpha + self.beta * other.gamma,
                            self.alpha * other.beta + self.beta * other.delta,
                            self.gamma * other.alpha + self.delta * other.gamma,
                            self.gamma * other.beta + self.delta * other.delta)

    def inverse(self) -> "GammaElement":
        return GammaElement(self.delta, -self.beta, -self.gamma, self.alpha)

    def canonical(self) -> tuple:
        """Hashable key identifying the element up to sign."""
        ents = (self.alpha, self.beta, self.gamma, self.delta)
        flat = tuple(q for e in ents for q in (e.x, e.y))
        neg = tuple(-q for q in flat)
        return min(flat, neg)

    def act(self, X: HermForm) -> HermForm:
        al, be, ga, de = self.alpha, self.beta, self.gamma, self.delta
        a, b, c = X.a, X.b, X.c
        new_a = a * al.norm() + (al * b * be.conj()).trace() + c * be.norm()
        new_b = al * ga.conj() * a + al * b * de.conj() + be * b.conj() * ga.conj() + be * de.conj() * c
        new_c = a * ga.norm() + (ga * b * de.conj()).trace() + c * de.norm()
        return HermForm(new_a, new_b, new_c)

    def act_point(self, P: Point3) -> Point3:
        al, be, ga, de = (e.to_complex() for e in (self.alpha, self.beta, self.gamma, self.delta))
        den = abs(ga * P.z + de) ** 2 + abs(ga) ** 2 * P.r ** 2
        z = ((al * P.z + be) * (ga * P.z + de).conjugate() + al * ga.conjugate() * P.r ** 2) / den
        return Point3(z, P.r / den)


def generators(D: int) -> list[GammaElement]:
    """T_1, T_omega and S; these generate PSL2(O_D) for norm-Euclidean D."""
    one, zero = QuadInt.rational(D, 1), QuadInt.rational(D, 0)
    return [GammaElement(one, one, zero, one),
            GammaElement(one, QuadInt.omega(D), zero, one),
            GammaElement(zero, -one, one, zero)]


def _require_euclidean(D: int):
    if D not in NORM_EUCLIDEAN:
        raise UnsupportedDiscriminant(f"D={D} needs a Euclidean algorithm in O_D")


def special_point(X: HermForm) -> Point3:
    c = float(X.c)
    z = X.b.to_complex() / c
    return Point3(z, math.sqrt(float(X.det())) / abs(c))


# ------------------------------------------------------------- reduction

def short_vectors(X: HermForm, bound: Fraction):
    """All (u, v) in O_D^2, not both zero, with X[u, v] <= bound."""
    D = X.disc
    a, det = X.a, X.det()
    # X[u,v] = a |u + conj(b) v / a|^2 + (det/a) |v|^2
    out = []
    vmax = math.sqrt(float(bound * a / det)) + 1e-9
    for v in _lattice_disk(D, 0j, vmax):
        rest = bound - det / a * v.norm()
        if rest < 0:
            continue
        center = -(X.b.conj() * v).to_complex() / float(a)
        for u in _lattice_disk(D, center, math.sqrt(float(rest / a)) + 1e-9):
            if u.is_zero() and v.is_zero():
                continue
            if X.value(u, v) <= bound:
                out.append((u, v))
    return out


def _lattice_disk(D: int, center: complex, radius: float):
    """Elements of O_D within (slightly more than) radius of center."""
    h = math.sqrt(-D) / 2
    delta = D % 2
    vlo = math.floor((center.imag - radius) / h) - 1
    vhi = math.ceil((center.imag + radius) / h) + 1
    for v in range(vlo, vhi + 1):
        span = radius ** 2 - (center.imag - v * h) ** 2
        if span < -1e-9:
            continue
        s = math.sqrt(max(span, 0.0))
        re0 = center.real - v * delta / 2
        for u in range(math.floor(re0 - s) - 1, math.ceil(re0 + s) + 2):
            yield from_reduced_coords(D, u, v)


def _is_unit(z: QuadInt) -> bool:
    return z.norm() == 1


def _completion(u: QuadInt, v: QuadInt) -> GammaElement | None:
    """A matrix with bottom row (u, v), or None if u, v are not coprime."""
    g, s, t = xgcd(u, v)
    if not _is_unit(g):
        return None
    ginv = g.inverse()
    # p v - q u = 1 with p = t/g, q = -s/g
    return GammaElement(t * ginv, -s * ginv, u, v)


def _translate(X: HermForm, t: QuadInt) -> HermForm:
    b = X.b + t * X.c
    return HermForm((X.det() + b.norm()) / X.c, b, X.c)


def _reduce_b(X: HermForm) -> HermForm:
    """Translate so that b has minimal norm modulo c*O_D (ties by key)."""
    D = X.disc
    t0 = nearest_integer(-X.b / X.c)
    best = None
    u0, v0 = to_reduced_coords(t0)
    for du, dv in product(range(-2, 3), repeat=2):
        cand = _translate(X, from_reduced_coords(D, u0 + du, v0 + dv))
        if best is None or cand.key() < best.key():
            best = cand
    return best


def canonical_form(X: HermForm) -> HermForm:
    """Canonical representative of the class of a positive definite X."""
    _require_euclidean(X.disc)
    bound = min(X.a, X.c)
    vecs = short_vectors(X, bound)
    cmin = min(X.value(u, v) for u, v in vecs)
    best = None
    for u, v in vecs:
        if X.value(u, v) != cmin:
            continue
        g = _completion(u, v)
        if g is None:
            continue
        cand = _reduce_b(g.act(X))
        if best is None or cand.key() < best.key():
            best = cand
    return best


def stabilizer_elements(X: HermForm) -> list[GammaElement]:
    """All gamma in SL2(O_D) with gamma.X = X (both signs included)."""
    _require_euclidean(X.disc)
    out = []
    for u, v in short_vectors(X, X.c):
        if X.value(u, v) != X.c:
            continue
        g = _completion(u, v)
        if g is None:
            continue
        Y = g.act(X)
        t = (X.b - Y.b) / X.c
        if not t.is_integral():
            continue
        one, zero = QuadInt.rational(X.disc, 1), QuadInt.rational(X.disc, 0)
        out.append(GammaElement(one, t, zero, one) @ g)
    return out


def stabilizer_order(X: HermForm, check_closure: bool = True) -> int:
    """Order of the stabilizer of X in PSL2(O_D)."""
    elems = stabilizer_elements(X)
    keys = {g.canonical() for g in elems}
    if check_closure:
        for g in elems:
            if g.act(X) != X:
                raise ClosureFailure("element does not fix the form")
            for h in elems:
                if (g @ h).canonical() not in keys:
                    raise ClosureFailure("stabilizer set not closed under products")
    return len(keys)


# ---------------------------------------------------------- enumeration

@dataclass(frozen=True)
class ClassEntry:
    form: HermForm
    stab: int


@dataclass(frozen=True)
class ClassList:
    disc: int
    det: Fraction
    coset: tuple
    primitive: bool
    classes: tuple

    def __iter__(self):
        return iter(self.classes)

    def __len__(self):
        return len(self.classes)

    def to_json(self) -> dict:
        return {"disc": self.disc, "det": f"{self.det.numerator}/{self.det.denominator}",
                "coset": list(self.coset), "primitive": self.primitive,
                "classes": [{**e.form.to_json(), "stab": e.stab} for e in self.classes]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def from_json(d: dict) -> "ClassList":
        D = d["disc"]
        entries = tuple(ClassEntry(HermForm(Fraction(e["a"]), QuadInt(Fraction(e["b"][0]), Fraction(e["b"][1]), D),
                                            Fraction(e["c"])), int(e["stab"])) for e in d["classes"])
        return ClassList(D, Fraction(d["det"]), tuple(d["coset"]), bool(d["primitive"]), entries)


def covering_radius_sq(D: int) -> Fraction:
    if D % 4 == 0:
        return (1 + Fraction(-D, 4)) / 4
    return Fraction(1 - D, 4) ** 2 / (-D)


def valid_index(D: int, m, mu) -> bool:
    m = Fraction(m)
    if m <= 0 or (m * -D).denominator != 1:
        return False
    # Q(mu) = -N(b) mod 1
    return (m + label_element(D, mu).norm()) % 1 == 0


def enumerate_classes(D: int, m, mu=(0, 0), primitive: bool = False) -> ClassList:
    """Representatives and stabilizer orders of Gamma-classes of positive
    forms in L' with det m in coset mu."""
    return _enumerate_classes(D, Fraction(m), tuple(mu), primitive)


@lru_cache(maxsize=None)
def _enumerate_classes(D: int, m: Fraction, mu: tuple, primitive: bool) -> ClassList:
    _require_euclidean(D)
    if not valid_index(D, m, mu):
        return ClassList(D, m, mu, primitive, ())
    rho2 = covering_radius_sq(D)
    cmax = math.isqrt(int(m * -D / 2)) + 1
    base = label_element(D, mu)
    found = {}
    for c in range(1, cmax + 1):
        if Fraction(c * c) > m * -D / 2:
            break
        radius = math.sqrt(float(rho2)) * c + 1e-9
        for t in _lattice_disk(D, -base.to_complex(), radius):
            b = base + t
            if b.norm() > rho2 * c * c:
                continue
            a = (m + b.norm()) / c
            if a.denominator != 1:
                continue
            X = HermForm(a, b, c)
            if primitive and not X.is_primitive():
                continue
            Y = canonical_form(X)
            found[Y.key()] = Y
    entries = tuple(ClassEntry(Y, stabilizer_order(Y)) for _, Y in sorted(found.items()))
    return ClassList(D, m, mu, primitive, entries)


# --------------------------------------------------------------- traces

def chi_D(X: HermForm) -> int:
    """Genus character on forms with determinant divisible by a prime discriminant D."""
    D = X.disc
    ell = prime_of_discriminant(D)
    if not X.in_dual() or (X.det() / D).denominator != 1:
        return 0
    a, c = int(X.a), int(X.c)
    va = kronecker(D, a) if a % ell else None
    vc = kronecker(D, c) if c % ell else None
    if va is not None and vc is not None and va != vc:
        raise AssertionError(f"chi_D branches disagree on {X}")
    if va is not None:
        return va
    if vc is not None:
        return vc
    return 0


def scaled_discriminant_reps(D: int) -> list[HermForm]:
    """Representatives of L' / DL: a, c mod |D| and b in the inverse different mod D O_D."""
    e = different_exponent(D)
    n = abs(D)
    bs = [QuadInt(Fraction(s, e), Fraction(t, e), D) for s in range(e * n) for t in range(e * n)]
    bs = [b for b in bs if b.in_inverse_different()]
    return [HermForm(Fraction(a), b, Fraction(c)) for a in range(n) for c in range(n) for b in bs]


def twisting_vector(D: int) -> dict:
    """psi_D = sum chi_D(delta) e_delta over L'/DL, nonzero entries only."""
    prime_of_discriminant(D)
    out = {}
    for X in scaled_discriminant_reps(D):
        v = chi_D(X)
        if v:
            out[X] = v
    return out


def prime_of_discriminant(D: int) -> int:
    primes = list(factorint(abs(D)))
    if len(primes) != 1:
        raise UnsupportedDiscriminant(f"{D} is not a prime discriminant")
    return primes[0]


def _accumulate(values):
    vals = list(values)
    if all(isinstance(v, (int, Fraction)) for v in vals):
        return sum(vals, Fraction(0))
    return math.fsum(float(v) for v in vals)


def trace_functional(f, D: int, m, mu=(0, 0), variant: str = "plain"):
    """Stabilizer-weighted sum of f over special points of a class set.

    variant 'plain' sums over all classes of det m in coset mu, 'primitive'
    over primitive ones, 'twisted' over mu = 0 classes weighted by chi_D and
    'twisted_primitive' over the primitive ones among those.
    """
    if variant not in ("plain", "primitive", "twisted", "twisted_primitive"):
        raise ValueError(f"unknown trace variant {variant!r}")
    if variant.startswith("twisted"):
        cl = enumerate_classes(D, m, (0, 0), primitive=(variant == "twisted_primitive"))
        return _accumulate(Fraction(chi_D(e.form), e.stab) * f(special_point(e.form))
                           if chi_D(e.form) else 0 for e in cl)
    cl = enumerate_classes(D, m, mu, primitive=(variant == "primitive"))
    return _accumulate(_weighted(f(special_point(e.form)), e.stab) for e in cl)


def _weighted(value, stab: int):
    if isinstance(value, (int, Fraction)):
        return Fraction(value) / stab
    return value / stab


def _moebius(r: int) -> int:
    fac = factorint(r)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def primitive_trace_decomposition(D: int, m, mu=(0, 0)) -> dict:
    """Relations between plain and primitive traces.

    'expand': tr_{m,mu} = sum over (r, nu, sign) of sign * tr0_{m/r^2, nu}.
    'invert': tr0_{m,mu} = sum over (r, nu, sign) of sign * tr_{m/r^2, nu}.
    """
    m = Fraction(m)
    expand, invert = [], []
    n = m * -D
    if n.denominator != 1:
        raise ValueError("invalid index")
    for r in divisors(int(n)):
        if (n / (r * r)).denominator != 1 or n % (r * r):
            continue
        sub = m / (r * r)
        for nu in discriminant_group_reps(D):
            if _scale_label(D, nu, r) != tuple(mu) or not valid_index(D, sub, nu):
                continue
            expand.append((r, nu, 1))
            if _moebius(r):
                invert.append((r, nu, _moebius(r)))
    return {"expand": expand, "invert": invert}


def _scale_label(D: int, label, r: int) -> tuple:
    return coset_label(label_element(D, label) * r)


__all__ = [
    "HermForm", "GammaElement", "ClassList", "ClassEntry", "enumerate_classes", "stabilizer_order",
    "stabilizer_elements", "special_point", "chi_D", "trace_functional", "primitive_trace_decomposition",
    "canonical_form", "generators", "valid_index", "negate_label", "units", "ClosureFailure",
    "scaled_discriminant_reps", "twisting_vector",
]
