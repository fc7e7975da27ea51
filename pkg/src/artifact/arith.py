"""Elementary number theory: Kronecker and Hilbert symbols, discriminants,
L-values at s=1, fundamental units, class numbers, and exact symbolic scalars.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from sympy import factorint, isprime

WORKING_DPS = 30


class RoundingAmbiguous(ValueError):
    pass


def _to_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


# ---------------------------------------------------------------- symbols

def kronecker(D: int, n: int) -> int:
    """Generalized Kronecker symbol (D/n)."""
    if n == 0:
        return 1 if abs(D) == 1 else 0
    result = 1
    if n < 0:
        n = -n
        if D < 0:
            result = -result
    twos = (n & -n).bit_length() - 1
    n >>= twos
    if twos:
        if D % 2 == 0:
            return 0
        if twos % 2 == 1 and D % 8 in (3, 5):
            result = -result
    # Jacobi symbol (D/n) for odd n > 0
    a = D % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _squarefree_integer(x: Fraction) -> int:
    """Integer in the same rational square class as x."""
    x = _to_fraction(x)
    return x.numerator * x.denominator


def hilbert_symbol(a, b, p) -> int:
    """Hilbert symbol (a, b)_p; pass p = math.inf (or 'inf') for the real place."""
    a = _squarefree_integer(a)
    b = _squarefree_integer(b)
    if a == 0 or b == 0:
        raise ValueError("hilbert symbol needs nonzero arguments")
    if p in ("inf", math.inf, None):
        return -1 if (a < 0 and b < 0) else 1
    if not isprime(p):
        raise ValueError(f"place must be a prime or infinity, got {p}")

    def split(x):
        e = 0
        while x % p == 0:
            x //= p
            e += 1
        return e, x

    alpha, u = split(a)
    beta, v = split(b)
    if p == 2:
        def eps(t):
            return ((t - 1) // 2) % 2

        def omega(t):
            return ((t * t - 1) // 8) % 2

        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    sign = -1 if (alpha * beta * ((p - 1) // 2)) % 2 else 1
    lu = kronecker(u, p) ** beta
    lv = kronecker(v, p) ** alpha
    return sign * lu * lv


# ------------------------------------------------------------ discriminants

def is_fundamental_discriminant(d: int) -> bool:
    if d == 1:
        return True
    if d in (0,):
        return False
    if d % 4 == 1:
        return _squarefree(abs(d))
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    return all(e == 1 for e in factorint(n).values())


@dataclass(frozen=True)
class FundDiscFactorization:
    delta: int
    delta0: int
    f: int
    w: int
    wprime: int


def factor_discriminant(delta: int, bad_modulus: int, allow_negative: bool = False) -> FundDiscFactorization:
    """Write delta = delta0 * f^2 with delta0 fundamental and f = w * w'.

    w collects the part of f coprime to bad_modulus.
    """
    if delta == 0 or (delta < 0 and not allow_negative) or delta % 4 not in (0, 1):
        raise ValueError(f"not a {'nonzero' if allow_negative else 'positive'} discriminant: {delta}")
    f = 1
    core = 1 if delta > 0 else -1
    for p, e in factorint(abs(delta)).items():
        f *= p ** (e // 2)
        core *= p ** (e % 2)
    if core % 4 != 1:
        core *= 4
        f //= 2
    bad_primes = set(factorint(bad_modulus))
    w = 1
    for p, e in factorint(f).items():
        if p not in bad_primes:
            w *= p ** e
    return FundDiscFactorization(delta, core, f, w, f // w)


# ---------------------------------------------------------------- L-values

def dirichlet_L_at_1(delta0: int, dps: int = WORKING_DPS):
    """L(chi_delta0, 1) from the finite closed forms (character sums)."""
    if delta0 == 1:
        raise ValueError("L(chi_1, s) has a pole at s = 1")
    if not is_fundamental_discriminant(delta0):
        raise ValueError(f"{delta0} is not a fundamental discriminant")
    with mpmath.workdps(dps):
        if delta0 < 0:
            q = -delta0
            total = sum(kronecker(delta0, a) * a for a in range(1, q))
            return -mpmath.pi * total / mpmath.mpf(q) ** mpmath.mpf(1.5)
        q = delta0
        acc = mpmath.mpf(0)
        for a in range(1, q):
            chi = kronecker(delta0, a)
            if chi:
                acc += chi * mpmath.log(mpmath.sin(mpmath.pi * a / q))
        return -acc / mpmath.sqrt(q)


def fundamental_unit(delta0: int) -> tuple[tuple[int, int], int]:
    """Fundamental unit (x + y*sqrt(delta0))/2 and its norm.

    Found as the first convergent of the continued fraction of
    (b + sqrt(delta0))/2 that yields a unit.
    """
    if delta0 <= 1:
        raise ValueError("needs a real quadratic discriminant")
    b = delta0 % 2
    root = math.isqrt(delta0)
    # theta = (P + sqrt(delta0)) / Q, Q | delta0 - P^2
    P, Q = b, 2
    h1, h2 = 1, 0
    k1, k2 = 0, 1
    for _ in range(10 * delta0 + 100):
        if Q > 0:
            a = (P + root) // Q
        else:
            a = (-P - root - 1) // (-Q)
        h, k = a * h1 + h2, a * k1 + k2
        x, y = 2 * h - b * k, k
        norm4 = x * x - delta0 * y * y
        if norm4 in (4, -4):
            return (x, y), norm4 // 4
        h2, h1 = h1, h
        k2, k1 = k1, k
        P = a * Q - P
        Q = (delta0 - P * P) // Q
    raise RuntimeError("continued fraction did not produce a unit")


def totally_positive_unit(delta0: int) -> tuple[int, int]:
    """Smallest totally positive unit > 1 as (x, y) meaning (x + y*sqrt(delta0))/2."""
    (x, y), norm = fundamental_unit(delta0)
    if norm == 1:
        return x, y
    # ((x + y r)/2)^2 = ((x^2 + d y^2)/2 + x y r)/2
    return (x * x + delta0 * y * y) // 2, x * y


def class_number(delta0: int) -> int:
    if delta0 == 1 or not is_fundamental_discriminant(delta0):
        raise ValueError(f"bad discriminant {delta0}")
    if delta0 < 0:
        return _count_reduced_forms(delta0)
    (x, y), _ = fundamental_unit(delta0)
    with mpmath.workdps(WORKING_DPS):
        eps = (x + y * mpmath.sqrt(delta0)) / 2
        h = mpmath.sqrt(delta0) * dirichlet_L_at_1(delta0) / (2 * mpmath.log(eps))
        nearest = int(mpmath.nint(h))
        if abs(h - nearest) >= 0.01:
            raise RoundingAmbiguous(f"analytic class number {h} for {delta0}")
    return nearest


def _count_reduced_forms(d: int) -> int:
    count = 0
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a:
                continue
            if c == a and b < 0:
                continue
            count += 1
        a += 1
    return count


def fundamental_part(n: int) -> int:
    """Fundamental discriminant of Q(sqrt(n)) for a positive non-square n."""
    core = 1
    for p, e in factorint(n).items():
        if e % 2:
            core *= p
    return core if core % 4 == 1 else 4 * core


# ------------------------------------------------------- symbolic scalars

@dataclass(frozen=True, order=True)
class Tag:
    """Basis monomial: base constant times pi**pi_power times sqrt(radical).

    kind is 'one', 'log' (log p, arg = p) or 'L' (L(chi_arg, 1)).
    """
    kind: str
    arg: int = 0
    pi_power: Fraction = Fraction(0)
    radical: int = 1

    def label(self) -> str:
        parts = []
        if self.kind == "log":
            parts.append(f"log({self.arg})")
        elif self.kind == "L":
            parts.append(f"L({self.arg})")
        if self.pi_power:
            parts.append("pi" if self.pi_power == 1 else f"pi^({self.pi_power})")
        if self.radical != 1:
            parts.append(f"sqrt({self.radical})")
        return "*".join(parts) if parts else "1"


ONE_TAG = Tag("one")


def _split_square(n: int) -> tuple[int, int]:
    """n = s^2 * r with r squarefree; returns (s, r)."""
    s, r = 1, 1
    for p, e in factorint(n).items():
        s *= p ** (e // 2)
        r *= p ** (e % 2)
    return s, r


@dataclass(frozen=True)
class SymbolicScalar:
    """Exact rational combination of tagged constants."""
    terms: tuple = field(default_factory=tuple)  # sorted ((Tag, Fraction), ...)

    @staticmethod
    def from_dict(d: dict) -> "SymbolicScalar":
        return SymbolicScalar(tuple(sorted((t, Fraction(c)) for t, c in d.items() if c != 0)))

    @staticmethod
    def rational(q) -> "SymbolicScalar":
        return SymbolicScalar.from_dict({ONE_TAG: _to_fraction(q)})

    @staticmethod
    def pi(power=1, coeff=1) -> "SymbolicScalar":
        return SymbolicScalar.from_dict({Tag("one", 0, Fraction(power)): _to_fraction(coeff)})

    @staticmethod
    def log(p: int, coeff=1, pi_power=0) -> "SymbolicScalar":
        if len(factorint(p)) != 1 or sum(factorint(p).values()) != 1:
            raise ValueError(f"log tag needs a prime, got {p}")
        return SymbolicScalar.from_dict({Tag("log", p, Fraction(pi_power)): _to_fraction(coeff)})

    @staticmethod
    def lvalue(delta0: int, coeff=1, pi_power=0) -> "SymbolicScalar":
        if delta0 == 1 or not is_fundamental_discriminant(delta0):
            raise ValueError(f"L tag needs a fundamental discriminant != 1, got {delta0}")
        return SymbolicScalar.from_dict({Tag("L", delta0, Fraction(pi_power)): _to_fraction(coeff)})

    @staticmethod
    def sqrt(n) -> "SymbolicScalar":
        n = _to_fraction(n)
        if n < 0:
            raise ValueError("sqrt of a negative rational")
        if n == 0:
            return ZERO
        # sqrt(p/q) = sqrt(p q) / q
        s, r = _split_square(n.numerator * n.denominator)
        return SymbolicScalar.from_dict({Tag("one", 0, Fraction(0), r): Fraction(s, n.denominator)})

    def as_dict(self) -> dict:
        return dict(self.terms)

    def tags(self) -> set:
        return {t for t, _ in self.terms}

    def is_zero(self) -> bool:
        return not self.terms

    def rational_value(self) -> Fraction:
        d = self.as_dict()
        if set(d) - {ONE_TAG}:
            raise ValueError(f"{self} is not rational")
        return d.get(ONE_TAG, Fraction(0))

    def __add__(self, other):
        other = _lift(other)
        d = self.as_dict()
        for t, c in other.terms:
            d[t] = d.get(t, Fraction(0)) + c
        return SymbolicScalar.from_dict(d)

    __radd__ = __add__

    def __neg__(self):
        return SymbolicScalar(tuple((t, -c) for t, c in self.terms))

    def __sub__(self, other):
        return self + (-_lift(other))

    def __rsub__(self, other):
        return _lift(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return SymbolicScalar.from_dict({t: c * other for t, c in self.terms})
        other = _lift(other)
        d: dict = {}
        for t1, c1 in self.terms:
            for t2, c2 in other.terms:
                if t1.kind != "one" and t2.kind != "one":
                    raise ValueError("product of two transcendental tags is outside the basis")
                kind, arg = (t1.kind, t1.arg) if t1.kind != "one" else (t2.kind, t2.arg)
                s, r = _split_square(t1.radical * t2.radical)
                tag = Tag(kind, arg, t1.pi_power + t2.pi_power, r)
                d[tag] = d.get(tag, Fraction(0)) + c1 * c2 * s
        return SymbolicScalar.from_dict(d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (Fraction(1) / Fraction(other))
        other = _lift(other)
        if len(other.terms) != 1 or other.terms[0][0].kind != "one":
            raise ValueError("division only by a single algebraic-times-pi monomial")
        tag, c = other.terms[0]
        # 1/(c pi^k sqrt(r)) = sqrt(r) / (c r) * pi^-k
        inv = SymbolicScalar.from_dict({Tag("one", 0, -tag.pi_power, tag.radical): 1 / (c * tag.radical)})
        return self * inv

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymbolicScalar.rational(other)
        if not isinstance(other, SymbolicScalar):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def numeric_eval(self, dps: int = WORKING_DPS):
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            for t, c in self.terms:
                total += mpmath.mpf(c.numerator) / c.denominator * _tag_value(t, dps)
            return total

    def __float__(self):
        return float(self.numeric_eval())

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for t, c in self.terms:
            lab = t.label()
            if lab == "1":
                out.append(f"{c}")
            elif c == 1:
                out.append(lab)
            elif c == -1:
                out.append(f"-{lab}")
            else:
                out.append(f"{c}*{lab}")
        return " + ".join(out).replace("+ -", "- ")

    __repr__ = __str__

    def to_json(self) -> list:
        return [{"kind": t.kind, "arg": t.arg, "pi_power": str(t.pi_power),
                 "radical": t.radical, "coeff": str(c)} for t, c in self.terms]

    @staticmethod
    def from_json(items: list) -> "SymbolicScalar":
        d = {}
        for it in items:
            t = Tag(it["kind"], int(it["arg"]), Fraction(it["pi_power"]), int(it["radical"]))
            d[t] = d.get(t, Fraction(0)) + Fraction(it["coeff"])
        return SymbolicScalar.from_dict(d)


ZERO = SymbolicScalar()


def _lift(x) -> SymbolicScalar:
    if isinstance(x, SymbolicScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return SymbolicScalar.rational(x)
    raise TypeError(f"cannot combine SymbolicScalar with {type(x).__name__}")


def _tag_value(t: Tag, dps: int):
    if t.kind == "one":
        base = mpmath.mpf(1)
    elif t.kind == "log":
        base = mpmath.log(t.arg)
    else:
        base = dirichlet_L_at_1(t.arg, dps)
    if t.pi_power:
        base *= mpmath.pi ** (mpmath.mpf(t.pi_power.numerator) / t.pi_power.denominator)
    if t.radical != 1:
        base *= mpmath.sqrt(t.radical)
    return base
