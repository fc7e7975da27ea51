"""Exact arithmetic in an imaginary quadratic field K = Q(sqrt(D)).

Elements are stored as x + y*omega with omega = (D + sqrt(D))/2 and
rational coordinates, so O_D is exactly the set with integral x, y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .arith import is_fundamental_discriminant


class DiscMismatch(ValueError):
    pass


@dataclass(frozen=True)
class QuadInt:
    x: Fraction
    y: Fraction
    disc: int

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))

    @staticmethod
    def from_sqrt(D: int, rational_part, sqrt_coeff) -> "QuadInt":
        """rational_part + sqrt_coeff * sqrt(D)."""
        sc = Fraction(sqrt_coeff)
        # sqrt(D) = 2 omega - D
        return QuadInt(Fraction(rational_part) - D * sc, 2 * sc, D)

    @staticmethod
    def gaussian(re, im) -> "QuadInt":
        """re + im * i in Q(i)."""
        return QuadInt.from_sqrt(-4, re, Fraction(im) / 2)

    @staticmethod
    def omega(D: int) -> "QuadInt":
        return QuadInt(0, 1, D)

    @staticmethod
    def rational(D: int, q) -> "QuadInt":
        return QuadInt(q, 0, D)

    def _check(self, other: "QuadInt"):
        if self.disc != other.disc:
            raise DiscMismatch(f"{self.disc} vs {other.disc}")

    def _coerce(self, other) -> "QuadInt":
        if isinstance(other, QuadInt):
            self._check(other)
            return other
        return QuadInt(Fraction(other), 0, self.disc)

    def __add__(self, other):
        other = self._coerce(other)
        return QuadInt(self.x + other.x, self.y + other.y, self.disc)

    __radd__ = __add__

    def __neg__(self):
        return QuadInt(-self.x, -self.y, self.disc)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        D = self.disc
        # omega^2 = D*omega - (D^2 - D)/4
        c = Fraction(D * D - D, 4)
        yy = self.y * other.y
        return QuadInt(self.x * other.x - yy * c,
                       self.x * other.y + self.y * other.x + D * yy, D)

    __rmul__ = __mul__

    def conj(self) -> "QuadInt":
        # conj(omega) = D - omega
        return QuadInt(self.x + self.disc * self.y, -self.y, self.disc)

    def norm(self) -> Fraction:
        D = self.disc
        return self.x * self.x + D * self.x * self.y + Fraction(D * D - D, 4) * self.y * self.y

    def trace(self) -> Fraction:
        return 2 * self.x + self.disc * self.y

    def inverse(self) -> "QuadInt":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        c = self.conj()
        return QuadInt(c.x / n, c.y / n, self.disc)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def times_sqrt_disc(self) -> "QuadInt":
        return self * QuadInt(-self.disc, 2, self.disc)

    def in_inverse_different(self) -> bool:
        return self.times_sqrt_disc().is_integral()

    def real_part(self) -> Fraction:
        return self.x + Fraction(self.disc, 2) * self.y

    def sqrt_part(self) -> Fraction:
        """Coefficient of sqrt(D)."""
        return self.y / 2

    def to_complex(self) -> complex:
        return complex(float(self.real_part()), float(self.sqrt_part()) * math.sqrt(-self.disc))

    def __repr__(self):
        re, sq = self.real_part(), self.sqrt_part()
        if self.disc == -4:
            return f"({re})+({2 * sq})i"
        return f"({re})+({sq})sqrt({self.disc})"


@lru_cache(maxsize=None)
def different_exponent(D: int) -> int:
    """Smallest e > 0 with e * (inverse different) contained in O_D."""
    inv_sqrt = QuadInt.from_sqrt(D, 0, Fraction(1, D))
    gens = (inv_sqrt, inv_sqrt * QuadInt.omega(D))
    for e in range(1, abs(D) + 1):
        if all((g * e).is_integral() for g in gens):
            return e
    raise AssertionError("unreachable for a fundamental discriminant")


def coset_label(b: QuadInt) -> tuple[int, int]:
    """Label of b + O_D in the inverse different modulo O_D."""
    if not b.in_inverse_different():
        raise ValueError(f"{b} is not in the inverse different")
    e = different_exponent(b.disc)
    return (int(b.x * e) % e, int(b.y * e) % e)


def label_element(D: int, label: tuple[int, int]) -> QuadInt:
    e = different_exponent(D)
    return QuadInt(Fraction(label[0], e), Fraction(label[1], e), D)


def negate_label(D: int, label: tuple[int, int]) -> tuple[int, int]:
    e = different_exponent(D)
    return (-label[0] % e, -label[1] % e)


@lru_cache(maxsize=None)
def discriminant_group_reps(D: int) -> tuple[tuple[int, int], ...]:
    """Labels of the |D| cosets of the inverse different modulo O_D."""
    if D >= 0 or not is_fundamental_discriminant(D):
        raise ValueError(f"need a negative fundamental discriminant, got {D}")
    e = different_exponent(D)
    labels = []
    for u in range(e):
        for v in range(e):
            if label_element(D, (u, v)).in_inverse_different():
                labels.append((u, v))
    assert len(labels) == -D
    return tuple(labels)


def coset_norm_mod1(D: int, label: tuple[int, int]) -> Fraction:
    """norm(b) mod 1 for b in the coset."""
    return label_element(D, label).norm() % 1


def reduced_basis_generator(D: int) -> complex:
    """omega0 = (delta + sqrt(D))/2 with delta = D mod 2; O_D = Z + Z*omega0."""
    return complex((D % 2) / 2, math.sqrt(-D) / 2)


def to_reduced_coords(z: QuadInt) -> tuple[Fraction, Fraction]:
    """Coordinates (u, v) with z = u + v*omega0."""
    # omega = omega0 + (D - delta)/2
    return z.x + z.y * Fraction(z.disc - z.disc % 2, 2), z.y


def from_reduced_coords(D: int, u, v) -> QuadInt:
    return QuadInt(Fraction(u) - Fraction(v) * Fraction(D - D % 2, 2), v, D)


def nearest_integer(z: QuadInt) -> QuadInt:
    """An element of O_D nearest to z (exact rounding)."""
    u, v = to_reduced_coords(z)
    delta = z.disc % 2
    v0 = math.floor(v + Fraction(1, 2))
    u0 = math.floor(u + (v - v0) * Fraction(delta, 2) + Fraction(1, 2))
    return from_reduced_coords(z.disc, u0, v0)


def units(D: int) -> list[QuadInt]:
    if D == -4:
        return [QuadInt.gaussian(*t) for t in ((1, 0), (0, 1), (-1, 0), (0, -1))]
    if D == -3:
        w = from_reduced_coords(D, 0, 1)
        out, cur = [], QuadInt.rational(D, 1)
        for _ in range(6):
            out.append(cur)
            cur = cur * w
        return out
    return [QuadInt.rational(D, 1), QuadInt.rational(D, -1)]


def xgcd(a: QuadInt, b: QuadInt) -> tuple[QuadInt, QuadInt, QuadInt]:
    """(g, s, t) with s*a + t*b = g, valid for norm-Euclidean D."""
    D = a.disc
    zero, one = QuadInt.rational(D, 0), QuadInt.rational(D, 1)
    r0, r1, s0, s1, t0, t1 = a, b, one, zero, zero, one
    while not r1.is_zero():
        q = nearest_integer(r0 / r1)
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
        if r1.norm() >= r0.norm() and not r1.is_zero():
            raise ValueError(f"D={D} is not norm-Euclidean")
    return r0, s0, t0


NORM_EUCLIDEAN = (-3, -4, -7, -8, -11)


__all__ = [
    "QuadInt", "DiscMismatch", "discriminant_group_reps", "coset_label", "label_element",
    "negate_label", "coset_norm_mod1", "nearest_integer", "units", "xgcd",
    "reduced_basis_generator", "to_reduced_coords", "from_reduced_coords", "NORM_EUCLIDEAN",
    "different_exponent",
]
