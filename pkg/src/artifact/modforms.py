"""Discriminant groups, q-series over them, theta series, the splitting
L -> P + N attached to a special vector, Rankin-Cohen brackets and constant
terms, plus a numeric Siegel theta function.

Coset labels of a lattice with Gram matrix G are integer vectors k reduced
modulo G*Z^r; the label k stands for the dual vector G^{-1} k.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

import numpy as np
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from .arith import SymbolicScalar
from .quadfield import QuadInt, coset_label


class RepresentationMismatch(ValueError):
    pass


class NotPrimitive(ValueError):
    pass


def _frac_matrix_inverse(G) -> list[list[Fraction]]:
    inv = Matrix(G).inv()
    return [[Fraction(int(x.p), int(x.q)) for x in row] for row in inv.tolist()]


class DiscGroup:
    """The finite quadratic module L'/L of an even lattice with Gram matrix G."""

    def __init__(self, gram):
        self.gram = tuple(tuple(int(x) for x in row) for row in gram)
        self.rank = len(self.gram)
        for i in range(self.rank):
            if self.gram[i][i] % 2:
                raise ValueError("Gram matrix must have even diagonal")
        self.gram_inv = _frac_matrix_inverse(self.gram)
        H = hermite_normal_form(Matrix(self.gram))
        self._hnf = [[int(x) for x in row] for row in H.tolist()]
        assert all(self._hnf[i][j] == 0 for i in range(self.rank) for j in range(i))

    def __eq__(self, other):
        return isinstance(other, DiscGroup) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    def __repr__(self):
        return f"DiscGroup({self.gram})"

    def reduce(self, k) -> tuple:
        k = [int(x) for x in k]
        H = self._hnf
        for i in range(self.rank - 1, -1, -1):
            q = k[i] // H[i][i]
            if q:
                for r in range(i + 1):
                    k[r] -= q * H[r][i]
        return tuple(k)

    @cached_property
    def labels(self) -> tuple:
        ranges = [range(self._hnf[i][i]) for i in range(self.rank)]
        out = sorted({self.reduce(k) for k in product(*ranges)})
        assert len(out) == abs(int(Matrix(self.gram).det()))
        return tuple(out)

    def vector(self, label) -> tuple:
        """Dual vector G^{-1} k in lattice coordinates."""
        return tuple(sum(self.gram_inv[i][j] * label[j] for j in range(self.rank)) for i in range(self.rank))

    def label_of(self, vec) -> tuple:
        """Label of a dual vector given in lattice coordinates."""
        k = [sum(self.gram[i][j] * Fraction(vec[j]) for j in range(self.rank)) for i in range(self.rank)]
        if any(x.denominator != 1 for x in k):
            raise ValueError("vector is not in the dual lattice")
        return self.reduce(int(x) for x in k)

    def q_value(self, label) -> Fraction:
        """Q(gamma) mod 1."""
        return self.q_exact(label) % 1

    def q_exact(self, label) -> Fraction:
        v = self.vector(label)
        return Fraction(1, 2) * sum(Fraction(label[i]) * v[i] for i in range(self.rank))

    def bilinear(self, l1, l2) -> Fraction:
        v = self.vector(l2)
        return sum(Fraction(l1[i]) * v[i] for i in range(self.rank)) % 1

    def neg(self, label) -> tuple:
        return self.reduce(-x for x in label)

    def add(self, l1, l2) -> tuple:
        return self.reduce(a + b for a, b in zip(l1, l2))

    def order(self, label) -> int:
        v = self.vector(label)
        return math.lcm(*(x.denominator for x in v)) if v else 1

    def zero(self) -> tuple:
        return tuple(0 for _ in range(self.rank))


class DirectSum:
    """Orthogonal sum of discriminant groups, each with a sign on Q."""

    def __init__(self, parts, signs=None):
        self.parts = tuple(parts)
        self.signs = tuple(signs) if signs is not None else tuple(1 for _ in parts)

    def __eq__(self, other):
        return isinstance(other, DirectSum) and self.parts == other.parts and self.signs == other.signs

    def __hash__(self):
        return hash((self.parts, self.signs))

    def __repr__(self):
        return f"DirectSum({self.parts}, signs={self.signs})"

    @cached_property
    def labels(self) -> tuple:
        return tuple(product(*(p.labels for p in self.parts)))

    def q_value(self, label) -> Fraction:
        return sum((s * p.q_value(l) for p, s, l in zip(self.parts, self.signs, label)), Fraction(0)) % 1

    def neg(self, label) -> tuple:
        return tuple(p.neg(l) for p, l in zip(self.parts, label))

    def zero(self) -> tuple:
        return tuple(p.zero() for p in self.parts)


# ------------------------------------------------------------------ QSeries

def _as_scalar(v):
    return v if isinstance(v, SymbolicScalar) else SymbolicScalar.rational(v)


def _is_zero(v) -> bool:
    return v.is_zero() if isinstance(v, SymbolicScalar) else v == 0


@dataclass
class QSeries:
    """Finite Fourier expansion sum c(label, e) q^e e_label.

    rep 'rho' means exponents are congruent to Q(label) mod 1, 'rho_bar' to -Q(label).
    Coefficients are Fractions or SymbolicScalars.
    """
    group: object
    terms: dict = field(default_factory=dict)
    weight: Fraction = Fraction(0)
    rep: str = "rho"

    def __post_init__(self):
        self.weight = Fraction(self.weight)
        self.terms = {(lab, Fraction(e)): v for (lab, e), v in self.terms.items() if not _is_zero(v)}

    def check(self):
        sign = 1 if self.rep == "rho" else -1
        for (lab, e) in self.terms:
            if (e - sign * self.group.q_value(lab)) % 1:
                raise RepresentationMismatch(f"exponent {e} incompatible with coset {lab}")
        return self

    def coeff(self, label, exp):
        return self.terms.get((tuple(label), Fraction(exp)), 0)

    def __add__(self, other: "QSeries") -> "QSeries":
        if self.group != other.group or self.rep != other.rep:
            raise RepresentationMismatch("adding series of different types")
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out[k] + v if k in out else v
        return QSeries(self.group, out, self.weight, self.rep)

    def scale(self, c) -> "QSeries":
        return QSeries(self.group, {k: v * c for k, v in self.terms.items()}, self.weight, self.rep)

    def derivative(self, j: int = 1) -> "QSeries":
        """(q d/dq)^j applied termwise."""
        return QSeries(self.group, {(lab, e): v * e ** j for (lab, e), v in self.terms.items()},
                       self.weight + 2 * j, self.rep)

    def truncate(self, cap) -> "QSeries":
        cap = Fraction(cap)
        return QSeries(self.group, {k: v for k, v in self.terms.items() if k[1] <= cap}, self.weight, self.rep)

    def is_zero(self) -> bool:
        return not self.terms

    def to_json(self) -> dict:
        gram = getattr(self.group, "gram", None)
        rows = []
        for (lab, e), v in sorted(self.terms.items(), key=lambda kv: (str(kv[0][0]), kv[0][1])):
            val = _as_scalar(v)
            rows.append({"coset": _jsonable(lab), "exp": f"{e.numerator}/{e.denominator}", "value": val.to_json()})
        return {"gram": [list(r) for r in gram] if gram else None, "rep": self.rep,
                "weight": str(self.weight), "terms": rows}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @staticmethod
    def from_json(d: dict, group=None) -> "QSeries":
        group = group or DiscGroup(d["gram"])
        terms = {}
        for t in d["terms"]:
            terms[(_tupleize(t["coset"]), Fraction(t["exp"]))] = SymbolicScalar.from_json(t["value"])
        return QSeries(group, terms, Fraction(d.get("weight", "0")), d["rep"])


def _jsonable(lab):
    return [_jsonable(x) for x in lab] if isinstance(lab, tuple) else lab


def _tupleize(x):
    return tuple(_tupleize(y) for y in x) if isinstance(x, list) else x


# ------------------------------------------------------- theta functions

def theta_series(gram, cap) -> QSeries:
    """Holomorphic theta series of a positive definite even lattice, exponents <= cap."""
    G = DiscGroup(gram)
    cap = Fraction(cap)
    terms: dict = {}
    Gm = np.array(G.gram, dtype=float)
    # |x_i| <= sqrt(2 cap (G^{-1})_ii) + 1 covers all dual vectors with Q <= cap
    inv = np.linalg.inv(Gm)
    for lab in G.labels:
        base = G.vector(lab)
        radius = [math.isqrt(int(2 * float(cap) * inv[i][i]) + 1) + 2 for i in range(G.rank)]
        for shift in product(*(range(-r, r + 1) for r in radius)):
            v = [base[i] + shift[i] for i in range(G.rank)]
            qv = Fraction(1, 2) * sum(v[i] * G.gram[i][j] * v[j] for i in range(G.rank) for j in range(G.rank))
            if qv <= cap:
                key = (lab, qv)
                terms[key] = terms.get(key, 0) + 1
    return QSeries(G, terms, Fraction(G.rank, 2), "rho")


def theta_unary_half(split, cap) -> QSeries:
    """Weight 1/2 theta function of the positive rank one lattice P."""
    return theta_series(split.P_gram, cap)


def theta_unary_threehalf(N0, cap, D: int | None = None) -> QSeries:
    """theta*_{N0,r} = sum over n = r mod 2N0 of n q^(n^2/(4 N0)), as a series
    over labels r mod 2N0 (Gram (2N0)). With D given, coefficients carry the
    prefactor sqrt(2 N0 / |D|)."""
    N0 = Fraction(N0)
    if N0.denominator != 1:
        raise ValueError("N0 must be integral for the rank one lattice (2 N0)")
    M = 2 * int(N0)
    cap = Fraction(cap)
    G = DiscGroup([[M]])
    pref = SymbolicScalar.sqrt(Fraction(2) * N0 / abs(D)) if D else None
    terms: dict = {}
    nmax = math.isqrt(int(4 * N0 * cap)) + 1
    for n in range(-nmax, nmax + 1):
        e = Fraction(n * n) / (4 * N0)
        if e > cap:
            continue
        key = ((n % M,), e)
        terms[key] = terms.get(key, 0) + n
    if pref is not None:
        terms = {k: pref * v for k, v in terms.items()}
    return QSeries(G, terms, Fraction(3, 2), "rho")


# ---------------------------------------------------------- splitting

HERM_COORDS = ("a", "c", "x", "y")


def hermitian_gram(D: int) -> list[list[int]]:
    """Gram matrix of L in coordinates (a, c, x, y), b = x + y*omega_D."""
    return [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, -2, -D], [0, 0, -D, -(D * D - D) // 2]]


def form_to_coords(X) -> tuple:
    return (X.a, X.c, X.b.x, X.b.y)


def coords_to_form(D: int, v):
    from .hermitian import HermForm
    return HermForm(Fraction(v[0]), QuadInt(Fraction(v[2]), Fraction(v[3]), D), Fraction(v[1]))


def _integer_kernel(row) -> list[list[int]]:
    """Z-basis of {x in Z^n : row . x = 0} via unimodular column reduction."""
    n = len(row)
    r = [int(x) for x in row]
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    while sum(1 for x in r if x) > 1:
        idx = [i for i in range(n) if r[i]]
        piv = min(idx, key=lambda i: abs(r[i]))
        for j in idx:
            if j != piv:
                q = r[j] // r[piv]
                r[j] -= q * r[piv]
                for i in range(n):
                    U[i][j] -= q * U[i][piv]
    nz = [i for i in range(n) if r[i]]
    return [[U[i][j] for i in range(n)] for j in range(n) if j not in nz]


def _lll(basis, gram, delta=Fraction(3, 4)):
    """LLL reduction of integer vectors w.r.t. a positive definite Gram matrix."""
    B = [list(b) for b in basis]
    k = len(B)

    def ip(u, v):
        return sum(Fraction(u[i]) * gram[i][j] * v[j] for i in range(len(u)) for j in range(len(v)))

    def gso():
        Bs, mu = [], [[Fraction(0)] * k for _ in range(k)]
        for i in range(k):
            v = [Fraction(x) for x in B[i]]
            for j in range(i):
                mu[i][j] = ip(B[i], Bs[j]) / ip(Bs[j], Bs[j])
                v = [v[t] - mu[i][j] * Bs[j][t] for t in range(len(v))]
            Bs.append(v)
        return Bs, mu

    i = 1
    while i < k:
        Bs, mu = gso()
        for j in range(i - 1, -1, -1):
            q = round(mu[i][j])
            if q:
                B[i] = [B[i][t] - q * B[j][t] for t in range(len(B[i]))]
                Bs, mu = gso()
        if ip(Bs[i], Bs[i]) >= (delta - mu[i][i - 1] ** 2) * ip(Bs[i - 1], Bs[i - 1]):
            i += 1
        else:
            B[i], B[i - 1] = B[i - 1], B[i]
            i = max(i - 1, 1)
    return B


@dataclass
class SplittingData:
    D: int
    X0: object
    p_vec: tuple
    n_basis: tuple
    P_gram: tuple
    N_gram: tuple
    N_minus_gram: tuple
    index: int
    fiber: dict  # (alpha_label, beta_label) -> coset label of L'/L (quadfield label)

    @cached_property
    def P_group(self) -> DiscGroup:
        return DiscGroup(self.P_gram)

    @cached_property
    def N_group(self) -> DiscGroup:
        """Discriminant group of the positive definite lattice N^-."""
        return DiscGroup(self.N_minus_gram)

    @cached_property
    def sum_group(self) -> DirectSum:
        return DirectSum([self.P_group, self.N_group], signs=(1, -1))

    def n_label_of_form(self, X) -> tuple:
        """Label in N^-'/N^- of a form lying in the rational span of N."""
        v = Matrix([list(form_to_coords(X))]).T
        B = Matrix([list(b) for b in self.n_basis]).T
        sol, params = B.gauss_jordan_solve(v)
        if params.shape[0]:
            raise ValueError("basis of N is degenerate")
        coords = [Fraction(int(x.p), int(x.q)) for x in sol]
        if B * Matrix(coords) != v:
            raise ValueError("form is not in the span of N")
        return self.N_group.label_of(coords)

    def fiber_over(self, mu) -> list:
        return sorted(k for k, v in self.fiber.items() if v == tuple(mu))


def split_lattice(X0) -> SplittingData:
    """P = L cap Q X0 and N = L cap X0^perp with the fiber map to L'/L."""
    D = X0.disc
    if not X0.in_dual() or not X0.is_primitive():
        raise NotPrimitive(f"{X0} must be primitive in L'")
    if X0.det() <= 0:
        raise ValueError("X0 must have positive determinant")
    GL = hermitian_gram(D)
    x0 = form_to_coords(X0)
    den = math.lcm(*(Fraction(c).denominator for c in x0))
    iv = [int(Fraction(c) * den) for c in x0]
    g = math.gcd(*iv)
    p = tuple(c // g for c in iv)
    w = [sum(GL[i][j] * p[j] for j in range(4)) for i in range(4)]
    kern = _integer_kernel(w)
    neg_gram = [[-x for x in row] for row in GL]
    kern = _lll(kern, neg_gram)
    P_gram = ((sum(p[i] * GL[i][j] * p[j] for i in range(4) for j in range(4)),),)
    NG = tuple(tuple(sum(kern[a][i] * GL[i][j] * kern[b][j] for i in range(4) for j in range(4))
                     for b in range(3)) for a in range(3))
    NmG = tuple(tuple(-x for x in row) for row in NG)
    sub = Matrix([list(p)] + [list(b) for b in kern]).T
    index = abs(int(sub.det()))
    data = SplittingData(D, X0, p, tuple(tuple(b) for b in kern), P_gram, NG, NmG, index, {})
    # fiber: cosets of P' + N' that lie in L', with their image in L'/L
    for al in data.P_group.labels:
        avec = data.P_group.vector(al)
        for be in data.N_group.labels:
            bvec = data.N_group.vector(be)
            v = [avec[0] * p[i] + sum(bvec[t] * kern[t][i] for t in range(3)) for i in range(4)]
            k = [sum(Fraction(GL[i][j]) * v[j] for j in range(4)) for i in range(4)]
            if any(x.denominator != 1 for x in k):
                continue
            b = QuadInt(v[2], v[3], D)
            data.fiber[(al, be)] = coset_label(b)
    return data


def restrict_to_sublattice(f: QSeries, split: SplittingData) -> QSeries:
    """Restriction of a series over L'/L (labels as quadfield coset labels) to P + N."""
    terms = {}
    by_mu: dict = {}
    for (lab, e), v in f.terms.items():
        by_mu.setdefault(tuple(lab), []).append((e, v))
    for pair, mu in split.fiber.items():
        for e, v in by_mu.get(mu, []):
            terms[(pair, e)] = v
    return QSeries(split.sum_group, terms, f.weight, f.rep)


def trace_to_lattice(g: QSeries, split: SplittingData, target_group) -> QSeries:
    """The map g -> g^L: sum over the fiber above each coset of L'/L."""
    terms: dict = {}
    for (pair, e), v in g.terms.items():
        if pair not in split.fiber:
            continue
        key = (split.fiber[pair], e)
        terms[key] = terms[key] + v if key in terms else v
    return QSeries(target_group, terms, g.weight, g.rep)


class HermitianGroup:
    """L'/L for the Hermitian lattice, labelled by quadfield coset labels."""

    def __init__(self, D: int):
        from .quadfield import discriminant_group_reps, label_element, negate_label
        self.D = D
        self.labels = discriminant_group_reps(D)
        self._elem = label_element
        self._neg = negate_label

    def __eq__(self, other):
        return isinstance(other, HermitianGroup) and other.D == self.D

    def __hash__(self):
        return hash(("herm", self.D))

    def q_value(self, label) -> Fraction:
        return (-self._elem(self.D, label).norm()) % 1

    def neg(self, label):
        return self._neg(self.D, label)

    def zero(self):
        return (0, 0)


# ------------------------------------------------ brackets and pairings

def general_binomial(top, k: int) -> Fraction:
    top = Fraction(top)
    out = Fraction(1)
    for i in range(k):
        out = out * (top - i) / (i + 1)
    return out


def rankin_cohen(f: QSeries, g: QSeries, n: int, k=None, l=None) -> QSeries:
    """n-th Rankin-Cohen bracket of f (weight k) and g (weight l) as a tensor series."""
    k = f.weight if k is None else Fraction(k)
    l = g.weight if l is None else Fraction(l)
    coeffs = [(-1) ** s * general_binomial(k + n - 1, s) * general_binomial(l + n - 1, n - s) for s in range(n + 1)]
    sign_f = 1 if f.rep == "rho" else -1
    sign_g = 1 if g.rep == "rho" else -1
    group = DirectSum([f.group, g.group], signs=(sign_f, sign_g))
    terms: dict = {}
    for (lf, e1), v1 in f.terms.items():
        for (lg, e2), v2 in g.terms.items():
            w = sum((c * e1 ** (n - s) * e2 ** s for s, c in enumerate(coeffs)), Fraction(0))
            if w == 0:
                continue
            key = ((lf, lg), e1 + e2)
            val = v2 * (v1 * w) if isinstance(v2, SymbolicScalar) else v1 * (v2 * w)
            terms[key] = terms[key] + val if key in terms else val
    return QSeries(group, terms, k + l + 2 * n, "rho")


def constant_term(f: QSeries, g: QSeries):
    """Constant term of the pairing sum_labels f_label * g_label."""
    if f.rep == g.rep:
        raise RepresentationMismatch("pairing needs dual representations")
    if f.group != g.group:
        raise RepresentationMismatch("pairing needs the same discriminant group")
    total = SymbolicScalar()
    for (lab, e), v in f.terms.items():
        w = g.terms.get((lab, -e))
        if w is None:
            continue
        total = total + _as_scalar(v) * _as_scalar(w)
    return total


def kappa_kernel(m, n: int, l) -> Fraction:
    """sum_j (-1)^j C(2n, 2j) l^(n-j) (m-l)^j."""
    m, l = Fraction(m), Fraction(l)
    return sum((Fraction((-1) ** j * math.comb(2 * n, 2 * j)) * l ** (n - j) * (m - l) ** j for j in range(n + 1)),
               Fraction(0))


# ---------------------------------------------------- Siegel theta numeric

def _majorant_gram(D: int, P, e: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic form (X, v)^2/2 - Q(X) and Q(X) in coordinates (a, c, s, t),
    b = (s + t*omega_D)/e."""
    z, r = P.z, P.r
    w = complex(D / 2, math.sqrt(-D) / 2)
    # linear functional (X, v) and the map (s, t) -> b as real 2-vectors
    bmap = np.array([[1 / e, w.real / e], [0.0, w.imag / e]])
    ell = np.zeros(4)
    ell[0] = 1 / r
    ell[1] = (abs(z) ** 2 + r * r) / r
    ell[2:] = -2 * np.array([z.real, z.imag]) @ bmap / r
    Qm = np.zeros((4, 4))
    Qm[0, 1] = Qm[1, 0] = 0.5
    Qm[2:, 2:] = -(bmap.T @ bmap)
    return 0.5 * np.outer(ell, ell) - Qm, Qm


def siegel_theta_numeric(tau: complex, P, D: int, radius: float = 6.0) -> dict:
    """Theta_L(tau, v(P)) componentwise over L'/L by lattice point enumeration.

    v(P) = (1/r)[|z|^2 + r^2, z, 1]. Terms with Gaussian factor below
    exp(-radius^2) are dropped.
    """
    from .quadfield import different_exponent
    x, y = tau.real, tau.imag
    if y <= 0:
        raise ValueError("tau must lie in the upper half plane")
    e = different_exponent(D)
    M, Qm = _majorant_gram(D, P, e)
    bound = radius ** 2 / (2 * math.pi * y)
    Minv = np.linalg.inv(M)
    half = [int(math.floor(math.sqrt(bound * Minv[i, i]))) + 1 for i in range(4)]
    grids = np.meshgrid(*(np.arange(-h, h + 1) for h in half), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    # b must lie in the inverse different; membership depends on (s, t) mod e only
    allowed = {(s, t) for s in range(e) for t in range(e)
               if QuadInt(Fraction(s, e), Fraction(t, e), D).in_inverse_different()}
    mask = np.array([(int(s) % e, int(t) % e) in allowed for s, t in pts[:, 2:]], dtype=bool)
    pts = pts[mask].astype(float)
    maj = np.einsum("ij,jk,ik->i", pts, M, pts)
    sel = maj <= bound
    pts, maj = pts[sel], maj[sel]
    q = np.einsum("ij,jk,ik->i", pts, Qm, pts)
    vals = np.exp(2j * math.pi * q * x) * np.exp(-2 * math.pi * y * maj) * y ** 1.5
    out: dict = {}
    for (s, t), v in zip(pts[:, 2:].astype(int), vals):
        lab = (int(s) % e, int(t) % e)
        out[lab] = out.get(lab, 0) + complex(v)
    return {lab: out.get(lab, 0j) for lab in sorted(set(out) | set(_labels(D)))}


def _labels(D: int):
    from .quadfield import discriminant_group_reps
    return discriminant_group_reps(D)
