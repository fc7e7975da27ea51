"""Hyperbolic 3-space and the automorphic Green's function of PSL2(O_D).

The group sum is organised by cosets of the translation subgroup: every
element of PSL2(O_D) is a translation by t in O_D composed with a matrix
whose coprime bottom row (c, d) is fixed up to sign. Bottom rows are
enumerated in the ellipsoid forced by the distance cutoff, a top row is
completed with a vectorised Euclidean algorithm, and translations are
enumerated in a disk. Elements of O_D are integer pairs (u, v) meaning
u + v*omega0 with omega0 = (delta + sqrt(D))/2, delta = D mod 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quadfield import NORM_EUCLIDEAN


class SingularArgument(ValueError):
    pass


class SingularityHit(ValueError):
    pass


@dataclass(frozen=True)
class Point3:
    z: complex
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise ValueError("height must be positive")
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "r", float(self.r))


def cosh_dist(P1: Point3, P2: Point3) -> float:
    return (abs(P1.z - P2.z) ** 2 + P1.r ** 2 + P2.r ** 2) / (2 * P1.r * P2.r)


def phi_s(t, s: float):
    """(t + sqrt(t^2-1))^(-s) / sqrt(t^2-1); accepts scalars or arrays."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 1.0):
        raise SingularArgument("phi_s is singular at t = 1")
    root = np.sqrt((t - 1.0) * (t + 1.0))
    out = (t + root) ** (-s) / root
    return float(out) if out.ndim == 0 else out


def bilinear_vs_distance_check(X1, X2, rel_tol: float = 1e-10) -> bool:
    """(X1, X2) = 2 sgn(c1 c2) sqrt(det1 det2) cosh d(P_X1, P_X2)."""
    from .hermitian import special_point
    lhs = float(X1.bilinear(X2))
    sign = 1.0 if X1.c * X2.c > 0 else -1.0
    rhs = 2 * sign * math.sqrt(float(X1.det()) * float(X2.det())) * cosh_dist(special_point(X1), special_point(X2))
    return abs(lhs - rhs) <= rel_tol * max(abs(lhs), abs(rhs), 1.0)


# ------------------------------------------------------- O_D on arrays

class _Ring:
    """Vectorised arithmetic in O_D on integer coordinate pairs."""

    def __init__(self, D: int):
        self.D = D
        self.delta = D % 2
        self.nrm = (self.delta - D) // 4          # norm of omega0
        self.h = math.sqrt(-D) / 2                 # imaginary part of omega0
        self.omega0 = complex(self.delta / 2, self.h)

    def mul(self, u1, v1, u2, v2):
        vv = v1 * v2
        return u1 * u2 - vv * self.nrm, u1 * v2 + u2 * v1 + self.delta * vv

    def conj(self, u, v):
        return u + self.delta * v, -v

    def norm(self, u, v):
        return u * u + self.delta * u * v + self.nrm * v * v

    def to_complex(self, u, v):
        return u + v * self.omega0

    def round_quotient(self, u1, v1, u2, v2):
        """Nearest element of O_D to (u1 + v1 w)/(u2 + v2 w), exact in integers."""
        cu, cv = self.conj(u2, v2)
        X, Y = self.mul(u1, v1, cu, cv)
        N = self.norm(u2, v2)
        q_v = np.floor_divide(2 * Y + N, 2 * N)
        q_u = np.floor_divide(2 * X + (Y - q_v * N) * self.delta + N, 2 * N)
        return q_u, q_v

    def xgcd(self, au, av, bu, bv):
        """Arrays (g, s, t) with s*a + t*b = g."""
        r0 = [au.copy(), av.copy()]
        r1 = [bu.copy(), bv.copy()]
        one = np.ones_like(au)
        zero = np.zeros_like(au)
        s0, s1 = [one.copy(), zero.copy()], [zero.copy(), zero.copy()]
        t0, t1 = [zero.copy(), zero.copy()], [one.copy(), zero.copy()]
        for _ in range(200):
            active = (r1[0] != 0) | (r1[1] != 0)
            if not active.any():
                break
            idx = np.nonzero(active)[0]
            qu, qv = self.round_quotient(r0[0][idx], r0[1][idx], r1[0][idx], r1[1][idx])
            for pair0, pair1 in ((r0, r1), (s0, s1), (t0, t1)):
                mu_, mv_ = self.mul(qu, qv, pair1[0][idx], pair1[1][idx])
                nu_, nv_ = pair0[0][idx] - mu_, pair0[1][idx] - mv_
                pair0[0][idx], pair0[1][idx] = pair1[0][idx], pair1[1][idx]
                pair1[0][idx], pair1[1][idx] = nu_, nv_
        else:
            raise RuntimeError("Euclidean algorithm did not terminate")
        return r0, s0, t0


def _disk_points(ring: _Ring, centers: np.ndarray, radii: np.ndarray):
    """Lattice points of O_D inside each disk; returns (owner, u, v)."""
    radii = np.where(radii > 0, radii, -1.0)
    h, delta = ring.h, ring.delta
    vlo = np.ceil((centers.imag - radii) / h).astype(np.int64)
    vhi = np.floor((centers.imag + radii) / h).astype(np.int64)
    nv = np.maximum(vhi - vlo + 1, 0)
    owner = np.repeat(np.arange(len(centers)), nv)
    start = np.repeat(np.cumsum(nv) - nv, nv)
    v = vlo[owner] + (np.arange(owner.size) - start)
    span = radii[owner] ** 2 - (centers.imag[owner] - v * h) ** 2
    keep = span >= 0
    owner, v, span = owner[keep], v[keep], span[keep]
    s = np.sqrt(span)
    re0 = centers.real[owner] - v * (delta / 2)
    ulo = np.ceil(re0 - s).astype(np.int64)
    uhi = np.floor(re0 + s).astype(np.int64)
    nu = np.maximum(uhi - ulo + 1, 0)
    owner2 = np.repeat(np.arange(owner.size), nu)
    start2 = np.repeat(np.cumsum(nu) - nu, nu)
    u = ulo[owner2] + (np.arange(owner2.size) - start2)
    return owner[owner2], u, v[owner2]


def _positive_half(u, v):
    return (u > 0) | ((u == 0) & (v > 0))


def orbit_chunks(D: int, P1: Point3, P2: Point3, T: float, max_pairs: int = 1_500_000):
    """Yield dicts of arrays describing all gamma in PSL2(O_D) with
    cosh d(P1, gamma P2) <= T (each element exactly once)."""
    if D not in NORM_EUCLIDEAN:
        raise ValueError(f"D={D}: top-row completion needs a norm-Euclidean ring")
    ring = _Ring(D)
    z1, r1, z2, r2 = P1.z, P1.r, P2.z, P2.r
    # cosh <= T forces r' >= r1/(2T), i.e. |c z2 + d|^2 + |c|^2 r2^2 <= 2 T r2 / r1
    B = 2.0 * T * r2 / r1
    c_owner, cu, cv = _disk_points(ring, np.array([0j]), np.array([math.sqrt(B) / r2]))
    cval = ring.to_complex(cu, cv)
    crad2 = B - np.abs(cval) ** 2 * r2 ** 2
    keep = crad2 >= 0
    cu, cv, cval, crad2 = cu[keep], cv[keep], cval[keep], crad2[keep]
    # c = 0 is kept only once; sign normalisation happens below
    est = np.pi * crad2 / (ring.h * 2) + 4 * np.sqrt(crad2) + 4
    bounds = np.searchsorted(np.cumsum(est), np.arange(0, est.sum() + max_pairs, max_pairs))
    bounds = np.unique(np.concatenate([[0], bounds, [len(cu)]]))
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi <= lo:
            continue
        yield from _process_c_block(ring, z1, r1, z2, r2, T, cu[lo:hi], cv[lo:hi], cval[lo:hi], crad2[lo:hi])


def _process_c_block(ring, z1, r1, z2, r2, T, cu, cv, cval, crad2):
    owner, du, dv = _disk_points(ring, -cval * z2, np.sqrt(crad2))
    cu, cv = cu[owner], cv[owner]
    c_zero = (cu == 0) & (cv == 0)
    sign_ok = np.where(c_zero, _positive_half(du, dv), _positive_half(cu, cv))
    nonzero = ~(c_zero & (du == 0) & (dv == 0))
    sel = sign_ok & nonzero
    cu, cv, du, dv = cu[sel], cv[sel], du[sel], dv[sel]
    if cu.size == 0:
        return
    g, s, t = ring.xgcd(cu, cv, du, dv)
    coprime = ring.norm(g[0], g[1]) == 1
    cu, cv, du, dv = cu[coprime], cv[coprime], du[coprime], dv[coprime]
    g = [g[0][coprime], g[1][coprime]]
    s = [s[0][coprime], s[1][coprime]]
    t = [t[0][coprime], t[1][coprime]]
    # alpha = t / g, beta = -s / g; units satisfy 1/g = conj(g)
    gi = ring.conj(g[0], g[1])
    au, av = ring.mul(t[0], t[1], gi[0], gi[1])
    bu, bv = ring.mul(-s[0], -s[1], gi[0], gi[1])
    al, be = ring.to_complex(au, av), ring.to_complex(bu, bv)
    c, d = ring.to_complex(cu, cv), ring.to_complex(du, dv)
    czd = c * z2 + d
    den = np.abs(czd) ** 2 + np.abs(c) ** 2 * r2 ** 2
    zp = ((al * z2 + be) * np.conj(czd) + al * np.conj(c) * r2 ** 2) / den
    rp = r2 / den
    R2 = 2 * r1 * rp * T - r1 ** 2 - rp ** 2
    ok = R2 >= 0
    if not ok.any():
        return
    idx = np.nonzero(ok)[0]
    w = z1 - zp[idx]
    own, tu, tv = _disk_points(ring, w, np.sqrt(R2[idx]) * (1 + 1e-12) + 1e-12)
    src = idx[own]
    tval = ring.to_complex(tu, tv)
    rr = rp[src]
    cosh = (np.abs(w[own] - tval) ** 2 + r1 ** 2 + rr ** 2) / (2 * r1 * rr)
    inside = cosh <= T
    src, tu, tv, cosh = src[inside], tu[inside], tv[inside], cosh[inside]
    yield {"cosh": cosh, "src": src, "tu": tu, "tv": tv,
           "au": au, "av": av, "bu": bu, "bv": bv, "cu": cu, "cv": cv, "du": du, "dv": dv}


def orbit_matrices(D: int, P1: Point3, P2: Point3, T: float) -> list[tuple]:
    """Explicit element list (small T only): tuples of 8 integers in
    reduced coordinates (alpha, beta, c, d), normalised up to sign."""
    ring = _Ring(D)
    out = []
    for ch in orbit_chunks(D, P1, P2, T):
        s = ch["src"]
        tu, tv = ch["tu"], ch["tv"]
        mu1, mv1 = ring.mul(tu, tv, ch["cu"][s], ch["cv"][s])
        mu2, mv2 = ring.mul(tu, tv, ch["du"][s], ch["dv"][s])
        rows = np.stack([ch["au"][s] + mu1, ch["av"][s] + mv1, ch["bu"][s] + mu2, ch["bv"][s] + mv2,
                         ch["cu"][s], ch["cv"][s], ch["du"][s], ch["dv"][s]], axis=1)
        out.extend(tuple(int(x) for x in row) for row in rows)
    return out


@dataclass
class GreenEval:
    value: float
    truncation_bound: float
    terms_used: int
    tail_estimate: float
    extrapolated: bool
    partial_sums: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"value": self.value, "truncation_bound": self.truncation_bound,
                "terms_used": self.terms_used, "tail_estimate": self.tail_estimate,
                "extrapolated": self.extrapolated,
                "partial_sums": {str(k): v for k, v in self.partial_sums.items()}}


def partial_sums(D: int, P1: Point3, P2: Point3, s: float, cutoffs) -> tuple[list[float], list[int]]:
    """Sums of phi_s(cosh d(P1, gamma P2)) over cosh <= T for each cutoff T."""
    cutoffs = sorted(float(T) for T in cutoffs)
    nb = len(cutoffs)
    pieces = [[] for _ in range(nb)]
    counts = np.zeros(nb, dtype=np.int64)
    for ch in orbit_chunks(D, P1, P2, cutoffs[-1]):
        t = ch["cosh"]
        if t.size == 0:
            continue
        if t.min() < 1 + 1e-9:
            raise SingularityHit("an orbit point of P2 coincides with P1")
        vals = phi_s(t, s)
        bins = np.searchsorted(cutoffs, t, side="left")
        for k in range(nb):
            m = bins == k
            if m.any():
                pieces[k].append(float(np.sum(vals[m])))
                counts[k] += int(m.sum())
    annuli = [math.fsum(p) for p in pieces]
    sums = list(np.cumsum(annuli))
    return [float(x) for x in sums], [int(x) for x in np.cumsum(counts)]


def green_function(P1: Point3, P2: Point3, s: float, T: float = 400.0, extrapolate: bool = False,
                   D: int = -4, cutoffs=None) -> GreenEval:
    """Truncated G_s(P1, P2) = pi * sum over gamma of phi_s(cosh d(P1, gamma P2))."""
    if s <= 1:
        raise ValueError("the series converges only for s > 1")
    if cutoffs is None:
        cutoffs = [T * 2 ** (-k / 2) for k in range(4, -1, -1)]
    cutoffs = sorted(set(float(x) for x in cutoffs) | {float(T)})
    if len(cutoffs) < 3:
        raise ValueError("tail fitting needs at least three cutoffs")
    sums, counts = partial_sums(D, P1, P2, s, cutoffs)
    x = np.array([c ** (1 - s) for c in cutoffs])
    # tail model C * T^(1-s), C from the two outermost annuli
    C = (sums[-1] - sums[-3]) / (x[-3] - x[-1])
    tail = max(C, 0.0) * x[-1]
    value = sums[-1]
    if extrapolate:
        slope, intercept = np.polyfit(x, np.array(sums), 1)
        value = float(intercept)
    return GreenEval(value=math.pi * value, truncation_bound=float(cutoffs[-1]), terms_used=counts[-1],
                     tail_estimate=math.pi * tail, extrapolated=extrapolate,
                     partial_sums={c: math.pi * v for c, v in zip(cutoffs, sums)})


def ball_count(D: int, P: Point3, T: float) -> int:
    return sum(int(ch["cosh"].size) for ch in orbit_chunks(D, P, P, T))
