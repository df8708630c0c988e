"""Eisenstein series on hyperbolic 3-space over Bianchi groups.

E(P, s) at s = it is evaluated through its explicit Fourier expansion

    E(P, it) = (w/2) [ r^{1+it} + phi(it) r^{1-it}
               + c(t) * sum_{0 != om} |om|^{it} sigma_{-it}(om)
                 * r K_{it}(4 pi |om| r / sqrt(|d_K|)) * e(<2 conj(om)/sqrt(d_K), z>) ]

with c(t) = 2 (2 pi)^{1+it} / (|d_K|^{(1+it)/2} Gamma(1+it) zeta_K(1+it)).
The 1/Gamma(1+it) is folded into the scaled Bessel values through the exact
identity |Gamma(1+it)| cosh(pi t/2) = sqrt(pi t / (2 tanh(pi t/2))), so no
intermediate ever reaches e^{pi t/2} magnitudes.

The group action is genuine quaternion arithmetic, including the
q = sqrt(det) conjugation needed for determinant-n Hecke cosets.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np
from scipy.special import loggamma as _loggamma

from .errors import InvalidArgumentError, TruncationFailureError, WindowError
from .quadfield import Field, RingElement, divisors_up_to_units, enumerate_by_norm, sigma_s
from .specfun import bessel_k_scaled_batch, decay_log_deficit, whittaker_scale
from .zeta import ZetaContext, _zeta_k_raw, scattering_phi

R_WINDOW = (1.0e-2, 1.0e2)
T_EVAL_MAX = 200.0


# ---------------------------------------------------------------------------
# Points, quaternions and the group action
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HyperbolicPoint:
    x: float
    y: float
    r: float

    def __post_init__(self):
        if not self.r > 0:
            raise InvalidArgumentError("hyperbolic point needs r > 0")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    def shifted(self, dx=0.0, dy=0.0, dr=0.0) -> "HyperbolicPoint":
        return HyperbolicPoint(self.x + dx, self.y + dy, self.r + dr)


class Quaternion:
    """Hamilton quaternion w + x i + y j + z k with float components."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        self.w, self.x, self.y, self.z = float(w), float(x), float(y), float(z)

    @classmethod
    def from_complex(cls, c: complex) -> "Quaternion":
        return cls(c.real, c.imag, 0.0, 0.0)

    @classmethod
    def from_point(cls, P: HyperbolicPoint) -> "Quaternion":
        return cls(P.x, P.y, P.r, 0.0)

    def __add__(self, o):
        return Quaternion(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)

    def __mul__(self, o):
        a, b, c, d = self.w, self.x, self.y, self.z
        e, f, g, h = o.w, o.x, o.y, o.z
        return Quaternion(
            a * e - b * f - c * g - d * h,
            a * f + b * e + c * h - d * g,
            a * g - b * h + c * e + d * f,
            a * h + b * g - c * f + d * e,
        )

    def conj(self):
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm_sq(self) -> float:
        return self.w ** 2 + self.x ** 2 + self.y ** 2 + self.z ** 2

    def inverse(self):
        n = self.norm_sq()
        if n == 0.0:
            raise ZeroDivisionError("inverting zero quaternion")
        c = self.conj()
        return Quaternion(c.w / n, c.x / n, c.y / n, c.z / n)


@dataclass(frozen=True)
class GroupElement:
    """Matrix [[a, b], [c, d]] over O_K with det 1 (projective representative)."""

    a: RingElement
    b: RingElement
    c: RingElement
    d: RingElement

    def det(self) -> RingElement:
        prod_ad = self.a * self.d
        prod_bc = self.b * self.c
        return RingElement(prod_ad.a - prod_bc.a, prod_ad.b - prod_bc.b, self.a.field)


def group_element(field: Field, a, b, c, d) -> GroupElement:
    """Build a PSL2(O_K) element from coordinate pairs (a0,a1), ..."""
    elems = [e if isinstance(e, RingElement) else field.element(*e) for e in (a, b, c, d)]
    g = GroupElement(*elems)
    det = g.det()
    if not (det.a == 1 and det.b == 0):
        raise InvalidArgumentError(f"determinant is {det}, not 1")
    return g


def translation(field: Field, w: RingElement) -> GroupElement:
    return group_element(field, (1, 0), (w.a, w.b), (0, 0), (1, 0))


def inversion(field: Field) -> GroupElement:
    return group_element(field, (0, 0), (-1, 0), (1, 0), (0, 0))


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    def add(u, v):
        return RingElement(u.a + v.a, u.b + v.b, u.field)

    return GroupElement(
        add(g1.a * g2.a, g1.b * g2.c),
        add(g1.a * g2.b, g1.b * g2.d),
        add(g1.c * g2.a, g1.d * g2.c),
        add(g1.c * g2.b, g1.d * g2.d),
    )


def _mobius_complex(a: complex, b: complex, c: complex, d: complex, P: HyperbolicPoint) -> HyperbolicPoint:
    """(aP + b)(cP + d)^{-1} conjugated by q = sqrt(ad - bc), in quaternions."""
    det = a * d - b * c
    if det == 0:
        raise InvalidArgumentError("singular matrix")
    q = cmath.sqrt(det)
    Pq = Quaternion.from_point(P)
    num = Quaternion.from_complex(a) * Pq + Quaternion.from_complex(b)
    den = Quaternion.from_complex(c) * Pq + Quaternion.from_complex(d)
    out = Quaternion.from_complex(1 / q) * (num * den.inverse()) * Quaternion.from_complex(q)
    if abs(out.z) > 1.0e-12 * max(1.0, abs(out.y)):
        raise InvalidArgumentError(f"k-component {out.z:.3e} did not vanish")
    if out.y <= 0:
        raise InvalidArgumentError("image left the upper half-space (r' <= 0)")
    return HyperbolicPoint(out.w, out.x, out.y)


def mobius_act(gamma: GroupElement, P: HyperbolicPoint) -> HyperbolicPoint:
    return _mobius_complex(
        gamma.a.embed(), gamma.b.embed(), gamma.c.embed(), gamma.d.embed(), P
    )


# ---------------------------------------------------------------------------
# Evaluator
# ---------------------------------------------------------------------------

@dataclass
class EisensteinEvaluator:
    field: Field
    zeta_ctx: ZetaContext = None
    tail_tolerance: float = 1.0e-12
    max_norm_cutoff: int = 200_000

    def __post_init__(self):
        if not 0 < self.tail_tolerance <= 1.0e-4:
            raise InvalidArgumentError("tail_tolerance must be in (0, 1e-4]")
        if self.zeta_ctx is None:
            self.zeta_ctx = ZetaContext(field=self.field, precision_target=1.0e-10)
        elif self.zeta_ctx.field != self.field:
            raise InvalidArgumentError("zeta context bound to a different field")
        self._expansion_cache = {}


@lru_cache(maxsize=64)
def _sigma_pairs(field: Field, X: int):
    """Sieve data for sigma_{-s} over all elements of norm <= X.

    Returns (elements metadata arrays, pair indices, pair log-norms): the
    divisor sum at exponent -it is then one vectorized exp + scatter-add.
    """
    pts = enumerate_by_norm(field, X)
    index = {(e.a, e.b): i for i, e in enumerate(pts.elements)}
    n = len(pts.elements)
    norms = np.array([e.norm() for e in pts.elements], dtype=float)
    embeds = np.array([e.embed() for e in pts.elements], dtype=complex)
    pair_idx = []
    pair_nd = []
    for d in pts.elements:
        nd = d.norm()
        if nd > X:
            continue
        for q in enumerate_by_norm(field, X // nd):
            om = d * q
            j = index.get((om.a, om.b))
            if j is not None:
                pair_idx.append(j)
                pair_nd.append(nd)
    return norms, embeds, np.array(pair_idx, dtype=np.int64), np.log(
        np.array(pair_nd, dtype=float)
    )


def _sigma_minus_it(field: Field, X: int, t: float) -> np.ndarray:
    """sigma_{-it}(om) for every om with N(om) <= X, in enumeration order."""
    norms, embeds, idx, log_nd = _sigma_pairs(field, X)
    acc = np.zeros(len(norms), dtype=complex)
    np.add.at(acc, idx, np.exp(-1j * t * log_nd))
    return acc / field.unit_count


class _Expansion:
    """Per-(evaluator, t) state: lattice data, sigma values, prefactors."""

    def __init__(self, ev: EisensteinEvaluator, t: float, X: int):
        self.t = t
        self.X = X
        field = ev.field
        self.norms, self.embeds, _, _ = _sigma_pairs(field, X)
        self.sigma = _sigma_minus_it(field, X, t)
        self.absv = np.sqrt(self.norms)
        self.sqrt_disc = field.sqrt_abs_disc
        self.L = 4 * math.pi / field.sqrt_abs_disc
        zk = _zeta_k_raw(ev.zeta_ctx, 1 + 1j * t)
        theta = _loggamma(1 + 1j * t).imag
        # c(t) with 1/|Gamma(1+it)| folded into the Bessel scaling
        log2pi = math.log(2 * math.pi)
        pref = cmath.exp(
            math.log(2.0)
            + (1 + 1j * t) * log2pi
            - (1 + 1j * t) / 2 * math.log(abs(field.d_K))
            - 1j * theta
        ) / (zk * whittaker_scale(t))
        self.coef = pref * np.exp(1j * t * np.log(self.absv)) * self.sigma
        self.phi = scattering_phi(ev.zeta_ctx, 1j * t)
        self.w_half = field.unit_count / 2.0
        self._bessel_cache = {}

    def bessel_row(self, r: float) -> np.ndarray:
        hit = self._bessel_cache.get(r)
        if hit is None:
            u = self.L * self.absv * r
            hit = bessel_k_scaled_batch(abs(self.t), u)  # K_{it} = K_{-it}
            self._bessel_cache[r] = hit
        return hit


def _required_cutoff(ev: EisensteinEvaluator, t: float, r: float) -> int:
    t = abs(t)
    """Smallest norm bound X with a certified expansion tail < tail_tolerance.

    The first omitted Bessel argument must clear the turning point by the
    transition width, and the enveloped tail (decay exponent damped by 0.85
    to cover algebraic prefactors, shell divisor sums bounded by w n^{1.3})
    must fall below the tolerance.
    """
    L = 4 * math.pi / ev.field.sqrt_abs_disc
    u_floor = t + max(10.0, 5.0 * t ** (1.0 / 3.0))
    X = max(1, int(math.ceil((u_floor / (L * r)) ** 2)))
    w = ev.field.unit_count
    # c(t) modulus without zeta (|zeta_K(1+it)| >= 0.1 on the window; keep slack)
    amp = 2 * (2 * math.pi) / (ev.field.sqrt_abs_disc * 0.05 * whittaker_scale(max(t, 1.0)))
    while True:
        ns = np.arange(X + 1, X + 4001, dtype=float)
        us = L * np.sqrt(ns) * r
        deficits = np.array([decay_log_deficit(t, u) for u in us])
        terms = amp * r * w * ns ** 1.3 * 2.0 * np.exp(-0.85 * deficits)
        # geometric remainder: terms decay at least as fast as the last ratio
        tail = float(terms.sum())
        ratio = terms[-1] / max(terms[-2], 1e-300)
        if ratio < 1.0:
            tail += float(terms[-1] * ratio / (1 - ratio))
        else:
            tail = math.inf
        if tail < ev.tail_tolerance:
            return X
        if X >= ev.max_norm_cutoff:
            raise TruncationFailureError(
                f"certified cutoff exceeds max_norm_cutoff={ev.max_norm_cutoff}"
            )
        X = min(2 * X + 1000, ev.max_norm_cutoff)


def _expansion_for(ev: EisensteinEvaluator, t: float, r_min: float) -> _Expansion:
    X = _required_cutoff(ev, t, r_min)
    key = (t, X)
    exp = ev._expansion_cache.get(key)
    if exp is None or exp.X < X:
        exp = _Expansion(ev, t, X)
        ev._expansion_cache[key] = exp
    return exp


def _check_eval_window(P: HyperbolicPoint, t: float) -> None:
    if not R_WINDOW[0] <= P.r <= R_WINDOW[1]:
        raise WindowError(f"r={P.r:.4g} outside {R_WINDOW}")
    if not abs(t) <= T_EVAL_MAX:
        raise WindowError(f"|t|={abs(t):.4g} outside [0, {T_EVAL_MAX}]")


def eisenstein_eval(ev: EisensteinEvaluator, P: HyperbolicPoint, t: float) -> complex:
    """E(P, it) = (|O_K^*|/2) E_infty(P, it) through the Fourier expansion."""
    _check_eval_window(P, t)
    if t == 0.0:
        # phi(0) = -1 exactly for the one-cusp groups and 1/zeta_K(1+s) -> 0,
        # so E(., i*0) vanishes identically
        return 0.0 + 0.0j
    exp = _expansion_for(ev, t, P.r)
    return _eval_with_expansion(exp, P, t)


def _eval_with_expansion(exp: _Expansion, P: HyperbolicPoint, t: float) -> complex:
    # phase e(<2 conj(om)/sqrt(d_K), z>) = exp(-4 pi i Im(om z)/sqrt(|d_K|))
    # with sqrt(d_K) on the principal branch (= i sqrt(|d_K|))
    r = P.r
    bess = exp.bessel_row(r)
    phases = np.exp((-4j * math.pi / exp.sqrt_disc) * (exp.embeds * P.z).imag)
    series = np.dot(exp.coef * bess, phases) * r
    const = r ** (1 + 1j * t) + exp.phi * r ** (1 - 1j * t)
    return exp.w_half * (const + series)


def check_automorphy(
    ev: EisensteinEvaluator, P: HyperbolicPoint, t: float, gamma: GroupElement
) -> float:
    """Relative residual |E(gamma P, it) - E(P, it)| / (|E(P, it)| + 1e-30)."""
    Q = mobius_act(gamma, P)
    e1 = eisenstein_eval(ev, P, t)
    e2 = eisenstein_eval(ev, Q, t)
    return abs(e2 - e1) / (abs(e1) + 1.0e-30)


def laplacian_residual(ev: EisensteinEvaluator, P: HyperbolicPoint, t: float, h: float) -> float:
    """|(-Delta_h E) - (1+t^2) E| / ((1+t^2) |E| + 1e-30) with central differences.

    Delta = r^2 (d_xx + d_yy + d_rr) - r d_r; 3-point second-order stencils.
    """
    if not 1.0e-4 <= h <= 1.0e-2:
        raise WindowError("h outside [1e-4, 1e-2]")
    if P.r - h <= R_WINDOW[0]:
        raise WindowError("point too close to the r-window edge for the stencil")
    f0 = eisenstein_eval(ev, P, t)
    fxp = eisenstein_eval(ev, P.shifted(dx=h), t)
    fxm = eisenstein_eval(ev, P.shifted(dx=-h), t)
    fyp = eisenstein_eval(ev, P.shifted(dy=h), t)
    fym = eisenstein_eval(ev, P.shifted(dy=-h), t)
    frp = eisenstein_eval(ev, P.shifted(dr=h), t)
    frm = eisenstein_eval(ev, P.shifted(dr=-h), t)
    h2 = h * h
    lap = (fxp + fxm + fyp + fym + frp + frm - 6 * f0) / h2
    dr = (frp - frm) / (2 * h)
    delta = P.r ** 2 * lap - P.r * dr
    lam = 1 + t * t
    return abs(-delta - lam * f0) / (lam * abs(f0) + 1.0e-30)


# ---------------------------------------------------------------------------
# Sup-norm scan
# ---------------------------------------------------------------------------

@dataclass
class ScanTable:
    t_values: list
    sup_values: list
    fitted_exponent: float
    fit_range: tuple

    def to_csv(self) -> str:
        lines = ["t,sup_value"]
        for t, s in zip(self.t_values, self.sup_values):
            lines.append(f"{t:.17g},{s:.17g}")
        lines.append(f"# fitted_exponent,{self.fitted_exponent:.17g}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(
            {
                "t": [float(t) for t in self.t_values],
                "sup": [float(s) for s in self.sup_values],
                "fitted_exponent": float(self.fitted_exponent),
                "fit_range": list(self.fit_range),
            },
            indent=2,
            sort_keys=True,
        )


def supnorm_scan(ev: EisensteinEvaluator, omega_grid, t_grid) -> ScanTable:
    """max over the grid of |E(., it)| per t, with a log-log slope fit over
    the upper half of t_grid."""
    pts = list(omega_grid)
    if not pts:
        raise InvalidArgumentError("empty point grid")
    ts = [float(t) for t in t_grid]
    if ts != sorted(ts) or any(t <= 0 for t in ts) or ts[-1] > T_EVAL_MAX:
        raise InvalidArgumentError("t_grid must be increasing, positive, <= window")
    r_values = sorted({P.r for P in pts})
    sups = []
    for t in ts:
        exp = _expansion_for(ev, t, min(r_values))
        best = 0.0
        for r in r_values:
            zs = np.array([P.z for P in pts if P.r == r], dtype=complex)
            bess = exp.bessel_row(r)
            phases = np.exp(
                (-4j * math.pi / exp.sqrt_disc) * np.outer(exp.embeds, zs).imag
            )
            series = (exp.coef * bess * r) @ phases
            const = r ** (1 + 1j * t) + exp.phi * r ** (1 - 1j * t)
            vals = np.abs(exp.w_half * (const + series))
            m = float(vals.max())
            if m > best:
                best = m
        sups.append(best)
    # slope over the upper half of the grid
    n = len(ts)
    lo = n // 2
    logt = np.log(np.array(ts[lo:]))
    logs = np.log(np.array(sups[lo:]))
    slope = float(np.polyfit(logt, logs, 1)[0])
    return ScanTable(
        t_values=ts, sup_values=sups, fitted_exponent=slope, fit_range=(ts[lo], ts[-1])
    )


# ---------------------------------------------------------------------------
# Hecke operators
# ---------------------------------------------------------------------------

def _residues_mod(d: RingElement):
    """Representatives of O_K / (d) via Smith normal form of multiplication by d."""
    f = d.field
    # multiplication-by-d matrix on the basis (1, w)
    col1 = d  # d * 1
    col2 = d * RingElement(0, 1, f)  # d * w
    m = [[col1.a, col2.a], [col1.b, col2.b]]
    a, b, c, e = m[0][0], m[0][1], m[1][0], m[1][1]
    n = abs(a * e - b * c)
    # enumerate a box and reduce: small norms only (Hecke at desk scale)
    reps = []
    seen = set()
    B = int(math.isqrt(4 * n)) + 2
    inv = [[e, -b], [-c, a]]  # adj(m); m^{-1} = adj/det
    det = a * e - b * c
    for x in range(-B, B + 1):
        for y in range(-B, B + 1):
            # class of (x, y) modulo the lattice m Z^2
            u = inv[0][0] * x + inv[0][1] * y
            v = inv[1][0] * x + inv[1][1] * y
            key = (u % det, v % det)
            if key in seen:
                continue
            seen.add(key)
            reps.append(RingElement(x, y, f))
            if len(reps) == n:
                return reps
    raise InvalidArgumentError("failed to enumerate residues")


def hecke_cosets(n: RingElement):
    """Upper-triangular coset data [(a, b, d)] with a d = n up to units, b mod d."""
    if n.is_zero():
        raise InvalidArgumentError("Hecke index must be nonzero")
    out = []
    for a in divisors_up_to_units(n):
        d = a.exact_divide(n)
        for b in _residues_mod(d):
            out.append((a, b, d))
    return out


def hecke_apply(ev: EisensteinEvaluator, n: RingElement, P: HyperbolicPoint, t: float) -> complex:
    """(T_n E)(P, it) = N(n)^{-1/2} sum over cosets of E(gamma P, it)."""
    total = 0.0 + 0.0j
    for a, b, d in hecke_cosets(n):
        Q = _mobius_complex(a.embed(), b.embed(), 0.0 + 0.0j, d.embed(), P)
        total += eisenstein_eval(ev, Q, t)
    return total / math.sqrt(n.norm())


def hecke_eigenvalue_prediction(n: RingElement, t: float) -> complex:
    """Coefficient-side prediction: T_n eigenvalue N(n)^{-it/2} sigma_{it}(n).

    Obtained by applying the coset action to the Fourier expansion termwise;
    real-valued because divisor classes pair off under d <-> n/d.
    """
    return n.norm() ** (-1j * t / 2) * sigma_s(n, 1j * t)
