"""The exponent calculus behind the final spectral-sum estimates.

Everything here is elementary and exact: the piecewise-linear decay exponent
Q1 and its closed form, the log-scale envelopes of the four displayed
triple-product bounds, regime classification, and the aggregation of
unit-spaced spectral sums under an L-value policy (GLH / convexity /
subconvexity).  Aggregation runs entirely in log scale; exp(-(pi/2) Q1)
reaches e^{-300} on routine grids.

Conventions, fixed here once:
* every polynomial factor is guarded as (1 + x) before taking logs;
* in the regime where the trivial bound Q1 >= 0 applies (the glh-main side
  of the case split), head terms drop the exponential factor, while the
  above-threshold tail always keeps it - that is exactly what makes the
  tail certification meaningful;
* the spectral density is a configurable power law: the number of basis
  points per unit t_j window is modeled as (1+t_j)^density_exponent.
  Reported slopes move 1:1 with this exponent, so sweep reports carry it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, PolicyError

ENVELOPE_KINDS = ("cusp", "eis-t", "eis-tau", "eis-eis")


@dataclass(frozen=True)
class SpectralQuadruple:
    t_j: float
    t_f: float
    t_g: float
    t_k: float

    def __post_init__(self):
        for v in (self.t_j, self.t_f, self.t_g, self.t_k):
            if not (math.isfinite(v) and v >= 0):
                raise InvalidArgumentError("spectral parameters must be finite, >= 0")

    def scaled(self, c: float) -> "SpectralQuadruple":
        return SpectralQuadruple(c * self.t_j, c * self.t_f, c * self.t_g, c * self.t_k)


@dataclass(frozen=True)
class LPolicy:
    kind: str  # GLH | convexity | subconvex
    exponent_delta: float = 0.01

    def __post_init__(self):
        if self.kind == "GLH":
            if not 0 < self.exponent_delta <= 0.05:
                raise PolicyError("GLH delta must be in (0, 0.05]")
        elif self.kind == "subconvex":
            if not 0 < self.exponent_delta < 0.125:
                raise PolicyError("subconvex saving must be in (0, 1/8)")
        elif self.kind != "convexity":
            raise PolicyError(f"unknown policy kind {self.kind!r}")


@dataclass(frozen=True)
class BoundReport:
    q1: float
    envelope: float  # log scale: largest head term
    regime: str
    aggregate: float  # log scale
    threshold: float
    tail: float  # log scale
    density_exponent: float


def q1(q: SpectralQuadruple) -> float:
    """The seven-term absolute-value expression, evaluated literally."""
    tj, tf, tg, tk = q.t_j, q.t_f, q.t_g, q.t_k
    return (
        abs(tj / 2 + tf)
        + abs(tj / 2 - tf)
        + abs(tj + tg + tk) / 2
        + abs(tj + tg - tk) / 2
        + abs(tj - tg + tk) / 2
        + abs(tj - tg - tk) / 2
        - tj
        - 2 * tf
        - tk
        - tg
    )


def q1_closed(q: SpectralQuadruple) -> float:
    """Piecewise closed form: max(t_j, 2 t_f) + m - (t_j + 2 t_f + t_g + t_k),
    with m the tetrahedral middle term in (t_j, t_g, t_k)."""
    tj, tf, tg, tk = q.t_j, q.t_f, q.t_g, q.t_k
    if tj >= tg + tk:
        m = 2 * tj
    elif tj >= abs(tg - tk):
        m = tj + tg + tk
    else:
        m = 2 * max(tg, tk)
    return max(tj, 2 * tf) + m - (tj + 2 * tf + tg + tk)


def q1_batch(tj: np.ndarray, tf: float, tg: float, tk: float) -> np.ndarray:
    """Vectorized q1 over a t_j grid (same literal formula)."""
    tj = np.asarray(tj, dtype=float)
    return (
        np.abs(tj / 2 + tf)
        + np.abs(tj / 2 - tf)
        + np.abs(tj + tg + tk) / 2
        + np.abs(tj + tg - tk) / 2
        + np.abs(tj - tg + tk) / 2
        + np.abs(tj - tg - tk) / 2
        - tj
        - 2 * tf
        - tk
        - tg
    )


def truncation_threshold(t_f: float, t_g: float, t_k: float) -> float:
    return 2 * t_f + t_k + t_g


def regime_thresholds(t_f: float, t_g: float, eps: float) -> dict:
    """Both displayed thresholds side by side; neither silently preferred."""
    edge = t_g - t_g ** eps
    return {
        "proof_split_exponential": bool(2 * t_f < edge),
        "theorem_indicator_main": bool(t_f > edge),
        "edge": edge,
    }


def regime_classify(t_f: float, t_g: float, eps: float) -> str:
    """exponential-decay iff 2 t_f < t_g - t_g^eps; boundary closes on main."""
    if not t_g > 1:
        raise InvalidArgumentError("regime split needs t_g > 1")
    if not 0 < eps < 1:
        raise InvalidArgumentError("eps must be in (0, 1)")
    return "exponential-decay" if 2 * t_f < t_g - t_g ** eps else "glh-main"


def _subconvex_log_term(E: float, tj, tf: float):
    """log of ((1+tj)^2 (1+tf)^6)^E: the square root of the degree-16
    numerator bound L(1/2) << conductor^E."""
    return E * (2.0 * np.log1p(tj) + 6.0 * math.log1p(tf))


def _policy_log_term(policy: LPolicy, tj, tf: float, tg: float):
    """Policy-dependent L-factor contribution in log scale (vectorized in tj)."""
    lj = np.log1p(tj)
    lf = math.log1p(tf)
    lg = math.log1p(tg)
    if policy.kind == "GLH":
        return policy.exponent_delta * (lg + lj + lf)
    if policy.kind == "convexity":
        # conductor^{1/4}: (1/4) log((1+tj)^4 (1+tf)^12)
        return lj + 3.0 * lf
    return _subconvex_log_term(0.125 - policy.exponent_delta, tj, tf)


def _denominator_log(tj, tf: float, tg: float, tk: float):
    return (
        np.log1p(tj)
        + math.log1p(tf)
        + 0.5 * math.log1p(tg)
        + 0.5 * math.log1p(tk)
    )


def envelope(kind: str, q: SpectralQuadruple, policy: LPolicy) -> float:
    """log of the displayed bound for the given pairing kind.

    Under the universal (1+x) guards the four displayed denominators share
    one pattern (first two slots to the power 1, last two to the power 1/2),
    so the kinds differ only in which spectral parameter sits in which slot;
    the caller places Eisenstein parameters into the matching slots.
    """
    if kind not in ENVELOPE_KINDS:
        raise InvalidArgumentError(f"unknown envelope kind {kind!r}")
    val = (
        -math.pi / 2 * q1(q)
        - float(_denominator_log(q.t_j, q.t_f, q.t_g, q.t_k))
        + float(_policy_log_term(policy, q.t_j, q.t_f, q.t_g))
    )
    return val


def _log_terms(tj_grid, tf, tg, tk, policy, density_exponent, keep_exponential):
    q1v = q1_batch(tj_grid, tf, tg, tk)
    terms = (
        -_denominator_log(tj_grid, tf, tg, tk)
        + _policy_log_term(policy, tj_grid, tf, tg)
        + density_exponent * np.log1p(tj_grid)
    )
    if keep_exponential:
        terms = terms - math.pi / 2 * q1v
    return terms


def aggregate_spectral_sum(
    t_f: float,
    t_g: float,
    t_k: float,
    policy: LPolicy,
    density_exponent: float = 2.0,
    eps: float = 0.1,
) -> BoundReport:
    """Unit-spaced t_j sum of the cusp-kind envelope, reported in log scale.

    Head (t_j below the truncation threshold): in the glh-main regime the
    trivial bound Q1 >= 0 replaces the exponential, matching how the final
    estimate is assembled; in the exponential-decay regime the exponential
    is what drives the bound and is kept.  The tail above the threshold
    always keeps exp(-(pi/2) Q1) and certifies its own negligibility.
    """
    if min(t_f, t_g, t_k) <= 0:
        raise InvalidArgumentError("parameters must be positive")
    thr = truncation_threshold(t_f, t_g, t_k)
    regime = regime_classify(t_f, t_g, eps) if t_g > 1 else "glh-main"
    head_grid = np.arange(1.0, math.floor(thr) + 1.0)
    if len(head_grid) == 0:
        head_grid = np.array([1.0])
    keep = regime == "exponential-decay"
    head_terms = _log_terms(head_grid, t_f, t_g, t_k, policy, density_exponent, keep)
    head_log = float(np.logaddexp.reduce(head_terms))
    # tail: exponential decay in t_j; extend until 80 nats under the head
    tail_grid = np.arange(math.floor(thr) + 1.0, math.floor(thr) + 2000.0)
    tail_terms = _log_terms(tail_grid, t_f, t_g, t_k, policy, density_exponent, True)
    cutoff = head_log - 80.0
    tail_terms = tail_terms[: max(2, int(np.searchsorted(-tail_terms, -cutoff) + 2))]
    tail_log = float(np.logaddexp.reduce(tail_terms))
    q_at_thr = q1(SpectralQuadruple(thr, t_f, t_g, t_k))
    return BoundReport(
        q1=q_at_thr,
        envelope=float(head_terms.max()),
        regime=regime,
        aggregate=float(np.logaddexp(head_log, tail_log)),
        threshold=thr,
        tail=tail_log,
        density_exponent=density_exponent,
    )


def conductor(t_j: float, t_f: float) -> float:
    """Analytic-conductor envelope of the degree-16 numerator: t_j^4 t_f^12."""
    if t_j < 0 or t_f < 0:
        raise InvalidArgumentError("conductor arguments must be >= 0")
    return t_j ** 4 * t_f ** 12


def spectral_weight(lam: float, ell: int) -> float:
    """lam^{-ell}: the rapid-decay model for smooth test-function coefficients."""
    if lam < 1 or ell < 0:
        raise InvalidArgumentError("need lam >= 1 and ell >= 0")
    return lam ** (-float(ell))


def subconvex_aggregate_log(E: float, t_f: float, t_g: float, t_k: float) -> float:
    """log of the glh-main aggregate with numerator ((1+tj)^2 (1+tf)^6)^E.

    Trivial-Q1 head as in aggregate_spectral_sum; E may exceed 1/8 here so
    divergence of over-optimistic exponents is observable.
    """
    thr = truncation_threshold(t_f, t_g, t_k)
    grid = np.arange(1.0, math.floor(thr) + 1.0)
    terms = -_denominator_log(grid, t_f, t_g, t_k) + _subconvex_log_term(E, grid, t_f)
    return float(np.logaddexp.reduce(terms))


def aggregate_slope(tf_grid, E: float, t_g: float = 2.0, t_k: float = 1.0) -> float:
    """Least-squares slope of log-aggregate vs log t_f at subconvex exponent E."""
    logs = [subconvex_aggregate_log(E, tf, t_g, t_k) for tf in tf_grid]
    x = np.log(np.asarray(tf_grid, dtype=float))
    return float(np.polyfit(x, np.asarray(logs), 1)[0])


def subconvexity_requirement(
    tf_grid=None, t_g: float = 2.0, t_k: float = 1.0, tol: float = 1.0e-3
) -> float:
    """Supremum of E with a decaying aggregate along the t_f grid (bisection).

    The sweep is in the t_f aspect with the second form's parameter held
    fixed and small: the subconvex numerator ((1+t_j)^2 (1+t_f)^6)^E against
    the (t_f t_g^{1/2})^{-1} envelope crosses zero slope at E = 1/8.
    """
    if tf_grid is None:
        tf_grid = (400.0, 800.0, 1600.0, 3200.0, 6400.0)
    lo, hi = 1.0e-4, 0.3
    if aggregate_slope(tf_grid, lo, t_g, t_k) >= 0:
        return lo
    if aggregate_slope(tf_grid, hi, t_g, t_k) <= 0:
        return hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if aggregate_slope(tf_grid, mid, t_g, t_k) < 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def number_field_envelope(
    t_f: float, t_g: float, r_places: int, s_places: int, eps: float = 0.0
) -> float:
    """log of (t_f (1+|2 t_f - t_g|))^{-r/4+eps} (t_f t_g^{1/2})^{-s+eps}.

    Formula-evaluation helper only; no multi-place aggregation is modeled.
    """
    if r_places < 0 or s_places < 0:
        raise InvalidArgumentError("place counts must be >= 0")
    a = math.log1p(t_f) + math.log1p(abs(2 * t_f - t_g))
    b = math.log1p(t_f) + 0.5 * math.log1p(t_g)
    return (-r_places / 4.0 + eps) * a + (-s_places + eps) * b
