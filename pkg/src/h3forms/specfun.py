"""Gamma machinery and K-Bessel functions of imaginary order.

The central object is the scaled Bessel value

    g(t, u) = cosh(pi t / 2) * K_{it}(u),      t >= 0, u > 0,

which is real, O(t^{-1/3}) near the turning point u = t, and free of the
e^{-pi t/2} underflow that kills the raw K_{it}.  Evaluation is a hybrid:

* integral representation K_{it}(u) = int_0^inf e^{-u cosh v} cos(t v) dv,
  trapezoid with step halving and a certified truncation point, run in
  double precision whenever the a-priori cancellation budget allows and in
  adaptive-precision mpmath otherwise;
* scaled ascending series with the exponential factors removed analytically
  (double precision in its safe zone, adaptive mpmath beyond), used where
  the oscillatory integral would cancel catastrophically (u up to ~t).

Every path has an a-priori bound on the digits lost to cancellation, so the
working precision is chosen before evaluation, not discovered after.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import loggamma as _loggamma

from .errors import (
    InvalidArgumentError,
    NonconvergenceError,
    PoleProximityError,
    WindowError,
)

U_MIN, U_MAX = 1.0e-6, 1.0e4
T_MAX = 1.0e3
_T_QUAD = 8.0          # below this, the cosh-kernel integral runs in doubles
_LN_DOUBLE = 14.0      # nats of cancellation tolerated in double precision
_MP_LOCK = threading.Lock()  # mpmath precision is process-global state


# ---------------------------------------------------------------------------
# Gamma machinery
# ---------------------------------------------------------------------------

def log_gamma(z: complex) -> complex:
    """Principal branch of log Gamma; rejects the poles."""
    z = complex(z)
    if z.imag == 0.0 and z.real <= 0.0 and z.real == int(z.real):
        raise PoleProximityError(f"Gamma pole at z={z}")
    return complex(_loggamma(z))


def gamma_c_log(s: complex) -> complex:
    """log of Gamma_C(s) = 2 (2 pi)^{-s} Gamma(s)."""
    return math.log(2.0) - complex(s) * math.log(2 * math.pi) + log_gamma(s)


def stirling_envelope(x: float, y: float) -> float:
    """(1+|y|)^{x-1/2} * exp(-pi |y| / 2), the |Gamma(x+iy)| growth envelope."""
    if abs(x) > 10:
        raise WindowError("stirling_envelope is calibrated for |x| <= 10")
    return (1.0 + abs(y)) ** (x - 0.5) * math.exp(-math.pi * abs(y) / 2.0)


def log_abs_gamma_1it(t: float) -> float:
    """log |Gamma(1 + it)| = log sqrt(pi t / sinh(pi t)), stable for large t."""
    if t == 0.0:
        return 0.0
    x = math.pi * abs(t)
    # log sinh x = x + log1p(-e^{-2x}) - log 2
    log_sinh = x + math.log1p(-math.exp(-2 * x)) - math.log(2.0)
    return 0.5 * (math.log(x) - log_sinh)


def log_cosh_half_pi_t(t: float) -> float:
    """log cosh(pi t / 2) without overflow."""
    x = math.pi * abs(t) / 2.0
    return x + math.log1p(math.exp(-2 * x)) - math.log(2.0)


def whittaker_scale(t: float) -> float:
    """cosh(pi t/2) * |Gamma(1+it)| = sqrt(pi t / (2 tanh(pi t / 2))).

    This is the O(sqrt(t)) factor converting scaled Bessel values into
    |Gamma(1+it)|^{-1} K_{it} combinations without any huge exponentials.
    """
    if t == 0.0:
        return 1.0
    x = math.pi * abs(t) / 2.0
    return math.sqrt(x / math.tanh(x))


@dataclass(frozen=True)
class GammaFactorProduct:
    """An ordered product prod_m Gamma_C(s + sigma_m), Gamma_C(s) = 2(2pi)^{-s}Gamma(s).

    The shift list length is the archimedean degree of the completed
    L-function it represents (two per complex place factor).
    """

    factors: tuple

    def __len__(self) -> int:
        return len(self.factors)

    def log_value(self, s: complex = 0.0) -> complex:
        return sum((gamma_c_log(complex(s) + f) for f in self.factors), 0.0 + 0.0j)

    def abs_value(self, s: complex = 0.0) -> float:
        return math.exp(self.log_value(s).real)


# ---------------------------------------------------------------------------
# Regime classification (turning-point geometry of K_{it}(u))
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BesselRegime:
    label: str  # oscillatory | transition | exponential-decay
    t: float
    u: float
    C_transition: float
    decay_constant: float = 2.0 / 3.0


def balogh_classify(t: float, u: float, C: float = 1.0) -> BesselRegime:
    """Place (t, u) in the oscillatory / transition / decay regime.

    Boundaries at u = t -/+ C t^{1/3}; ties resolve toward transition.
    """
    if t <= 0 or u <= 0 or C <= 0:
        raise InvalidArgumentError("balogh_classify needs t, u, C > 0")
    width = C * t ** (1.0 / 3.0)
    if u < t - width:
        label = "oscillatory"
    elif u > t + width:
        label = "exponential-decay"
    else:
        label = "transition"
    return BesselRegime(label=label, t=float(t), u=float(u), C_transition=float(C))


def balogh_envelope(regime: BesselRegime) -> float:
    """The regime's displayed envelope value for |cosh(pi t/2) K_{it}(u)|."""
    t, u = regime.t, regime.u
    if regime.label == "oscillatory":
        return t ** -0.25 * (t - u) ** -0.25
    if regime.label == "transition":
        return t ** (-1.0 / 3.0)
    if regime.label == "exponential-decay":
        c = regime.decay_constant
        expo = c * (u / t) ** 1.5 * ((u - t) / t ** (1.0 / 3.0)) ** 1.5
        return u ** -0.25 * (u - t) ** -0.25 * math.exp(-expo)
    raise InvalidArgumentError(f"unknown regime label {regime.label!r}")


def decay_log_deficit(t: float, u: float) -> float:
    """Leading -log |g(t,u)| in the decay zone: sqrt(u^2-t^2) - t*arccos(t/u).

    Zero for u <= t (there |g| is algebraically small only).
    """
    if u <= t:
        return 0.0
    r = math.sqrt(u * u - t * t)
    return r - t * math.acos(min(1.0, t / u))


def _series_cancel_nats(t: float, u: float) -> float:
    """A-priori nats of cancellation in the scaled ascending series.

    Largest term is ~ e^{u^2/4t} while u <= 2t and ~ e^{u - 1.1 t} beyond
    (the I_0-type growth); the result itself is e^{-deficit} small.
    """
    peak = u * u / (4.0 * t) if u <= 2.0 * t else u - 1.1 * t
    return peak + decay_log_deficit(t, u) + 2.0


def _direct_cancel_nats(t: float, u: float) -> float:
    """A-priori nats of cancellation in the cosh-kernel integral."""
    return max(0.0, math.pi * t / 2.0 - u + decay_log_deficit(t, u)) + 2.0


# ---------------------------------------------------------------------------
# bessel_k_scaled: the hybrid engine
# ---------------------------------------------------------------------------

def _quad_double(t: float, u: float):
    """Double-precision trapezoid for log-scaled g; returns (log|g|, sign, cancel).

    Integrates e^{-u(cosh v - 1)} cos(tv) with the e^{-u} prefactor factored,
    then reattaches log cosh(pi t/2) - u.  Step halving certifies the value;
    the returned cancellation ratio lets the caller reject the result when
    the a-priori budget was optimistic.
    """
    V = math.acosh(1.0 + 52.0 / u)
    n = max(64, int(8 * V * (2.0 + t)))
    prev = None
    for _ in range(12):
        v = np.linspace(0.0, V, n + 1)
        f = np.exp(-u * (np.cosh(v) - 1.0)) * np.cos(t * v)
        S = float(np.trapezoid(f, v))
        cancel = float(np.trapezoid(np.abs(f), v)) / max(abs(S), 1e-300)
        # agreement cannot beat the roundoff floor set by cancellation
        floor = max(1.0e-13, 3.0 * cancel * 2.3e-16)
        if prev is not None and abs(S - prev) <= floor * max(abs(S), 1e-280):
            if S == 0.0:
                return -math.inf, 0.0, cancel
            return log_cosh_half_pi_t(t) - u + math.log(abs(S)), math.copysign(1.0, S), cancel
        prev = S
        n *= 2
    raise NonconvergenceError(f"trapezoid refinement stalled at t={t}, u={u}")


def _series_double(t: float, u: float):
    """Double-precision scaled ascending series; returns (log|g|, sign).

    g = -pi Im(What) / (1 - e^{-pi t}) with
    What = (u/2)^{it} e^{-i arg Gamma(1+it)} sqrt((1-e^{-2 pi t})/(2 pi t))
           * sum_k B_k,   B_0 = 1,  B_k = B_{k-1} (u^2/4) / (k (k + it)).
    """
    theta = _loggamma(1 + 1j * t).imag
    pref = np.exp(1j * t * math.log(u / 2.0) - 1j * theta) * math.sqrt(
        -math.expm1(-2 * math.pi * t) / (2 * math.pi * t)
    )
    x = u * u / 4.0
    s = 0.0 + 0.0j
    B = 1.0 + 0.0j
    k = 0
    while True:
        s += B
        k += 1
        B *= x / (k * (k + 1j * t))
        if k > 4 and abs(B) < 1e-19 * max(1.0, abs(s)):
            break
        if k > 40000:
            raise NonconvergenceError("ascending series stalled")
    val = -math.pi * (pref * s).imag / (-math.expm1(-math.pi * t))
    if val == 0.0:
        return -math.inf, 0.0
    return math.log(abs(val)), math.copysign(1.0, val)


def _series_mp(t: float, u: float, extra_nats: float):
    """Adaptive-precision scaled ascending series; returns (log|g|, sign)."""
    import mpmath

    dps = 22 + int(math.ceil(extra_nats / math.log(10.0)))
    with _MP_LOCK:
        with mpmath.workdps(dps):
            mp = mpmath.mp
            tt = mpmath.mpf(t)
            uu = mpmath.mpf(u)
            theta = mpmath.arg(mpmath.gamma(1 + 1j * tt))
            pref = mpmath.e ** (1j * tt * mpmath.log(uu / 2) - 1j * theta) * mpmath.sqrt(
                (1 - mpmath.e ** (-2 * mpmath.pi * tt)) / (2 * mpmath.pi * tt)
            )
            tol = mpmath.mpf(10) ** (-dps - 2)
            s = mpmath.mpc(0)
            B = mpmath.mpc(1)
            k = 0
            x = uu * uu / 4
            while True:
                s += B
                k += 1
                B *= x / (k * (k + 1j * tt))
                if k > 4 and abs(B) < tol * max(1, abs(s)):
                    break
                if k > 200000:
                    raise NonconvergenceError("mp ascending series stalled")
            val = -mpmath.pi * mpmath.im(pref * s) / (1 - mpmath.e ** (-mpmath.pi * tt))
            if val == 0:
                return -math.inf, 0.0
            return float(mpmath.log(abs(val))), 1.0 if val > 0 else -1.0


def _quad_mp(t: float, u: float, extra_nats: float):
    """Adaptive-precision cosh-kernel integral; returns (log|g|, sign).

    Panels split at the zeros of cos(tv) so each subinterval is smooth for
    tanh-sinh quadrature.
    """
    import mpmath

    dps = 22 + int(math.ceil(extra_nats / math.log(10.0)))
    V = math.acosh(1.0 + (60.0 + extra_nats) / u)
    with _MP_LOCK:
        with mpmath.workdps(dps):
            tt = mpmath.mpf(t)
            uu = mpmath.mpf(u)

            def f(v):
                return mpmath.e ** (-uu * (mpmath.cosh(v) - 1)) * mpmath.cos(tt * v)

            if t > 0:
                half = math.pi / t
                points = [0.0]
                x = half / 2.0
                while x < V:
                    points.append(x)
                    x += half
                points.append(V)
            else:
                points = [0.0, V]
            S = mpmath.quad(f, points)
            if S == 0:
                return -math.inf, 0.0
            lg = float(
                mpmath.log(abs(S)) + mpmath.log(mpmath.cosh(mpmath.pi * tt / 2)) - uu
            )
            return lg, 1.0 if S > 0 else -1.0


def _check_window(t: float, u: float) -> None:
    if not U_MIN <= u <= U_MAX:
        raise WindowError(f"u={u:.4g} outside [{U_MIN:g}, {U_MAX:g}]")
    if not 0.0 <= t <= T_MAX:
        raise WindowError(f"t={t:.4g} outside [0, {T_MAX:g}]")


@lru_cache(maxsize=200_000)
def _bessel_log_impl(t: float, u: float):
    """Dispatcher without the public window check (quadrature internals go
    below U_MIN when an integral needs the far log-tail of K_{it})."""
    if t < 1.0e-4:
        # essentially K_0: the cosh-kernel integral carries no cancellation
        lg, sign, cancel = _quad_double(t, u)
        return lg, sign
    ln_cancel_ser = _series_cancel_nats(t, u)
    ln_cancel_dir = _direct_cancel_nats(t, u)

    if ln_cancel_ser <= _LN_DOUBLE:
        return _series_double(t, u)

    if ln_cancel_dir <= _LN_DOUBLE + 2.0:
        lg, sign, cancel = _quad_double(t, u)
        if cancel * 2.3e-16 < 1.0e-10:
            return lg, sign
        return _quad_mp(t, u, math.log(max(cancel, 1.0)) + 5.0)

    if ln_cancel_ser <= 1.5 * ln_cancel_dir + 20.0:
        return _series_mp(t, u, ln_cancel_ser + 5.0)
    return _quad_mp(t, u, ln_cancel_dir + 5.0)


def bessel_k_scaled_log(t: float, u: float):
    """(log |g|, sign) for g(t,u) = cosh(pi t/2) K_{it}(u)."""
    t = float(t)
    u = float(u)
    _check_window(t, u)
    return _bessel_log_impl(t, u)


def bessel_k_scaled(t: float, u: float) -> float:
    """cosh(pi t/2) K_{it}(u) as a float (0.0 when below double range)."""
    lg, sign = bessel_k_scaled_log(t, u)
    if lg == -math.inf or lg < -744.0:
        return 0.0 * sign
    return sign * math.exp(lg)


def _series_double_batch(t: float, u: np.ndarray) -> np.ndarray:
    """Vectorized double-precision series over an array of u (t > 0 fixed)."""
    theta = _loggamma(1 + 1j * t).imag
    pref = np.exp(1j * t * np.log(u / 2.0) - 1j * theta) * math.sqrt(
        -math.expm1(-2 * math.pi * t) / (2 * math.pi * t)
    )
    x = u * u / 4.0
    s = np.zeros_like(u, dtype=complex)
    B = np.ones_like(u, dtype=complex)
    kmax = int(np.max(x)) * 3 + 60
    for k in range(1, kmax + 1):
        s += B
        B *= x / (k * (k + 1j * t))
        if k > 4 and np.max(np.abs(B)) < 1e-19 * max(1.0, float(np.max(np.abs(s)))):
            break
    return -math.pi * (pref * s).imag / (-math.expm1(-math.pi * t))


def _quad_double_batch(t: float, u: np.ndarray):
    """Vectorized trapezoid over a u-array at shared t.

    Returns (values, ok_mask); elements whose cancellation exceeds the double
    budget have ok=False and must be recomputed by the adaptive path.
    """
    u = np.asarray(u, dtype=float)
    V = math.acosh(1.0 + 52.0 / float(u.min()))
    n = max(256, int(8 * V * (2.0 + t)))
    prev = None
    for _ in range(10):
        v = np.linspace(0.0, V, n + 1)
        ker = np.exp(-np.outer(u, np.cosh(v) - 1.0))
        osc = np.cos(t * v)
        f = ker * osc
        S = np.trapezoid(f, v, axis=1)
        absS = np.trapezoid(np.abs(f), v, axis=1)
        cancel = absS / np.maximum(np.abs(S), 1e-300)
        floor = np.maximum(1.0e-13, 3.0 * cancel * 2.3e-16)
        if prev is not None:
            done = np.abs(S - prev) <= floor * np.maximum(np.abs(S), 1e-280)
            if done.all() or n > 300_000:
                scale = math.exp(log_cosh_half_pi_t(t))
                vals = scale * np.exp(-u) * S
                ok = done & (cancel * 2.3e-16 < 1.0e-10)
                return vals, ok
        prev = S
        n *= 2
    raise NonconvergenceError("batched trapezoid stalled")


def bessel_k_scaled_batch(t: float, u_values: np.ndarray) -> np.ndarray:
    """g(t, u) over an array of u: vectorized series and quadrature where the
    double-precision budgets allow, adaptive per-element evaluation elsewhere."""
    u_values = np.asarray(u_values, dtype=float)
    out = np.full_like(u_values, np.nan)
    over = np.clip(u_values, t, None)
    with np.errstate(invalid="ignore"):
        deficit = np.sqrt(np.maximum(over * over - t * t, 0.0)) - t * np.arccos(
            np.clip(t / np.maximum(over, 1e-300), -1.0, 1.0)
        )
    if t >= 1.0e-4:
        peak = np.where(
            u_values <= 2.0 * t, u_values * u_values / (4.0 * t), u_values - 1.1 * t
        )
        ser_ok = peak + deficit + 2.0 <= _LN_DOUBLE
    else:
        ser_ok = np.zeros_like(u_values, dtype=bool)
    if ser_ok.any():
        out[ser_ok] = _series_double_batch(t, u_values[ser_ok])
    dir_nats = np.maximum(0.0, math.pi * t / 2.0 - u_values + deficit) + 2.0
    quad_ok = (~ser_ok) & (dir_nats <= _LN_DOUBLE + 2.0) & (u_values > 0)
    if quad_ok.any():
        vals, ok = _quad_double_batch(t, u_values[quad_ok])
        idxs = np.nonzero(quad_ok)[0]
        out[idxs[ok]] = vals[ok]
    for idx in np.nonzero(np.isnan(out))[0]:
        lg, sign = _bessel_log_impl(t, float(u_values[idx]))
        out[idx] = 0.0 if lg < -744.0 else sign * math.exp(lg)
    return out


# ---------------------------------------------------------------------------
# Mellin transform of a product of two K-Bessel functions
# ---------------------------------------------------------------------------

def mellin_kk_closed(lam: complex, mu: complex, nu: complex) -> complex:
    """The four-Gamma display (1/Gamma(lam+1)) prod Gamma((1+lam+-mu+-nu)/2).

    Evaluated exactly as displayed; the true integral differs by the factor
    2^{lam-2} (see mellin_kk_quadrature), which calibration records.
    """
    lam, mu, nu = complex(lam), complex(mu), complex(nu)
    total = -log_gamma(lam + 1)
    for smu in (mu, -mu):
        for snu in (nu, -nu):
            arg = (1 + lam + smu + snu) / 2
            if arg.real <= 0 and abs(arg.imag) < 1e-14 and abs(arg.real - round(arg.real)) < 1e-12:
                raise PoleProximityError(f"Gamma argument {arg} at a pole")
            total = total + log_gamma(arg)
    return complex(np.exp(total))


def _mellin_integrand(lam: complex, t1: float, t2: float, x: np.ndarray) -> np.ndarray:
    y = np.exp(x)
    g1 = bessel_k_scaled_batch(t1, y)
    g2 = g1 if t2 == t1 else bessel_k_scaled_batch(t2, y)
    return np.exp((lam + 1) * x) * g1 * g2


def mellin_kk_quadrature(
    lam: complex, mu: complex, nu: complex, abs_tol: float = 1.0e-10
) -> complex:
    """Numerical int_0^inf y^lam K_mu(y) K_nu(y) dy for imaginary mu, nu.

    Log-substitution trapezoid with step halving until two refinements agree
    to the target; exponentially convergent because the transformed integrand
    is analytic and decays double-exponentially on the right.
    """
    lam = complex(lam)
    if lam.real <= 0:
        raise WindowError("mellin_kk_quadrature requires Re(lam) > 0")
    for m, name in ((mu, "mu"), (nu, "nu")):
        m = complex(m)
        if abs(m.real) > 1e-15:
            raise WindowError(f"{name} must be purely imaginary")
    t1, t2 = abs(complex(mu).imag), abs(complex(nu).imag)
    if t1 > 50 or t2 > 50:
        raise WindowError("|Im mu|, |Im nu| supported up to 50")
    re_l = lam.real
    amp_nats = math.pi * (t1 + t2) / 2.0
    x_hi = math.log(amp_nats / 2.0 + 40.0 + 6.0 * (re_l + 1.0))
    # left tail: |y^{lam+1} g1 g2| <= C y^{re_l+1} log^2 y; push below 1e-13
    x_lo = -36.0 / (re_l + 1.0) - 8.0
    scale = math.exp(-log_cosh_half_pi_t(t1) - log_cosh_half_pi_t(t2))
    n = max(64, int(math.ceil((x_hi - x_lo) * (1.0 + t1 + t2) / 0.04)))
    h = (x_hi - x_lo) / n
    x = x_lo + h * np.arange(n + 1)
    vals = _mellin_integrand(lam, t1, t2, x)
    prev = complex(h * (vals.sum() - 0.5 * (vals[0] + vals[-1])))
    for _ in range(7):
        mids = x[:-1] + h / 2.0
        mvals = _mellin_integrand(lam, t1, t2, mids)
        cur = prev / 2.0 + complex((h / 2.0) * mvals.sum())
        # tolerance on the scaled (returned) value
        if abs(cur - prev) * scale <= max(abs_tol / 10.0, 1e-13 * abs(cur) * scale):
            return cur * scale
        x = np.sort(np.concatenate([x, mids]))
        h /= 2.0
        prev = cur
    raise NonconvergenceError("mellin quadrature did not reach target")
