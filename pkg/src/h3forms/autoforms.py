"""Cusp forms from ingested Fourier coefficients.

Genuine Hecke-Maass coefficients over a Bianchi group come from external
solvers; this module only evaluates the expansion

    f(z + rj) = sum_{0 != mu, N(mu) <= coverage} rho(mu) r K_{it}(2 pi |mu~| r)
                * e(<mu~, z>),       mu~ = (2/sqrt(d_K)) conj(mu),

normalizes the first coefficient by the completed symmetric-square value,
and forms the coefficient side of the Rankin-Selberg pairing.  The file
format below is the ingestion contract.

Coefficient files: UTF-8 CSV, header  D,t,a,b,re_rho,im_rho , one row per
mu = a + b w_K, lines starting with '#' ignored.  Floats are written with
17 significant digits so write-then-read is the identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    CoverageGapError,
    DuplicateIndexError,
    FieldMismatchError,
    InvalidArgumentError,
    ParseError,
)
from .eisenstein import HyperbolicPoint
from .quadfield import Field, RingElement, enumerate_by_norm, make_field
from .specfun import bessel_k_scaled_batch, log_cosh_half_pi_t

COEFF_HEADER = "D,t,a,b,re_rho,im_rho"


@dataclass
class CuspFormData:
    field: Field
    t: float
    coefficients: dict  # (a, b) -> complex rho
    norm_coverage: int

    def __post_init__(self):
        if self.norm_coverage < 0:
            raise InvalidArgumentError("norm_coverage must be >= 0")
        for v in self.coefficients.values():
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise InvalidArgumentError("non-finite coefficient")

    def rho(self, a: int, b: int) -> complex:
        return self.coefficients.get((a, b), 0.0 + 0.0j)


def _validate_coverage(field: Field, coeffs: dict, declared: int) -> None:
    for e in enumerate_by_norm(field, declared):
        if (e.a, e.b) not in coeffs:
            raise CoverageGapError(
                f"missing coefficient for mu=({e.a},{e.b}), norm {e.norm()} "
                f"<= declared coverage {declared}"
            )


def load_coefficients(path) -> CuspFormData:
    """Parse and validate a coefficient file (see module docstring)."""
    coeffs = {}
    field = None
    t = None
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    header_seen = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != COEFF_HEADER:
                raise ParseError(f"expected header {COEFF_HEADER!r}", line=lineno)
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 6:
            raise ParseError(f"expected 6 fields, got {len(parts)}", line=lineno)
        try:
            D = int(parts[0])
            t_row = float(parts[1])
            a = int(parts[2])
            b = int(parts[3])
            rho = complex(float(parts[4]), float(parts[5]))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if field is None:
            field = make_field(D)
            t = t_row
        elif D != field.D:
            raise ParseError(f"field tag D={D} differs from {field.D}", line=lineno)
        elif t_row != t:
            raise ParseError(f"spectral parameter {t_row} differs from {t}", line=lineno)
        mu = field.element(a, b)
        if mu.is_zero():
            raise ParseError("constant term rows are not allowed (cusp form)", line=lineno)
        if (a, b) in coeffs:
            raise DuplicateIndexError(f"duplicate mu=({a},{b})", line=lineno)
        coeffs[(a, b)] = rho
    if not header_seen:
        raise ParseError("empty file: header row required", line=1)
    if field is None:
        raise ParseError("no coefficient rows and no field tag", line=len(lines))
    coverage = max((field.element(a, b).norm() for (a, b) in coeffs), default=0)
    _validate_coverage(field, coeffs, coverage)
    return CuspFormData(field=field, t=t, coefficients=coeffs, norm_coverage=coverage)


def save_coefficients(form: CuspFormData, path) -> None:
    rows = [COEFF_HEADER]
    items = sorted(
        form.coefficients.items(),
        key=lambda kv: (form.field.element(*kv[0]).norm(), kv[0][0], kv[0][1]),
    )
    for (a, b), rho in items:
        rows.append(
            f"{form.field.D},{form.t:.17g},{a},{b},{rho.real:.17g},{rho.imag:.17g}"
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")


def empty_form(field: Field, t: float) -> CuspFormData:
    return CuspFormData(field=field, t=t, coefficients={}, norm_coverage=0)


def single_term_form(field: Field, t: float, rho1: complex = 1.0) -> CuspFormData:
    """Synthetic fixture: rho = rho1 at mu = 1, zero at the other units."""
    coeffs = {
        (e.a, e.b): complex(rho1) if (e.a, e.b) == (1, 0) else 0.0 + 0.0j
        for e in enumerate_by_norm(field, 1)
    }
    return CuspFormData(field=field, t=t, coefficients=coeffs, norm_coverage=1)


def cuspform_eval(form: CuspFormData, P: HyperbolicPoint):
    """(value, tail_risk) of the truncated expansion at P.

    tail_risk flags evaluations where the smallest omitted Bessel argument
    is still below t + 5 t^{1/3}, i.e. the recorded coverage cannot certify
    an exponentially small truncation error.
    """
    if not 1.0e-2 <= P.r <= 1.0e2:
        raise InvalidArgumentError("r outside [1e-2, 1e2]")
    field = form.field
    if not form.coefficients:
        return 0.0 + 0.0j, False
    keys = sorted(form.coefficients.keys(), key=lambda ab: (field.element(*ab).norm(), ab))
    mus = [field.element(a, b) for a, b in keys]
    rho = np.array([form.coefficients[k] for k in keys], dtype=complex)
    absmu = np.array([m.abs_value() for m in mus])
    embeds = np.array([m.embed() for m in mus], dtype=complex)
    # |mu~| = 2 |mu| / sqrt(|d_K|); <mu~, z> phase as in the Eisenstein case
    sq = field.sqrt_abs_disc
    u = 2 * math.pi * (2.0 / sq) * absmu * P.r
    scale = math.exp(-log_cosh_half_pi_t(form.t))
    bess = bessel_k_scaled_batch(form.t, u) * scale
    phases = np.exp((-4j * math.pi / sq) * (embeds * P.z).imag)
    value = complex(np.dot(rho * bess, phases) * P.r)
    u_next = 2 * math.pi * (2.0 / sq) * math.sqrt(form.norm_coverage + 1) * P.r
    tail_risk = u_next < form.t + 5 * form.t ** (1.0 / 3.0) if form.t > 0 else False
    return value, tail_risk


@dataclass(frozen=True)
class NormalizationRecord:
    lambda_sym2: float
    rho1_abs: float


def normalize_first_coeff(field: Field, lambda_sym2: float) -> NormalizationRecord:
    """|rho(1)| from |rho(1)|^{-2} = (sqrt(|d_K|)/4) Lambda(1, sym^2 f)."""
    if not lambda_sym2 > 0:
        raise InvalidArgumentError("Lambda(1, sym^2 f) must be positive")
    rho1 = (field.sqrt_abs_disc * lambda_sym2 / 4.0) ** -0.5
    return NormalizationRecord(lambda_sym2=lambda_sym2, rho1_abs=rho1)


def rs_coefficient_series(
    f: CuspFormData, g: CuspFormData, s: complex, X: int, exponent_base: str = "abs"
) -> complex:
    """Partial Rankin-Selberg sum over 0 < N(mu) <= X of
    rho_f(mu) conj(rho_g(mu)) / |mu|^s  (or / N(mu)^s with exponent_base="norm").

    The |mu|-power convention is the displayed one; the norm-power variant is
    exposed because L-series bookkeeping often wants it.
    """
    if f.field != g.field:
        raise FieldMismatchError("forms live on different fields")
    if X > min(f.norm_coverage, g.norm_coverage):
        raise InvalidArgumentError("X exceeds the coefficient coverage")
    if exponent_base not in ("abs", "norm"):
        raise InvalidArgumentError("exponent_base must be 'abs' or 'norm'")
    s = complex(s)
    total = 0.0 + 0.0j
    for e in enumerate_by_norm(f.field, X):
        rf = f.rho(e.a, e.b)
        rg = g.rho(e.a, e.b)
        if rf == 0 or rg == 0:
            continue
        n = e.norm()
        power = s / 2 if exponent_base == "abs" else s
        total += rf * rg.conjugate() * n ** (-power)
    return total
