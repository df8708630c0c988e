"""Batch front-end: config-driven evaluation, verification suites and sweeps.

Config files are plain  key = value  lines under [section] headers
(configparser syntax).  Every float written to a table uses 17 significant
digits, summation orders are fixed, and worker threads only ever map pure
functions over ordered inputs, so identical configs produce byte-identical
outputs at any --threads value.

Exit codes: 0 success, 2 usage, 3 numeric window, 4 nonconvergence,
5 verification failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import autoforms, eisenstein, exponents, quadfield, specfun, tripleprod, zeta
from .errors import (
    H3FormsError,
    InvalidArgumentError,
    NonconvergenceError,
    ParseError,
    PoleProximityError,
    SingularPointError,
    TruncationFailureError,
    UsageError,
    WindowError,
)

VERIFY_SUITES = ("mellin", "watson", "automorphy", "supnorm", "q1", "scattering")
SWEEP_TARGETS = ("supnorm", "aggregate", "subconvexity")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_WINDOW = 3
EXIT_NONCONVERGENCE = 4
EXIT_VERIFICATION = 5


def _fmt(x: float) -> str:
    return f"{x:.16e}"


@dataclass
class RunConfig:
    field_D: int = -1
    threads: int = 1
    out_format: str = "csv"
    out_dir: Path = Path(".")
    sections: dict = dc_field(default_factory=dict)

    def get(self, section: str, key: str, default, cast=float):
        sec = self.sections.get(section, {})
        if key not in sec:
            return default
        raw = sec[key]
        try:
            if cast is bool:
                return raw.strip().lower() in ("1", "true", "yes")
            return cast(raw)
        except ValueError as exc:
            raise UsageError(f"bad config value [{section}] {key} = {raw}: {exc}")

    def get_floats(self, section: str, key: str, default):
        sec = self.sections.get(section, {})
        if key not in sec:
            return default
        try:
            return [float(v) for v in sec[key].replace(";", ",").split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad float list [{section}] {key}: {exc}")


def load_config(path, out_dir, out_format, threads) -> RunConfig:
    cfg = RunConfig()
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
        read = parser.read(path)
        if not read:
            raise UsageError(f"config file {path} not found or unreadable")
        cfg.sections = {s: dict(parser.items(s)) for s in parser.sections()}
        cfg.field_D = cfg.get("run", "field_d", cfg.field_D, int)
        cfg.out_format = cfg.get("run", "format", cfg.out_format, str)
        cfg.threads = cfg.get("run", "threads", cfg.threads, int)
    if out_format is not None:
        cfg.out_format = out_format
    if threads is not None:
        cfg.threads = threads
    if cfg.out_format not in ("csv", "json"):
        raise UsageError(f"unknown output format {cfg.out_format!r}")
    if cfg.threads < 1:
        raise UsageError("--threads must be >= 1")
    cfg.out_dir = Path(out_dir) if out_dir is not None else Path(".")
    return cfg


def _pmap(fn, items, threads: int):
    """Order-preserving map; identical output for any thread count."""
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


# ---------------------------------------------------------------------------
# eval-eisenstein
# ---------------------------------------------------------------------------

def cmd_eval_eisenstein(cfg: RunConfig) -> int:
    field = quadfield.make_field(cfg.field_D)
    ev = eisenstein.EisensteinEvaluator(
        field=field,
        tail_tolerance=cfg.get("eisenstein", "tail_tolerance", 1.0e-10),
        max_norm_cutoff=cfg.get("eisenstein", "max_norm_cutoff", 200_000, int),
    )
    pts_raw = cfg.sections.get("eisenstein", {}).get("points", "0.3,0.2,1.1")
    t_values = cfg.get_floats("eisenstein", "t_values", [4.0])
    points = []
    for chunk in pts_raw.split(";"):
        xs = [float(v) for v in chunk.split(",") if v.strip()]
        if len(xs) != 3:
            raise UsageError(f"point {chunk!r} is not x,y,r")
        points.append(eisenstein.HyperbolicPoint(*xs))
    jobs = [(P, t) for t in t_values for P in points]
    vals = _pmap(lambda job: eisenstein.eisenstein_eval(ev, job[0], job[1]), jobs, cfg.threads)
    rows = ["x,y,r,t,re_E,im_E"]
    for (P, t), v in zip(jobs, vals):
        rows.append(
            ",".join([_fmt(P.x), _fmt(P.y), _fmt(P.r), _fmt(t), _fmt(v.real), _fmt(v.imag)])
        )
    if cfg.out_format == "csv":
        _write(cfg.out_dir / "eisenstein_eval.csv", "\n".join(rows) + "\n")
    else:
        data = [
            {"x": P.x, "y": P.y, "r": P.r, "t": t, "re": v.real, "im": v.imag}
            for (P, t), v in zip(jobs, vals)
        ]
        _write(cfg.out_dir / "eisenstein_eval.json", json.dumps(data, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify suites
# ---------------------------------------------------------------------------

def _suite_q1(cfg: RunConfig):
    checks = []
    vals = np.linspace(0.0, 10.0, 12)
    worst = 0.0
    for a in vals:
        for b in vals:
            for c in vals:
                for d in vals:
                    qd = exponents.SpectralQuadruple(a, b, c, d)
                    worst = max(worst, abs(exponents.q1(qd) - exponents.q1_closed(qd)))
    checks.append(("closed_form_equivalence_12p4_grid", worst, 1.0e-12, worst <= 1.0e-12))
    rng = np.random.default_rng(20240901)
    pts = rng.uniform(0.0, 100.0, (20000, 4))
    mn = min(exponents.q1(exponents.SpectralQuadruple(*row)) for row in pts)
    checks.append(("nonnegativity_random", mn, 0.0, mn >= -1.0e-12))
    hom = 0.0
    for row in pts[:200]:
        qd = exponents.SpectralQuadruple(*row)
        hom = max(hom, abs(exponents.q1(qd.scaled(3.0)) - 3.0 * exponents.q1(qd)))
    checks.append(("homogeneity_degree_1", hom, 1.0e-9, hom <= 1.0e-9))
    return checks


def _suite_scattering(cfg: RunConfig):
    checks = []
    worst = 0.0
    for D in quadfield.CLASS_NUMBER_ONE_D:
        ctx = zeta.ZetaContext(field=quadfield.make_field(D))
        for t in np.arange(0.5, 100.5, 0.5):
            worst = max(worst, abs(abs(zeta.scattering_phi(ctx, 1j * t)) - 1.0))
    checks.append(("unitarity_nine_fields", worst, 1.0e-6, worst <= 1.0e-6))
    ctx = zeta.ZetaContext(field=quadfield.make_field(cfg.field_D))
    sym = abs(
        zeta.scattering_phi(ctx, -3j).conjugate() - zeta.scattering_phi(ctx, 3j)
    )
    checks.append(("reflection_conjugation", sym, 1.0e-10, sym <= 1.0e-10))
    return checks


def _suite_mellin(cfg: RunConfig):
    checks = []
    anchor = specfun.mellin_kk_quadrature(1.0, 0j, 0j)
    checks.append(("anchor_lambda1_value_half", abs(anchor - 0.5), 1.0e-8, abs(anchor - 0.5) <= 1.0e-8))
    ratios = []
    for lam in (1.0, 2.0, 3.0):
        for t1 in (0.0, 1.0):
            for t2 in (0.0, 1.5):
                r = specfun.mellin_kk_quadrature(lam, 1j * t1, 1j * t2) / specfun.mellin_kk_closed(
                    lam, 1j * t1, 1j * t2
                )
                ratios.append(abs(r) / 2.0 ** (lam - 2.0))
    spread = (max(ratios) - min(ratios)) / (sum(ratios) / len(ratios))
    checks.append(("normalized_ratio_constant", spread, 1.0e-6, spread <= 1.0e-6))
    return checks


def _suite_watson(cfg: RunConfig):
    cal = tripleprod.measure_calibration()
    checks = [
        ("ratio_spread", cal["ratio_spread"], 1.0e-6, cal["ratio_spread"] <= 1.0e-6),
        (
            "degenerate_anchor_pi_squared",
            abs(tripleprod.t_integral_closed(tripleprod.TripleSpectrum(0, 0, 0)) - math.pi ** 2),
            1.0e-10,
            abs(tripleprod.t_integral_closed(tripleprod.TripleSpectrum(0, 0, 0)) - math.pi ** 2) <= 1.0e-10,
        ),
        ("measured_constant", cal["measured_constant"], None, True),
        ("phase_residual", cal["phase_residual_max"], 1.0e-8, cal["phase_residual_max"] <= 1.0e-8),
    ]
    return checks


def _random_words(field, rng, count):
    gens = [
        eisenstein.translation(field, field.element(1, 0)),
        eisenstein.translation(field, field.element(0, 1)),
        eisenstein.inversion(field),
    ]
    words = []
    for _ in range(count):
        g = eisenstein.group_element(field, (1, 0), (0, 0), (0, 0), (1, 0))
        for _ in range(int(rng.integers(1, 4))):
            g = eisenstein.compose(g, gens[int(rng.integers(0, len(gens)))])
        words.append(g)
    return words


def _suite_automorphy(cfg: RunConfig, count=12):
    rng = np.random.default_rng(20240902)
    worst = 0.0
    for D in (-1, -3):
        field = quadfield.make_field(D)
        ev = eisenstein.EisensteinEvaluator(field=field, tail_tolerance=1.0e-11)
        for g in _random_words(field, rng, count):
            P = eisenstein.HyperbolicPoint(
                float(rng.uniform(-0.4, 0.4)),
                float(rng.uniform(-0.4, 0.4)),
                float(rng.uniform(0.9, 1.6)),
            )
            t = float(rng.uniform(0.5, 20.0))
            worst = max(worst, eisenstein.check_automorphy(ev, P, t, g))
    return [("automorphy_residual", worst, 1.0e-6, worst <= 1.0e-6)]


def _suite_supnorm(cfg: RunConfig):
    field = quadfield.make_field(cfg.field_D)
    ev = eisenstein.EisensteinEvaluator(field=field, tail_tolerance=1.0e-8)
    xs = np.linspace(0.05, 0.45, 6)
    rs = np.geomspace(0.8, 2.0, 6)
    grid = [
        eisenstein.HyperbolicPoint(x, y, r) for r in rs for x in xs for y in xs
    ]
    tg = [round(v, 3) for v in np.geomspace(20.0, 60.0, 6)]
    table = eisenstein.supnorm_scan(ev, grid, tg)
    ok = table.fitted_exponent <= 1.1
    return [("fitted_exponent", table.fitted_exponent, 1.1, ok)]


def cmd_verify(cfg: RunConfig, suite: str) -> int:
    if suite not in VERIFY_SUITES:
        raise UsageError(f"unknown suite {suite!r}; choose from {VERIFY_SUITES}")
    runner = {
        "q1": _suite_q1,
        "scattering": _suite_scattering,
        "mellin": _suite_mellin,
        "watson": _suite_watson,
        "automorphy": _suite_automorphy,
        "supnorm": _suite_supnorm,
    }[suite]
    checks = runner(cfg)
    report = {
        "suite": suite,
        "checks": [
            {
                "name": name,
                "measured": measured,
                "tolerance": tol,
                "passed": bool(passed),
            }
            for (name, measured, tol, passed) in checks
        ],
        "all_pass": all(p for (_, _, _, p) in checks),
    }
    _write(cfg.out_dir / f"verify_{suite}.json", json.dumps(report, indent=2, sort_keys=True) + "\n")
    for c in report["checks"]:
        print(f"[{'PASS' if c['passed'] else 'FAIL'}] {suite}.{c['name']}: {c['measured']}")
    return EXIT_OK if report["all_pass"] else EXIT_VERIFICATION


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def _sweep_supnorm(cfg: RunConfig) -> int:
    field = quadfield.make_field(cfg.field_D)
    ev = eisenstein.EisensteinEvaluator(
        field=field, tail_tolerance=cfg.get("supnorm", "tail_tolerance", 1.0e-8)
    )
    nt = cfg.get("supnorm", "t_count", 8, int)
    t_lo = cfg.get("supnorm", "t_min", 20.0)
    t_hi = cfg.get("supnorm", "t_max", 120.0)
    n_side = cfg.get("supnorm", "grid_side", 6, int)
    if nt < 2:
        raise UsageError("supnorm sweep needs at least two t values")
    xs = np.linspace(0.05, 0.45, n_side)
    rs = np.geomspace(
        cfg.get("supnorm", "r_min", 0.8), cfg.get("supnorm", "r_max", 2.0), n_side
    )
    grid = [eisenstein.HyperbolicPoint(x, y, r) for r in rs for x in xs for y in xs]
    tg = [round(v, 6) for v in np.geomspace(t_lo, t_hi, nt)]
    table = eisenstein.supnorm_scan(ev, grid, tg)
    if cfg.out_format == "csv":
        _write(cfg.out_dir / "supnorm_sweep.csv", table.to_csv())
    else:
        _write(cfg.out_dir / "supnorm_sweep.json", table.to_json() + "\n")
    print(f"supnorm fitted exponent: {table.fitted_exponent:.6f}")
    return EXIT_OK


def _sweep_aggregate(cfg: RunConfig) -> int:
    kind = cfg.sections.get("policy", {}).get("kind", "GLH")
    delta = cfg.get("policy", "delta", 0.001)
    rho = cfg.get("policy", "density_exponent", 0.0)
    policy = exponents.LPolicy(kind=kind, exponent_delta=delta)
    tf_grid = cfg.get_floats("aggregate", "tf_grid", [100.0, 200.0, 400.0, 800.0, 1600.0])
    tk = cfg.get("aggregate", "t_k", 1.0)
    covary = cfg.get("aggregate", "covary_tg", True, bool)
    tg_fixed = cfg.get("aggregate", "t_g", 30.0)
    jobs = [(tf, tf if covary else tg_fixed) for tf in tf_grid]
    reports = _pmap(
        lambda j: exponents.aggregate_spectral_sum(j[0], j[1], tk, policy, rho), jobs, cfg.threads
    )
    rows = ["t_f,t_g,t_k,log_aggregate,log_tail,q1_at_threshold,regime,density_exponent"]
    for (tf, tg), rep in zip(jobs, reports):
        rows.append(
            ",".join(
                [
                    _fmt(tf),
                    _fmt(tg),
                    _fmt(tk),
                    _fmt(rep.aggregate),
                    _fmt(rep.tail),
                    _fmt(rep.q1),
                    rep.regime,
                    _fmt(rho),
                ]
            )
        )
    slope = float(
        np.polyfit(np.log([j[0] for j in jobs]), [r.aggregate for r in reports], 1)[0]
    )
    rows.append(f"# fitted_slope,{_fmt(slope)}")
    _write(cfg.out_dir / "aggregate_sweep.csv", "\n".join(rows) + "\n")
    print(f"aggregate sweep slope: {slope:.6f}")
    band = cfg.get_floats("aggregate", "acceptance_band", [])
    if band and not band[0] <= slope <= band[1]:
        return EXIT_VERIFICATION
    return EXIT_OK


def _sweep_subconvexity(cfg: RunConfig) -> int:
    tf_grid = cfg.get_floats(
        "subconvexity", "tf_grid", [400.0, 800.0, 1600.0, 3200.0, 6400.0]
    )
    E = exponents.subconvexity_requirement(tuple(tf_grid))
    rows = ["E,slope"]
    for Ex in np.linspace(0.05, 0.2, 7):
        rows.append(f"{_fmt(Ex)},{_fmt(exponents.aggregate_slope(tuple(tf_grid), float(Ex)))}")
    rows.append(f"# threshold_E,{_fmt(E)}")
    _write(cfg.out_dir / "subconvexity.csv", "\n".join(rows) + "\n")
    print(f"subconvexity threshold E: {E:.6f}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, target: str) -> int:
    if target not in SWEEP_TARGETS:
        raise UsageError(f"unknown sweep target {target!r}; choose from {SWEEP_TARGETS}")
    return {"supnorm": _sweep_supnorm, "aggregate": _sweep_aggregate, "subconvexity": _sweep_subconvexity}[target](cfg)


# ---------------------------------------------------------------------------
# ingest-coefficients
# ---------------------------------------------------------------------------

def cmd_ingest(cfg: RunConfig, path: str) -> int:
    form = autoforms.load_coefficients(path)
    out = cfg.out_dir / "coefficients_normalized.csv"
    autoforms.save_coefficients(form, out)
    summary = {
        "field_D": form.field.D,
        "t": form.t,
        "rows": len(form.coefficients),
        "norm_coverage": form.norm_coverage,
    }
    _write(cfg.out_dir / "ingest_summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"ingested {summary['rows']} coefficients, coverage {summary['norm_coverage']}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _error_json(exc: H3FormsError) -> str:
    return json.dumps({"error": {"code": exc.code, "message": str(exc)}}, sort_keys=True)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="h3forms", description=__doc__)
    parser.add_argument("--config", default=None)
    parser.add_argument("--out", default=".")
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--threads", type=int, default=None)
    sub = parser.add_subparsers(dest="verb")
    sub.add_parser("eval-eisenstein")
    p_verify = sub.add_parser("verify")
    p_verify.add_argument("suite", choices=VERIFY_SUITES)
    p_sweep = sub.add_parser("sweep")
    p_sweep.add_argument("target", choices=SWEEP_TARGETS)
    p_ing = sub.add_parser("ingest-coefficients")
    p_ing.add_argument("file")
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if args.verb is None:
        parser.print_usage()
        return EXIT_USAGE
    try:
        cfg = load_config(args.config, args.out, args.format, args.threads)
        if args.verb == "eval-eisenstein":
            return cmd_eval_eisenstein(cfg)
        if args.verb == "verify":
            return cmd_verify(cfg, args.suite)
        if args.verb == "sweep":
            return cmd_sweep(cfg, args.target)
        if args.verb == "ingest-coefficients":
            return cmd_ingest(cfg, args.file)
        raise UsageError(f"unknown verb {args.verb!r}")
    except (UsageError, ParseError, InvalidArgumentError) as exc:
        print(_error_json(exc))
        return EXIT_USAGE
    except (WindowError, PoleProximityError, SingularPointError, TruncationFailureError) as exc:
        print(_error_json(exc))
        return EXIT_WINDOW
    except NonconvergenceError as exc:
        print(_error_json(exc))
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
