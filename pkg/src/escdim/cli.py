"""Command-line front end: census, dimension, render, verify, synthetic.

Every command reads one declarative config (flags win over file values),
writes byte-stable artifacts into the output directory, and returns the
documented exit code: 0 ok, 1 verification failure, 2 config error,
3 runtime error.  --threads is accepted for interface stability but
execution is serial; --seed only feeds sampling checks, never results.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import replace

from .census import (
    counting_function_order,
    find_poles,
    fit_modulus_exponent,
    fit_residue_exponent,
    read_census_csv,
    synthetic_census,
    write_census_csv,
)
from .config import ConfigError, RunConfig, default_config, load_config
from .covers import (
    admissibility_threshold,
    branch_info,
    koebe_sandwich_check,
    verify_nesting,
)
from .dimension import DimensionReport, escape_grid, report
from .figures import save_raster_png, save_report_png, write_ppm
from .geometry import Polynomial
from .ode import ODEState, WronskianDrift, fundamental_pair, integrate
from .utils import canonical_json, fmt_float

COS_1_PLUS_I = 0.8337300251311491 - 0.9888977057628651j


def _fail(msg: str) -> None:
    print(f"escdim: {msg}", file=sys.stderr)


def _out_path(cfg: RunConfig, name: str) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return os.path.join(cfg.out_dir, name)


def _fit_dict(fit) -> dict:
    return {"exponent": fit.exponent, "constant": fit.constant,
            "window": list(fit.window), "rms": fit.rms}


def cmd_census(cfg: RunConfig, args) -> int:
    spec = cfg.spec()
    census = find_poles(spec, cfg.census_radius)
    with open(_out_path(cfg, "census.csv"), "w", encoding="utf-8") as fh:
        write_census_csv(census, fh)
    fits: dict = {"function_id": census.function_id,
                  "search_radius": census.search_radius,
                  "n_poles": len(census.records),
                  "modulus": None, "residue": None, "order": None}
    if not census.records:
        _fail(f"no poles found inside |z| <= {cfg.census_radius:g}")
    elif len(census.records) >= 20:
        fits["modulus"] = _fit_dict(fit_modulus_exponent(census))
        fits["residue"] = _fit_dict(fit_residue_exponent(census))
        fits["order"] = counting_function_order(census)
    else:
        _fail(f"only {len(census.records)} poles; rank-law fits need 20")
    with open(_out_path(cfg, "fits.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json(fits))
    if census.flagged_incomplete and not args.allow_incomplete:
        _fail("census flagged incomplete (annulus counts off); "
              "rerun with --allow-incomplete to keep it")
        return 1
    return 0


def _load_census(cfg: RunConfig, args):
    path = args.census or os.path.join(cfg.out_dir, "census.csv")
    if not os.path.exists(path):
        raise ConfigError(
            f"census file {path} not found; run the census command first "
            f"or pass --synthetic m")
    with open(path, encoding="utf-8") as fh:
        return read_census_csv(fh, function_id=os.path.basename(path))


def _report_rows(rep: DimensionReport) -> str:
    lines = ["estimator,parameter,value"]
    lines.append(f"theoretical,m={rep.m},{fmt_float(rep.theoretical)}")
    lines.append(f"bk_upper,m={rep.m},{fmt_float(rep.bk_upper)}")
    if rep.tail_exponent is not None:
        lines.append(f"tail_exponent,,{fmt_float(rep.tail_exponent)}")
    for size, root in rep.bowen:
        lines.append(f"bowen_root,{size},{fmt_float(root)}")
    for R, val in rep.mcmullen:
        lines.append(f"mcmullen_lower,{fmt_float(R)},{fmt_float(val)}")
    return "\n".join(lines) + "\n"


def _report_json(rep: DimensionReport) -> dict:
    return {
        "m": rep.m,
        "theoretical": rep.theoretical,
        "bk_upper": rep.bk_upper,
        "tail_exponent": rep.tail_exponent,
        "tail_window": list(rep.tail_window) if rep.tail_window else None,
        "bowen_R": rep.bowen_R,
        "bowen": [[size, root] for size, root in rep.bowen],
        "mcmullen": [[R, val] for R, val in rep.mcmullen],
        "ordering_ok": rep.ordering_ok,
        "tolerances": dict(rep.tolerances),
        "errors": list(rep.errors),
    }


def _write_report(cfg: RunConfig, rep: DimensionReport) -> None:
    with open(_out_path(cfg, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json(_report_json(rep)))
    with open(_out_path(cfg, "report.csv"), "w", encoding="utf-8") as fh:
        fh.write(_report_rows(rep))
    save_report_png(rep, _out_path(cfg, "report.png"))
    for err in rep.errors:
        _fail(f"estimator skipped: {err}")


def _synthetic_census_for(cfg: RunConfig, m: int, j_max: int | None):
    if j_max is None:
        biggest = max(cfg.alphabet_sizes, default=10000)
        j_max = max(3 * biggest, 30000)
    return synthetic_census(m, 1.0, 0.15, j_max)


def _synthetic_tail_radius(census) -> float:
    return 0.98 * abs(census.records[len(census.records) // 3].a)


def cmd_dimension(cfg: RunConfig, args) -> int:
    if args.synthetic is not None:
        census = _synthetic_census_for(cfg, args.synthetic, args.j_max)
        rep = report(census, cfg.r_ladder, m=args.synthetic,
                     alphabet_sizes=cfg.alphabet_sizes,
                     tail_R=_synthetic_tail_radius(census))
    else:
        census = _load_census(cfg, args)
        rep = report(census, cfg.r_ladder,
                     alphabet_sizes=cfg.alphabet_sizes, tail_R=cfg.R)
    _write_report(cfg, rep)
    return 0


def cmd_render(cfg: RunConfig, args) -> int:
    spec = cfg.spec()
    path = args.census or os.path.join(cfg.out_dir, "census.csv")
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            spec.attach_census(read_census_csv(fh))
    x0, x1, y0, y1 = cfg.window
    raster = escape_grid(spec, (x0, x1, y0, y1), cfg.nx, cfg.ny,
                         cfg.n_steps, cfg.R)
    with open(_out_path(cfg, "grid.ppm"), "wb") as fh:
        write_ppm(raster, fh)
    save_raster_png(raster, _out_path(cfg, "grid.png"))
    return 0


def _verify_checks(cfg: RunConfig) -> list[dict]:
    checks: list[dict] = []

    def add(name: str, ok: bool, value: float, bound: float, note: str = ""):
        checks.append({"name": name, "ok": bool(ok),
                       "value": value if math.isfinite(value) else None,
                       "bound": bound, "note": note})

    p = Polynomial(cfg.coeffs)
    try:
        path = [cfg.basepoint, cfg.basepoint + 2.0 + 1.0j,
                cfg.basepoint + 1.0 + 3.0j]
        fp = fundamental_pair(p, cfg.basepoint, path, cfg.ode_tol)
        add("wronskian_drift", fp.max_drift < 1e-8, fp.max_drift, 1e-8)
    except Exception as exc:
        add("wronskian_drift", False, math.inf, 1e-8, str(exc))

    out = integrate(Polynomial((1.0,)), [0, 1 + 1j], ODEState(0, 1, 0), 1e-12)
    err = abs(out[-1].w - COS_1_PLUS_I)
    add("cosine_golden", err < 1e-10, err, 1e-10)

    spec = cfg.spec()
    samples = (cfg.basepoint + 0.3 + 0.11j, cfg.basepoint + 1.1 - 0.23j,
               cfg.basepoint - 0.7 + 0.37j)
    try:
        sch = spec.schwarzian_residual(samples, 1e-3)
        add("schwarzian_residual", sch.max_residual < 1e-4,
            sch.max_residual, 1e-4)
    except Exception as exc:
        add("schwarzian_residual", False, math.inf, 1e-4, str(exc))

    # Any failure while building the census counts against the checks it
    # feeds rather than aborting the verification run.
    try:
        census = find_poles(spec, min(cfg.census_radius, 25.0))
    except Exception as exc:
        note = f"pole search failed: {exc}"
        add("census_annuli", False, math.inf, 0.0, note)
        add("koebe_sandwich", False, math.inf, 0.0, note)
        add("cylinder_nesting", False, math.inf, 0.0, note)
        return checks
    spec.attach_census(census)
    add("census_annuli", not census.flagged_incomplete,
        0.0 if not census.flagged_incomplete else 1.0, 0.0,
        "; ".join(census.notes))
    n = len(census.records)
    threshold = admissibility_threshold(census, cfg.R)
    ranks = list(range(threshold, min(n, threshold + 7) + 1))
    if not ranks:
        add("koebe_sandwich", False, math.inf, 0.0,
            f"no admissible poles at R={cfg.R:g}")
        return checks
    try:
        worst = math.inf
        ok = True
        for j in ranks:
            rep = koebe_sandwich_check(spec, branch_info(census, j, cfg.R))
            worst = min(worst, rep.worst_margin)
            ok = ok and rep.passed
        add("koebe_sandwich", ok, worst, 0.0,
            f"poles {ranks[0]}..{ranks[-1]}")
        code = (ranks[0], ranks[1]) if len(ranks) > 1 else (ranks[0], ranks[0])
        nest = verify_nesting(spec, census, code, cfg.R)
        add("cylinder_nesting", nest.passed, nest.worst_margin, 0.0,
            f"code {code}")
    except Exception as exc:
        add("branch_checks", False, math.inf, 0.0, str(exc))
    return checks


def cmd_verify(cfg: RunConfig, args) -> int:
    checks = _verify_checks(cfg)
    all_ok = all(c["ok"] for c in checks)
    with open(_out_path(cfg, "verify.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json({"checks": checks, "all_ok": all_ok}))
    for c in checks:
        status = "PASS" if c["ok"] else "FAIL"
        shown = "n/a" if c["value"] is None else f"{c['value']:.3e}"
        print(f"{status} {c['name']} value={shown} "
              f"bound={c['bound']:.3e} {c['note']}".rstrip())
    return 0 if all_ok else 1


def cmd_synthetic(cfg: RunConfig, args) -> int:
    census = _synthetic_census_for(cfg, args.m, args.j_max)
    with open(_out_path(cfg, "census.csv"), "w", encoding="utf-8") as fh:
        write_census_csv(census, fh)
    rep = report(census, cfg.r_ladder, m=args.m,
                 alphabet_sizes=cfg.alphabet_sizes,
                 tail_R=_synthetic_tail_radius(census))
    _write_report(cfg, rep)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="escdim",
        description="escaping-set dimension experiments for functions with "
                    "polynomial Schwarzian derivative")
    parser.add_argument("--config", help="path to a run config file")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int,
                        help="RNG seed for sampling checks (overrides config)")
    parser.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; execution is serial")
    sub = parser.add_subparsers(dest="command", required=True)

    p_census = sub.add_parser("census", help="find poles and fit rank laws")
    p_census.add_argument("--allow-incomplete", action="store_true",
                          help="exit 0 even if annulus counts look short")
    p_census.set_defaults(func=cmd_census)

    p_dim = sub.add_parser("dimension", help="run the dimension estimators")
    p_dim.add_argument("--synthetic", type=int, metavar="M",
                       help="use an exact-law census of degree M instead of "
                            "a measured one")
    p_dim.add_argument("--census", help="census CSV to read")
    p_dim.add_argument("--j-max", type=int, dest="j_max",
                       help="synthetic census size")
    p_dim.set_defaults(func=cmd_dimension)

    p_render = sub.add_parser("render", help="rasterize the escape grid")
    p_render.add_argument("--census", help="census CSV for near-pole checks")
    p_render.set_defaults(func=cmd_render)

    p_verify = sub.add_parser("verify", help="run the invariant suites")
    p_verify.set_defaults(func=cmd_verify)

    p_syn = sub.add_parser("synthetic",
                           help="build an exact-law census and its report")
    p_syn.add_argument("m", type=int, help="polynomial degree of the "
                                           "Schwarzian coefficient")
    p_syn.add_argument("--j-max", type=int, dest="j_max",
                       help="number of synthetic poles")
    p_syn.set_defaults(func=cmd_synthetic)
    return parser


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else default_config()
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except ConfigError as exc:
        _fail(str(exc))
        return 2
    try:
        return args.func(cfg, args)
    except ConfigError as exc:
        _fail(str(exc))
        return 2
    except ValueError as exc:
        _fail(f"invalid request: {exc}")
        return 2
    except Exception as exc:
        _fail(f"runtime error: {type(exc).__name__}: {exc}")
        return 3


if __name__ == "__main__":
    sys.exit(main())
