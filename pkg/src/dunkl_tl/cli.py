"""Command-line entry point: ``dunkl-tl {group,kernels,norm,codec,verify}``.

Exit status: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import io, verification
from .config import ConfigError, RunConfig, load_config
from .frame import NeumannConfig, codec_roundtrip
from .grid import GridMismatch
from .littlewood_paley import (
    InvalidParameters,
    TLParams,
    analyze,
    cmo_from_coefficients,
    f_infty_infty_from_coefficients,
    f_infty_p_norm,
    tl_norm_from_coefficients,
    validate_params,
)
from .pipeline import Setting, root_system
from .reflection import DunklStructure

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2
SUITES = ("orthogonality", "duality", "lemma51", "equivalence", "split", "maximal")
EQUIVALENCE_PARAMS = "0,2,2;0.5,1.5,1.5;-0.5,3,2;0,0.9,2;0,2,0.9"

log = logging.getLogger("dunkl_tl")


class NumericalFailure(RuntimeError):
    pass


def _float_or_inf(text: str) -> float:
    return np.inf if text.strip().lower() in ("inf", "infinity") else float(text)


def parse_params(text: str) -> list[TLParams]:
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 3:
            raise ValueError(f"parameter tuple {chunk!r} must be alpha,p,q")
        a, p, q = (_float_or_inf(v) for v in parts)
        out.append(TLParams(a, p, q))
    return out


def _resolve(cfg: RunConfig, path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    return p if p.is_absolute() else Path(cfg.output_dir) / p


def _emit(args, cfg: RunConfig, command: str, summary: dict, passed: bool, **extra) -> None:
    report = {"command": command, "config": cfg.to_dict(), "summary": summary, "passed": passed, **extra}
    text = io.render_report(report)
    target = _resolve(cfg, getattr(args, "report", None))
    if target is not None:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)


# ---------------------------------------------------------------- commands


def cmd_group(args, cfg: RunConfig) -> int:
    s = DunklStructure(root_system(cfg))
    g = s.group
    summary = {"order": g.order, "N": s.homogeneous_dimension, "dimension": s.dimension,
               "roots": s.roots.roots, "kappa": s.roots.kappa}
    print(f"group: order {g.order}, N = {s.homogeneous_dimension:g}, dimension {s.dimension}")
    _emit(args, cfg, "group", summary, True, elements=g.elements)
    return EXIT_OK


def cmd_kernels(args, cfg: RunConfig) -> int:
    st = Setting(cfg)
    checks = verification.semigroup_checks(st)
    if args.dump_kernels:
        out = _resolve(cfg, args.dump_kernels)
        out.mkdir(parents=True, exist_ok=True)
        for k in st.family.scales:
            io.save_kernel(out / f"heat_k{k}.csv", 2.0**-k, st.family.heat(k).kernel)
            io.save_kernel(out / f"poisson_k{k}.csv", 2.0**-k, st.family.poisson(k).kernel)
    worst_mass = max(checks["mass_defect"].values())
    print(
        f"kernels: composition {max(checks['composition_heat'], checks['composition_poisson']):.2e}, "
        f"telescoping {checks['telescoping']:.2e}, symmetry {checks['symmetry']:.2e}, "
        f"max interior mass defect {worst_mass:.2e}"
    )
    _emit(args, cfg, "kernels", checks, bool(checks["algebra_ok"]))
    return EXIT_OK if checks["algebra_ok"] else EXIT_NUMERICAL


def cmd_norm(args, cfg: RunConfig) -> int:
    alpha, p, q = args.alpha, args.p, _float_or_inf(args.q)
    st = Setting(cfg)
    f = io.load_function(args.input, st.grid)
    if args.norm == "tl":
        verdict = validate_params(alpha, p, q, st.N)
        if not verdict.ok:
            raise InvalidParameters(verdict.message)
        c = analyze(f, st.lp, windowed=False)
        value = tl_norm_from_coefficients(c, TLParams(alpha, p, q))
    elif args.norm == "cmo":
        c = analyze(f, st.lp, windowed=True)
        value = cmo_from_coefficients(c, alpha, q, p)
    elif args.norm == "finfp":
        c = analyze(f, st.lp, windowed=True)
        value = f_infty_p_norm(f, st.lp, alpha, p)
    else:
        c = analyze(f, st.lp, windowed=True)
        value = f_infty_infty_from_coefficients(c, alpha)
    if args.dump_coefficients:
        io.save_coefficients(_resolve(cfg, args.dump_coefficients), c)
    print(f"{args.norm} norm (alpha={alpha:g}, p={p:g}, q={q:g}): {value:.17g}")
    _emit(args, cfg, "norm", {"norm": args.norm, "alpha": alpha, "p": p, "q": q, "value": value,
                              "input": str(args.input)}, True)
    return EXIT_OK


def cmd_codec(args, cfg: RunConfig) -> int:
    params = parse_params(args.params)
    st = Setting(cfg)
    for prm in params:
        prm.validate(st.N)
    f = io.load_function(args.input, st.grid) if args.input else st.bandlimited(cfg.seed)
    ncfg = NeumannConfig(cfg.tol, cfg.max_iter, cfg.subspace, cfg.band_tol)
    band = st.band if cfg.subspace else None
    rep = codec_roundtrip(f, st.operators, params, ncfg, band, st.rho_hat, seed=cfg.seed)
    print(
        f"codec: M={rep.M} rho_hat={rep.rho_hat:.4f} iterations={rep.iterations} "
        f"converged={rep.converged} l2_ratio={rep.l2_ratio:.4f}"
    )
    _emit(args, cfg, "codec", rep.to_dict(), rep.converged)
    return EXIT_OK if rep.converged else EXIT_NUMERICAL


def _suite(name: str, st: Setting, cfg: RunConfig, trials: int | None, seed: int,
           source: str = "bumps") -> dict:
    if name == "orthogonality":
        sweep = verification.contraction_sweep(st)
        dp = verification.almost_orthogonality_decay(st.lp, rho_sweep=sweep)
        crossing = next((M for M, r in sorted(sweep.items()) if r < 1), None)
        r1_norms, r1_fit = verification.operator_decay(st.lp, st.operators.R_1)
        r1 = {"gap_norms": r1_norms, "slope": None if r1_fit is None else r1_fit.value,
              "r2": None if r1_fit is None else r1_fit.r2}
        return {"summary": {**dp.to_dict(), "rho_by_M": sweep, "crossing_M": crossing, "through_R_1": r1},
                "passed": dp.passed}
    if name == "duality":
        ref_m = st.grid.spec.m // 2
        ref = Setting(cfg.with_overrides(m=ref_m)) if ref_m >= 2 and ref_m % 2 == 0 else None
        reps = {c: verification.duality_battery(st, c, trials or 50, seed, source, reference=ref)
                for c in verification.DUALITY_CASES}
        return {"summary": {c: {"c_hat": r.c_hat, "resolution_factor": r.resolution_factor,
                                "skipped": len(r.skipped), "passed": r.passed} for c, r in reps.items()},
                "trials": {c: {"ratios": r.ratios, "seeds": r.seeds} for c, r in reps.items()},
                "passed": all(r.passed for r in reps.values())}
    if name == "lemma51":
        reps = {f"k={k},{c}": verification.lemma51_battery(st.lp, k, c, N=st.N)
                for k in (0, 1, 2) if k in st.lp.window.scales for c in verification.DUALITY_CASES}
        return {"summary": {key: {"sup": r.extra["sup"], "spread": r.extra["spread"], "passed": r.passed}
                            for key, r in reps.items()},
                "trials": {key: {"norms": r.ratios, "y_index": r.seeds} for key, r in reps.items()},
                "passed": all(r.passed for r in reps.values())}
    if name == "equivalence":
        r = verification.norm_equivalence_battery(st, parse_params(EQUIVALENCE_PARAMS), trials or 20, seed)
        return {"summary": {k: v for k, v in r.extra.items() if k != "tl_ratios"},
                "trials": {"l2_ratios": r.ratios, "tl_ratios": r.extra["tl_ratios"], "seeds": r.seeds},
                "passed": r.passed}
    if name == "split":
        res = verification.split_self_test(st.operators)
        return {"summary": res, "passed": res["clean"]["passed"] and res["checker_ok"]}
    if name == "maximal":
        r = verification.maximal_battery(st, trials or 50, seed)
        return {"summary": {"c_hat": r.c_hat}, "trials": {"ratios": r.ratios, "seeds": r.seeds},
                "passed": r.passed}
    raise ValueError(f"unknown suite {name!r}")


def cmd_verify(args, cfg: RunConfig) -> int:
    st = Setting(cfg)
    names = SUITES if args.suite == "all" else (args.suite,)
    results = {n: _suite(n, st, cfg, args.trials, cfg.seed, args.source) for n in names}
    passed = all(r["passed"] for r in results.values())
    flags = {n: r["passed"] for n, r in results.items()}
    print("verify: " + ", ".join(f"{n} {'pass' if ok else 'FAIL'}" for n, ok in flags.items()))
    if len(names) == 1:
        r = results[names[0]]
        _emit(args, cfg, "verify", r["summary"], passed, suite=names[0], trials=r.get("trials", {}))
    else:
        _emit(args, cfg, "verify", {n: r["summary"] for n, r in results.items()}, passed, suite="all",
              trials={n: r.get("trials", {}) for n, r in results.items()}, flags=flags)
    return EXIT_OK if passed else EXIT_NUMERICAL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--threads", type=int, default=None, help="cap BLAS worker threads")
    common.add_argument("--report", help="write a JSON report to this path")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="dunkl-tl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("group", parents=[common], help="reflection group order and N")

    k = sub.add_parser("kernels", parents=[common], help="semigroup checks and kernel dumps")
    k.add_argument("--dump-kernels", metavar="DIR", help="write one CSV per cached time")

    n = sub.add_parser("norm", parents=[common], help="norm of a grid function")
    n.add_argument("--alpha", type=float, required=True)
    n.add_argument("--p", type=float, required=True)
    n.add_argument("--q", default="2", help="number or 'inf'")
    n.add_argument("--input", required=True, help="grid function CSV")
    n.add_argument("--norm", choices=("tl", "cmo", "finfp", "finfinf"), default="tl")
    n.add_argument("--dump-coefficients", metavar="CSV")

    c = sub.add_parser("codec", parents=[common], help="Calderon codec round trip")
    c.add_argument("--M", type=int, default=None)
    c.add_argument("--tol", type=float, default=None)
    c.add_argument("--max-iter", type=int, default=None)
    c.add_argument("--params", default="0,2,2")
    c.add_argument("--input", help="grid function CSV (default: seeded band-limited function)")

    v = sub.add_parser("verify", parents=[common], help="verification suites")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--trials", type=int, default=None)
    v.add_argument("--source", choices=("bumps", "noise"), default="bumps",
                   help="generator behind the band-limited duality inputs (noise: exploration only)")
    return parser


COMMANDS = {"group": cmd_group, "kernels": cmd_kernels, "norm": cmd_norm,
            "codec": cmd_codec, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        cfg = cfg.with_overrides(
            seed=args.seed,
            M=getattr(args, "M", None),
            tol=getattr(args, "tol", None),
            max_iter=getattr(args, "max_iter", None),
        )
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        with threadpool_limits(limits=args.threads):
            return COMMANDS[args.command](args, cfg)
    except (ConfigError, InvalidParameters, GridMismatch, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalFailure, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
