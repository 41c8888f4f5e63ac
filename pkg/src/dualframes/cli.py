"""Verify dual wavelet frame filter banks, refinable functions and fast framelet transforms.

Exit codes: 0 pass, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .banks import example_path
from .config import Config, ConfigError, load_config
from .filterbank import (
    FilterBank,
    NonstationaryBank,
    jsonable,
    cross_check_oep,
    verify_mask_normalization,
    verify_nonstationary_oep,
    verify_oep,
    verify_theta_normalization,
)
from .framecheck import (
    QUAD_TOL,
    QuadratureError,
    SystemSpec,
    TestFunction,
    check_characterization,
    check_characterization_real,
    check_duality,
    check_nonstationary,
    default_grid,
    shannon_system,
)
from .fwt import PyramidError, analyze, pr_test, pyramid_from_csv, pyramid_to_csv, signal_from_csv, signal_to_csv, synthesize
from .refinable import RefinableRangeError, RefinableSpec, generator_set, sample_grid

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _dumps(obj: Any) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit_report(args, obj: dict, default_stdout: bool = True) -> None:
    text = _dumps(obj)
    path = getattr(args, "report", None)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    elif default_stdout:
        sys.stdout.write(text)


def _emit_text(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path: str) -> Config:
    if path.startswith("example:"):
        p = example_path(path[len("example:"):])
        if not p.is_file():
            raise ConfigError(f"no shipped example {path!r}")
        return load_config(p)
    return load_config(path)


def _stationary(cfg: Config) -> FilterBank:
    if not isinstance(cfg.bank, FilterBank):
        raise UsageError("this command needs a stationary filter bank configuration")
    return cfg.bank


def _nonstationary(cfg: Config) -> NonstationaryBank:
    if not isinstance(cfg.bank, NonstationaryBank):
        raise UsageError("this command needs a nonstationary configuration")
    if cfg.bank.tail_rule is None:
        raise UsageError("nonstationary configurations must declare tail_rule")
    return cfg.bank


def _verdict_code(ok: bool) -> int:
    return EXIT_PASS if ok else EXIT_FAIL


def _tol(args, default: float) -> float:
    v = getattr(args, "tolerance", None)
    return default if v is None else v


# commands


def cmd_verify_oep(args) -> int:
    bank = _stationary(_load(args.config))
    tol = _tol(args, 1e-12)
    rep = verify_oep(bank, tol)
    th_ok, th_entry = verify_theta_normalization(bank, tol)
    m_ok, m_entries = verify_mask_normalization(bank, tol)
    cc = cross_check_oep(bank, report=rep)
    ok = rep.passed and th_ok and m_ok
    out = rep.to_dict()
    out["oep_verdict"] = rep.verdict
    out["verdict"] = "pass" if ok else "fail"
    out["normalization"] = {"theta": th_entry.to_dict(), "masks": [e.to_dict() for e in m_entries],
                            "passed": th_ok and m_ok}
    out["cross_check"] = {"numeric_max": cc.numeric_max, "reconstruction_gap": cc.reconstruction_gap,
                          "agrees": cc.agrees}
    out["bank"] = bank.name or args.config
    _emit_report(args, out)
    return _verdict_code(ok)


def cmd_verify_nonstationary(args) -> int:
    bank = _nonstationary(_load(args.config))
    rep = verify_nonstationary_oep(bank, _tol(args, 1e-12), threads=max(1, getattr(args, "threads", 1)))
    out = rep.to_dict()
    out["bank"] = bank.name or args.config
    _emit_report(args, out)
    return _verdict_code(rep.passed)


def _pick_generator(bank, name: str, truncation: int):
    gens = generator_set(bank, truncation)
    for prefix, group in (("phi~", gens.phi_tilde), ("psi~", gens.psi_tilde), ("phi", gens.phi), ("psi", gens.psi)):
        if name.startswith(prefix):
            idx = name[len(prefix):] or "1"
            if idx.isdigit() and 1 <= int(idx) <= len(group):
                return group[int(idx) - 1]
    raise UsageError(f"unknown generator {name!r}")


def cmd_eval_refinable(args) -> int:
    cfg = _load(args.config)
    if args.generator:
        target = _pick_generator(_stationary(cfg), args.generator, args.truncation)
    elif isinstance(cfg.bank, NonstationaryBank):
        target = RefinableSpec.nonstationary(_nonstationary(cfg), args.level, args.truncation, tilde=args.tilde)
    else:
        bank = _stationary(cfg)
        target = RefinableSpec.stationary(bank.a_tilde if args.tilde else bank.a, bank.d, args.truncation)
    sample = sample_grid(target, args.xi_min, args.xi_max, args.samples)
    _emit_text(args.output, sample.to_csv())
    if getattr(args, "report", None):
        _emit_report(args, {"samples": args.samples, "truncation": args.truncation,
                            "max_tail_bound": float(sample.tail_bound.max()), "verdict": "pass"})
    return EXIT_PASS


def _system(cfg: Config, truncation: int, self_dual: bool) -> SystemSpec:
    if cfg.shannon is not None:
        sysm = shannon_system(cfg.shannon.dilation, cfg.shannon.irrational)
    elif isinstance(cfg.bank, NonstationaryBank):
        sysm = SystemSpec.nonstationary(_nonstationary(cfg), truncation)
    else:
        sysm = SystemSpec.from_bank(_stationary(cfg), truncation)
    return sysm.self_dual() if self_dual else sysm


def cmd_check_characterization(args) -> int:
    cfg = _load(args.config)
    sysm = _system(cfg, args.truncation, args.self_dual)
    grid = default_grid(args.grid_points)
    tol = _tol(args, 1e-8)
    if cfg.shannon is not None:
        rep = check_characterization_real(sysm, grid, args.kmax, args.jmax, tol)
        kind = "real"
    elif isinstance(cfg.bank, NonstationaryBank):
        rep = check_nonstationary(sysm, grid, 0, args.kmax, args.jmax, tol)
        kind = "nonstationary"
    else:
        rep = check_characterization(sysm, grid, args.kmax, args.jmax, tol)
        kind = "integer"
    out = rep.to_dict()
    out["kind"] = kind
    _emit_report(args, out)
    return _verdict_code(rep.passed)


def cmd_check_duality(args) -> int:
    cfg = _load(args.config)
    sysm = _system(cfg, args.truncation, args.self_dual)
    f = TestFunction.parse(args.f)
    g = TestFunction.parse(args.g) if args.g else f
    table = check_duality(sysm, f, g, args.J, args.Jmax, args.tol, quad_tol=args.quad_tol)
    _emit_text(args.output, table.to_csv())
    if getattr(args, "report", None):
        _emit_report(args, table.to_dict())
    return _verdict_code(table.passed)


def cmd_transform(args) -> int:
    bank = _load(args.config).bank
    if bank is None:
        raise UsageError("transform needs a filter bank configuration")
    text = Path(args.input).read_text(encoding="utf-8")
    if args.direction == "analyze":
        v = signal_from_csv(text)
        if v.mode != bank.mode:
            raise UsageError(f"signal is {v.mode} but the bank is {bank.mode}")
        _emit_text(args.output, pyramid_to_csv(analyze(v, bank, args.levels)))
    else:
        pyr = pyramid_from_csv(text, bank, args.levels)
        _emit_text(args.output, signal_to_csv(synthesize(pyr)))
    return EXIT_PASS


def cmd_pr_test(args) -> int:
    bank = _load(args.config).bank
    if bank is None:
        raise UsageError("pr-test needs a filter bank configuration")
    rep = pr_test(bank, args.trials, args.maxlen, args.levels, args.seed, _tol(args, 1e-10))
    _emit_report(args, rep.to_dict())
    return _verdict_code(rep.passed)


# parser


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("global options")
    g.add_argument("--report", metavar="PATH", default=argparse.SUPPRESS, help="write the JSON report here")
    g.add_argument("--tolerance", type=float, default=argparse.SUPPRESS, help="verification tolerance")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dualframes", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="JSON configuration (or example:NAME for a shipped one)")
        _common(p)
        p.set_defaults(func=fn)
        return p

    add("verify-oep", cmd_verify_oep, "check the OEP identities of a stationary bank")
    add("verify-nonstationary", cmd_verify_nonstationary, "check a nonstationary bank level by level")

    p = add("eval-refinable", cmd_eval_refinable, "sample a refinable function or generator to CSV")
    p.add_argument("--xi-min", type=float, default=-8 * 3.141592653589793)
    p.add_argument("--xi-max", type=float, default=8 * 3.141592653589793)
    p.add_argument("--samples", type=int, default=1024)
    p.add_argument("--truncation", type=int, default=30)
    p.add_argument("--level", type=int, default=0, help="nonstationary level j")
    p.add_argument("--tilde", action="store_true", help="use the dual masks")
    p.add_argument("--generator", help="phi, phiN, psiN, phi~N or psi~N instead of the refinable function")
    p.add_argument("--output", help="CSV destination (default stdout)")

    p = add("check-characterization", cmd_check_characterization, "bracket identity residuals")
    p.add_argument("--grid-points", type=int, default=512)
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--jmax", type=int, default=8)
    p.add_argument("--truncation", type=int, default=30)
    p.add_argument("--self-dual", action="store_true", help="use the primal generators on both sides")

    p = add("check-duality", cmd_check_duality, "partial-sum convergence table")
    p.add_argument("--J", type=int, default=0)
    p.add_argument("--Jmax", type=int, default=12)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--quad-tol", type=float, default=QUAD_TOL)
    p.add_argument("--f", default="bump:0,1", help="test function, e.g. bump:0,1")
    p.add_argument("--g", default=None, help="second test function (default: same as --f)")
    p.add_argument("--truncation", type=int, default=30)
    p.add_argument("--self-dual", action="store_true", help="tight-frame mode: tilde system = primal")
    p.add_argument("--output", help="CSV destination (default stdout)")

    p = add("transform", cmd_transform, "fast framelet analysis or synthesis of CSV data")
    p.add_argument("direction", choices=("analyze", "synthesize"))
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--levels", type=int, required=True)

    p = add("pr-test", cmd_pr_test, "random perfect-reconstruction trials")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--maxlen", type=int, default=64)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_PASS
    try:
        return args.func(args)
    except (ConfigError, UsageError, PyramidError, RefinableRangeError, QuadratureError,
            ValueError, OSError) as exc:
        print(f"dualframes: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
