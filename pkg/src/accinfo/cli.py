"""Command-line front end.

    accinfo optimize ENSEMBLE.json [--functional ai|helstrom] [--k K] ...
    accinfo helstrom ENSEMBLE.json
    accinfo scenario adhoc|tomographic [--epsilon EPS]
    accinfo sweep --epsilon-grid 0:0.65:0.05 --out sweep.csv
    accinfo sweep --input ENSEMBLE.json --out trace.csv

Exit status: 0 converged, 1 bad input, 2 round limit hit, 3 no progress.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import warnings
from dataclasses import dataclass, replace
from typing import Optional

from . import scenarios
from .ensemble import (
    Ensemble,
    joint_probabilities,
    load_ensemble,
    mutual_information,
    povm_to_json,
    save_ensemble,
    success_rate,
)
from .errors import NoProgress, RangeWarning
from .optimizer import (
    ACCESSIBLE_INFORMATION,
    FUNCTIONALS,
    HELSTROM,
    IterationConfig,
    OptimizationResult,
    optimize,
    write_trace,
    write_trace_csv,
)

log = logging.getLogger("accinfo")

EXIT_OK, EXIT_INPUT, EXIT_MAX_ROUNDS, EXIT_NO_PROGRESS = 0, 1, 2, 3

# Restarts used for the tomographic sextet unless --restarts is given; single
# starts occasionally stall on a non-global stationary point there.
TOMOGRAPHIC_RESTARTS = 4


class InputError(Exception):
    pass


@dataclass
class RunOptions:
    command: str
    input_path: Optional[str] = None
    scenario_name: Optional[str] = None
    epsilon: Optional[float] = None
    epsilon_grid: Optional[list] = None
    functional: str = "ai"
    config: IterationConfig = IterationConfig()
    restarts_given: bool = False
    trace_path: Optional[str] = None
    out_path: Optional[str] = None
    ensemble_out: Optional[str] = None
    log_base: str = "nat"

    def __post_init__(self):
        if self.command == "scenario":
            if self.scenario_name not in scenarios.SCENARIOS:
                raise InputError(f"unknown scenario {self.scenario_name!r}")
            if (self.scenario_name == "tomographic") != (self.epsilon is not None):
                raise InputError("--epsilon is required for, and only for, the tomographic scenario")
        if self.epsilon is not None and not 0.0 <= self.epsilon <= 1.0:
            raise InputError(f"epsilon must lie in [0, 1], got {self.epsilon}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _info_in(base: str, nats: float) -> float:
    return nats / math.log(2) if base == "bit" else nats


def _exit_for(res: OptimizationResult) -> int:
    return EXIT_OK if res.converged else EXIT_MAX_ROUNDS


def result_json(res: OptimizationResult, functional: str, base: str) -> dict:
    if functional == "helstrom":
        value, units = res.info_value, "probability"
    else:
        value, units = _info_in(base, res.info_value), base
    return {
        "functional": functional,
        "value": value,
        "units": units,
        "residual": res.residual,
        "rounds": res.rounds_used,
        "converged": res.converged,
        "K": res.K,
        "seed": res.seed,
        "povm": povm_to_json(res.povm),
    }


def _summary(res: OptimizationResult, functional: str, base: str) -> str:
    if functional == "helstrom":
        what = f"success_rate={_fmt(res.info_value)}"
    else:
        unit = "bits" if base == "bit" else "nats"
        what = f"info={_fmt(_info_in(base, res.info_value))} {unit}"
    return (f"functional={functional} K={res.K} {what} residual={res.residual:.3e} "
            f"rounds={res.rounds_used} converged={'yes' if res.converged else 'no'}")


def _write_artifacts(opts: RunOptions, res: OptimizationResult) -> None:
    if opts.out_path:
        with open(opts.out_path, "w") as fh:
            json.dump(result_json(res, opts.functional, opts.log_base), fh, indent=1)
            fh.write("\n")
    if opts.trace_path:
        write_trace_csv(res.trace, opts.trace_path)


def _load(opts: RunOptions) -> Ensemble:
    try:
        return load_ensemble(opts.input_path)
    except (OSError, ValueError, TypeError, KeyError, IndexError) as exc:
        raise InputError(f"cannot read ensemble {opts.input_path}: {exc}") from exc


def _run(opts: RunOptions, e: Ensemble) -> OptimizationResult:
    f = FUNCTIONALS[opts.functional]
    cfg = opts.config
    if opts.functional == "helstrom":
        cfg = replace(cfg, k_strategy="fixed", K=e.J)
    return optimize(e, f, cfg)


def cmd_optimize(opts: RunOptions) -> int:
    e = _load(opts)
    res = _run(opts, e)
    _write_artifacts(opts, res)
    print(_summary(res, opts.functional, opts.log_base))
    return _exit_for(res)


def cmd_helstrom(opts: RunOptions) -> int:
    opts = replace(opts, functional="helstrom")
    e = _load(opts)
    res = _run(opts, e)
    _write_artifacts(opts, res)
    print(_summary(res, "helstrom", opts.log_base))
    if e.J == 2:
        exact = success_rate(joint_probabilities(e, scenarios.helstrom_projectors(e)))
        print(f"analytic success_rate={_fmt(exact)}")
    return _exit_for(res)


def _scenario_adhoc(opts: RunOptions) -> int:
    e = scenarios.adhoc_ensemble()
    if opts.ensemble_out:
        save_ensemble(e, opts.ensemble_out)
    proj = scenarios.helstrom_projectors(e)
    d = joint_probabilities(e, proj)
    print(f"helstrom analytic: success_rate={_fmt(success_rate(d))} "
          f"ai={_fmt(mutual_information(d, 'bit'))} bits")
    hel = optimize(e, HELSTROM, replace(opts.config, k_strategy="fixed", K=2))
    print("helstrom numeric:  " + _summary(hel, "helstrom", opts.log_base))
    cfg = opts.config
    if cfg.K is None and cfg.k_strategy == "fixed":
        cfg = replace(cfg, k_strategy="grow")
    ai = optimize(e, ACCESSIBLE_INFORMATION, cfg)
    print("accessible info:   " + _summary(ai, "ai", opts.log_base))
    _write_artifacts(replace(opts, functional="ai"), ai)
    return EXIT_OK if hel.converged and ai.converged else EXIT_MAX_ROUNDS


def tomographic_config(cfg: IterationConfig, restarts_given: bool) -> IterationConfig:
    if cfg.K is None:
        cfg = replace(cfg, K=6, k_strategy="fixed")
    if not restarts_given:
        cfg = replace(cfg, restarts=TOMOGRAPHIC_RESTARTS)
    return cfg


def _scenario_tomographic(opts: RunOptions) -> int:
    eps = opts.epsilon
    e = scenarios.tomographic_sextet(eps)
    if opts.ensemble_out:
        save_ensemble(e, opts.ensemble_out)
    res = optimize(e, ACCESSIBLE_INFORMATION, tomographic_config(opts.config, opts.restarts_given))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RangeWarning)
        i_ae = scenarios.i_alice_eve(eps)
    i_ab = scenarios.i_alice_bob(eps)
    print(f"epsilon={_fmt(eps)} I_AB={_fmt(i_ab)} bits I_AE(analytic)={_fmt(i_ae)} bits "
          f"I_AE(numeric)={_fmt(res.info_value / math.log(2))} bits")
    if eps >= scenarios.SEPARABLE_EPS:
        print(f"note: {scenarios.SEPARABLE_NOTE}")
    print(_summary(res, "ai", opts.log_base))
    _write_artifacts(replace(opts, functional="ai"), res)
    return _exit_for(res)


def cmd_scenario(opts: RunOptions) -> int:
    if opts.scenario_name == "adhoc":
        return _scenario_adhoc(opts)
    return _scenario_tomographic(opts)


SWEEP_HEADER = ["epsilon", "i_ab_bits", "i_ae_bits", "i_numeric_bits"]


def epsilon_sweep(grid, cfg: IterationConfig) -> list[list[float]]:
    rows = []
    for eps in grid:
        res = optimize(scenarios.tomographic_sextet(eps), ACCESSIBLE_INFORMATION, cfg)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RangeWarning)
            i_ae = scenarios.i_alice_eve(eps)
        rows.append([eps, scenarios.i_alice_bob(eps), i_ae, res.info_value / math.log(2)])
    return rows


def cmd_sweep(opts: RunOptions) -> int:
    if opts.input_path:
        e = _load(opts)
        res = _run(opts, e)
        if opts.out_path:
            write_trace_csv(res.trace, opts.out_path)
        else:
            write_trace(res.trace, sys.stdout)
        return _exit_for(res)
    if not opts.epsilon_grid:
        raise InputError("empty epsilon grid")
    rows = epsilon_sweep(opts.epsilon_grid, tomographic_config(opts.config, opts.restarts_given))
    fh = open(opts.out_path, "w", newline="") if opts.out_path else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_HEADER)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop included) or a comma-separated list."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise InputError("grid step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(n, 0))]
    return [float(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--functional", choices=["ai", "helstrom"], default="ai")
    common.add_argument("--k", type=int, default=None)
    common.add_argument("--k-strategy", choices=["fixed", "davies", "grow", "prune"], default=None)
    common.add_argument("--alpha0", type=float, default=None)
    common.add_argument("--tol-info", type=float, default=1e-12)
    common.add_argument("--tol-residual", type=float, default=1e-8)
    common.add_argument("--max-rounds", type=int, default=20000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--restarts", type=int, default=None)
    common.add_argument("--trace", default=None, help="iteration trace CSV path")
    common.add_argument("--out", default=None, help="result JSON (or sweep CSV) path")
    common.add_argument("--bits", action="store_true", help="report information in bits")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="accinfo", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    opt = sub.add_parser("optimize", parents=[common], help="maximize a functional over POVMs")
    opt.add_argument("input")
    hel = sub.add_parser("helstrom", parents=[common], help="minimum-error discrimination")
    hel.add_argument("input")
    sc = sub.add_parser("scenario", parents=[common], help="run a built-in example")
    sc.add_argument("name")
    sc.add_argument("--epsilon", type=float, default=None)
    sc.add_argument("--ensemble-out", default=None, help="write the scenario ensemble JSON here")
    sw = sub.add_parser("sweep", parents=[common], help="plot-ready CSV data")
    sw.add_argument("--epsilon-grid", default=None)
    sw.add_argument("--input", default=None, help="ensemble JSON for a convergence trace")
    return p


def options_from_args(args) -> RunOptions:
    strategy = args.k_strategy or ("fixed" if args.k is not None else "grow")
    try:
        cfg = IterationConfig(
            alpha0=args.alpha0, tol_info=args.tol_info, tol_residual=args.tol_residual,
            max_rounds=args.max_rounds, k_strategy=strategy, K=args.k, seed=args.seed,
            restarts=args.restarts or 1,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    grid = None
    if args.command == "sweep" and args.input is None:
        try:
            grid = parse_grid(args.epsilon_grid or "")
        except ValueError as exc:
            raise InputError(f"bad epsilon grid: {exc}") from exc
    return RunOptions(
        command=args.command,
        input_path=getattr(args, "input", None),
        scenario_name=getattr(args, "name", None),
        epsilon=getattr(args, "epsilon", None),
        epsilon_grid=grid,
        functional=args.functional,
        config=cfg,
        restarts_given=args.restarts is not None,
        trace_path=args.trace,
        out_path=args.out,
        ensemble_out=getattr(args, "ensemble_out", None),
        log_base="bit" if args.bits else "nat",
    )


COMMANDS = {
    "optimize": cmd_optimize,
    "helstrom": cmd_helstrom,
    "scenario": cmd_scenario,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        opts = options_from_args(args)
        return COMMANDS[opts.command](opts)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NoProgress as exc:
        print(f"error: no progress: {exc}", file=sys.stderr)
        return EXIT_NO_PROGRESS


if __name__ == "__main__":
    sys.exit(main())
