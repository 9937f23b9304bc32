"""Command-line interface.

Subcommands:
    simulate <scenario-file>      run one scenario, write trace + summaries
    family <name> <scenario-file> run an experiment family
    tune <fa-config-file>         constrained firefly search over the gains
    check-gains <gains-file>      evaluate the feasibility gate

Exit codes: 0 success, 2 invalid configuration, 3 infeasible gains without
--force, 4 simulation diverged. PMALAB_OUTPUT_DIR overrides the output
directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import config as cfg
from .control import PsmcGains
from .errors import (BudgetExhaustedError, ConfigError, InfeasibleGainsError,
                     SimulationDivergedError, SingularGainError)
from .firefly import run as fa_run
from .firefly import write_history_csv
from .harness import (FAMILIES, Scenario, gate_scenario, run_family,
                      run_scenario, write_kv_file)
from .observer import lambda1_bound
from .stability import check_feasibility

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_DIVERGED = 4

OUTPUT_DIR_ENV = "PMALAB_OUTPUT_DIR"


def _output_dir(cli_value: str | None, scenario_value: str | None) -> str:
    env = os.environ.get(OUTPUT_DIR_ENV)
    return env or cli_value or scenario_value or "out"


def _cmd_simulate(args) -> int:
    scenario = cfg.scenario_from_file(args.scenario)
    if args.force:
        scenario = replace(scenario, force=True)
    out = _output_dir(args.out, scenario.output_dir)
    try:
        trace, report, gate = run_scenario(scenario)
    except (SimulationDivergedError, SingularGainError) as exc:
        partial = getattr(exc, "partial_trace", None)
        if partial is not None and len(partial):
            os.makedirs(out, exist_ok=True)
            partial.write_csv(os.path.join(out, "trace_partial.csv"))
            print(f"partial trace flushed to {out}/trace_partial.csv",
                  file=sys.stderr)
        raise
    os.makedirs(out, exist_ok=True)
    trace.write_csv(os.path.join(out, "trace.csv"))
    kv = {"scenario.controller": scenario.controller}
    kv.update(report.to_kv())
    kv.update(gate.to_kv())
    write_kv_file(os.path.join(out, "summary.kv"), kv)
    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"controller: {scenario.controller}\n"
                 f"MAE: {report.mae:.6g} m\n"
                 f"IAE: {report.iae:.6g} m\n"
                 f"sup|S_q|: {report.sup_sq:.6g}\n"
                 f"feasible: {gate.feasible}\n")
    print(f"trace and summaries written to {out}/")
    print(f"MAE={report.mae:.6g} m  IAE={report.iae:.6g} m  "
          f"sup|S_q|={report.sup_sq:.6g}")
    return EXIT_OK


def _cmd_family(args) -> int:
    base = cfg.scenario_from_file(args.scenario)
    out = _output_dir(args.out, base.output_dir)
    summary = run_family(args.name, base, output_dir=out)
    print(summary.as_text())
    print(f"artifacts written to {out}/")
    return EXIT_OK


def _cmd_tune(args) -> int:
    fa_config, scenario_path = cfg.fa_config_from_file(args.config)
    if scenario_path is None:
        raise ConfigError("tuner config must name a base scenario "
                          "(scenario = path/to/scenario.cfg)")
    base = cfg.scenario_from_file(scenario_path)
    m_p = base.gains.m_p
    out = _output_dir(args.out, base.output_dir)
    os.makedirs(out, exist_ok=True)

    def candidate_scenario(vector) -> Scenario:
        return replace(base, gains=PsmcGains.from_vector(vector, m_p=m_p))

    def gate(vector):
        return gate_scenario(candidate_scenario(vector))

    def evaluate(vector):
        trace, _, _ = run_scenario(candidate_scenario(vector), force=True)
        return trace

    best, history = fa_run(fa_config, evaluate, gate)
    write_history_csv(history, os.path.join(out, "tuning_history.csv"))
    cfg.write_gains_file(os.path.join(out, "best_gains.cfg"),
                         PsmcGains.from_vector(best.s, m_p=m_p))
    print(f"best objective h={best.objective:.6g} after "
          f"{len(history)} generations; gains written to {out}/best_gains.cfg")
    return EXIT_OK


def _cmd_check_gains(args) -> int:
    gains = cfg.gains_from_file(args.gains)
    eps = args.eps
    lam1 = lambda1_bound(gains.observer_gains(), eps)
    report = check_feasibility(gains, eps, lam1)
    print(f"eps={eps:.6g}  lambda1={lam1:.6g}")
    print(f"varpi={report.varpi:.6g}")
    print(f"K_c eigenvalues: {report.kc_eigs[0]:.6g}, {report.kc_eigs[1]:.6g}")
    print(f"lambda_min(K_m)={report.km_min:.6g}")
    if report.lambda2 is not None:
        print(f"lambda2={report.lambda2:.6g}  "
              f"required switching gain={report.gamma_required:.6g}")
    if report.feasible:
        print("feasible: yes")
        return EXIT_OK
    print("feasible: no  (" + "; ".join(report.violations) + ")")
    return EXIT_OK if args.force else EXIT_INFEASIBLE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pmalab",
        description="Pneumatic-muscle tracking control simulation laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one scenario file")
    p_sim.add_argument("scenario")
    p_sim.add_argument("--out", default=None, help="output directory")
    p_sim.add_argument("--force", action="store_true",
                       help="run even when the gains fail the gate")
    p_sim.set_defaults(func=_cmd_simulate)

    p_fam = sub.add_parser("family", help="run an experiment family")
    p_fam.add_argument("name", choices=FAMILIES)
    p_fam.add_argument("scenario")
    p_fam.add_argument("--out", default=None)
    p_fam.set_defaults(func=_cmd_family)

    p_tune = sub.add_parser("tune", help="search the gain box")
    p_tune.add_argument("config")
    p_tune.add_argument("--out", default=None)
    p_tune.set_defaults(func=_cmd_tune)

    p_check = sub.add_parser("check-gains", help="evaluate the feasibility gate")
    p_check.add_argument("gains")
    p_check.add_argument("--eps", type=float, default=0.4,
                         help="disturbance bound used by the gate")
    p_check.add_argument("--force", action="store_true",
                         help="exit 0 even when infeasible")
    p_check.set_defaults(func=_cmd_check_gains)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleGainsError as exc:
        print(f"infeasible gains: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SimulationDivergedError, SingularGainError) as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except BudgetExhaustedError as exc:
        print(f"tuning failed: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
