import argparse
import json
import logging
import sys
from pathlib import Path

from formula.ast import Formula, magnitude_parameters
from formula.parser import parse_file
from formula.transforms import negate, normalize
from milp.lowering import lower_conditionals
from milp.lp_writer import write_lp_file
from models.base_model import ModelFactory, SystemModel
from monitor.boolean import sat, truth_intervals
from monitor.robustness import robustness
from signals.plot_script import write_gnuplot_script
from signals.trace import PwlTrace
from signals.trace_io import read_trace, write_csv, write_trace
from synthesis.driver import TraceSynthesizer
from synthesis.outcomes import CheckVerdict, OutcomeStatus
from utilities.benchmarks import get_benchmark
from utilities.config import (
    DEFAULT_BETA,
    DEFAULT_DELTA,
    DEFAULT_EPSILON,
    DEFAULT_TIME_LIMIT,
    EncodingConfig,
    RunConfig,
    SolverConfig,
)
from utilities.exceptions import ConfigError, StltsError
from utilities.logging import setup_logging

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_TIMEOUT = 2
EXIT_ERROR = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stlts", description="STL trace synthesis and bounded model checking via MILP")
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    commands = parser.add_subparsers(dest="command", required=True)

    def problem_options(sub: argparse.ArgumentParser):
        sub.add_argument("--spec", type=Path, help="STL / PSTL spec file")
        sub.add_argument("--model", type=Path, help="system model JSON file")
        sub.add_argument("-T", "--horizon", type=float, help="time horizon (default: the model's)")
        sub.add_argument("-N", type=int, dest="n", help="number of intervals")
        sub.add_argument("--n-min", type=int, default=1, help="first N of a sweep")
        sub.add_argument("--n-max", type=int, help="last N of a sweep")
        sub.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="robustness margin δ")
        sub.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="strictness margin ε ≪ δ")
        sub.add_argument("--beta", type=int, default=DEFAULT_BETA, help="binary expansion bits")
        sub.add_argument("--solver", help="cbc, highs or command:<template> (default: $STLTS_SOLVER, then cbc)")
        sub.add_argument("--time-limit", type=float, help=f"total solver time in seconds (default {DEFAULT_TIME_LIMIT:g})")
        sub.add_argument("--jobs", type=int, default=1, help="solve N values concurrently")
        sub.add_argument("--out", type=Path, help="output trace (.csv or .json)")
        sub.add_argument("--dump-encoding", type=Path, help="write the LP file and symbol map to this stem")
        sub.add_argument("--plot", type=Path, help="write a gnuplot script for the output trace")
        sub.add_argument("--bench", help="fill unset options from benchmarks/manifest.json")
        sub.add_argument("--keep-files", action="store_true", help="keep LP and solution files in the working directory")
        sub.add_argument("--cache", action="store_true", help="reuse solutions of identical LP files")
        sub.add_argument("--slack-objective", action="store_true", help="maximize atom margins beyond δ")

    problem_options(commands.add_parser("synth", help="synthesize a trace satisfying the spec"))
    problem_options(commands.add_parser("check", help="bounded model checking via the negated spec"))
    mine = commands.add_parser("mine", help="maximize the spec's magnitude parameter")
    problem_options(mine)
    mine.add_argument("--param", help="name of the parameter to maximize")
    problem_options(commands.add_parser("encode", help="write the MILP encoding without solving"))

    monitor = commands.add_parser("monitor", help="evaluate a spec on a trace file")
    monitor.add_argument("--trace", type=Path, required=True)
    monitor.add_argument("--spec", type=Path, required=True)
    monitor.add_argument("--robust", action="store_true", help="also print robustness and truth intervals as JSON")
    monitor.add_argument("--at", type=float, default=0.0, help="evaluation time")
    return parser


def run_config(args: argparse.Namespace) -> RunConfig:
    if args.bench:
        bench = get_benchmark(args.bench)
        args.spec = args.spec or bench.spec
        args.model = args.model or bench.model
        args.horizon = args.horizon or bench.horizon
        args.n = args.n or bench.n
        args.n_max = args.n_max or bench.n_max
        if hasattr(args, "param"):
            args.param = args.param or bench.param
    if args.spec is None or args.model is None:
        raise ConfigError("--spec and --model are required (or --bench NAME)")

    encoding = EncodingConfig(args.delta, args.epsilon, args.beta, slack_objective=args.slack_objective)
    solver = SolverConfig.from_env(
        adapter=args.solver,
        time_limit=args.time_limit,
        keep_files=args.keep_files or None,
        use_cache=args.cache or None,
    )
    return RunConfig(
        spec_path=args.spec,
        model_path=args.model,
        horizon=args.horizon,
        n=args.n,
        n_min=args.n_min,
        n_max=args.n_max,
        jobs=args.jobs,
        param=getattr(args, "param", None),
        out=args.out,
        dump_encoding=args.dump_encoding,
        plot=args.plot,
        encoding=encoding,
        solver=solver,
    ).validate()


def _horizon(config: RunConfig, system: SystemModel) -> float:
    horizon = config.horizon or system.horizon
    if horizon is None:
        raise ConfigError("no horizon given: pass -T or set 'horizon' in the model file")
    return float(horizon)


def _write_outputs(config: RunConfig, trace: PwlTrace, report: dict, logger: logging.Logger):
    if config.out is None:
        return
    write_trace(trace, config.out)
    report_path = config.out.with_suffix(".report.json")
    report_path.write_text(json.dumps(report, indent=2, default=str), encoding="utf-8")
    logger.info(f"Trace written to {config.out}, report to {report_path}")
    if config.plot is not None:
        csv_path = config.out if config.out.suffix == ".csv" else config.out.with_suffix(".csv")
        if csv_path != config.out:
            write_csv(trace, csv_path)
        write_gnuplot_script(csv_path, trace.variables, config.plot, title=config.spec_path.stem)
        logger.info(f"Plot script written to {config.plot}")


def _dump_encoding(
    synthesizer: TraceSynthesizer,
    phi: Formula,
    params: dict[str, tuple[float, float]],
    system: SystemModel,
    horizon: float,
    n: int,
    stem: Path,
    logger: logging.Logger,
):
    ctx = synthesizer.build(normalize(phi), system, horizon, n, params, name=stem.name)
    lp_path = write_lp_file(lower_conditionals(ctx.model, synthesizer.encoding_config.m_max), stem.with_suffix(".lp"))
    symbols_path = stem.with_suffix(".symbols.json")
    symbols = {"n": n, "horizon": horizon, "sizes": ctx.registry.sizes(), "symbols": ctx.registry.symbol_map()}
    symbols_path.write_text(json.dumps(symbols, indent=2, ensure_ascii=False), encoding="utf-8")
    logger.info(f"Encoding for N={n} written to {lp_path} and {symbols_path}")


def run_monitor(args: argparse.Namespace) -> int:
    trace = read_trace(args.trace)
    spec = parse_file(args.spec)
    if spec.params:
        raise ConfigError(f"instantiate parameters {sorted(spec.params)} before monitoring")
    holds = sat(trace, spec.formula, at=args.at)
    print("SAT" if holds else "UNSAT")
    if args.robust:
        result = {
            "sat": holds,
            "at": args.at,
            "robustness": robustness(trace, spec.formula, args.at),
            "truth_intervals": truth_intervals(trace, spec.formula).to_list(),
        }
        print(json.dumps(result, indent=2))
    return EXIT_OK if holds else EXIT_NEGATIVE


def run_problem(args: argparse.Namespace, logger: logging.Logger) -> int:
    config = run_config(args)
    spec = parse_file(config.spec_path)
    system = ModelFactory.load(config.model_path)
    horizon = _horizon(config, system)
    synthesizer = TraceSynthesizer(config.encoding, config.solver)
    name = config.spec_path.stem

    if args.command == "encode":
        if config.n is None:
            raise ConfigError("encode needs -N")
        stem = config.dump_encoding or config.out or Path(name)
        _dump_encoding(synthesizer, spec.formula, spec.params, system, horizon, config.n, stem, logger)
        return EXIT_OK

    if args.command == "synth":
        n_max = config.n_max or config.n
        if n_max is None:
            raise ConfigError("synth needs -N or --n-max")
        outcome = synthesizer.synthesize(spec.formula, system, horizon, n_max, config.n_min, config.jobs, name)
        if config.dump_encoding is not None and outcome.n is not None:
            _dump_encoding(synthesizer, spec.formula, {}, system, horizon, outcome.n, config.dump_encoding, logger)
        if outcome.status is OutcomeStatus.TRACE:
            print(f"TRACE N={outcome.n} robustness={outcome.validation.robustness:g}")
            _write_outputs(config, outcome.trace, outcome.to_dict(), logger)
            return EXIT_OK
        print(f"{outcome.status.value.upper()} (N={config.n_min}..{n_max})")
        return EXIT_TIMEOUT if outcome.status is OutcomeStatus.TIMEOUT else EXIT_NEGATIVE

    if args.command == "check":
        n = config.n or config.n_max
        if n is None:
            raise ConfigError("check needs -N")
        outcome = synthesizer.model_check(spec.formula, system, horizon, n, config.jobs, name)
        if config.dump_encoding is not None:
            dual_n = outcome.synthesis.n or n
            _dump_encoding(synthesizer, negate(spec.formula), {}, system, horizon, dual_n, config.dump_encoding, logger)
        print(f"{outcome.verdict.value}: {outcome.message}")
        if outcome.verdict is CheckVerdict.COUNTEREXAMPLE:
            _write_outputs(config, outcome.counterexample, outcome.to_dict(), logger)
            return EXIT_NEGATIVE
        if outcome.verdict is CheckVerdict.HOLDS:
            return EXIT_OK
        return EXIT_TIMEOUT if outcome.verdict is CheckVerdict.TIMEOUT else EXIT_NEGATIVE

    # mine
    n = config.n or config.n_max
    if n is None:
        raise ConfigError("mine needs -N (or --n-max to sweep)")
    sweep = config.n_max is not None and config.n is None
    if not magnitude_parameters(spec.formula):
        raise ConfigError(f"{config.spec_path} declares no magnitude parameter")
    outcome = synthesizer.mine_parameter(
        spec.formula, system, horizon, n, spec.params, config.param, sweep, config.n_min, name
    )
    if config.dump_encoding is not None:
        mined_n = outcome.n or n
        _dump_encoding(synthesizer, spec.formula, spec.params, system, horizon, mined_n, config.dump_encoding, logger)
    if outcome.found:
        print(f"{outcome.parameter}* = {outcome.value:.6g} (N={outcome.n}, {outcome.status})")
        for current, value in outcome.per_n.items():
            print(f"  N={current}: {'-' if value is None else f'{value:.6g}'}")
        _write_outputs(config, outcome.trace, outcome.to_dict(), logger)
        return EXIT_OK
    print(f"{outcome.parameter}: {outcome.status.upper()}")
    return EXIT_TIMEOUT if outcome.status == "timeout" else EXIT_NEGATIVE


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = getattr(logging, args.log_level)
    setup_logging(level=level)
    logger = setup_logging("stlts", level)
    try:
        if args.command == "monitor":
            return run_monitor(args)
        return run_problem(args, logger)
    except StltsError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as e:
        logger.error(f"I/O error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
