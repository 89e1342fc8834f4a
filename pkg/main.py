"""
Command-line entry point: decide delay games, run the fixed-delay oracle, synthesize and
verify constant-delay strategies, play interactively, generate random automata and run
the cross-validation harness.

Exit codes: 0 Player O wins (or success), 2 Player I wins, 1 error, 3 xcheck failures.
"""
from argparse import ArgumentParser
import logging
from pathlib import Path
import sys

import numpy as np
import yaml

from automata import parse_dpa, serialize_dpa
from delaygame import DelaySpec, minimal_winning_delay, oracle_machine, solve_fixed_delay
from fuzz import first_failure, random_dpa, run_xcheck
from machine import parse_strategy, serialize_strategy
from monoid import NPRIME_NOTE, build_profile_automaton, enumerate_monoid
from paritygame import PLAYER_NAMES, PLAYER_O, dump_arena
from play import PlaySession, repl
from sggame import decide_finite_delay, synthesize_constant_delay_strategy, verify_synthesized
from utils import (
    BudgetError,
    DelayGameError,
    bcolors,
    get_config,
    namespace2dict,
    numpy2python,
    printRecord,
)

try:
    from comet_ml import Experiment
except ImportError:
    Experiment = None

DEFAULT_CONFIG = Path(__file__).parent / "config" / "defaults.yml"
EXIT_O, EXIT_ERROR, EXIT_I, EXIT_XCHECK = 0, 1, 2, 3
SHORT_FLAGS = {"-o": "--output", "-y": "--yaml_config"}
COMMANDS = ["solve", "profile", "oracle", "synthesize", "verify", "play", "gen", "xcheck"]


def add_args(parser):
    """
    Adds command-line arguments to parser

    Returns
    -------
    parser : ArgumentParser

    args2config : dict
        Argument name -> key path in the configuration tree
    """
    args2config = {}
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("file", nargs="?", default=None, help="DPA file")
    # YAML config
    parser.add_argument(
        "-y",
        "--yaml_config",
        default=None,
        type=str,
        help="YAML configuration file",
    )
    args2config.update({"yaml_config": ["yaml_config"]})
    # General
    parser.add_argument("--debug", action="store_true", default=False)
    args2config.update({"debug": ["debug"]})
    parser.add_argument("--record", default=None, type=str, help="Append reports to this file")
    args2config.update({"record": ["record"]})
    parser.add_argument("--print_config", "--print-config", action="store_true", default=False)
    args2config.update({"print_config": ["print_config"]})
    parser.add_argument("--seed", type=int, default=0, help="Seed for gen and xcheck")
    args2config.update({"seed": ["seeds", "main"]})
    # Files
    parser.add_argument("-o", "--output", default=None, type=str, help="Output file")
    args2config.update({"output": ["output"]})
    parser.add_argument("--strategy", default=None, type=str, help="StrategyMachine file")
    args2config.update({"strategy": ["strategy"]})
    parser.add_argument(
        "--dump_strategy", "--dump-strategy", default=None, type=str,
        help="Write the oracle's strategy to this file",
    )
    args2config.update({"dump_strategy": ["oracle", "dump_strategy"]})
    parser.add_argument(
        "--dump_arena", "--dump-arena", default=None, type=str,
        help="Write the solved arena to this file",
    )
    args2config.update({"dump_arena": ["oracle", "dump_arena"]})
    # Oracle
    parser.add_argument(
        "--delay", type=str, default=None,
        help="Constant delay d, or a bounded delay function such as 2,1:1 (head values:tail)",
    )
    args2config.update({"delay": ["oracle", "delay"]})
    parser.add_argument(
        "--sweep", type=int, default=None,
        help="solve: also find the least winning constant delay up to this value",
    )
    args2config.update({"sweep": ["oracle", "sweep_max"]})
    parser.add_argument(
        "--max_vertices", "--max-vertices", type=int, default=2_000_000,
        help="Vertex budget of explicit arenas",
    )
    args2config.update({"max_vertices": ["oracle", "max_vertices"]})
    # Synthesis
    parser.add_argument(
        "--block_length", "--block-length", type=int, default=None,
        help="Block length of synthesized machines (default n')",
    )
    args2config.update({"block_length": ["synthesis", "block_length"]})
    parser.add_argument(
        "--max_product_vertices", "--max-product-vertices", type=int, default=5_000_000,
        help="Vertex budget of the verification product and of machines",
    )
    args2config.update({"max_product_vertices": ["synthesis", "max_product_vertices"]})
    # Play
    parser.add_argument(
        "--max_history", "--max-history", type=int, default=40,
        help="Number of past steps shown by play",
    )
    args2config.update({"max_history": ["play", "max_history"]})
    # Gen
    parser.add_argument("--states", type=int, default=3)
    args2config.update({"states": ["gen", "states"]})
    parser.add_argument("--colors", type=int, default=3)
    args2config.update({"colors": ["gen", "colors"]})
    parser.add_argument("--inputs", type=int, default=2, help="Input alphabet size")
    args2config.update({"inputs": ["gen", "inputs"]})
    parser.add_argument("--outputs", type=int, default=2, help="Output alphabet size")
    args2config.update({"outputs": ["gen", "outputs"]})
    # Xcheck
    parser.add_argument("--count", type=int, default=200)
    args2config.update({"count": ["xcheck", "count"]})
    parser.add_argument("--max_states", "--max-states", type=int, default=4)
    args2config.update({"max_states": ["xcheck", "max_states"]})
    parser.add_argument("--max_colors", "--max-colors", type=int, default=3)
    args2config.update({"max_colors": ["xcheck", "max_colors"]})
    parser.add_argument("--max_delay", "--max-delay", type=int, default=4)
    args2config.update({"max_delay": ["xcheck", "max_delay"]})
    parser.add_argument("--nprime_cap", "--nprime-cap", type=int, default=6)
    args2config.update({"nprime_cap": ["xcheck", "nprime_cap"]})
    parser.add_argument("--synth_delay_cap", "--synth-delay-cap", type=int, default=7)
    args2config.update({"synth_delay_cap": ["xcheck", "synth_delay_cap"]})
    parser.add_argument("--splits", type=int, default=5, help="Homomorphism checks per case")
    args2config.update({"splits": ["xcheck", "splits"]})
    parser.add_argument("--profile_len", "--profile-len", type=int, default=6)
    args2config.update({"profile_len": ["xcheck", "profile_len"]})
    parser.add_argument(
        "--max_profiles", "--max-profiles", type=int, default=64,
        help="Cases whose profile automaton grows past this are skipped",
    )
    args2config.update({"max_profiles": ["xcheck", "max_profiles"]})
    parser.add_argument("--workers", type=int, default=1)
    args2config.update({"workers": ["xcheck", "workers"]})
    # Comet
    parser.add_argument("--comet_project", "--comet-project", default=None, type=str)
    args2config.update({"comet_project": ["comet", "project"]})
    parser.add_argument("--comet_skip", action="store_true", default=False)
    args2config.update({"comet_skip": ["comet", "skip"]})
    return parser, args2config


def _delay_function(config):
    """The --delay value as a DelaySpec, or None when unset."""
    if config.oracle.delay is None:
        return None
    return DelaySpec.parse(str(config.oracle.delay))


def process_config(config, args):
    config.command = args.command
    config.file = args.file
    _delay_function(config)
    for key, least in (("states", 1), ("colors", 1), ("inputs", 2), ("outputs", 2)):
        if getattr(config.gen, key) < least:
            raise DelayGameError(f"--{key} must be at least {least}")
    if config.xcheck.count < 0:
        raise DelayGameError("--count must be nonnegative")
    # a budget of 0 means unlimited
    if not config.oracle.max_vertices:
        config.oracle.max_vertices = None
    if not config.synthesis.max_product_vertices:
        config.synthesis.max_product_vertices = None
    if not hasattr(config.comet, "tags"):
        config.comet.tags = []
    return config


def _read(path):
    if path is None:
        raise DelayGameError("this command needs a DPA file")
    return Path(path).read_bytes()


def _write(path, text):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _exit_for(winner):
    return EXIT_O if winner == PLAYER_O else EXIT_I


def cmd_solve(config):
    A = parse_dpa(_read(config.file))
    verdict = decide_finite_delay(A)
    lines = verdict.report_lines()
    if config.oracle.sweep_max is not None:
        try:
            d, _ = minimal_winning_delay(
                A, config.oracle.sweep_max, config.oracle.max_vertices, progress=True
            )
        except BudgetError as e:
            d = None
            lines.append(f"# oracle sweep stopped: {e}")
        lines.insert(5, f"MINDELAY={d if d is not None else '-'}")
    printRecord("\n".join(lines), config.record)
    return _exit_for(verdict.winner)


def cmd_profile(config):
    A = parse_dpa(_read(config.file))
    P = build_profile_automaton(A)
    lines = [
        f"MONOID={len(enumerate_monoid(A))}",
        f"PROFILES={P.state_count}",
        f"NPRIME={P.n_prime}",
        f"DPRIME={P.d_prime}",
        NPRIME_NOTE,
    ]
    for s in range(P.state_count):
        size = 0 if s == 0 else len(P.states[s])
        succ = ",".join(str(int(t)) for t in P.delta[s])
        lines.append(
            f"STATE {s}: init={s == 0} finite={P.language_finite[s]} matrices={size} "
            f"class_dfa={P.class_sizes[s]} next={succ}"
        )
    printRecord("\n".join(lines), config.record)
    return EXIT_O


def cmd_oracle(config):
    A = parse_dpa(_read(config.file))
    f = _delay_function(config)
    if f is None:
        raise DelayGameError("oracle needs --delay")
    result = solve_fixed_delay(A, f, config.oracle.max_vertices)
    d = f.constant_delay
    printRecord(
        "\n".join(
            [
                f"WINNER={PLAYER_NAMES[result.winner]}",
                f"DELAY={d if d is not None else f}",
                f"VERTICES={result.arena.vertex_count}",
            ]
        ),
        config.record,
    )
    if config.oracle.dump_strategy:
        if result.winner == PLAYER_O and d is not None:
            text = serialize_strategy(oracle_machine(result))
        else:
            text = "".join(
                f"{key[0]} {''.join(key[1]) or '-'} {' '.join(map(str, key[2:]))} -> {a}\n"
                for key, a in sorted(result.strategy.items())
            )
        _write(config.oracle.dump_strategy, text)
    if config.oracle.dump_arena:
        _write(config.oracle.dump_arena, dump_arena(result.arena))
    return _exit_for(result.winner)


def cmd_synthesize(config):
    A = parse_dpa(_read(config.file))
    S = synthesize_constant_delay_strategy(
        A,
        block_length=config.synthesis.block_length,
        max_states=config.synthesis.max_product_vertices,
    )
    if S is None:
        printRecord("WINNER=I\nI wins", config.record)
        return EXIT_I
    _write(config.output, serialize_strategy(S))
    if config.output:
        printRecord(f"WINNER=O\nDELAY={S.delay}\nSTATES={S.state_count}", config.record)
    return EXIT_O


def cmd_verify(config):
    A = parse_dpa(_read(config.file))
    if config.strategy is None:
        raise DelayGameError("verify needs --strategy")
    S = parse_strategy(_read(config.strategy))
    f = _delay_function(config)
    d = S.delay if f is None else f.constant_delay
    if d is None:
        raise DelayGameError("verify needs a constant --delay")
    ok = verify_synthesized(A, S, d, config.synthesis.max_product_vertices)
    printRecord("PASS" if ok else "FAIL", config.record)
    return EXIT_O if ok else EXIT_I


def cmd_play(config):
    A = parse_dpa(_read(config.file))
    if config.strategy is not None:
        S = parse_strategy(_read(config.strategy))
    else:
        f = _delay_function(config)
        if f is None or f.constant_delay is None:
            raise DelayGameError("play needs a constant --delay or --strategy")
        result = solve_fixed_delay(A, f, config.oracle.max_vertices)
        if result.winner != PLAYER_O:
            printRecord(
                f"WINNER=I\nPlayer O loses with delay {f.constant_delay}; nothing to play against"
            )
            return EXIT_I
        S = oracle_machine(result)
    winner = repl(PlaySession(A, S, max_history=config.play.max_history))
    if winner is None:
        return EXIT_O
    printRecord(f"WINNER={PLAYER_NAMES[winner]}", config.record)
    return _exit_for(winner)


def cmd_gen(config):
    rng = np.random.default_rng(config.seeds.main)
    gen = config.gen
    A = random_dpa(rng, gen.states, gen.colors, gen.inputs, gen.outputs)
    comment = (
        f"random DPA: states={gen.states} colors={gen.colors} seed={config.seeds.main}"
    )
    _write(config.output, serialize_dpa(A, comment=comment))
    return EXIT_O


def cmd_xcheck(config):
    x = config.xcheck
    params = {
        "count": x.count,
        "max_states": x.max_states,
        "max_colors": x.max_colors,
        "max_delay": x.max_delay,
        "nprime_cap": x.nprime_cap,
        "synth_delay_cap": x.synth_delay_cap,
        "splits": x.splits,
        "profile_len": x.profile_len,
        "max_profiles": x.max_profiles,
        "max_vertices": config.oracle.max_vertices,
    }
    summary, outcomes = run_xcheck(params, seed=config.seeds.main, workers=x.workers)
    printRecord(summary.to_string(index=False), config.record)
    failures = int(summary["failed"].sum())
    if config.comet.project and not config.comet.skip and Experiment is not None:
        experiment = Experiment(project_name=config.comet.project, display_summary_level=0)
        experiment.add_tags(list(config.comet.tags))
        experiment.log_parameters(dict(params, seed=config.seeds.main))
        experiment.log_metrics(
            {
                f"{row.property}_{k}": getattr(row, k)
                for row in summary.itertuples()
                for k in ("passed", "failed", "skipped")
            }
        )
        experiment.end()
    failure = first_failure(outcomes)
    if failure is not None:
        print(
            bcolors.paint(
                f"first counterexample (case {failure.index}, "
                f"{', '.join(failure.failed)}):",
                bcolors.FAIL,
            )
        )
        print(failure.dpa, end="")
        for note in failure.notes:
            print(f"# {note}")
    printRecord(f"FAILURES={failures}", config.record)
    return EXIT_XCHECK if failures else EXIT_O


HANDLERS = {
    "solve": cmd_solve,
    "profile": cmd_profile,
    "oracle": cmd_oracle,
    "synthesize": cmd_synthesize,
    "verify": cmd_verify,
    "play": cmd_play,
    "gen": cmd_gen,
    "xcheck": cmd_xcheck,
}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = ArgumentParser(description=__doc__.split("\n\n")[0])
    _, override_args = parser.parse_known_args(argv)
    override_args = [SHORT_FLAGS.get(arg, arg) for arg in override_args]
    parser, args2config = add_args(parser)
    args = parser.parse_args(argv)
    if args.yaml_config is None and DEFAULT_CONFIG.exists():
        args.yaml_config = str(DEFAULT_CONFIG)
    try:
        config = get_config(args, override_args, args2config)
        config = process_config(config, args)
        logging.basicConfig(
            level=logging.DEBUG if config.debug else logging.WARNING,
            format="%(name)s: %(message)s",
        )
        if config.print_config:
            print(
                yaml.dump(numpy2python(namespace2dict(config)), default_flow_style=False),
                file=sys.stderr,
            )
        return HANDLERS[args.command](config)
    except (DelayGameError, OSError) as e:
        print(bcolors.paint(f"error: {e}", bcolors.FAIL, sys.stderr), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
