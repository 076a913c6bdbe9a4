"""Command-line entry point.

Subcommands: run (one optimization run), sweep (several quantization
levels), theory (step-size interval / contraction constants), graph-gen
(random strongly connected digraph to an edge-list file).

Exit codes: 0 success, 2 configuration error, 3 assumption violation
(e.g. graph not strongly connected), 4 consensus nontermination.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from fractions import Fraction
from typing import Optional

from .consensus import ConsensusNonterminationError
from .graph import (
    Digraph,
    GraphError,
    NotStronglyConnectedError,
    diameter,
    find_unreachable_pair,
    generate_random_strongly_connected,
    read_edge_list,
    write_edge_list,
)
from .harness import (
    default_theory,
    delta_sweep,
    write_sweep_csv,
    write_trace_csv,
)
from .optimizer import (
    ConfigError,
    OptRunConfig,
    build_cost,
    quadratic_optimum,
    quagd_run,
    step_size_interval,
    young_delta_interval,
    compute_theta_and_floor,
)
from .quantizer import QuantizationLevel
from .rng import mix64
from .svgplot import write_line_plot

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSUMPTION = 3
EXIT_NONTERMINATION = 4

_GRAPH_TAG = 1
_COST_TAG = 2
_INIT_TAG = 3

_DEFAULTS = {
    "nodes": 20,
    "edge_prob": 0.2,
    "delta": "0.01",
    "max_iters": 60,
    "seed": 0,
    "output_dir": "out",
    "trace": False,
}


def _parse_cost_line(node: int, text: str):
    """Parse a `[costs]` entry like `quadratic beta=1.0 center=3.2`."""
    parts = text.split()
    if not parts:
        raise ConfigError(f"cost entry for node {node} is empty")
    spec = {"type": parts[0]}
    for item in parts[1:]:
        if "=" not in item:
            raise ConfigError(
                f"cost entry for node {node}: expected key=value, got {item!r}"
            )
        key, value = item.split("=", 1)
        spec[key] = float(value)
    return spec


def _load_ini(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parser


class EffectiveConfig:
    """Fully resolved run configuration, reproducible from its own echo."""

    def __init__(self, args):
        ini = _load_ini(args.config) if args.config else configparser.ConfigParser()

        def pick(flag_value, section, key, default, convert):
            if flag_value is not None:
                return flag_value
            if ini.has_option(section, key):
                try:
                    return convert(ini.get(section, key))
                except ValueError as exc:
                    raise ConfigError(f"[{section}] {key}: {exc}") from None
            return default

        self.seed = pick(args.seed, "run", "seed", _DEFAULTS["seed"], int)
        self.output_dir = pick(
            getattr(args, "output_dir", None), "run", "output_dir",
            _DEFAULTS["output_dir"], str,
        )
        trace_flag = True if getattr(args, "trace", False) else None
        self.trace = pick(
            trace_flag, "run", "trace", _DEFAULTS["trace"],
            lambda s: s.strip().lower() in ("1", "true", "yes", "on"),
        )
        self.nodes = pick(args.nodes, "graph", "nodes", _DEFAULTS["nodes"], int)
        self.edge_prob = pick(
            args.edge_prob, "graph", "edge_prob", _DEFAULTS["edge_prob"], float
        )
        self.graph_file = pick(
            getattr(args, "graph_file", None), "graph", "graph_file", None, str
        )
        self.d_bound = pick(args.d_bound, "graph", "d_bound", None, int)
        self.alpha = pick(args.alpha, "optimizer", "alpha", None, float)
        self.max_iters = pick(
            args.max_iters, "optimizer", "max_iters", _DEFAULTS["max_iters"], int
        )
        delta_str = pick(
            getattr(args, "delta", None), "optimizer", "delta", _DEFAULTS["delta"], str
        )
        try:
            self.delta = QuantizationLevel(delta_str)
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(f"bad quantization level {delta_str!r}: {exc}") from None
        self.delta_str = str(delta_str)

        deltas_str = pick(
            getattr(args, "deltas", None), "optimizer", "deltas", None, str
        )
        self.deltas: Optional[list[QuantizationLevel]] = None
        self.deltas_str = deltas_str
        if deltas_str:
            try:
                self.deltas = [
                    QuantizationLevel(tok.strip())
                    for tok in deltas_str.split(",")
                    if tok.strip()
                ]
            except (ValueError, ArithmeticError) as exc:
                raise ConfigError(f"bad deltas {deltas_str!r}: {exc}") from None
            if len({lv.delta for lv in self.deltas}) != len(self.deltas):
                raise ConfigError(f"deltas must be distinct, got {deltas_str!r}")

        # graph
        if self.graph_file:
            self.graph = read_edge_list(self.graph_file)
            self.nodes = self.graph.n
        else:
            self.graph = generate_random_strongly_connected(
                self.nodes, self.edge_prob, mix64(self.seed, _GRAPH_TAG)
            )
        pair = find_unreachable_pair(self.graph)
        if pair is not None:
            raise NotStronglyConnectedError(pair)

        # costs: explicit entries win; otherwise unit quadratics with
        # seeded random centers in [0, 10]
        import random

        if ini.has_section("costs") and ini.options("costs"):
            entries = {}
            for key in ini.options("costs"):
                entries[int(key)] = _parse_cost_line(int(key), ini.get("costs", key))
            missing = [j for j in range(self.nodes) if j not in entries]
            if missing:
                raise ConfigError(f"[costs] missing entries for nodes {missing}")
            self.cost_specs = [entries[j] for j in range(self.nodes)]
        else:
            rng = random.Random(mix64(self.seed, _COST_TAG))
            self.cost_specs = [
                {"type": "quadratic", "beta": 1.0, "center": rng.uniform(0.0, 10.0)}
                for _ in range(self.nodes)
            ]
        self.costs = [build_cost(spec) for spec in self.cost_specs]

        # initial estimates
        x0_str = pick(None, "optimizer", "x0", None, str)
        if x0_str:
            try:
                self.x0 = [float(tok) for tok in x0_str.split(",") if tok.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad x0 list: {exc}") from None
        else:
            rng = random.Random(mix64(self.seed, _INIT_TAG))
            self.x0 = [rng.uniform(0.0, 10.0) for _ in range(self.nodes)]

    def to_opt_config(self) -> OptRunConfig:
        cfg = OptRunConfig(
            graph=self.graph,
            costs=self.costs,
            delta=self.delta,
            x0=self.x0,
            max_outer=self.max_iters,
            master_seed=self.seed,
            alpha=self.alpha,
            d_bound=self.d_bound,
        )
        cfg.validate()
        return cfg

    def echo_text(self) -> str:
        """Resolved configuration as an ini document; rerunning from this
        reproduces byte-identical outputs."""
        lines = ["[graph]"]
        if self.graph_file:
            lines.append(f"graph_file = {self.graph_file}")
        else:
            lines.append(f"nodes = {self.nodes}")
            lines.append(f"edge_prob = {self.edge_prob!r}")
        if self.d_bound is not None:
            lines.append(f"d_bound = {self.d_bound}")
        lines.append("")
        lines.append("[optimizer]")
        if self.alpha is not None:
            lines.append(f"alpha = {self.alpha!r}")
        lines.append(f"delta = {self.delta_str}")
        if self.deltas_str:
            lines.append(f"deltas = {self.deltas_str}")
        lines.append(f"max_iters = {self.max_iters}")
        lines.append("x0 = " + ",".join(repr(x) for x in self.x0))
        lines.append("")
        lines.append("[costs]")
        for j, spec in enumerate(self.cost_specs):
            extras = " ".join(
                f"{k}={v!r}" for k, v in spec.items() if k != "type"
            )
            lines.append(f"{j} = {spec['type']} {extras}".rstrip())
        lines.append("")
        lines.append("[run]")
        lines.append(f"seed = {self.seed}")
        lines.append(f"output_dir = {self.output_dir}")
        lines.append(f"trace = {str(self.trace).lower()}")
        return "\n".join(lines) + "\n"

    def write_echo(self) -> str:
        path = os.path.join(self.output_dir, "effective_config.ini")
        with open(path, "w") as fh:
            fh.write(self.echo_text())
        return path


def cmd_run(args) -> int:
    eff = EffectiveConfig(args)
    cfg = eff.to_opt_config()
    os.makedirs(eff.output_dir, exist_ok=True)
    x_star = quadratic_optimum(cfg.costs)
    inner_trace = None
    trace_path = None
    if eff.trace:
        trace_path = os.path.join(eff.output_dir, "faqua_trace.txt")
        inner_trace = open(trace_path, "w")
    try:
        trace = quagd_run(cfg, x_star=x_star, inner_trace=inner_trace)
    finally:
        if inner_trace is not None:
            inner_trace.close()
    csv_path = os.path.join(eff.output_dir, "trace.csv")
    write_trace_csv(trace, csv_path)
    svg_path = None
    if x_star is not None:
        svg_path = os.path.join(eff.output_dir, "residual.svg")
        residuals = [s.residual for s in trace.steps]
        write_line_plot(
            svg_path,
            [(f"delta={float(cfg.delta.delta)!r}", residuals)],
            title="residual vs outer iteration",
            xlabel="outer iteration k",
            ylabel="residual",
        )
    echo_path = eff.write_echo()
    print(eff.echo_text(), end="")
    print(f"wrote {csv_path}")
    if svg_path:
        print(f"wrote {svg_path}")
    if trace_path:
        print(f"wrote {trace_path}")
    print(f"wrote {echo_path}")
    final = trace.steps[-1]
    print(f"final estimates: {final.estimates}")
    if final.residual is not None:
        print(f"final residual: {final.residual!r}")
    return EXIT_OK


def _delta_slug(level: QuantizationLevel) -> str:
    return repr(float(level.delta)).replace(".", "p").replace("-", "m")


def cmd_sweep(args) -> int:
    eff = EffectiveConfig(args)
    if not eff.deltas:
        raise ConfigError("sweep needs at least one quantization level (--deltas)")
    cfg = eff.to_opt_config()
    os.makedirs(eff.output_dir, exist_ok=True)
    report = delta_sweep(cfg, eff.deltas)
    curves = []
    for level, entry in zip(eff.deltas, report.entries):
        if entry.error is not None:
            print(f"delta={float(level.delta)!r}: FAILED: {entry.error}")
            continue
        csv_path = os.path.join(eff.output_dir, f"trace_delta_{_delta_slug(level)}.csv")
        write_trace_csv(entry.trace, csv_path)
        print(f"wrote {csv_path}")
        curves.append(
            (
                f"delta={float(level.delta)!r}",
                [s.residual for s in entry.trace.steps],
            )
        )
    sweep_csv = os.path.join(eff.output_dir, "sweep.csv")
    write_sweep_csv(report, sweep_csv)
    print(f"wrote {sweep_csv}")
    if curves:
        svg_path = os.path.join(eff.output_dir, "sweep.svg")
        write_line_plot(
            svg_path,
            curves,
            title="residual vs outer iteration per quantization level",
            xlabel="outer iteration k",
            ylabel="residual",
        )
        print(f"wrote {svg_path}")
    echo_path = eff.write_echo()
    print(f"wrote {echo_path}")
    if report.all_failed:
        print("all quantization levels failed", file=sys.stderr)
        return EXIT_NONTERMINATION
    return EXIT_OK


def cmd_theory(args) -> int:
    if args.config or args.mu is None or args.lipschitz is None:
        eff = EffectiveConfig(args)
        cfg = eff.to_opt_config()
        n = cfg.graph.n
        mu = Fraction(cfg.mu)
        big_l = Fraction(cfg.L)
        delta = cfg.delta.delta
        alpha = Fraction(args.alpha) if args.alpha is not None else None
    else:
        if args.nodes is None:
            raise ConfigError("theory needs --nodes with explicit --mu/--lipschitz")
        n = args.nodes
        mu = Fraction(str(args.mu))
        big_l = Fraction(str(args.lipschitz))
        delta = QuantizationLevel(args.delta).delta if args.delta else Fraction(0)
        alpha = Fraction(str(args.alpha)) if args.alpha is not None else None

    interval = step_size_interval(big_l, mu, n)
    print(f"n = {n}, mu = {float(mu)!r}, L = {float(big_l)!r}")
    print(
        f"step-size interval: ({float(interval.lower)!r}, {float(interval.upper)!r})"
        f" [{'nonempty' if interval.nonempty else 'EMPTY'}]"
    )
    print(
        "sufficient condition L < 3*mu: "
        + ("holds" if interval.sufficient_condition else "does not hold")
    )
    record = {
        "n": n,
        "mu": float(mu),
        "L": float(big_l),
        "alpha_lower": float(interval.lower),
        "alpha_upper": float(interval.upper),
        "interval_nonempty": interval.nonempty,
        "sufficient_condition_L_lt_3mu": interval.sufficient_condition,
    }
    if not interval.nonempty:
        print(json.dumps(record, sort_keys=True))
        print("step-size interval is empty", file=sys.stderr)
        return EXIT_CONFIG
    if alpha is None:
        alpha = interval.midpoint
    _, young_upper = young_delta_interval(alpha, big_l, mu, n)
    young = (
        Fraction(str(args.young_delta))
        if args.young_delta is not None
        else young_upper / 2
    )
    consts = compute_theta_and_floor(alpha, young, big_l, mu, n, delta)
    print(f"alpha = {float(alpha)!r}")
    print(f"young-parameter interval: (0, {float(young_upper)!r})")
    print(f"young parameter = {float(young)!r}")
    print(f"theta = {float(consts.theta)!r}")
    print(f"error floor = {float(consts.error_floor)!r}")
    print(f"asymptotic bound = {float(consts.asymptotic_bound)!r}")
    record.update(
        {
            "alpha": float(alpha),
            "young_upper": float(young_upper),
            "young_delta": float(young),
            "theta": float(consts.theta),
            "error_floor": float(consts.error_floor),
            "asymptotic_bound": float(consts.asymptotic_bound),
            "delta": float(delta),
        }
    )
    print(json.dumps(record, sort_keys=True))
    return EXIT_OK


def cmd_graph_gen(args) -> int:
    seed = args.seed if args.seed is not None else 0
    nodes = args.nodes if args.nodes is not None else _DEFAULTS["nodes"]
    prob = args.edge_prob if args.edge_prob is not None else _DEFAULTS["edge_prob"]
    g = generate_random_strongly_connected(nodes, prob, seed)
    write_edge_list(g, args.output)
    print(f"wrote {args.output}: n={g.n} edges={len(g.edges)} diameter={diameter(g)}")
    return EXIT_OK


def _add_common(parser):
    parser.add_argument("--config", help="ini config file")
    parser.add_argument("--nodes", type=int)
    parser.add_argument("--edge-prob", type=float, dest="edge_prob")
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--max-iters", type=int, dest="max_iters")
    parser.add_argument("--d-bound", type=int, dest="d_bound")
    parser.add_argument("--output-dir", dest="output_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quagd",
        description="Distributed gradient descent with finite-time quantized "
        "average consensus on directed graphs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="one optimization run")
    _add_common(p_run)
    p_run.add_argument("--delta", help="quantization level (decimal string)")
    p_run.add_argument("--graph-file", dest="graph_file")
    p_run.add_argument("--trace", action="store_true", help="write inner-round trace")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run several quantization levels")
    _add_common(p_sweep)
    p_sweep.add_argument("--deltas", help="comma-separated quantization levels")
    p_sweep.add_argument("--graph-file", dest="graph_file")
    p_sweep.set_defaults(func=cmd_sweep)

    p_theory = sub.add_parser("theory", help="step-size interval and constants")
    _add_common(p_theory)
    p_theory.add_argument("--mu", type=float, help="total strong convexity")
    p_theory.add_argument("--lipschitz", type=float, help="total smoothness")
    p_theory.add_argument("--young-delta", type=float, dest="young_delta")
    p_theory.add_argument("--delta", help="quantization level")
    p_theory.set_defaults(func=cmd_theory)

    p_gen = sub.add_parser("graph-gen", help="generate a random digraph file")
    p_gen.add_argument("--nodes", type=int)
    p_gen.add_argument("--edge-prob", type=float, dest="edge_prob")
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--output", required=True)
    p_gen.set_defaults(func=cmd_graph_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NotStronglyConnectedError as exc:
        print(f"assumption violation: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except ConsensusNonterminationError as exc:
        step = getattr(exc, "outer_step", None)
        where = f" at outer step {step}" if step is not None else ""
        print(f"consensus nontermination{where}: {exc}", file=sys.stderr)
        return EXIT_NONTERMINATION
    except (ConfigError, GraphError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
