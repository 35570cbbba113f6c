"""Command line entry point.

Exit codes form a stable contract: 0 success, 1 input or parse error,
2 resource cap exceeded, 3 aggregation condition violated.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import aggregation, casestudies, dsl, markov, rules, sitegraph
from .errors import ConditionViolated, LumpkitError, ModelSyntaxError, StateCapExceeded

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CAP = 2
EXIT_VIOLATED = 3

PHI_NAMES = ("species", "scaffold-phi1", "scaffold-phi2",
             "polymer-phi1", "polymer-phi2", "polymer-phi3")

_PHI_FUNCS = {
    "species": lambda mix: tuple(sorted(sitegraph.species_census(mix).items())),
    "scaffold-phi1": casestudies.scaffold_phi1,
    "scaffold-phi2": casestudies.scaffold_phi2,
    "polymer-phi1": casestudies.polymer_phi1,
    "polymer-phi2": casestudies.polymer_phi2,
    "polymer-phi3": casestudies.polymer_phi3,
}


def _load_model(path):
    with open(path, encoding="utf-8") as fh:
        return dsl.parse_model(fh.read())


def _load_chain_with_mixtures(chain_path, model_path):
    """Chain JSON plus, when a model is given, the mixtures behind the keys."""
    space, matrix = markov.load_chain(chain_path)
    mixtures = None
    if model_path:
        model = _load_model(model_path)
        mixtures = tuple(
            rules.mixture_from_key(key, model.interface, model.initial.counts)
            for key in space.states)
    return space, matrix, mixtures


def _partition_for(args, space, matrix, mixtures):
    if getattr(args, "partition", None):
        return aggregation.load_partition(args.partition, space)
    if getattr(args, "phi", None):
        if mixtures is None:
            raise LumpkitError("--phi requires --model to rebuild mixtures")
        phi = _PHI_FUNCS[args.phi]
        chain = rules.ExploredChain(space, matrix, mixtures, {})
        return rules.build_partition(chain, phi)
    raise LumpkitError("supply --partition FILE or --phi NAME")


def _measures_for(args, space, part):
    if getattr(args, "measures", None):
        alphas = aggregation.load_measures(args.measures, space)
        alphas.check_compatible(part)
        return alphas
    return aggregation.uniform_measures(part)


def cmd_explore(args):
    model = _load_model(args.model)
    chain = rules.explore(model, args.max_states)
    markov.save_chain(args.out, chain.space, chain.matrix,
                      extra={"counts": model.initial.counts})
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as fh:
            fh.write(rules.export_dot(chain))
    print(f"explored {len(chain.space)} states -> {args.out}")
    return EXIT_OK


def cmd_check(args):
    space, matrix, mixtures = _load_chain_with_mixtures(args.chain, args.model)
    part = _partition_for(args, space, matrix, mixtures)
    alphas = _measures_for(args, space, part)
    result = aggregation.check_condition(matrix, part, alphas, args.tol)
    cond3 = aggregation.check_cond3(matrix, part)
    print(f"condition holds: {result['holds']}  residual: {result['residual']:.3e}")
    print(f"structural (permutation) condition: {cond3}")
    return EXIT_OK if result["holds"] else EXIT_VIOLATED


def cmd_aggregate(args):
    space, matrix, mixtures = _load_chain_with_mixtures(args.chain, args.model)
    part = _partition_for(args, space, matrix, mixtures)
    alphas = _measures_for(args, space, part)
    agg = aggregation.aggregate(matrix, part, alphas, args.tol)
    block_space = markov.StateSpace(tuple(f"block{i}" for i in range(len(part))))
    markov.save_chain(args.out, block_space, agg.matrix)
    if args.partition_out:
        aggregation.save_partition(args.partition_out, part, space)
    if args.measures_out:
        aggregation.save_measures(args.measures_out, alphas, space)
    print(f"aggregated {len(space)} states into {len(part)} blocks "
          f"(residual {agg.residual:.3e}) -> {args.out}")
    return EXIT_OK


def _initial_distribution(args, space, matrix):
    spec = args.init
    if spec == "uniform":
        return markov.Distribution.uniform(len(space))
    if spec.startswith("respectful:"):
        if not args.partition:
            raise LumpkitError("respectful: init requires --partition")
        part = aggregation.load_partition(args.partition, space)
        alphas = _measures_for(args, space, part)
        block_space = markov.StateSpace(tuple(f"block{i}" for i in range(len(part))))
        blocks = markov.load_distribution(spec.split(":", 1)[1], block_space)
        return aggregation.lift(blocks, part, alphas)
    return markov.load_distribution(spec, space)


def cmd_transient(args):
    space, matrix = markov.load_chain(args.chain)
    if not isinstance(matrix, markov.RateMatrix):
        raise LumpkitError("transient requires a rate-matrix chain")
    pi0 = _initial_distribution(args, space, matrix)
    for t in args.t:
        result = markov.transient(matrix, pi0, t, args.tol)
        out = f"{args.out}_t{t:g}.csv"
        markov.save_distribution(out, space, result)
        print(f"t = {t:g} -> {out}")
    return EXIT_OK


def cmd_stationary(args):
    space, matrix = markov.load_chain(args.chain)
    mu = markov.stationary(matrix)
    markov.save_distribution(args.out, space, mu)
    print(f"stationary distribution -> {args.out}")
    return EXIT_OK


def cmd_deaggregate(args):
    space, matrix = markov.load_chain(args.chain)
    part = aggregation.load_partition(args.partition, space)
    alphas = _measures_for(args, space, part)
    block_space = markov.StateSpace(tuple(f"block{i}" for i in range(len(part))))
    blocks = markov.load_distribution(args.blockdist, block_space)
    full = aggregation.lift(blocks, part, alphas)
    markov.save_distribution(args.out, space, full)
    print(f"lifted distribution -> {args.out}")
    return EXIT_OK


def cmd_casestudy(args):
    if args.which == "scaffold":
        c1, c2, c3, c4 = args.rates
        params = casestudies.ScaffoldParams(args.na, args.nb, args.nc, c1, c2, c3, c4)
        model = casestudies.scaffold_model(params)
    else:
        r1, r2, r3, r4 = args.rates
        params = casestudies.PolymerParams(args.n, r1, r2, r3, r4)
        model = casestudies.polymer_model(params)
    text = dsl.print_model(model)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(f"{args.which} model -> {args.out}")
    return EXIT_OK


def _rates(text):
    values = [float(v) for v in text.split(",")]
    if len(values) != 4:
        raise argparse.ArgumentTypeError("expected four comma-separated rates")
    return values


def build_parser():
    parser = argparse.ArgumentParser(prog="lumpkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explore", help="build the CTMC of a rule model")
    p.add_argument("model")
    p.add_argument("--out", required=True)
    p.add_argument("--dot")
    p.add_argument("--max-states", type=int, default=rules.max_states_from_env())
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("check", help="test the aggregation condition")
    p.add_argument("chain")
    p.add_argument("--partition")
    p.add_argument("--phi", choices=PHI_NAMES)
    p.add_argument("--model")
    p.add_argument("--measures")
    p.add_argument("--tol", type=float, default=aggregation.DEFAULT_CONDITION_TOL)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("aggregate", help="build the aggregated chain")
    p.add_argument("chain")
    p.add_argument("--partition")
    p.add_argument("--phi", choices=PHI_NAMES)
    p.add_argument("--model")
    p.add_argument("--measures")
    p.add_argument("--out", required=True)
    p.add_argument("--partition-out")
    p.add_argument("--measures-out")
    p.add_argument("--tol", type=float, default=aggregation.DEFAULT_CONDITION_TOL)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("transient", help="transient distribution at given times")
    p.add_argument("chain")
    p.add_argument("--init", required=True,
                   help="distribution CSV, 'uniform', or 'respectful:BLOCKCSV'")
    p.add_argument("--t", required=True, type=lambda s: [float(v) for v in s.split(",")])
    p.add_argument("--partition")
    p.add_argument("--measures")
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(func=cmd_transient)

    p = sub.add_parser("stationary", help="stationary distribution")
    p.add_argument("chain")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("deaggregate", help="lift a block distribution")
    p.add_argument("blockdist")
    p.add_argument("--chain", required=True)
    p.add_argument("--partition", required=True)
    p.add_argument("--measures")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_deaggregate)

    p = sub.add_parser("casestudy", help="emit a built-in case study model")
    which = p.add_subparsers(dest="which", required=True)
    ps = which.add_parser("scaffold")
    ps.add_argument("--na", type=int, required=True)
    ps.add_argument("--nb", type=int, required=True)
    ps.add_argument("--nc", type=int, required=True)
    ps.add_argument("--rates", type=_rates, default=[1.0, 1.0, 1.0, 1.0])
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=cmd_casestudy)
    pp = which.add_parser("polymer")
    pp.add_argument("--n", type=int, required=True)
    pp.add_argument("--rates", type=_rates, default=[1.0, 1.0, 1.0, 1.0])
    pp.add_argument("--out", required=True)
    pp.set_defaults(func=cmd_casestudy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StateCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ConditionViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATED
    except (ModelSyntaxError, LumpkitError, OSError, ValueError,
            json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
