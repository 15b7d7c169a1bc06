"""Command-line entry point: ``twounicast <verb> [network] [options]``.

Machine-readable output is one ``key=value`` per line with a fixed key set
per verb.  Exit codes: 0 success, 2 parse or validation failure, 3
classification indeterminate, 4 oracle mismatch, 5 scheme verification
failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import fixtures
from .audit import audit_network, audit_suite
from .classifier import Indeterminate, classify_region, classify_sum_dof
from .netmodel import LayeredNetwork, NetworkError, parse_network, serialize_network, validate
from .programs import SchemeError, evaluate, serialize_scheme
from .randnet import random_network
from .schemes import ReductionDirective, synth_ia, synthesize
from .simulator import SimConfig, estimate_dof, simulate_rates

EXIT_OK, EXIT_INPUT, EXIT_INDETERMINATE, EXIT_MISMATCH, EXIT_UNVERIFIED = 0, 2, 3, 4, 5

log = logging.getLogger("twounicast")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# -- input ----------------------------------------------------------------------------
def fixture_key(name: str) -> str | None:
    key = name.lower()
    if key.startswith("fix-"):
        key = key[4:]
    return key if key in fixtures.TEXTS else None


def load_network(spec: str) -> LayeredNetwork:
    """A network file path, or a built-in fixture name such as FIX-BOTTLE."""
    path = Path(spec)
    try:
        if path.is_file():
            return parse_network(path.read_text())
        key = fixture_key(spec)
        if key is None:
            raise CliError(EXIT_INPUT, f"no such file or fixture: {spec}")
        return parse_network(fixtures.TEXTS[key])
    except NetworkError as e:
        raise CliError(EXIT_INPUT, str(e)) from e


# -- formatting ------------------------------------------------------------------------
def fmt_num(x) -> str:
    if isinstance(x, Fraction) and x.denominator == 1:
        return str(x.numerator)
    if isinstance(x, (Fraction, int)):
        return repr(float(x)).rstrip("0").rstrip(".") if float(x) != int(x) else str(int(x))
    return repr(float(x))


def fmt_point(p) -> str:
    return f"({fmt_num(p[0])},{fmt_num(p[1])})"


def fmt_value(v) -> str:
    if isinstance(v, tuple) and v and all(isinstance(x, str) for x in v):
        return ",".join(v)
    if isinstance(v, frozenset):
        return ",".join(sorted(v))
    if isinstance(v, dict):
        return ",".join(f"{k}:{fmt_value(v[k])}" for k in sorted(v))
    if isinstance(v, bool):
        return str(int(v))
    return str(v)


def witness_text(case: str, w) -> str:
    if w is None:
        return "none"
    if case in ("A", "A'"):
        return w.summary()
    if case == "disconnected":
        return ",".join(f"pair{i}" for i in w)
    if dataclasses.is_dataclass(w):
        return ";".join(f"{f.name}={fmt_value(getattr(w, f.name))}" for f in dataclasses.fields(w))
    return fmt_value(w)


def emit(out, pairs):
    for k, v in pairs:
        out.write(f"{k}={v}\n")


def open_out(args):
    return open(args.out, "w") if args.out else sys.stdout


# -- verbs -----------------------------------------------------------------------------
def cmd_validate(args, out) -> int:
    net = load_network(args.network)
    rep = validate(net)
    emit(out, [
        ("valid", int(rep.valid)),
        ("layers", net.r),
        ("nodes", len(net.nodes)),
        ("edges", len(net.edges)),
        ("off_path", ",".join(rep.off_path) or "none"),
        ("disconnected", ",".join(f"pair{i}" for i in rep.disconnected_pairs) or "none"),
    ])
    return EXIT_OK if rep.valid else EXIT_INPUT


def _classify(net):
    try:
        return classify_sum_dof(net)
    except Indeterminate as e:
        raise CliError(EXIT_INDETERMINATE, str(e)) from e


def cmd_classify(args, out) -> int:
    net = load_network(args.network)
    c = _classify(net)
    emit(out, [("case", c.case), ("sum_dof", fmt_num(c.sum_dof)), ("witness", witness_text(c.case, c.witness))])
    return EXIT_OK


def cmd_region(args, out) -> int:
    net = load_network(args.network)
    try:
        reg = classify_region(net, _classify(net))
    except Indeterminate as e:
        raise CliError(EXIT_INDETERMINATE, str(e)) from e
    emit(out, [
        ("region", reg.region),
        ("max_sum", fmt_num(reg.max_sum())),
        ("corners", ",".join(fmt_point(p) for p in reg.vertices)),
        ("vertices", ",".join(fmt_point(p) for p in reg.all_vertices())),
    ])
    return EXIT_OK


def cmd_synth(args, out) -> int:
    net = load_network(args.network)
    c = _classify(net)
    if args.ia:
        try:
            ia = synth_ia(net, c, eps=Fraction(args.eps), seed=args.seed)
        except ValueError as e:
            code = EXIT_UNVERIFIED if isinstance(e, SchemeError) else EXIT_INPUT
            raise CliError(code, str(e)) from e
        emit(out, [
            ("case", ia.case),
            ("epsilon", ia.epsilon),
            ("target", fmt_point(ia.target)),
            ("per_message_dof", ia.per_message_dof),
            ("T", repr(ia.T)),
            ("T2", repr(ia.T2)),
            ("gamma", repr(ia.gamma)),
            ("beta", repr(ia.beta)),
            ("alpha_relay", repr(ia.alpha_relay)),
            ("relays", ",".join(ia.nodes)),
            ("rational_guard_ok", int(ia.rational_guard_ok)),
        ])
        return EXIT_OK
    try:
        scheme = synthesize(net, c)
    except SchemeError as e:
        raise CliError(EXIT_UNVERIFIED, str(e)) from e
    if isinstance(scheme, ReductionDirective):
        emit(out, [("scheme", "none"), ("directive", scheme.kind), ("relays", ",".join(scheme.nodes) or "none")])
        return EXIT_OK
    rep = evaluate(net, scheme)
    if args.scheme_out:
        Path(args.scheme_out).write_text(serialize_scheme(scheme))
    emit(out, [
        ("scheme", scheme.label),
        ("modes", scheme.modes),
        ("predicted_dof", fmt_point(scheme.predicted_dof)),
        ("passed", int(rep.passed)),
        ("off_diagonal", repr(float(rep.off_diagonal))),
        ("min_diagonal", repr(float(rep.min_diagonal))),
        ("frobenius", repr(rep.frobenius)),
        ("alpha", repr(rep.alpha)),
        ("p0", repr(rep.p0)),
    ])
    return EXIT_OK if rep.passed else EXIT_UNVERIFIED


def _scheme_for(net):
    scheme = synthesize(net, _classify(net))
    if isinstance(scheme, ReductionDirective):
        raise CliError(EXIT_UNVERIFIED, f"no linear scheme: {scheme.kind} core")
    return scheme


def _config(args) -> SimConfig:
    try:
        return SimConfig(P=args.power, n_symbols=args.n_symbols, seed=args.seed,
                         P_grid=tuple(args.p_grid))
    except ValueError as e:
        raise CliError(EXIT_INPUT, str(e)) from e


def _write_result(res, args, out):
    if args.format == "csv":
        out.write(res.to_csv())
        return
    pairs = [("R1", repr(res.rates[0])), ("R2", repr(res.rates[1])), ("sum", repr(sum(res.rates))),
             ("mode_count", res.mode_count)]
    if res.empirical_rates is not None:
        pairs += [("R1_sampled", repr(res.empirical_rates[0])), ("R2_sampled", repr(res.empirical_rates[1]))]
    if res.dof_slope is not None:
        pairs += [("slope", repr(res.dof_slope)), ("residual", repr(res.residual))]
    emit(out, pairs)


def cmd_simulate(args, out) -> int:
    net = load_network(args.network)
    try:
        res = simulate_rates(net, _scheme_for(net), _config(args))
    except SchemeError as e:
        raise CliError(EXIT_UNVERIFIED, str(e)) from e
    _write_result(res, args, out)
    return EXIT_OK


def cmd_estimate_dof(args, out) -> int:
    net = load_network(args.network)
    try:
        res = estimate_dof(net, _scheme_for(net), _config(args))
    except SchemeError as e:
        raise CliError(EXIT_UNVERIFIED, str(e)) from e
    _write_result(res, args, out)
    return EXIT_OK


def cmd_oracle_check(args, out) -> int:
    if args.network:
        rep = audit_network(load_network(args.network))
    else:
        nets = [random_network(args.seed + k, max_nodes=args.max_nodes) for k in range(args.count)]
        rep = audit_suite(nets)
    pairs = [(f"checks_{k}", n) for k, n in sorted(rep.checks.items())]
    pairs += [("mismatches", len(rep.mismatches))]
    emit(out, pairs)
    for name, detail in rep.mismatches:
        log.error("%s mismatch: %s", name, detail)
    return EXIT_OK if rep.ok else EXIT_MISMATCH


def cmd_randgen(args, out) -> int:
    net = random_network(args.seed, max_nodes=args.max_nodes)
    out.write(f"# random network, seed {args.seed}\n")
    out.write(serialize_network(net))
    return EXIT_OK


VERBS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "region": cmd_region,
    "synth": cmd_synth,
    "simulate": cmd_simulate,
    "estimate-dof": cmd_estimate_dof,
    "oracle-check": cmd_oracle_check,
    "randgen": cmd_randgen,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="twounicast", description="Two-unicast layered network DoF tool")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, network=True, optional=False):
        if network:
            p.add_argument("network", nargs="?" if optional else None,
                           help="network file or fixture name (e.g. FIX-BOTTLE)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write output here instead of stdout")
        return p

    common(sub.add_parser("validate", help="parse and validate a network"))
    common(sub.add_parser("classify", help="sum-DoF case and witness"))
    common(sub.add_parser("region", help="DoF region label and vertices"))
    p = common(sub.add_parser("synth", help="synthesize and verify a scheme"))
    p.add_argument("--scheme-out", help="write the scheme file here")
    p.add_argument("--ia", action="store_true", help="alignment parameters for a C1 network")
    p.add_argument("--eps", type=str, default="1/10")
    for verb, text in (("simulate", "sampled AWGN rates at one power"), ("estimate-dof", "sum-rate slope over a power grid")):
        p = common(sub.add_parser(verb, help=text))
        p.add_argument("--power", type=float, default=1e6)
        p.add_argument("--n-symbols", type=int, default=100_000)
        p.add_argument("--p-grid", type=float, nargs="+", default=list(SimConfig().P_grid))
        p.add_argument("--format", choices=("csv", "kv"), default="csv")
    p = common(sub.add_parser("oracle-check", help="compare against the exhaustive oracle"), optional=True)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--max-nodes", type=int, default=12)
    p = common(sub.add_parser("randgen", help="write a seeded random network"), network=False)
    p.add_argument("--max-nodes", type=int, default=None)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    out = None
    try:
        out = open_out(args)
        return VERBS[args.verb](args, out)
    except CliError as e:
        log.error("%s", e)
        return e.code
    finally:
        if out is not None and out is not sys.stdout:
            out.close()


if __name__ == "__main__":
    sys.exit(main())
