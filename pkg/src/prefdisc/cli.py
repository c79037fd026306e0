"""Command-line front end.

Reports go to standard output as JSON; diagnostics go to standard error.
Exit codes: 0 ok, 1 I/O or schema error, 2 axiom failure, 3 not softmax,
4 numeric precondition violated.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .axioms import FAIL, audit
from .chain import stationary
from .ddm import (DdmSpec, gibbs_prior_binary, is_transitive, prior_from_transitive_zeta,
                  zeta_from_global_prior)
from .errors import (ConvergenceError, DegenerateOddsError, IntransitiveError,
                     InvalidNeuralBiasError, NotSoftmaxError, RunawayError, SchemaError,
                     UnsupportedSizeError)
from .experiments import PipelineConfig, PipelineError, SimulationConfig, pipeline, preset, simulate
from .dataset import load_dataset
from .identify import identify

EXIT_OK, EXIT_IO, EXIT_AXIOM, EXIT_NOT_SOFTMAX, EXIT_NUMERIC = 0, 1, 2, 3, 4

_NUMERIC = (IntransitiveError, InvalidNeuralBiasError, DegenerateOddsError,
            UnsupportedSizeError, ConvergenceError, RunawayError)


class _Fail(Exception):
    def __init__(self, code, message, report=None):
        super().__init__(message)
        self.code = code
        self.report = report


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=1, default=str) + "\n")


def _envelope(command, config, seed=None, **body) -> dict:
    return {"version": __version__, "command": command, "config": config, "seed": seed, **body}


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _Fail(EXIT_IO, f"{path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise _Fail(EXIT_IO, f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: "
                             f"{exc.msg}") from None


def _resolve_seed(arg):
    if arg is not None:
        return arg
    env = os.environ.get("PREFDISC_SEED")
    if env is None:
        return None
    try:
        return int(env)
    except ValueError:
        raise _Fail(EXIT_IO, f"PREFDISC_SEED={env!r} is not an integer") from None


def _load_spec(path) -> DdmSpec:
    doc = _read_json(path)
    try:
        return DdmSpec.from_dict(doc)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, _NUMERIC):
            raise
        raise _Fail(EXIT_IO, f"{path}: bad DDM spec: {exc}") from None


def _labels_from_args(spec: DdmSpec, names) -> list:
    by_str = {str(x): x for x in spec.labels}
    missing = [m for m in names if m not in by_str]
    if missing:
        raise _Fail(EXIT_IO, f"menu items {missing!r} are not in the spec")
    return [by_str[m] for m in names]


# ---------------------------------------------------------------------------


def cmd_audit(args) -> int:
    d = load_dataset(args.dataset)
    reports = audit(d)
    ok = not any(r.verdict == FAIL for r in reports)
    _emit(_envelope("audit", {"dataset": str(args.dataset), "kind": d.kind}, None,
                    passed=ok, reports=[r.to_dict() for r in reports]))
    return EXIT_OK if ok else EXIT_AXIOM


def cmd_identify(args) -> int:
    d = load_dataset(args.dataset)
    try:
        ident = identify(d)
    except NotSoftmaxError as exc:
        raise _Fail(EXIT_NOT_SOFTMAX, str(exc)) from None
    _emit(_envelope("identify", {"dataset": str(args.dataset)}, None,
                    identified=ident.to_dict()))
    return EXIT_OK


def cmd_simulate(args) -> int:
    seed = _resolve_seed(args.seed)
    overrides = {} if seed is None else {"seed": seed}
    try:
        if args.config is not None:
            doc = _read_json(args.config)
            if not isinstance(doc, dict):
                raise _Fail(EXIT_IO, f"{args.config}: config must be a JSON object")
            cfg = SimulationConfig.from_dict({**doc, **overrides})
        else:
            cfg = preset(args.sim or 1, **overrides)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, _NUMERIC):
            raise
        raise _Fail(EXIT_IO, f"bad simulation config: {exc}") from None
    report = simulate(cfg, workers=args.workers)
    text = report.to_json()
    if args.out:
        Path(args.out).write_text(text)
    if args.csv:
        Path(args.csv).write_text(report.to_csv())
    sys.stdout.write(text)
    return EXIT_OK


def cmd_stationary(args) -> int:
    spec = _load_spec(args.spec)
    menu = _labels_from_args(spec, args.menu) if args.menu else list(spec.labels)
    dist = stationary(spec, menu)
    _emit(_envelope("stationary", {"spec": spec.to_dict(), "menu": menu}, None,
                    labels=list(dist.labels), probs=list(dist.probs)))
    return EXIT_OK


def cmd_gibbs(args) -> int:
    spec = _load_spec(args.spec)
    config = {"spec": spec.to_dict()}
    if args.from_prior:
        pi_doc = _read_json(args.from_prior)
        by_str = {str(k): v for k, v in pi_doc.items()} if isinstance(pi_doc, dict) else {}
        missing = [str(x) for x in spec.labels if str(x) not in by_str]
        if missing:
            raise _Fail(EXIT_IO, f"{args.from_prior}: prior lacks labels {missing!r}")
        pi = {x: float(by_str[str(x)]) for x in spec.labels}
        if any(p <= 0 for p in pi.values()) or abs(sum(pi.values()) - 1) > 1e-9:
            raise _Fail(EXIT_NUMERIC, "prior must be strictly positive and sum to 1")
        out = zeta_from_global_prior(spec.v, spec.beta, pi)
        config["prior"] = {str(k): v for k, v in pi.items()}
        _emit(_envelope("gibbs", config, None, spec=out.to_dict()))
        return EXIT_OK
    if args.to_prior:
        prior = prior_from_transitive_zeta(spec)
        _emit(_envelope("gibbs", config, None,
                        prior={str(k): v for k, v in prior.as_dict().items()}))
        return EXIT_OK
    check = is_transitive(spec)
    labels = spec.labels
    pairs = [[a, b, gibbs_prior_binary(spec, a, b)]
             for i, a in enumerate(labels) for b in labels[i + 1:]]
    _emit(_envelope("gibbs", config, None, binary_priors=pairs,
                    transitive=check.transitive, residual=check.residual))
    return EXIT_OK


def cmd_pipeline(args) -> int:
    doc = _read_json(args.config)
    try:
        cfg = PipelineConfig.from_dict(doc)
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise _Fail(EXIT_IO, f"{args.config}: bad pipeline config: {exc!r}") from None
    try:
        report = pipeline(cfg)
    except PipelineError as exc:
        raise _Fail(EXIT_AXIOM, str(exc),
                    _envelope("pipeline", cfg.to_dict(), None, passed=False,
                              axioms=[r.to_dict() for r in exc.reports])) from None
    sys.stdout.write(report.to_json())
    return EXIT_OK if report.passed else EXIT_NUMERIC


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prefdisc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="run every axiom checker on a dataset")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("identify", help="recover utility, bias and noise from a dataset")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("simulate", help="Monte Carlo run of a preset or config file")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--sim", type=int, choices=[1, 2, 3, 4])
    src.add_argument("--config")
    p.add_argument("--seed", type=int, default=None,
                   help="master seed (falls back to PREFDISC_SEED, then the config, then 0)")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stationary", help="stationary choice law of a transitive DDM")
    p.add_argument("--spec", required=True)
    p.add_argument("--menu", nargs="+")
    p.set_defaults(func=cmd_stationary)

    p = sub.add_parser("gibbs", help="Gibbs prior <-> starting point conversions")
    p.add_argument("--spec", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--to-prior", action="store_true")
    mode.add_argument("--from-prior", metavar="PI_JSON")
    p.set_defaults(func=cmd_gibbs)

    p = sub.add_parser("pipeline", help="identify and cross-validate an exact neural process")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _Fail as exc:
        if exc.report is not None:
            _emit(exc.report)
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except NotSoftmaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_SOFTMAX
    except _NUMERIC as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SchemaError as exc:
        print(f"error: {args_source(args)}{exc}", file=sys.stderr)
        return EXIT_IO
    except (OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def args_source(args) -> str:
    path = getattr(args, "dataset", None)
    return f"{path}: " if path else ""


if __name__ == "__main__":
    sys.exit(main())
