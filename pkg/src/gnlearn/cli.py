"""Command-line front end.

Every command prints one JSON (or text) report that embeds the run
configuration.  Exit codes: 0 success, 1 domain failure (invalid loss, bound
violated, nothing shattered), 2 usage or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

from . import __version__
from .dimension import ShatteringWitness, find_shattered, gn_dim, natarajan_dim
from .hypothesis import HypothesisClass, HypothesisError, LabelCountMismatch
from .losscore import LossError, LossMatrix, check_loss, quotient, set_learning_loss
from .nfl import (
    DEFAULT_BUDGET,
    NFLError,
    build_family,
    constant_learner,
    erm_learner,
    memorizing_learner,
    nfl_check,
)
from .riskdist import DiscreteDistribution, DistributionError, Sample, empirical_risk, erm, uc_experiment


class UsageError(Exception):
    pass


class DomainFailure(Exception):
    """Exit 1 with ``report`` as the output."""

    def __init__(self, report: dict):
        self.report = report
        super().__init__(report.get("error", "domain failure"))


@dataclass
class RunConfig:
    seed: int = 0
    trials: int = 1000
    format: str = "json"
    enumeration_budget: int = DEFAULT_BUDGET
    paths: dict = field(default_factory=dict)


def _read_json(path: str):
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"FileNotFound: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"ParseError: {path}: {exc}") from exc


def _loss(path: str) -> LossMatrix:
    obj = _read_json(path)
    try:
        return LossMatrix.from_json(obj)
    except LossError as exc:
        raise DomainFailure({"error": str(exc)}) from exc


def _hyp(path: str) -> HypothesisClass:
    try:
        return HypothesisClass.from_json(_read_json(path))
    except HypothesisError as exc:
        raise UsageError(str(exc)) from exc


def _same_k(H: HypothesisClass, L: LossMatrix) -> None:
    if H.k != L.k:
        raise UsageError(f"hypothesis file has k={H.k} but loss file has k={L.k}")


def cmd_validate(args, cfg):
    cfg.paths["loss"] = args.loss
    obj = _read_json(args.loss)
    if not isinstance(obj, dict) or "matrix" not in obj:
        raise UsageError("ParseError: loss file needs a 'matrix' field")
    report = check_loss(obj["matrix"]).to_json()
    if not report["valid"]:
        raise DomainFailure(report)
    return report


def cmd_quotient(args, cfg):
    cfg.paths["loss"] = args.loss
    return quotient(_loss(args.loss)).to_json()


def cmd_setloss(args, cfg):
    try:
        return set_learning_loss(args.n).to_json()
    except LossError as exc:
        raise UsageError(str(exc)) from exc


def cmd_ndim(args, cfg):
    cfg.paths["hypotheses"] = args.hypotheses
    return natarajan_dim(_hyp(args.hypotheses)).to_json()


def cmd_gndim(args, cfg):
    cfg.paths.update(hypotheses=args.hypotheses, loss=args.loss)
    H, L = _hyp(args.hypotheses), _loss(args.loss)
    _same_k(H, L)
    out = gn_dim(H, L, direct=args.direct, cross_check=args.cross_check, loss_variant=args.loss_variant).to_json()
    if args.loss_variant:
        out["experimental"] = "loss-variant condition 1"
    return out


def cmd_erm(args, cfg):
    cfg.paths.update(hypotheses=args.hypotheses, loss=args.loss, sample=args.sample)
    H, L = _hyp(args.hypotheses), _loss(args.loss)
    _same_k(H, L)
    try:
        S = Sample.from_json(_read_json(args.sample))
    except DistributionError as exc:
        raise UsageError(str(exc)) from exc
    if any(not 0 <= x < H.domain_size or not 0 <= y < L.k for x, y in S.pairs):
        raise UsageError("sample has points or labels out of range")
    row = erm(H, S, L)
    return {"row": row, "hypothesis": list(H.table[row]), "empirical_risk": str(empirical_risk(S, H, row, L))}


def cmd_uc(args, cfg):
    cfg.paths.update(hypotheses=args.hypotheses, loss=args.loss, distribution=args.distribution)
    H, L = _hyp(args.hypotheses), _loss(args.loss)
    _same_k(H, L)
    try:
        D = DiscreteDistribution.from_json(_read_json(args.distribution))
    except DistributionError as exc:
        raise UsageError(str(exc)) from exc
    if any(not 0 <= x < H.domain_size or not 0 <= y < L.k for x, y, _ in D.atoms):
        raise UsageError("distribution has points or labels out of range")
    sizes = [int(s) for s in args.sizes.split(",")]
    return uc_experiment(H, L, D, sizes, cfg.trials, cfg.seed, delta=args.delta, epsilon=args.epsilon).to_json()


def _learner(spec: str, family, q):
    if spec == "erm":
        return erm_learner(family)
    if spec == "memorize":
        return memorizing_learner(family, q.class_of[0])
    if spec.startswith("constant:"):
        label = int(spec.split(":", 1)[1])
        if not 0 <= label < q.source_k:
            raise UsageError(f"constant label {label} out of range")
        return constant_learner(family, q.class_of[label])
    raise UsageError(f"unknown learner {spec!r}")


def cmd_nfl(args, cfg):
    cfg.paths.update(hypotheses=args.hypotheses, loss=args.loss)
    H, L = _hyp(args.hypotheses), _loss(args.loss)
    _same_k(H, L)
    if args.witness:
        cfg.paths["witness"] = args.witness
        try:
            w = ShatteringWitness.from_json(_read_json(args.witness))
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"ParseError: witness: {exc}") from exc
    else:
        w = find_shattered(H, 2 * args.m, L)
        if w is None:
            raise DomainFailure({"error": f"no set of {2 * args.m} points is generalized-shattered"})
    try:
        family = build_family(H, L, w)
    except NFLError as exc:
        raise DomainFailure({"error": str(exc)}) from exc
    A = _learner(args.learner, family, family.quotient)
    report = nfl_check(A, family, mode=args.mode, budget=cfg.enumeration_budget, trials=cfg.trials, seed=cfg.seed)
    out = {"witness": w.to_json(), "m": family.m, "num_classes": family.num_classes, **report.to_json()}
    if not report.passed:
        raise DomainFailure(out)
    return out


COMMANDS = {
    "validate": cmd_validate,
    "quotient": cmd_quotient,
    "setloss": cmd_setloss,
    "ndim": cmd_ndim,
    "gndim": cmd_gndim,
    "erm": cmd_erm,
    "uc": cmd_uc,
    "nfl": cmd_nfl,
}


def _add_globals(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--trials", type=int, default=d(1000))
    p.add_argument("--format", choices=["json", "text"], default=d("json"))
    p.add_argument("--budget", type=int, default=d(DEFAULT_BUDGET), help="max sequences for exact enumeration")
    p.add_argument("--no-timestamp", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gnlearn", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _add_globals(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_globals(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="check a loss file against all assumptions")
    p.add_argument("loss", help="loss JSON file, or - for stdin")
    p = sub.add_parser("quotient", parents=[common], help="merge labels with equal sigma-sets")
    p.add_argument("loss")
    p = sub.add_parser("setloss", parents=[common], help="emit the set-learning loss on subsets of {1..n}")
    p.add_argument("n", type=int)
    p = sub.add_parser("ndim", parents=[common], help="Natarajan dimension")
    p.add_argument("hypotheses")
    p = sub.add_parser("gndim", parents=[common], help="generalized Natarajan dimension")
    p.add_argument("hypotheses")
    p.add_argument("loss")
    p.add_argument("--direct", action="store_true", help="search with sigma-set comparisons instead of quotienting")
    p.add_argument("--cross-check", action="store_true", help="run both search paths and require agreement")
    p.add_argument("--loss-variant", action="store_true", help="experimental: condition 1 as loss(h1, h2) == 1")
    p = sub.add_parser("erm", parents=[common], help="empirical risk minimiser on a sample file")
    p.add_argument("hypotheses")
    p.add_argument("loss")
    p.add_argument("sample")
    p = sub.add_parser("uc", parents=[common], help="uniform convergence experiment")
    p.add_argument("hypotheses")
    p.add_argument("loss")
    p.add_argument("distribution")
    p.add_argument("--sizes", default="64,256,1024")
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=None)
    p = sub.add_parser("nfl", parents=[common], help="lower-bound check on the adversarial family")
    p.add_argument("hypotheses")
    p.add_argument("loss")
    p.add_argument("--witness", help="witness JSON; default: first shattered set of 2m points")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--learner", default="erm", help="erm | constant:<label> | memorize")
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    return parser


def render_text(obj, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for key, v in obj.items():
            if isinstance(v, (dict, list)) and v and not all(isinstance(e, (int, float, str)) for e in v):
                lines.append(f"{pad}{key}:")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(v)}")
    elif isinstance(obj, list):
        for v in obj:
            if isinstance(v, (dict, list)):
                lines.append(f"{pad}-")
                lines.append(render_text(v, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(obj))
    return "\n".join(lines)


def _scalar(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(map(_scalar, v)) + "]"
    if isinstance(v, dict):
        return "{}"
    return json.dumps(v) if not isinstance(v, str) else v


def _emit(report: dict, cfg: RunConfig, stream) -> None:
    if cfg.format == "json":
        stream.write(json.dumps(report, indent=2, default=str) + "\n")
    else:
        stream.write(render_text(report) + "\n")


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    cfg = RunConfig(args.seed, args.trials, args.format, args.budget)
    head = {"command": args.command}
    if not args.no_timestamp:
        head["timestamp"] = datetime.now(timezone.utc).isoformat()
    code = 0
    try:
        body = COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        body, code = {"error": str(exc)}, 2
    except DomainFailure as exc:
        body, code = exc.report, 1
    except (LabelCountMismatch, DistributionError, HypothesisError) as exc:
        body, code = {"error": str(exc)}, 2
    except (LossError, NFLError) as exc:
        body, code = {"error": str(exc)}, 1
    report = {**head, **body, "config": asdict(cfg)}
    _emit(report, cfg, stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
