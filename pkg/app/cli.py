# Copyright 2025 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Command-line entry point: ``llq <command> ...``.

Verdicts go to stdout and the exit status (0 positive, 1 negative, 2 input
error); logs go to stderr.
"""

import argparse
import json
import random
import sys
from collections.abc import Callable, Sequence
from pathlib import Path

from pydantic import BaseModel, ValidationError

from app import config
from app.config import RunConfig
from app.decide import (
    Entailed,
    HypsHoldSoFar,
    LeafCertificate,
    Refuted,
    Satisfiable,
    Satisfies,
    Unsatisfiable,
    Violated,
    consequence,
    sat,
)
from app.encodings import boolean_theory
from app.errors import EmptyProofError, ReasonerError
from app.extval import parse_rational
from app.linarith import Combination
from app.normalize import BranchNode, BranchTree, format_tree, normalize, print_normal
from app.proofkit import Accepted, check, format_proof, parse_proof
from app.qalg import (
    RuleReport,
    check_rules,
    instantiate_rules,
    metric_model,
    parse_distance_table,
    parse_signature_file,
)
from app.semantics import Model, eval_formula, parse_model, sample_model, satisfies_all
from app.syntax import Judgement, atoms, parse_formula, parse_judgement, parse_theory, to_text
from app.utils.logs import get_logger, setup_logging
from app.utils.tracing import setup_tracing
from app.utils.typing import (
    CombinationPayload,
    ContReport,
    EvalReport,
    GoalReport,
    LeafReport,
    LeafTheoryReport,
    ModelPayload,
    ProofReport,
    RuleCheckReport,
    RuleFailureReport,
    SampleListReport,
    SampleReport,
    SplitReport,
    TreeNodeReport,
    VerdictReport,
    rational,
)

Handler = Callable[[argparse.Namespace, RunConfig], int]

logger = get_logger(__name__)


def _read(path: str | Path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit(cfg: RunConfig, report: BaseModel, text: str) -> None:
    print(report.model_dump_json(indent=2) if cfg.output == "json" else text)


# Payload conversions.


def model_payload(m: Model) -> ModelPayload:
    return ModelPayload(
        assignment={name: str(value) for name, value in sorted(m.assignment.items())},
        default=str(m.default),
    )


def combination_payload(c: Combination) -> CombinationPayload:
    return CombinationPayload(
        multipliers={index: rational(t) for index, t in c.multipliers},
        slack=rational(c.slack),
    )


def leaf_report(certificate: LeafCertificate) -> LeafReport:
    return LeafReport(
        leaf=certificate.leaf,
        reason=certificate.reason,
        certificate=(
            combination_payload(certificate.infeasibility.combination)
            if certificate.infeasibility is not None
            else None
        ),
        goals=[
            GoalReport(goal=print_normal(g.goal), combination=combination_payload(g.combination))
            for g in certificate.goals
        ],
    )


def tree_report(t: BranchTree) -> TreeNodeReport:
    def node_report(node: BranchNode, assumed: str | None) -> TreeNodeReport:
        report = TreeNodeReport(
            assumed=assumed,
            steps=[f"{step.rule} ({step.role})" for step in node.steps],
        )
        if node.split is not None:
            pair = [to_text(j) for j in node.split.pair]
            report.split = SplitReport(rule=node.split.rule, kind=node.split.kind, pair=pair)
            report.children = [node_report(child, label) for child, label in zip(node.children, pair, strict=True)]
        elif node.leaf is not None:
            theory = node.leaf.theory
            report.leaf = LeafTheoryReport(
                inconsistent=theory.inconsistent,
                judgements=[to_text(j) for j in theory.as_judgements(t.level)],
                goals=[print_normal(g, t.level) for g in node.leaf.goals],
            )
        return report

    return node_report(t.root, None)


def rule_check_report(report: RuleReport) -> RuleCheckReport:
    cont = []
    for item in report.cont:
        match item.verdict:
            case Satisfies(reason):
                verdict, detail = "satisfies", reason
            case HypsHoldSoFar(inspected):
                verdict, detail = "hyps-hold-so-far", f"{inspected} hypotheses hold, conclusion fails"
            case Violated(inspected):
                verdict, detail = "violated", f"all {inspected} hypotheses hold, conclusion fails"
        cont.append(ContReport(stream=to_text(item.stream.conclusion), verdict=verdict, detail=detail))
    return RuleCheckReport(
        ok=report.ok,
        checked=dict(report.checked),
        failures=[
            RuleFailureReport(
                rule=f.instance.rule,
                premises=[to_text(j) for j in f.instance.premises],
                conclusion=to_text(f.instance.conclusion),
            )
            for f in report.failures
        ],
        cont=cont,
    )


# Commands.


def cmd_eval(args: argparse.Namespace, cfg: RunConfig) -> int:
    m = parse_model(_read(args.model), cfg.default_value)
    formula = parse_formula(args.formula)
    cfg.check_level([formula])
    value = eval_formula(m, formula)
    _emit(cfg, EvalReport(formula=to_text(formula), value=str(value)), str(value))
    return 0


def cmd_sample(args: argparse.Namespace, cfg: RunConfig) -> int:
    judgements = parse_theory(_read(args.theory))
    cfg.check_level(judgements)
    props = set().union(*(atoms(j) for j in judgements)) if judgements else set()
    rng = random.Random(cfg.seed)
    samples = []
    for _ in range(args.count):
        m = sample_model(props, rng, cfg.profile)
        samples.append(SampleReport(model=model_payload(m), satisfies=satisfies_all(m, judgements)))
    lines = [
        f"{'model' if s.satisfies else 'non-model'}: "
        + ", ".join(f"{p} = {v}" for p, v in s.model.assignment.items())
        for s in samples
    ]
    _emit(cfg, SampleListReport(seed=cfg.seed, profile=cfg.profile, samples=samples), "\n".join(lines))
    return 0


def cmd_normalize(args: argparse.Namespace, cfg: RunConfig) -> int:
    judgements = parse_theory(_read(args.theory))
    goals = [parse_judgement(g) for g in args.goal]
    cfg.check_level([*judgements, *goals])
    tree = normalize(judgements, cfg.logic_level, goals=goals, saturate=not args.structural)
    _emit(cfg, tree_report(tree), format_tree(tree))
    return 0


def _boolean_axioms(cfg: RunConfig, judgements: Sequence[Judgement]) -> list[Judgement]:
    if not cfg.boolean:
        return []
    return boolean_theory(set().union(*(atoms(j) for j in judgements)))


def cmd_sat(args: argparse.Namespace, cfg: RunConfig) -> int:
    judgements = parse_theory(_read(args.theory))
    cfg.check_level(judgements)
    judgements += _boolean_axioms(cfg, judgements)
    result = sat(judgements, cfg.logic_level, jobs=cfg.jobs, default=cfg.default_value)
    if isinstance(result, Satisfiable):
        report = VerdictReport(
            command="sat", verdict="satisfiable", level=cfg.level,
            model=model_payload(result.witness), leaf=result.leaf,
        )
        _emit(cfg, report, f"satisfiable (leaf {result.leaf})\n{result.witness}".rstrip())
        return 0
    assert isinstance(result, Unsatisfiable)
    leaves = [
        LeafReport(
            leaf=e.leaf,
            reason="inconsistent" if e.certificate is None else "infeasible",
            certificate=None if e.certificate is None else combination_payload(e.certificate.combination),
        )
        for e in result.evidence
    ]
    lines = ["unsatisfiable"] + [f"leaf {leaf.leaf}: {leaf.reason}" for leaf in leaves]
    _emit(cfg, VerdictReport(command="sat", verdict="unsatisfiable", level=cfg.level, leaves=leaves), "\n".join(lines))
    return 1


def cmd_entails(args: argparse.Namespace, cfg: RunConfig) -> int:
    hyps = parse_theory(_read(args.theory))
    goal = parse_judgement(args.goal)
    cfg.check_level([*hyps, goal])
    hyps += _boolean_axioms(cfg, [*hyps, goal])
    result = consequence(
        hyps, goal, cfg.logic_level,
        jobs=cfg.jobs, elaborate=cfg.elaborate, default=cfg.default_value,
    )
    if isinstance(result, Refuted):
        report = VerdictReport(
            command="entails", verdict="refuted", level=cfg.level,
            model=model_payload(result.countermodel), leaf=result.leaf,
        )
        _emit(cfg, report, f"refuted (leaf {result.leaf})\n{result.countermodel}".rstrip())
        return 1
    assert isinstance(result, Entailed)
    proofs = [format_proof(p) for p in result.proofs]
    report = VerdictReport(
        command="entails", verdict="entailed", level=cfg.level,
        leaves=[leaf_report(c) for c in result.leaves], proofs=proofs,
    )
    lines = ["entailed"] + [f"leaf {c.leaf}: {c.reason}" for c in result.leaves]
    lines += [f"\n{p}" for p in proofs]
    _emit(cfg, report, "\n".join(lines))
    return 0


def cmd_check_proof(args: argparse.Namespace, cfg: RunConfig) -> int:
    assumptions = parse_theory(_read(args.assumptions)) if args.assumptions else []
    try:
        proof = parse_proof(_read(args.proof))
    except EmptyProofError:
        _emit(cfg, ProofReport(verdict="rejected", steps=0, step=0, reason="empty proof"), "rejected: empty proof")
        return 1
    verdict = check(proof, assumptions)
    if isinstance(verdict, Accepted):
        _emit(cfg, ProofReport(verdict="accepted", steps=len(proof)), f"accepted ({len(proof)} steps)")
        return 0
    report = ProofReport(verdict="rejected", steps=len(proof), step=verdict.step, reason=verdict.reason)
    _emit(cfg, report, f"rejected at step {verdict.step}: {verdict.reason}")
    return 1


def cmd_qalg_check(args: argparse.Namespace, cfg: RunConfig) -> int:
    declared = parse_signature_file(_read(args.signature))
    table = parse_distance_table(_read(args.distances))
    eps = [parse_rational(e) for e in args.eps.split(",") if e.strip()]
    instances = instantiate_rules(declared.signature, declared.terms.values(), eps)
    model = metric_model(declared.points(), table)
    report = rule_check_report(check_rules(model, instances, cfg.cont_budget))
    lines = ["ok" if report.ok else "failed"]
    lines += [f"{rule}: {n} checked" for rule, n in report.checked.items()]
    lines += [
        f"{f.rule} fails: {'; '.join(f.premises) or '(no premises)'} / {f.conclusion}"
        for f in report.failures
    ]
    _emit(cfg, report, "\n".join(lines))
    return 0 if report.ok else 1


def cmd_schema(args: argparse.Namespace, cfg: RunConfig) -> int:
    print(json.dumps(VerdictReport.model_json_schema(), indent=2))
    return 0


# Parser.


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--logic", choices=["L", "L1", "L1star"], default="L1star", help="Logic level")
    common.add_argument("--json", action="store_true", help="Print JSON reports")
    common.add_argument("--seed", type=int, default=config.SEED, help="Sampling seed")
    common.add_argument("--profile", choices=["mixed", "finite-only", "boundary"], default="mixed", help="Sampling profile")
    common.add_argument("--jobs", type=int, default=config.JOBS, help="Leaves decided in parallel")
    common.add_argument("--cont-budget", type=int, default=config.CONT_BUDGET, help="Prefix of continuity streams to inspect")
    common.add_argument("--default", default="0", help="Value of propositions a model leaves unset")
    common.add_argument("--log-level", default=config.LOG_LEVEL, help="Log level for stderr")

    parser = argparse.ArgumentParser(prog="llq", description="Reasoning in the Lawvere quantale")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, handler: Handler, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, parents=[common], help=help)
        p.set_defaults(handler=handler)
        return p

    p = command("eval", cmd_eval, "Evaluate a formula in a model")
    p.add_argument("model", help="Model file")
    p.add_argument("formula")

    p = command("sample", cmd_sample, "Draw random models and test them against a theory")
    p.add_argument("theory", help="Theory file")
    p.add_argument("--count", type=int, default=10, help="Number of models")

    p = command("normalize", cmd_normalize, "Print the normalization tree of a theory")
    p.add_argument("theory", help="Theory file")
    p.add_argument("--goal", action="append", default=[], help="Judgement normalized as a goal")
    p.add_argument("--structural", action="store_true", help="Stop after the structural rules")

    p = command("sat", cmd_sat, "Decide satisfiability of a theory")
    p.add_argument("theory", help="Theory file")
    p.add_argument("--boolean", action="store_true", help="Restrict to models valued in {0, inf}")

    p = command("entails", cmd_entails, "Decide semantic consequence")
    p.add_argument("theory", help="Theory file")
    p.add_argument("goal", help="Judgement")
    p.add_argument("--elaborate", action="store_true", help="Build and check proofs of the goal")
    p.add_argument("--boolean", action="store_true", help="Restrict to models valued in {0, inf}")

    p = command("check-proof", cmd_check_proof, "Check a proof file")
    p.add_argument("proof", help="Proof file")
    p.add_argument("assumptions", nargs="?", help="Theory file of allowed hypotheses")

    p = command("qalg-check", cmd_qalg_check, "Check the quantitative algebra rules in a metric model")
    p.add_argument("signature", help="Signature and term file")
    p.add_argument("distances", help="Distance table")
    p.add_argument("--eps", default="0,1/2,1", help="Comma separated bounds")

    command("schema", cmd_schema, "Print the JSON schema of verdict reports")
    return parser


def _inputs(args: argparse.Namespace) -> list[Path]:
    names = ("model", "theory", "proof", "assumptions", "signature", "distances")
    return [Path(value) for name in names if (value := getattr(args, name, None))]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(
            level=args.logic,
            output="json" if args.json else "text",
            inputs=_inputs(args),
            seed=args.seed,
            profile=args.profile,
            jobs=args.jobs,
            cont_budget=args.cont_budget,
            default=args.default,
            elaborate=getattr(args, "elaborate", False),
            boolean=getattr(args, "boolean", False),
        )
    except ValidationError as exc:
        print(f"error: invalid options: {exc.errors()[0]['msg']}", file=sys.stderr)
        return 2
    setup_logging(args.log_level)
    setup_tracing(config.TRACING, config.CLOUD_TRACING)
    try:
        return args.handler(args, cfg)
    except (ReasonerError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RecursionError:
        logger.log_struct({"event": "input_too_deep", "command": args.command}, severity="ERROR")
        print("error: input is nested too deeply", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
