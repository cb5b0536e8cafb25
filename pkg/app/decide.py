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
"""Decision procedures: satisfiability, consequence and proof elaboration."""

from __future__ import annotations

import time
from collections.abc import Callable, Iterable, Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import islice
from typing import Literal, TypeVar

from opentelemetry import trace

from app.derive import AffineSequent, coefficients, factor
from app.errors import CertificateError, DecisionError, MonotonicityError, ProofConstructionError
from app.extval import INF, ZERO, ExtValue
from app.linarith import (
    AffineConstraint,
    Combination,
    Countermodel,
    InfeasibilityCertificate,
    LinSystem,
    Vacuous,
    Witness,
    entails,
    feasible,
    verify_combination,
)
from app.normalize import (
    Affine,
    Assertion,
    Finitist,
    Inconsistent,
    Leaf,
    NormalJudgement,
    NormalTheory,
    internalize,
    leaf_list,
    normalize,
    to_judgement,
)
from app.proofkit import (
    Proof,
    ProofBuilder,
    Rejected,
    RuleId,
    Step,
    check,
    combine,
    scaled,
)
from app.semantics import Model, satisfies, satisfies_all
from app.syntax import TOP, Judgement, LogicLevel, to_text
from app.utils.logs import get_logger

logger = get_logger(__name__)
tracer = trace.get_tracer(__name__)

T = TypeVar("T")
R = TypeVar("R")


# Results.


@dataclass(frozen=True)
class Satisfiable:
    witness: Model
    leaf: int


@dataclass(frozen=True)
class LeafRefutation:
    """Why a leaf has no model; ``certificate`` is None for an inconsistent leaf."""

    leaf: int
    certificate: InfeasibilityCertificate | None = None


@dataclass(frozen=True)
class Unsatisfiable:
    evidence: tuple[LeafRefutation, ...]


SatResult = Satisfiable | Unsatisfiable


@dataclass(frozen=True)
class GoalCertificate:
    """A goal settled at a leaf; affine goals carry their combination."""

    goal: NormalJudgement
    combination: Combination


@dataclass(frozen=True)
class LeafCertificate:
    leaf: int
    reason: Literal["inconsistent", "infeasible", "goals"]
    infeasibility: InfeasibilityCertificate | None = None
    goals: tuple[GoalCertificate, ...] = ()


@dataclass(frozen=True)
class Entailed:
    leaves: tuple[LeafCertificate, ...]
    proofs: tuple[Proof, ...] = ()


@dataclass(frozen=True)
class Refuted:
    countermodel: Model
    leaf: int


ConsequenceResult = Entailed | Refuted


@dataclass(frozen=True)
class Satisfies:
    reason: str


@dataclass(frozen=True)
class HypsHoldSoFar:
    inspected: int


@dataclass(frozen=True)
class Violated:
    """All hypotheses of a finite inference hold but the conclusion fails."""

    inspected: int


InferenceVerdict = Satisfies | HypsHoldSoFar | Violated


# Leaf systems.


def affine_row(a: Affine) -> AffineConstraint:
    """``lhs - rhs + (lconst - rconst) >= 0``."""
    coeffs = dict(a.lhs)
    for p, c in a.rhs:
        coeffs[p] = coeffs.get(p, Fraction(0)) - c
    return AffineConstraint.of(coeffs, a.lconst - a.rconst)


def leaf_system(theory: NormalTheory) -> tuple[LinSystem, list[Affine]]:
    """Affine judgements as rows (in ``theory.affines()`` order) over finite props."""
    affines = theory.affines()
    finite = {j.prop for j in theory.judgements if isinstance(j, Finitist)}
    for a in affines:
        finite |= a.props
    return LinSystem([affine_row(a) for a in affines], finite), affines


def lift(point: Mapping[str, Fraction], theory: NormalTheory, default: ExtValue = ZERO) -> Model:
    """Extend a point over the finite propositions to a model of the leaf."""
    values: dict[str, ExtValue] = {}
    for p, assertion in theory.facts().items():
        if assertion is Assertion.INFINITE:
            values[p] = INF
        elif assertion is Assertion.ZERO:
            values[p] = ZERO
        else:
            values[p] = ExtValue(Fraction(point.get(p, 0)))
    for p, x in point.items():
        values.setdefault(p, ExtValue(Fraction(x)))
    return Model(values, default)


def _map(fn: Callable[[T], R], items: Sequence[T], jobs: int) -> list[R]:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _log_verdict(kind: str, verdict: str, leaves: int, started: float) -> None:
    logger.log_struct(
        {
            "event": "decision",
            "kind": kind,
            "verdict": verdict,
            "leaves": leaves,
            "seconds": round(time.perf_counter() - started, 6),
        },
        severity="INFO",
    )


# Satisfiability.


def _leaf_sat(leaf: Leaf) -> Witness | InfeasibilityCertificate | None:
    if leaf.theory.inconsistent:
        return None
    system, _ = leaf_system(leaf.theory)
    return feasible(system)


def sat(
    judgements: Iterable[Judgement],
    level: LogicLevel = LogicLevel.L1STAR,
    *,
    jobs: int = 1,
    default: ExtValue = ZERO,
) -> SatResult:
    """Decide whether some model satisfies every judgement."""
    inputs = list(judgements)
    started = time.perf_counter()
    with tracer.start_as_current_span("sat") as span:
        leaves = leaf_list(normalize(inputs, level))
        span.set_attribute("leaves", len(leaves))
        outcomes = _map(_leaf_sat, leaves, jobs)
        evidence = []
        for index, (leaf, outcome) in enumerate(zip(leaves, outcomes, strict=True)):
            if isinstance(outcome, Witness):
                model = lift(outcome.point, leaf.theory, default)
                if not satisfies_all(model, inputs):
                    raise DecisionError(f"witness of leaf {index} does not satisfy the input")
                _log_verdict("sat", "satisfiable", len(leaves), started)
                return Satisfiable(model, index)
            evidence.append(LeafRefutation(index, outcome))
    _log_verdict("sat", "unsatisfiable", len(leaves), started)
    return Unsatisfiable(tuple(evidence))


def consistent(judgements: Iterable[Judgement], level: LogicLevel = LogicLevel.L1STAR) -> bool:
    """A finitely axiomatized theory is consistent when it has a model."""
    return isinstance(sat(judgements, level), Satisfiable)


# Consequence.


@dataclass(frozen=True)
class _LeafFailure:
    point: Mapping[str, Fraction]


def _leaf_consequence(index: int, leaf: Leaf) -> LeafCertificate | _LeafFailure:
    if leaf.theory.inconsistent:
        return LeafCertificate(index, "inconsistent")
    system, _ = leaf_system(leaf.theory)
    outcome = feasible(system)
    if isinstance(outcome, InfeasibilityCertificate):
        return LeafCertificate(index, "infeasible", outcome)
    certificates = []
    for goal in leaf.goals:
        match goal:
            case Inconsistent():
                return _LeafFailure(outcome.point)
            case Affine():
                result = entails(system, affine_row(goal))
                if isinstance(result, Countermodel):
                    return _LeafFailure(result.point)
                if isinstance(result, Vacuous):
                    return LeafCertificate(index, "infeasible", result.certificate)
                certificates.append(GoalCertificate(goal, result))
            case _:
                raise DecisionError(f"goal {goal!r} was left unresolved at leaf {index}")
    return LeafCertificate(index, "goals", goals=tuple(certificates))


def consequence(
    hyps: Iterable[Judgement],
    goal: Judgement,
    level: LogicLevel = LogicLevel.L1STAR,
    *,
    jobs: int = 1,
    elaborate: bool = False,
    default: ExtValue = ZERO,
) -> ConsequenceResult:
    """Decide ``hyps |= goal`` by normalizing both with the goal marked."""
    inputs = list(hyps)
    started = time.perf_counter()
    with tracer.start_as_current_span("consequence") as span:
        leaves = leaf_list(normalize(inputs, level, goals=[goal]))
        span.set_attribute("leaves", len(leaves))
        outcomes = _map(lambda item: _leaf_consequence(*item), list(enumerate(leaves)), jobs)
        for index, (leaf, outcome) in enumerate(zip(leaves, outcomes, strict=True)):
            if isinstance(outcome, _LeafFailure):
                model = lift(outcome.point, leaf.theory, default)
                if not satisfies_all(model, inputs) or satisfies(model, goal):
                    raise DecisionError(f"countermodel of leaf {index} does not refute the goal")
                _log_verdict("consequence", "refuted", len(leaves), started)
                return Refuted(model, index)
        certificates = tuple(o for o in outcomes if isinstance(o, LeafCertificate))
        proofs: list[Proof] = []
        if elaborate:
            for certificate in certificates:
                theory = leaves[certificate.leaf].theory
                for settled in certificate.goals:
                    assert isinstance(settled.goal, Affine)
                    proof = elaborate_proof(theory, settled.goal, settled.combination)
                    verdict = check(proof, theory.as_judgements())
                    if isinstance(verdict, Rejected):
                        raise DecisionError(
                            f"elaborated proof at leaf {certificate.leaf} is rejected: {verdict.reason}"
                        )
                    proofs.append(proof)
    _log_verdict("consequence", "entailed", len(leaves), started)
    return Entailed(certificates, tuple(proofs))


# Proof elaboration.


def elaborate_proof(
    leaf_hyps: NormalTheory | Iterable[NormalJudgement],
    goal: Affine,
    c: Combination,
) -> Proof:
    """Turn a combination into a proof of ``goal`` from the leaf hypotheses.

    Each hypothesis with a positive multiplier is scaled (S1) and folded into
    the running conclusion with the combination rule. Primitive steps then
    bring the result to the goal: bound rows and the slack are added to the
    antecedent by weakening, copies of a proposition are merged with S6 and
    factors on both sides are cancelled against their finiteness facts.
    """
    theory = leaf_hyps if isinstance(leaf_hyps, NormalTheory) else NormalTheory(frozenset(leaf_hyps))
    system, affines = leaf_system(theory)
    if not verify_combination(system, affine_row(goal), c):
        raise CertificateError(f"combination does not derive {to_text(to_judgement(goal))!r}")
    rows = system.rows()
    acc: Proof | None = None
    weakenings: list[tuple[str | None, Fraction]] = []
    for index, t in c.multipliers:
        if index >= len(affines):
            [(bounded, _)] = rows[index].terms
            weakenings.append((bounded, t))
            continue
        hypothesis = Proof((Step(to_judgement(affines[index]), RuleId.HYP),))
        if acc is None:
            acc = hypothesis if t == 1 else scaled(hypothesis, t)
        else:
            acc = combine(acc, hypothesis, 1, t)
    if c.slack > 0:
        weakenings.append((None, c.slack))
    if acc is None:
        acc = Proof((Step(Judgement([TOP], TOP), RuleId.TOP, (), {"gamma": [TOP]}),))
    target = to_judgement(goal)
    if acc.theorem == target:
        return acc
    builder = ProofBuilder()
    finite = (j.prop for j in theory.judgements if isinstance(j, Finitist))
    sequent = AffineSequent(builder, builder.extend(acc), finite)
    for key, t in weakenings:
        sequent.weaken(factor(key, t))
    sequent.settle(coefficients(goal.lhs, goal.lconst), coefficients(goal.rhs, goal.rconst))
    if builder.conclusion(sequent.index) != target:
        raise ProofConstructionError(f"elaboration ended at {to_text(builder.conclusion(sequent.index))!r}")
    return builder.build()


# Inductive inferences.


def check_inference_model(
    m: Model,
    hyps: Iterable[Judgement],
    concl: Judgement,
    budget: int,
) -> InferenceVerdict:
    """Check ``m`` against an inference whose hypotheses form a monotone stream.

    Only the first ``budget`` hypotheses are inspected, so a positive answer
    for an infinite stream is ``HypsHoldSoFar``.
    """
    prefix = list(islice(iter(hyps), budget + 1))
    exhausted = len(prefix) <= budget
    prefix = prefix[:budget]
    for i in range(len(prefix) - 1):
        earlier = internalize(prefix[i]).consequent
        later = internalize(prefix[i + 1]).consequent
        if isinstance(consequence([], Judgement([later], earlier)), Refuted):
            raise MonotonicityError(
                f"hypothesis {i + 2} does not entail hypothesis {i + 1}: "
                f"{to_text(prefix[i + 1])!r} vs {to_text(prefix[i])!r}"
            )
    for i, j in enumerate(prefix, start=1):
        if not satisfies(m, j):
            return Satisfies(f"hypothesis {i} fails")
    if satisfies(m, concl):
        return Satisfies("conclusion holds")
    return Violated(len(prefix)) if exhausted else HypsHoldSoFar(len(prefix))
