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
"""Natural deduction proofs: rule schemas, a checker and derived combinators.

A proof is a sequence of steps; each step names a rule, refers back to the
steps it uses as premises and records the instantiation of the rule schema.
Checking recomputes every step's inference from its instantiation and
compares it with the recorded judgements.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from app.errors import EmptyProofError, ParseError, ProofConstructionError, RuleError
from app.extval import format_rational, parse_rational
from app.syntax import (
    BOT,
    ONE,
    TOP,
    And,
    Bot,
    Formula,
    Judgement,
    Limp,
    Or,
    Scale,
    Tensor,
    biimp,
    neg,
    parse_formula,
    parse_judgement,
    to_text,
)
from app.utils.logs import get_logger

logger = get_logger(__name__)


class RuleId(enum.Enum):
    ID = "id"
    CUT = "cut"
    WEAK = "weak"
    PERM = "perm"
    TOP = "top"
    BOT = "bot"
    AND1 = "and1"
    AND2 = "and2"
    AND3 = "and3"
    OR1 = "or1"
    OR2 = "or2"
    OR3 = "or3"
    WEM = "wem"
    TOT = "tot"
    TENS1A = "tens1a"
    TENS1B = "tens1b"
    TENS2A = "tens2a"
    TENS2B = "tens2b"
    TENS3 = "tens3"
    LIMP1 = "limp1"
    LIMP2 = "limp2"
    LIMP3 = "limp3"
    ONE = "one"
    S1A = "s1a"
    S1B = "s1b"
    S2 = "s2"
    S3 = "s3"
    S4 = "s4"
    S5 = "s5"
    S6 = "s6"
    S7 = "s7"
    S8 = "s8"
    S9 = "s9"
    S10 = "s10"
    HYP = "hyp"
    ADMISSIBLE = "admissible"

    @classmethod
    def from_name(cls, name: str) -> RuleId:
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise RuleError(f"unknown rule {name!r}") from None

    @property
    def arity(self) -> int | None:
        """Number of premises; None for HYP and admissible rules."""
        return _ARITY.get(self)


_ARITY = {
    RuleId.CUT: 2, RuleId.WEAK: 1, RuleId.PERM: 1, RuleId.AND1: 1, RuleId.AND2: 2,
    RuleId.AND3: 1, RuleId.OR1: 2, RuleId.OR2: 1, RuleId.OR3: 1, RuleId.TENS1A: 1,
    RuleId.TENS1B: 1, RuleId.TENS2A: 1, RuleId.TENS2B: 1, RuleId.TENS3: 1,
    RuleId.LIMP1: 2, RuleId.LIMP2: 2, RuleId.LIMP3: 2, RuleId.ONE: 1, RuleId.S1A: 1,
    RuleId.S1B: 1, RuleId.S8: 1,
}
for _rule in RuleId:
    if _rule not in _ARITY and _rule not in (RuleId.HYP, RuleId.ADMISSIBLE):
        _ARITY[_rule] = 0


@dataclass(frozen=True)
class Step:
    conclusion: Judgement
    rule: RuleId
    premises: tuple[int, ...] = ()
    instantiation: Mapping[str, Any] = field(default_factory=dict)
    name: str | None = None

    @property
    def label(self) -> str:
        if self.rule is RuleId.ADMISSIBLE:
            return f"ADMISSIBLE({self.name})"
        value = self.rule.value
        if value[-1] in "ab" and value[-2].isdigit():
            return value[:-1].upper() + value[-1]
        return value.upper()


@dataclass(frozen=True)
class Proof:
    steps: tuple[Step, ...]

    def __post_init__(self) -> None:
        if not self.steps:
            raise ValueError("a proof has at least one step")

    @property
    def theorem(self) -> Judgement:
        return self.steps[-1].conclusion

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Accepted:
    pass


@dataclass(frozen=True)
class Rejected:
    step: int
    reason: str


Verdict = Accepted | Rejected


# Rule schemas.

Inference = tuple[tuple[Judgement, ...], Judgement]


def _formula(inst: Mapping[str, Any], key: str) -> Formula:
    value = inst.get(key)
    if not isinstance(value, Formula):
        raise RuleError(f"instantiation needs a formula for {key!r}")
    return value


def _formulas(inst: Mapping[str, Any], key: str) -> tuple[Formula, ...]:
    value = inst.get(key, ())
    if not isinstance(value, list | tuple) or not all(isinstance(f, Formula) for f in value):
        raise RuleError(f"instantiation needs a formula list for {key!r}")
    return tuple(value)


def _scalar(inst: Mapping[str, Any], key: str, *, positive: bool = False) -> Fraction:
    value = inst.get(key)
    if not isinstance(value, Fraction | int) or isinstance(value, bool):
        raise RuleError(f"instantiation needs a rational for {key!r}")
    value = Fraction(value)
    if value < 0:
        raise RuleError(f"negative scalar {key}={format_rational(-value)} is not allowed")
    if positive and value == 0:
        raise RuleError(f"side condition {key} > 0 fails")
    return value


def _pick(inst: Mapping[str, Any], default: str) -> str:
    pick = inst.get("pick", default)
    if pick not in ("left", "right"):
        raise RuleError("pick must be 'left' or 'right'")
    return pick


def _j(antecedents: Iterable[Formula], consequent: Formula) -> Judgement:
    return Judgement(antecedents, consequent)


def _ordered(pick: str, kept: Formula, other: Formula) -> tuple[Formula, Formula]:
    return (kept, other) if pick == "left" else (other, kept)


def _tens2(inst: Mapping[str, Any]) -> Inference:
    gamma = _formulas(inst, "gamma")
    psi, theta = _formula(inst, "psi"), _formula(inst, "theta")
    if inst.get("phi") is None:
        return (_j(gamma + (psi,), theta),), _j(gamma, Limp(psi, theta))
    phi = _formula(inst, "phi")
    return (_j(gamma + (Tensor(phi, psi),), theta),), _j(gamma + (phi,), Limp(psi, theta))


def _limp23(inst: Mapping[str, Any], finite: str) -> Inference:
    gamma = _formulas(inst, "gamma")
    phi, psi, theta = (_formula(inst, k) for k in ("phi", "psi", "theta"))
    side = _j((), neg(neg(_formula(inst, finite))))
    return (_j(gamma + (theta,), Tensor(phi, psi)), side), _j(gamma + (Limp(phi, theta),), psi)


_S4_OPS: dict[str, Callable[[Formula, Formula], Formula]] = {
    "and": And,
    "or": Or,
    "tensor": Tensor,
    "limp": Limp,
}


def _schema(rule: RuleId, inst: Mapping[str, Any]) -> Inference:
    match rule:
        case RuleId.ID:
            phi = _formula(inst, "phi")
            return (), _j((phi,), phi)
        case RuleId.CUT:
            gamma, delta = _formulas(inst, "gamma"), _formulas(inst, "delta")
            phi, psi = _formula(inst, "phi"), _formula(inst, "psi")
            return (_j(gamma, phi), _j(delta + (phi,), psi)), _j(gamma + delta, psi)
        case RuleId.WEAK:
            gamma = _formulas(inst, "gamma")
            phi, psi = _formula(inst, "phi"), _formula(inst, "psi")
            return (_j(gamma, phi),), _j(gamma + (psi,), phi)
        case RuleId.PERM:
            gamma, delta = _formulas(inst, "gamma"), _formulas(inst, "delta")
            phi, psi, theta = (_formula(inst, k) for k in ("phi", "psi", "theta"))
            return (_j(gamma + (phi, psi) + delta, theta),), _j(gamma + (psi, phi) + delta, theta)
        case RuleId.TOP:
            return (), _j(_formulas(inst, "gamma"), TOP)
        case RuleId.BOT:
            return (), _j((BOT,), _formula(inst, "phi"))
        case RuleId.AND1:
            gamma = _formulas(inst, "gamma")
            phi, psi, theta = (_formula(inst, k) for k in ("phi", "psi", "theta"))
            conj = And(*_ordered(_pick(inst, "left"), phi, psi))
            return (_j(gamma + (phi,), theta),), _j(gamma + (conj,), theta)
        case RuleId.AND2:
            gamma = _formulas(inst, "gamma")
            phi, psi = _formula(inst, "phi"), _formula(inst, "psi")
            return (_j(gamma, phi), _j(gamma, psi)), _j(gamma, And(phi, psi))
        case RuleId.AND3:
            gamma = _formulas(inst, "gamma")
            phi, psi = _formula(inst, "phi"), _formula(inst, "psi")
            kept = psi if _pick(inst, "right") == "right" else phi
            return (_j(gamma, And(phi, psi)),), _j(gamma, kept)
        case RuleId.OR1:
            gamma = _formulas(inst, "gamma")
            phi, psi, theta = (_formula(inst, k) for k in ("phi", "psi", "theta"))
            premises = (_j(gamma + (phi,), theta), _j(gamma + (psi,), theta))
            return premises, _j(gamma + (Or(phi, psi),), theta)
        case RuleId.OR2:
            gamma = _formulas(inst, "gamma")
            phi, psi = _formula(inst, "phi"), _formula(inst, "psi")
            disj = Or(*_ordered(_pick(inst, "left"), phi, psi))
            return (_j(gamma, phi),), _j(gamma, disj)
        case RuleId.OR3:
            gamma = _formulas(inst, "gamma")
            phi, psi, theta = (_formula(inst, k) for k in ("phi", "psi", "theta"))
            kept = psi if _pick(inst, "right") == "right" else phi
            return (_j(gamma + (Or(phi, psi),), theta),), _j(gamma + (kept,), theta)
        case RuleId.WEM:
            phi = _formula(inst, "phi")
            return (), _j((), Or(neg(phi), neg(neg(phi))))
        case RuleId.TOT:
            phi, psi = _formula(inst, "phi"), _formula(inst, "psi")
            return (), _j((), Or(Limp(phi, psi), Limp(psi, phi)))
        case RuleId.TENS1A | RuleId.TENS1B:
            gamma = _formulas(inst, "gamma")
            phi, psi, theta = (_formula(inst, k) for k in ("phi", "psi", "theta"))
            split, joined = _j(gamma + (phi, psi), theta), _j(gamma + (Tensor(phi, psi),), theta)
            return ((split,), joined) if rule is RuleId.TENS1A else ((joined,), split)
        case RuleId.TENS2A | RuleId.TENS2B:
            (premise,), conclusion = _tens2(inst)
            return ((premise,), conclusion) if rule is RuleId.TENS2A else ((conclusion,), premise)
        case RuleId.TENS3:
            phi, psi = _formula(inst, "phi"), _formula(inst, "psi")
            return (_j((Tensor(phi, phi),), Tensor(psi, psi)),), _j((phi,), psi)
        case RuleId.LIMP1:
            gamma = _formulas(inst, "gamma")
            phi, psi, theta = (_formula(inst, k) for k in ("phi", "psi", "theta"))
            premises = (_j(gamma + (Limp(phi, theta),), psi), _j((theta,), phi))
            return premises, _j(gamma + (theta,), Tensor(phi, psi))
        case RuleId.LIMP2:
            return _limp23(inst, "phi")
        case RuleId.LIMP3:
            return _limp23(inst, "theta")
        case RuleId.ONE:
            return (_j((), Or(ONE, neg(ONE))),), _j((), BOT)
        case RuleId.S1A | RuleId.S1B:
            r = _scalar(inst, "r", positive=True)
            phi, psi = _formula(inst, "phi"), _formula(inst, "psi")
            plain, scaled = _j((phi,), psi), _j((Scale(r, phi),), Scale(r, psi))
            return ((plain,), scaled) if rule is RuleId.S1A else ((scaled,), plain)
        case RuleId.S2:
            r, s, phi = _scalar(inst, "r"), _scalar(inst, "s"), _formula(inst, "phi")
            return (), _j((), biimp(Scale(r, Scale(s, phi)), Scale(r * s, phi)))
        case RuleId.S3:
            phi = _formula(inst, "phi")
            return (), _j((), biimp(phi, Scale(Fraction(1), phi)))
        case RuleId.S4:
            op = _S4_OPS.get(inst.get("op", ""))
            if op is None:
                raise RuleError("op must be one of and, or, tensor, limp")
            r = _scalar(inst, "r")
            phi, psi = _formula(inst, "phi"), _formula(inst, "psi")
            return (), _j((), biimp(Scale(r, op(phi, psi)), op(Scale(r, phi), Scale(r, psi))))
        case RuleId.S5:
            return (), _j((), Scale(Fraction(0), _formula(inst, "phi")))
        case RuleId.S6:
            r, s, phi = _scalar(inst, "r"), _scalar(inst, "s"), _formula(inst, "phi")
            return (), _j((), biimp(Scale(r + s, phi), Tensor(Scale(r, phi), Scale(s, phi))))
        case RuleId.S7:
            return (), _j((Scale(_scalar(inst, "r", positive=True), BOT),), BOT)
        case RuleId.S8:
            r, s, phi = _scalar(inst, "r"), _scalar(inst, "s"), _formula(inst, "phi")
            diff = max(s - r, Fraction(0))
            side = _j((), neg(neg(phi)))
            return (side,), _j((), biimp(Scale(diff, phi), Limp(Scale(r, phi), Scale(s, phi))))
        case RuleId.S9 | RuleId.S10:
            r, s, phi = _scalar(inst, "r"), _scalar(inst, "s"), _formula(inst, "phi")
            if rule is RuleId.S9:
                return (), _j((), biimp(And(Scale(r, phi), Scale(s, phi)), Scale(max(r, s), phi)))
            return (), _j((), biimp(Or(Scale(r, phi), Scale(s, phi)), Scale(min(r, s), phi)))
    raise RuleError(f"{rule.value} has no schema")


def rule_instance(rule: RuleId, instantiation: Mapping[str, Any]) -> Inference:
    """The (premises, conclusion) of ``rule`` under ``instantiation``.

    Raises RuleError when a metavariable is missing or a side condition fails.
    """
    if rule in (RuleId.HYP, RuleId.ADMISSIBLE):
        raise RuleError(f"{rule.value} is not a schematic rule")
    return _schema(rule, instantiation)


# Admissible rules.

AdmissibleChecker = Callable[[Sequence[Judgement], Judgement, Mapping[str, Any]], "str | None"]

_ADMISSIBLE: dict[str, AdmissibleChecker] = {}


def register_admissible(name: str, checker: AdmissibleChecker) -> None:
    """Register a derived rule; the checker returns a rejection reason or None."""
    _ADMISSIBLE[name] = checker


def admissible_rules() -> list[str]:
    return sorted(_ADMISSIBLE)


# Checking.


def _check_step(index: int, step: Step, conclusions: list[Judgement], assumptions: frozenset[Judgement]) -> str | None:
    if any(not 0 <= i < index for i in step.premises):
        return "premises must refer to earlier steps"
    premises = [conclusions[i] for i in step.premises]
    if step.rule is RuleId.HYP:
        if step.premises:
            return "hypotheses take no premises"
        return None if step.conclusion in assumptions else "not an assumption"
    if step.rule is RuleId.ADMISSIBLE:
        checker = _ADMISSIBLE.get(step.name or "")
        if checker is None:
            return f"unknown admissible rule {step.name!r}"
        return checker(premises, step.conclusion, step.instantiation)
    try:
        expected, conclusion = rule_instance(step.rule, step.instantiation)
    except RuleError as exc:
        return str(exc)
    if len(premises) != len(expected):
        return f"{step.rule.value} takes {len(expected)} premises, got {len(premises)}"
    for position, (got, want) in enumerate(zip(premises, expected, strict=True)):
        if got != want:
            return f"premise {position + 1} is {to_text(got)!r}, rule needs {to_text(want)!r}"
    if step.conclusion != conclusion:
        return f"conclusion should be {to_text(conclusion)!r}"
    return None


def check(p: Proof, assumptions: Iterable[Judgement] = ()) -> Verdict:
    """Accept ``p`` iff every step is a correct rule instance or assumption."""
    allowed = frozenset(assumptions)
    conclusions: list[Judgement] = []
    for index, step in enumerate(p.steps):
        reason = _check_step(index, step, conclusions, allowed)
        if reason is not None:
            logger.log_struct(
                {"event": "proof_rejected", "step": index + 1, "rule": step.label, "reason": reason},
                severity="WARNING",
            )
            return Rejected(index + 1, reason)
        conclusions.append(step.conclusion)
    return Accepted()


# Construction helpers.


class ProofBuilder:
    """Accumulates steps, returning the index of each added step."""

    def __init__(self) -> None:
        self.steps: list[Step] = []

    def add(self, step: Step) -> int:
        self.steps.append(step)
        return len(self.steps) - 1

    def hyp(self, j: Judgement) -> int:
        return self.add(Step(j, RuleId.HYP))

    def apply(self, rule: RuleId, premises: Sequence[int] = (), **inst: Any) -> int:
        """Add a schematic step, computing its conclusion from ``inst``."""
        _, conclusion = rule_instance(rule, inst)
        return self.add(Step(conclusion, rule, tuple(premises), inst))

    def admissible(self, conclusion: Judgement, name: str, premises: Sequence[int], **inst: Any) -> int:
        return self.add(Step(conclusion, RuleId.ADMISSIBLE, tuple(premises), inst, name))

    def extend(self, proof: Proof) -> int:
        """Append ``proof``; returns the index of its theorem."""
        offset = len(self.steps)
        for step in proof.steps:
            shifted = tuple(i + offset for i in step.premises)
            self.steps.append(Step(step.conclusion, step.rule, shifted, step.instantiation, step.name))
        return len(self.steps) - 1

    def conclusion(self, index: int) -> Judgement:
        return self.steps[index].conclusion

    def build(self) -> Proof:
        return Proof(tuple(self.steps))


def _single(j: Judgement) -> tuple[Formula, Formula]:
    if len(j.antecedents) != 1:
        raise ProofConstructionError(f"{to_text(j)!r} needs exactly one antecedent")
    return j.antecedents[0], j.consequent


def scaled(p: Proof, r: Fraction | int) -> Proof:
    """From a proof of ``phi |- psi``, a proof of ``r*phi |- r*psi`` (r > 0)."""
    phi, psi = _single(p.theorem)
    builder = ProofBuilder()
    top = builder.extend(p)
    builder.apply(RuleId.S1A, [top], phi=phi, psi=psi, r=Fraction(r))
    return builder.build()


def combine(p1: Proof, p2: Proof | None, r: Fraction | int, s: Fraction | int = 1) -> Proof:
    """The combination rule ``phi1 |- psi1, phi2 |- psi2 / r*phi1 (x) s*phi2 |- r*psi1 (x) s*psi2``.

    The derived rule is expanded into S1, id, tensor and cut steps. Without a
    second proof only the scaling of the first is produced.
    """
    if p2 is None:
        return scaled(p1, r)
    r, s = Fraction(r), Fraction(s)
    if r <= 0 or s <= 0:
        raise ProofConstructionError("combination factors must be positive")
    phi1, psi1 = _single(p1.theorem)
    phi2, psi2 = _single(p2.theorem)
    builder = ProofBuilder()
    first = builder.apply(RuleId.S1A, [builder.extend(p1)], phi=phi1, psi=psi1, r=r)
    second = builder.apply(RuleId.S1A, [builder.extend(p2)], phi=phi2, psi=psi2, r=s)
    r_phi1, r_psi1 = Scale(r, phi1), Scale(r, psi1)
    s_phi2, s_psi2 = Scale(s, phi2), Scale(s, psi2)
    target = Tensor(r_psi1, s_psi2)
    ident = builder.apply(RuleId.ID, phi=target)
    split = builder.apply(RuleId.TENS1B, [ident], gamma=[], phi=r_psi1, psi=s_psi2, theta=target)
    cut_second = builder.apply(
        RuleId.CUT, [second, split], gamma=[s_phi2], delta=[r_psi1], phi=s_psi2, psi=target
    )
    cut_first = builder.apply(
        RuleId.CUT, [first, cut_second], gamma=[r_phi1], delta=[s_phi2], phi=r_psi1, psi=target
    )
    builder.apply(RuleId.TENS1A, [cut_first], gamma=[], phi=r_phi1, psi=s_phi2, theta=target)
    return builder.build()


def is_supplementary_pair(first: Judgement, second: Judgement) -> bool:
    """(|- a -o b, |- b -o a) or (|- !a, |- !!a)."""
    if first.antecedents or second.antecedents:
        return False
    match first.consequent, second.consequent:
        case Limp(a, Bot()), Limp(Limp(b, Bot()), Bot()) if a == b:
            return True
        case Limp(a, b), Limp(c, d):
            return a == d and b == c
    return False


def by_cases(
    pf_left: Proof,
    pf_right: Proof,
    pair: tuple[Judgement, Judgement],
    assumptions: Iterable[Judgement] = (),
) -> Proof:
    """Discharge a supplementary pair: both subproofs conclude the same judgement.

    ``pf_left`` may use ``pair[0]`` and ``pf_right`` may use ``pair[1]`` on
    top of the shared ``assumptions``.
    """
    if not is_supplementary_pair(*pair):
        raise ProofConstructionError("not a supplementary pair")
    if pf_left.theorem != pf_right.theorem:
        raise ProofConstructionError(
            f"branches conclude {to_text(pf_left.theorem)!r} and {to_text(pf_right.theorem)!r}"
        )
    builder = ProofBuilder()
    shared = [builder.hyp(j) for j in dict.fromkeys(assumptions)]
    builder.admissible(pf_left.theorem, "totality", shared, pair=tuple(pair), left=pf_left, right=pf_right)
    return builder.build()


def _check_totality(premises: Sequence[Judgement], conclusion: Judgement, inst: Mapping[str, Any]) -> str | None:
    pair, left, right = inst.get("pair"), inst.get("left"), inst.get("right")
    if not isinstance(left, Proof) or not isinstance(right, Proof) or not pair or len(pair) != 2:
        return "totality needs a pair and two subproofs"
    if not is_supplementary_pair(*pair):
        return "not a supplementary pair"
    for case, subproof in zip(pair, (left, right), strict=True):
        if subproof.theorem != conclusion:
            return "a branch does not conclude the step's judgement"
        verdict = check(subproof, (*premises, case))
        if isinstance(verdict, Rejected):
            return f"branch under {to_text(case)!r} rejected at step {verdict.step}: {verdict.reason}"
    return None


register_admissible("totality", _check_totality)


# Proof files.

_LINE = re.compile(
    r"^\s*(?P<n>\d+)\s*:\s*(?P<judgement>.*?)\s+BY\s+(?P<rule>[A-Za-z0-9_]+(?:\([^)]*\))?)"
    r"\s*(?:\[(?P<premises>[^\]]*)\])?\s*(?:\{(?P<inst>.*)\})?\s*$"
)
_LIST_KEYS = frozenset({"gamma", "delta"})
_SCALAR_KEYS = frozenset({"r", "s"})
_WORD_KEYS = frozenset({"pick", "op"})
_KEY_ORDER = ("gamma", "delta", "phi", "psi", "theta", "r", "s", "op", "pick")


def _split_top(text: str, sep: str) -> list[str]:
    parts, depth, quoted, current = [], 0, False, []
    for ch in text:
        if ch == '"':
            quoted = not quoted
        elif not quoted and ch in "([":
            depth += 1
        elif not quoted and ch in ")]":
            depth -= 1
        if ch == sep and depth == 0 and not quoted:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return [p.strip() for p in parts if p.strip()]


def _parse_value(key: str, text: str) -> Any:
    if key in _LIST_KEYS:
        if not (text.startswith("[") and text.endswith("]")):
            raise ParseError(f"{key} must be a bracketed formula list")
        return [parse_formula(part) for part in _split_top(text[1:-1], ",")]
    if key in _SCALAR_KEYS:
        return parse_rational(text)
    if key in _WORD_KEYS:
        return text
    if text == "none":
        return None
    return parse_formula(text)


def parse_proof(text: str) -> Proof:
    """Read ``n: <judgement> BY <rule> [premises] {key=value; ...}`` lines."""
    steps: list[Step] = []
    numbers: dict[int, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        match = _LINE.match(line)
        if match is None:
            raise ParseError("expected 'n: judgement BY rule [premises] {instantiation}'", line=lineno)
        try:
            number = int(match["n"])
            if number in numbers:
                raise ParseError(f"step {number} is defined twice")
            if match["rule"].lower().startswith("admissible"):
                raise ParseError("admissible steps cannot be read from proof files")
            rule = RuleId.from_name(match["rule"])
            premises = []
            for ref in _split_top(match["premises"] or "", ","):
                if not ref.isdigit() or int(ref) not in numbers:
                    raise ParseError(f"premise {ref!r} does not name an earlier step")
                premises.append(numbers[int(ref)])
            inst: dict[str, Any] = {}
            for item in _split_top(match["inst"] or "", ";"):
                key, sep, value = item.partition("=")
                if not sep:
                    raise ParseError(f"instantiation entry {item!r} needs key=value")
                inst[key.strip()] = _parse_value(key.strip(), value.strip())
            conclusion = parse_judgement(match["judgement"])
        except ParseError as exc:
            raise ParseError(exc.message, exc.position, lineno) from exc
        except RuleError as exc:
            raise ParseError(str(exc), line=lineno) from exc
        numbers[number] = len(steps)
        steps.append(Step(conclusion, rule, tuple(premises), inst))
    if not steps:
        raise EmptyProofError("empty proof")
    return Proof(tuple(steps))


def _format_value(value: Any) -> str:
    match value:
        case Formula():
            return to_text(value)
        case list() | tuple():
            return "[" + ", ".join(to_text(f) for f in value) + "]"
        case Fraction() | int():
            return format_rational(Fraction(value))
        case None:
            return "none"
    return str(value)


def format_proof(p: Proof) -> str:
    """Write ``p`` in the proof file format; admissible steps are shown by name only."""
    lines = []
    for index, step in enumerate(p.steps, start=1):
        refs = ", ".join(str(i + 1) for i in step.premises)
        line = f"{index}: {to_text(step.conclusion)} BY {step.label}"
        if refs:
            line += f" [{refs}]"
        if step.rule is not RuleId.ADMISSIBLE and step.instantiation:
            keys = [k for k in _KEY_ORDER if k in step.instantiation]
            keys += sorted(k for k in step.instantiation if k not in _KEY_ORDER)
            entries = "; ".join(f"{k}={_format_value(step.instantiation[k])}" for k in keys)
            line += f" {{{entries}}}"
        lines.append(line)
    return "\n".join(lines)
