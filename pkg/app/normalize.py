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
"""Normal forms and the branching normalization procedure.

A judgement set is rewritten into a tree whose leaves are normal theories:
sets of tautological, inconsistent, alethic (p = 0 or p = inf), finitist
(p finite) and affine judgements. A model satisfies the input exactly when it
satisfies some leaf.

Internally a judgement ``G |- d`` becomes a clause ``Geq(lhs, rhs)`` over
tensor summands (``m(lhs) >= m(rhs)``); finiteness side conditions become
``Fin(body)``. Each rule removes one connective. Rules whose effect depends on
an ordering or on finiteness split the branch with a supplementary pair:
``tot`` on (phi |- psi, psi |- phi) or ``wem`` on (|- !phi, |- !!phi).
"""

from __future__ import annotations

import enum
import time
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Literal

from opentelemetry import trace

from app.errors import LevelError, NormalizationError
from app.proofkit import Proof, ProofBuilder, register_admissible
from app.semantics import search_countermodel
from app.syntax import (
    BOT,
    ONE,
    TOP,
    And,
    Atom,
    Bot,
    Formula,
    Judgement,
    Limp,
    LogicLevel,
    One,
    Or,
    Scale,
    Tensor,
    Top,
    level_of,
    neg,
    ntimes,
    numeral,
    size,
    tensor_all,
    to_text,
)
from app.utils.logs import get_logger

logger = get_logger(__name__)
tracer = trace.get_tracer(__name__)

Role = Literal["hyp", "goal"]


# Scalar flattening.


def flatten(f: Formula, factor: Fraction = Fraction(1)) -> Formula:
    """Push scalars onto atoms and constants, merging and dropping trivial ones."""
    if factor == 0:
        return TOP
    match f:
        case Scale(coeff, body):
            return flatten(body, factor * coeff)
        case And(a, b):
            return And(flatten(a, factor), flatten(b, factor))
        case Or(a, b):
            return Or(flatten(a, factor), flatten(b, factor))
        case Tensor(a, b):
            return Tensor(flatten(a, factor), flatten(b, factor))
        case Limp(a, b):
            return Limp(flatten(a, factor), flatten(b, factor))
        case Atom() | One():
            return f if factor == 1 else Scale(factor, f)
    # bot, top are fixed by every positive scalar
    return f


def _split_tensor(f: Formula, out: list[Formula]) -> None:
    match f:
        case Tensor(a, b):
            _split_tensor(a, out)
            _split_tensor(b, out)
        case Top():
            pass
        case _:
            out.append(f)


def summands(f: Formula) -> tuple[Formula, ...]:
    """Flattened tensor factors of ``f`` with ``top`` removed."""
    out: list[Formula] = []
    _split_tensor(flatten(f), out)
    return tuple(out)


def _atom_of(f: Formula) -> tuple[str, Fraction] | None:
    match f:
        case Atom(name):
            return name, Fraction(1)
        case Scale(coeff, Atom(name)):
            return name, coeff
    return None


def _const_of(f: Formula) -> Fraction | None:
    match f:
        case One():
            return Fraction(1)
        case Scale(coeff, One()):
            return coeff
    return None


def _is_atomic(f: Formula) -> bool:
    return _atom_of(f) is not None or _const_of(f) is not None


# Normal judgements.


class AlethicKind(enum.Enum):
    ZERO = "zero"
    INFINITE = "infinite"


class Assertion(enum.Enum):
    ZERO = "zero"
    INFINITE = "infinite"
    FINITE = "finite"


@dataclass(frozen=True)
class Tautological:
    pass


@dataclass(frozen=True)
class Inconsistent:
    pass


@dataclass(frozen=True)
class Alethic:
    prop: str
    kind: AlethicKind


@dataclass(frozen=True)
class Finitist:
    prop: str


Terms = tuple[tuple[str, Fraction], ...]


def _terms(coeffs: Mapping[str, Fraction | int]) -> Terms:
    return tuple(sorted((p, Fraction(c)) for p, c in coeffs.items() if c != 0))


@dataclass(frozen=True)
class Affine:
    """``sum(lhs) + lconst |- sum(rhs) + rconst`` over scaled propositions."""

    lhs: Terms
    lconst: Fraction
    rhs: Terms
    rconst: Fraction

    @classmethod
    def of(
        cls,
        lhs: Mapping[str, Fraction | int],
        lconst: Fraction | int,
        rhs: Mapping[str, Fraction | int],
        rconst: Fraction | int,
    ) -> Affine:
        return cls(_terms(lhs), Fraction(lconst), _terms(rhs), Fraction(rconst))

    @property
    def lhs_map(self) -> dict[str, Fraction]:
        return dict(self.lhs)

    @property
    def rhs_map(self) -> dict[str, Fraction]:
        return dict(self.rhs)

    @property
    def props(self) -> frozenset[str]:
        return frozenset(p for p, _ in self.lhs) | frozenset(p for p, _ in self.rhs)


@dataclass(frozen=True)
class NotNormal:
    pass


NormalJudgement = Tautological | Inconsistent | Alethic | Finitist | Affine
NOT_NORMAL = NotNormal()
TAUTOLOGICAL = Tautological()
INCONSISTENT = Inconsistent()


def normal_props(nj: NormalJudgement) -> frozenset[str]:
    match nj:
        case Alethic(p, _) | Finitist(p):
            return frozenset({p})
        case Affine():
            return nj.props
    return frozenset()


def _side_formula(terms: Terms, const: Fraction, level: LogicLevel) -> Formula:
    parts: list[Formula] = []
    for p, c in terms:
        if c == 1:
            parts.append(Atom(p))
        elif level < LogicLevel.L1STAR and c.denominator == 1:
            parts.append(ntimes(int(c), Atom(p)))
        else:
            parts.append(Scale(c, Atom(p)))
    if const == 1:
        parts.append(ONE)
    elif const != 0:
        parts.append(numeral(const))
    return tensor_all(parts)


def to_judgement(nj: NormalJudgement, level: LogicLevel = LogicLevel.L1STAR) -> Judgement:
    """Write a normal judgement in the judgement syntax of ``level``."""
    match nj:
        case Tautological():
            return Judgement([], TOP)
        case Inconsistent():
            return Judgement([TOP], BOT)
        case Alethic(p, AlethicKind.ZERO):
            return Judgement([TOP], Atom(p))
        case Alethic(p, AlethicKind.INFINITE):
            return Judgement([Atom(p)], BOT)
        case Finitist(p):
            return Judgement([], neg(neg(Atom(p))))
        case Affine(lhs, lconst, rhs, rconst):
            left = _side_formula(lhs, lconst, level)
            return Judgement([left], _side_formula(rhs, rconst, level))
    raise TypeError(f"not a normal judgement: {nj!r}")


def print_normal(nj: NormalJudgement, level: LogicLevel = LogicLevel.L1STAR) -> str:
    return to_text(to_judgement(nj, level))


def _sides_to_affine(lhs: Sequence[Formula], rhs: Sequence[Formula]) -> Affine:
    maps: list[dict[str, Fraction]] = [{}, {}]
    consts = [Fraction(0), Fraction(0)]
    for side, items in enumerate((lhs, rhs)):
        for item in items:
            if (atom := _atom_of(item)) is not None:
                maps[side][atom[0]] = maps[side].get(atom[0], Fraction(0)) + atom[1]
            else:
                const = _const_of(item)
                assert const is not None
                consts[side] += const
    return Affine.of(maps[0], consts[0], maps[1], consts[1])


def _classify_sides(lhs: Sequence[Formula], rhs: Sequence[Formula]) -> NormalJudgement | NotNormal:
    if any(isinstance(f, Bot) for f in lhs) or not rhs:
        return TAUTOLOGICAL
    nonconst = [f for f in lhs if _const_of(f) is None]
    if any(isinstance(f, Bot) for f in rhs):
        if not nonconst:
            return INCONSISTENT
        if len(nonconst) == 1 and (atom := _atom_of(nonconst[0])) is not None:
            return Alethic(atom[0], AlethicKind.INFINITE)
        return NOT_NORMAL
    if not nonconst and len(rhs) == 1:
        match rhs[0]:
            case Limp(Limp(x, Bot()), Bot()) if (atom := _atom_of(x)) is not None:
                return Finitist(atom[0])
            case Limp(x, Bot()) if (atom := _atom_of(x)) is not None:
                return Alethic(atom[0], AlethicKind.INFINITE)
    if all(_is_atomic(f) for f in (*lhs, *rhs)):
        affine = _sides_to_affine(lhs, rhs)
        if not affine.lhs and not affine.rhs:
            return TAUTOLOGICAL if affine.lconst >= affine.rconst else INCONSISTENT
        if not affine.lhs and affine.lconst == 0 and affine.rconst == 0 and len(affine.rhs) == 1:
            return Alethic(affine.rhs[0][0], AlethicKind.ZERO)
        return affine
    return NOT_NORMAL


def affine_form(j: Judgement) -> Affine | None:
    """Coefficients of ``j`` when both sides are sums of scaled atoms and constants."""
    lhs = tuple(s for a in j.antecedents for s in summands(a))
    rhs = summands(j.consequent)
    if not all(_is_atomic(f) for f in (*lhs, *rhs)):
        return None
    return _sides_to_affine(lhs, rhs)


def classify(j: Judgement) -> NormalJudgement | NotNormal:
    """Classify ``j`` into a normal form after scalar flattening."""
    lhs = tuple(s for a in j.antecedents for s in summands(a))
    return _classify_sides(lhs, summands(j.consequent))


def _settle_affine(a: Affine) -> list[NormalJudgement]:
    """Resolve affine judgements whose antecedent side is empty or constant."""
    if not a.lhs and not a.rhs:
        return [TAUTOLOGICAL if a.lconst >= a.rconst else INCONSISTENT]
    if not a.lhs and a.lconst == 0:
        if a.rconst > 0:
            return [INCONSISTENT]
        return [Alethic(p, AlethicKind.ZERO) for p, _ in a.rhs]
    if not a.rhs and a.rconst == 0:
        return [TAUTOLOGICAL]
    return [a]


def simplify_with_assertives(a: Affine, context: Mapping[str, Assertion]) -> NormalJudgement:
    """Substitute known zero/infinite propositions into an affine judgement.

    Propositions the context does not mention are left alone; an infinite
    consequent is only declared inconsistent once every antecedent proposition
    is known to be finite.
    """
    lhs = {p: c for p, c in a.lhs if context.get(p) is not Assertion.ZERO}
    rhs = {p: c for p, c in a.rhs if context.get(p) is not Assertion.ZERO}
    if any(context.get(p) is Assertion.INFINITE for p in lhs):
        return TAUTOLOGICAL
    if any(context.get(p) is Assertion.INFINITE for p in rhs):
        if all(context.get(p) is Assertion.FINITE for p in lhs):
            return INCONSISTENT
        return a
    return Affine.of(lhs, a.lconst, rhs, a.rconst)


# Clauses.


@dataclass(frozen=True)
class Geq:
    """``m(lhs) >= m(rhs)`` where each side is a sum of summands."""

    lhs: tuple[Formula, ...]
    rhs: tuple[Formula, ...]


@dataclass(frozen=True)
class Fin:
    """``m(body) < inf``."""

    body: tuple[Formula, ...]


Clause = Geq | Fin


def clause_of(j: Judgement) -> Geq:
    """The single-sided clause for ``j`` (``G |- d`` as ``(x)G >= d``)."""
    return Geq(tuple(s for a in j.antecedents for s in summands(a)), summands(j.consequent))


def clause_judgement(c: Clause) -> Judgement:
    match c:
        case Geq(lhs, rhs):
            return Judgement([tensor_all(lhs)] if lhs else [], tensor_all(rhs))
        case Fin(body):
            return Judgement([], neg(neg(tensor_all(body))))
    raise TypeError(f"not a clause: {c!r}")


def internalize(j: Judgement) -> Judgement:
    """``G |- d`` as the equivalent ``|- (x)G -o d``."""
    return Judgement([], Limp(tensor_all(j.antecedents), j.consequent))


def _connectives(f: Formula) -> int:
    match f:
        case Bot():
            return 1
        case And(a, b) | Or(a, b) | Limp(a, b):
            return 1 + _connectives(a) + _connectives(b)
        case Tensor(a, b):
            return _connectives(a) + _connectives(b)
        case Scale(_, body):
            return _connectives(body)
    return 0


def complexity(c: Clause) -> tuple[int, int]:
    """Termination measure: (non-tensor connectives, total size)."""
    items = (*c.lhs, *c.rhs) if isinstance(c, Geq) else c.body
    extra = 1 if isinstance(c, Fin) else 0
    return (
        sum(_connectives(f) for f in items) + extra,
        sum(size(f) for f in items) + extra,
    )


# Rule table.


@dataclass(frozen=True)
class Done:
    rule: str
    children: tuple[Clause, ...] = ()


@dataclass(frozen=True)
class Split:
    """A case split on a supplementary pair; ``first`` assumes ``pair[0]``."""

    rule: str
    kind: Literal["tot", "wem"]
    formulas: tuple[Formula, ...]
    first: Outcome
    second: Outcome

    @property
    def pair(self) -> tuple[Clause, Clause]:
        return supplementary_pair(self.kind, self.formulas)

    @property
    def pair_judgements(self) -> tuple[Judgement, Judgement]:
        """(|- a -o b, |- b -o a) for tot, (|- !a, |- !!a) for wem."""
        if self.kind == "tot":
            a, b = self.formulas
            return Judgement([], Limp(a, b)), Judgement([], Limp(b, a))
        (a,) = self.formulas
        return Judgement([], neg(a)), Judgement([], neg(neg(a)))


Outcome = Done | Split


def supplementary_pair(kind: str, formulas: Sequence[Formula]) -> tuple[Clause, Clause]:
    if kind == "tot":
        a, b = formulas
        return Geq(summands(a), summands(b)), Geq(summands(b), summands(a))
    (a,) = formulas
    return Geq(summands(a), (BOT,)), Fin(summands(a))


def _replace(items: tuple[Formula, ...], index: int, parts: Iterable[Formula]) -> tuple[Formula, ...]:
    return items[:index] + tuple(parts) + items[index + 1 :]


def _drop(items: tuple[Formula, ...], index: int) -> tuple[Formula, ...]:
    return items[:index] + items[index + 1 :]


def _is_compound(f: Formula) -> bool:
    return isinstance(f, And | Or | Limp)


def _decompose_infinite(lhs: tuple[Formula, ...]) -> Outcome:
    """Rules for ``lhs |- bot``: some summand of ``lhs`` must be infinite."""
    items = tuple(f for f in lhs if _const_of(f) is None)
    if len(items) >= 2:
        head, rest = items[0], items[1:]
        return Split(
            "infinite-sum", "wem", (head,),
            Done("infinite-sum"),
            Done("infinite-sum", (Geq(rest, (BOT,)),)),
        )
    (item,) = items
    match item:
        case Limp(a, Bot()):
            return Done("infinite-neg", (Fin(summands(a)),))
        case And(a, b):
            return Split(
                "infinite-and", "wem", (a,),
                Done("infinite-and"),
                Done("infinite-and", (Geq(summands(b), (BOT,)),)),
            )
        case Or(a, b):
            return Done("infinite-or", (Geq(summands(a), (BOT,)), Geq(summands(b), (BOT,))))
        case Limp(a, b):
            return Done("infinite-limp", (Geq(summands(b), (BOT,)), Fin(summands(a))))
    raise NormalizationError(f"no rule for infinite summand {to_text(item)!r}")


def _decompose_right(lhs: tuple[Formula, ...], rhs: tuple[Formula, ...], i: int) -> Outcome:
    rest = _drop(rhs, i)
    match rhs[i]:
        case And(a, b):
            return Done(
                "and-right",
                (Geq(lhs, _replace(rhs, i, summands(a))), Geq(lhs, _replace(rhs, i, summands(b)))),
            )
        case Or(a, b):
            return Split(
                "or-right", "tot", (b, a),
                Done("or-right", (Geq(lhs, _replace(rhs, i, summands(a))),)),
                Done("or-right", (Geq(lhs, _replace(rhs, i, summands(b))),)),
            )
        case Limp(a, Bot()):
            return Split(
                "neg-right", "wem", (a,),
                Done("neg-right", (Geq(lhs, rest),)),
                Done("neg-right", (Geq(lhs, (BOT,)),)),
            )
        case Limp(a, b):
            return Split(
                "limp-right", "tot", (a, b),
                Done("limp-right", (Geq(lhs, rest),)),
                Split(
                    "limp-right", "wem", (b,),
                    Split(
                        "limp-right", "wem", (a,),
                        Done("limp-right", (Geq(lhs, rest),)),
                        Done("limp-right", (Geq(lhs, (BOT,)),)),
                    ),
                    Done(
                        "limp-right",
                        (Geq(lhs + summands(a), _replace(rhs, i, summands(b))),),
                    ),
                ),
            )
    raise NormalizationError(f"no right rule for {to_text(rhs[i])!r}")


def _decompose_left(lhs: tuple[Formula, ...], rhs: tuple[Formula, ...], i: int) -> Outcome:
    rest = _drop(lhs, i)
    match lhs[i]:
        case Or(a, b):
            return Done(
                "or-left",
                (Geq(_replace(lhs, i, summands(a)), rhs), Geq(_replace(lhs, i, summands(b)), rhs)),
            )
        case And(a, b):
            return Split(
                "and-left", "tot", (a, b),
                Done("and-left", (Geq(_replace(lhs, i, summands(a)), rhs),)),
                Done("and-left", (Geq(_replace(lhs, i, summands(b)), rhs),)),
            )
        case Limp(a, Bot()):
            return Split(
                "neg-left", "wem", (a,),
                Done("neg-left", (Geq(rest, rhs),)),
                Done("neg-left"),
            )
        case Limp(a, b):
            return Split(
                "limp-left", "tot", (a, b),
                Done("limp-left", (Geq(rest, rhs),)),
                Split(
                    "limp-left", "wem", (b,),
                    Split(
                        "limp-left", "wem", (a,),
                        Done("limp-left", (Geq(rest, rhs),)),
                        Done("limp-left"),
                    ),
                    Done("limp-left", (Geq(_replace(lhs, i, summands(b)), rhs + summands(a)),)),
                ),
            )
    raise NormalizationError(f"no left rule for {to_text(lhs[i])!r}")


def _decompose_finite(body: tuple[Formula, ...]) -> Outcome:
    items = tuple(f for f in body if _const_of(f) is None)
    if len(items) >= 2:
        return Done("finite-sum", tuple(Fin((f,)) for f in items))
    (item,) = items
    match item:
        case And(a, b):
            return Done("finite-and", (Fin(summands(a)), Fin(summands(b))))
        case Or(a, b):
            return Split(
                "finite-or", "wem", (a,),
                Done("finite-or", (Fin(summands(b)),)),
                Done("finite-or"),
            )
        case Limp(a, Bot()):
            return Done("finite-neg", (Geq(summands(a), (BOT,)),))
        case Limp(a, b):
            return Split(
                "finite-limp", "wem", (b,),
                Done("finite-limp", (Geq(summands(a), (BOT,)),)),
                Done("finite-limp"),
            )
    raise NormalizationError(f"no finiteness rule for {to_text(item)!r}")


def decompose(c: Clause) -> Outcome:
    """The rule applying to a clause that is not yet normal."""
    if isinstance(c, Fin):
        return _decompose_finite(c.body)
    if any(isinstance(f, Bot) for f in c.rhs):
        return _decompose_infinite(c.lhs)
    for i, f in enumerate(c.rhs):
        if _is_compound(f):
            return _decompose_right(c.lhs, c.rhs, i)
    for i, f in enumerate(c.lhs):
        if _is_compound(f):
            return _decompose_left(c.lhs, c.rhs, i)
    raise NormalizationError("decompose called on a normal clause")


def normal_forms(c: Clause) -> list[NormalJudgement] | None:
    """Normal judgements equivalent to ``c``, or None if a rule must fire."""
    if isinstance(c, Fin):
        if any(isinstance(f, Bot) for f in c.body):
            return [INCONSISTENT]
        items = [f for f in c.body if _const_of(f) is None]
        if not items:
            return [TAUTOLOGICAL]
        if len(items) == 1 and (atom := _atom_of(items[0])) is not None:
            return [Finitist(atom[0])]
        return None
    result = _classify_sides(c.lhs, c.rhs)
    if isinstance(result, NotNormal):
        return None
    if isinstance(result, Affine):
        return _settle_affine(result)
    return [result]


def follow(outcome: Outcome, path: Sequence[int]) -> tuple[Outcome, tuple[Clause, ...]]:
    """Walk ``path`` through nested splits, collecting the assumed judgements."""
    assumed: list[Clause] = []
    for choice in path:
        if not isinstance(outcome, Split):
            raise NormalizationError("path runs past a rewrite")
        assumed.append(outcome.pair[choice])
        outcome = outcome.first if choice == 0 else outcome.second
    return outcome, tuple(assumed)


# Provenance.


@dataclass(frozen=True)
class Provenance:
    """How one edge of the tree was obtained.

    ``parent`` is the clause being rewritten (a judgement for the initial
    internalization, an affine judgement for simplification, None for
    saturation splits), ``assumed`` the supplementary judgements added along
    ``path`` and ``produced`` the clauses that replace the parent.
    """

    rule: str
    parent: Clause | Judgement | Affine | None
    path: tuple[int, ...] = ()
    assumed: tuple[Clause, ...] = ()
    produced: tuple[Clause | NormalJudgement, ...] = ()
    facts: tuple[NormalJudgement, ...] = ()

    @property
    def complete(self) -> bool:
        """False for an edge into an intermediate split of a nested rule."""
        if isinstance(self.parent, Geq | Fin):
            return isinstance(follow(decompose(self.parent), self.path)[0], Done)
        return True

    def _parent_judgement(self) -> Judgement:
        match self.parent:
            case Judgement():
                return self.parent
            case Geq() | Fin():
                return clause_judgement(self.parent)
            case Affine():
                return to_judgement(self.parent)
        raise ValueError("saturation edges have no parent")

    def _premises(self) -> list[Judgement]:
        return [_item_judgement(a) for a in (*self.assumed, *self.facts)]

    def forward_proofs(self) -> list[Proof]:
        """One proof per produced judgement, from the parent and the assumptions."""
        proofs = []
        for item in self.produced:
            builder = ProofBuilder()
            refs: list[int] = []
            if self.parent is not None:
                refs.append(builder.hyp(self._parent_judgement()))
            refs += [builder.hyp(j) for j in self._premises()]
            conclusion = _item_judgement(item)
            if self.parent is None:
                builder.hyp(conclusion)
            else:
                builder.admissible(
                    conclusion, "normalize", refs,
                    rule=self.rule, provenance=self, direction="forward",
                )
            proofs.append(builder.build())
        return proofs

    def backward_proof(self) -> Proof | None:
        """A proof of the parent from the produced judgements and the assumptions."""
        if self.parent is None:
            return None
        builder = ProofBuilder()
        parent = self._parent_judgement()
        if not self.complete:
            builder.hyp(parent)
            return builder.build()
        refs = [builder.hyp(_item_judgement(item)) for item in self.produced]
        refs += [builder.hyp(j) for j in self._premises()]
        builder.admissible(
            parent, "normalize", refs, rule=self.rule, provenance=self, direction="converse"
        )
        return builder.build()


def _item_judgement(item: Clause | NormalJudgement) -> Judgement:
    if isinstance(item, Geq | Fin):
        return clause_judgement(item)
    return to_judgement(item)


def _check_normalize_step(premises: Sequence[Judgement], conclusion: Judgement, inst: Mapping[str, Any]) -> str | None:
    p = inst.get("provenance")
    if not isinstance(p, Provenance) or p.parent is None:
        return "missing provenance"
    side = tuple(p._premises())
    produced = tuple(_item_judgement(c) for c in p.produced)
    parent = p._parent_judgement()
    if inst.get("direction") == "converse":
        if tuple(premises) != produced + side:
            return "premises are not the produced judgements and assumptions"
        if conclusion != parent:
            return "conclusion is not the rewritten judgement"
    else:
        if tuple(premises) != (parent, *side):
            return "premises are not the rewritten judgement and assumptions"
        if conclusion not in produced:
            return "conclusion is not recorded as produced"
    # semantic check; the rule itself is not re-run
    m = search_countermodel(premises, conclusion)
    if m is not None:
        values = ", ".join(f"{name} = {value}" for name, value in sorted(m.assignment.items()))
        return f"{p.rule} step fails in the model {{{values}}}"
    return None


register_admissible("normalize", _check_normalize_step)


def _facts_of(facts: Iterable[NormalJudgement]) -> dict[str, Assertion]:
    context: dict[str, Assertion] = {}
    for fact in facts:
        match fact:
            case Alethic(p, AlethicKind.ZERO):
                context[p] = Assertion.ZERO
            case Alethic(p, AlethicKind.INFINITE):
                context[p] = Assertion.INFINITE
            case Finitist(p):
                context.setdefault(p, Assertion.FINITE)
    return context


def _simplified(a: Affine, facts: Iterable[NormalJudgement], goal: bool = False) -> list[NormalJudgement]:
    result = simplify_with_assertives(a, _facts_of(facts))
    if not isinstance(result, Affine):
        return [result]
    # goals keep degenerate affine forms; only constant comparisons are resolved
    if goal and result.props:
        return [result]
    return _settle_affine(result)


# Tree.


@dataclass(frozen=True)
class RewriteStep:
    rule: str
    role: Role
    provenance: Provenance


@dataclass(frozen=True)
class SplitInfo:
    rule: str
    role: Role
    kind: Literal["tot", "wem"]
    target: Clause | None
    pair: tuple[Judgement, Judgement]


@dataclass(frozen=True)
class NormalTheory:
    judgements: frozenset[NormalJudgement] = frozenset()

    @property
    def inconsistent(self) -> bool:
        return INCONSISTENT in self.judgements

    def facts(self) -> dict[str, Assertion]:
        return _facts_of(self.judgements)

    def affines(self) -> list[Affine]:
        return sorted((j for j in self.judgements if isinstance(j, Affine)), key=repr)

    def as_judgements(self, level: LogicLevel = LogicLevel.L1STAR) -> list[Judgement]:
        return [to_judgement(j, level) for j in sorted(self.judgements, key=repr)]


@dataclass(frozen=True)
class Leaf:
    theory: NormalTheory
    goals: tuple[NormalJudgement, ...] = ()


@dataclass(frozen=True)
class BranchNode:
    """A run of rewrites ending in a split (two children) or in a leaf."""

    steps: tuple[RewriteStep, ...] = ()
    via: Provenance | None = None
    split: SplitInfo | None = None
    children: tuple[BranchNode, ...] = ()
    leaf: Leaf | None = None


@dataclass(frozen=True)
class BranchTree:
    inputs: tuple[Judgement, ...]
    goals: tuple[Judgement, ...]
    level: LogicLevel
    root: BranchNode

    def nodes(self) -> Iterator[BranchNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def edges(self) -> Iterator[Provenance]:
        for node in self.nodes():
            if node.via is not None:
                yield node.via
            for step in node.steps:
                yield step.provenance


@dataclass
class _Branch:
    pending: list[tuple[Role, Clause]]
    hyps: list[NormalJudgement] = field(default_factory=list)
    goals: list[NormalJudgement] = field(default_factory=list)
    steps: list[RewriteStep] = field(default_factory=list)

    def fork(self) -> _Branch:
        return _Branch(list(self.pending), list(self.hyps), list(self.goals), [])

    def add(self, role: Role, judgements: Iterable[NormalJudgement]) -> None:
        target = self.hyps if role == "hyp" else self.goals
        for j in judgements:
            if isinstance(j, Tautological) or j in target:
                continue
            target.append(j)

    @property
    def inconsistent(self) -> bool:
        return INCONSISTENT in self.hyps


class _Expander:
    def __init__(self, saturate: bool) -> None:
        self.saturate = saturate
        self.splits = 0

    def run(self, branch: _Branch, via: Provenance | None = None) -> BranchNode:
        while branch.pending and not branch.inconsistent:
            role, clause = branch.pending.pop(0)
            normal = normal_forms(clause)
            if normal is not None:
                branch.add(role, normal)
                continue
            outcome = decompose(clause)
            self._check_measure(clause, outcome)
            if isinstance(outcome, Done):
                provenance = Provenance(outcome.rule, clause, produced=outcome.children)
                branch.steps.append(RewriteStep(outcome.rule, role, provenance))
                branch.pending[:0] = [(role, c) for c in outcome.children]
                continue
            return self._split(branch, role, clause, outcome, (), via)
        return self._settle(branch, via)

    def _split(self, branch: _Branch, role: Role, clause: Clause, outcome: Split, path: tuple[int, ...], via: Provenance | None = None) -> BranchNode:
        self.splits += 1
        children = []
        for choice, assumed in enumerate(outcome.pair):
            child = branch.fork()
            sub_path = path + (choice,)
            sub = outcome.first if choice == 0 else outcome.second
            all_assumed = follow(decompose(clause), sub_path)[1]
            child.pending.insert(0, ("hyp", assumed))
            if isinstance(sub, Done):
                provenance = Provenance(sub.rule, clause, sub_path, all_assumed, sub.children)
                child.pending[1:1] = [(role, c) for c in sub.children]
                children.append(self.run(child, provenance))
            else:
                provenance = Provenance(sub.rule, clause, sub_path, all_assumed)
                children.append(self._nested(child, role, clause, sub, sub_path, provenance))
        info = SplitInfo(outcome.rule, role, outcome.kind, clause, outcome.pair_judgements)
        return BranchNode(tuple(branch.steps), via, info, tuple(children))

    def _nested(self, branch: _Branch, role: Role, clause: Clause, outcome: Split, path: tuple[int, ...], via: Provenance) -> BranchNode:
        # the assumption of the enclosing split is settled before splitting again
        assumed_role, assumed = branch.pending.pop(0)
        normal = normal_forms(assumed)
        if normal is not None:
            branch.add(assumed_role, normal)
        else:
            branch.pending.insert(0, (assumed_role, assumed))
        if branch.inconsistent:
            return self._settle(branch, via)
        return self._split(branch, role, clause, outcome, path, via)

    def _check_measure(self, clause: Clause, outcome: Outcome) -> None:
        bound = complexity(clause)
        stack: list[Outcome] = [outcome]
        while stack:
            current = stack.pop()
            if isinstance(current, Done):
                produced: Iterable[Clause] = current.children
            else:
                produced = current.pair
                stack += [current.first, current.second]
            for item in produced:
                if complexity(item) >= bound:
                    raise NormalizationError(
                        f"rule {current.rule} does not decrease the measure on "
                        f"{to_text(clause_judgement(clause))!r}"
                    )

    def _settle(self, branch: _Branch, via: Provenance | None) -> BranchNode:
        """Propagate assertive facts, then saturate or emit a leaf."""
        while not branch.inconsistent:
            context = _facts_of(branch.hyps)
            if self._propagate(branch, context):
                continue
            prop = self._unassigned(branch, context) if self.saturate else None
            if prop is None:
                break
            self.splits += 1
            outcome_pair = supplementary_pair("wem", (Atom(prop),))
            children = []
            for choice, assumed in enumerate(outcome_pair):
                child = branch.fork()
                child.add("hyp", normal_forms(assumed) or [])
                edge = Provenance("saturate", None, (choice,), (assumed,))
                children.append(self._settle(child, edge))
            info = SplitInfo(
                "saturate", "hyp", "wem", None,
                (Judgement([], neg(Atom(prop))), Judgement([], neg(neg(Atom(prop))))),
            )
            return BranchNode(tuple(branch.steps), via, info, tuple(children))
        return BranchNode(tuple(branch.steps), via, leaf=self._leaf(branch))

    def _propagate(self, branch: _Branch, context: dict[str, Assertion]) -> bool:
        """One round of fact propagation; True if anything changed."""
        zeros = {j.prop for j in branch.hyps if isinstance(j, Alethic) and j.kind is AlethicKind.ZERO}
        infinite = {j.prop for j in branch.hyps if isinstance(j, Alethic) and j.kind is AlethicKind.INFINITE}
        finite = {j.prop for j in branch.hyps if isinstance(j, Finitist)}
        if (zeros | finite) & infinite:
            branch.add("hyp", [INCONSISTENT])
            return True
        redundant = [j for j in branch.hyps if isinstance(j, Finitist) and j.prop in zeros]
        if redundant:
            branch.hyps = [j for j in branch.hyps if j not in redundant]
            return True
        for role, items in (("hyp", branch.hyps), ("goal", branch.goals)):
            for index, j in enumerate(items):
                if not isinstance(j, Affine):
                    continue
                relevant = [f for f in branch.hyps if normal_props(f) & j.props and not isinstance(f, Affine)]
                results = _simplified(j, relevant, goal=role == "goal")
                if results == [j]:
                    continue
                rule = "simplify" if role == "hyp" else "simplify-goal"
                provenance = Provenance(rule, j, produced=tuple(results), facts=tuple(relevant))
                branch.steps.append(RewriteStep(rule, role, provenance))
                del items[index]
                branch.add(role, results)
                return True
        return self._resolve_goals(branch, context)

    def _resolve_goals(self, branch: _Branch, context: dict[str, Assertion]) -> bool:
        for index, goal in enumerate(branch.goals):
            if not isinstance(goal, Alethic | Finitist) or goal.prop not in context:
                continue
            fact = context[goal.prop]
            resolved: NormalJudgement
            match goal:
                case Finitist():
                    resolved = INCONSISTENT if fact is Assertion.INFINITE else TAUTOLOGICAL
                case Alethic(p, AlethicKind.INFINITE):
                    resolved = TAUTOLOGICAL if fact is Assertion.INFINITE else INCONSISTENT
                case Alethic(p, AlethicKind.ZERO):
                    if fact is Assertion.FINITE:
                        resolved = Affine.of({}, 0, {p: 1}, 0)
                    else:
                        resolved = TAUTOLOGICAL if fact is Assertion.ZERO else INCONSISTENT
            del branch.goals[index]
            branch.add("goal", [resolved])
            return True
        return False

    def _unassigned(self, branch: _Branch, context: dict[str, Assertion]) -> str | None:
        props: set[str] = set()
        for j in branch.hyps:
            if isinstance(j, Affine):
                props |= j.props
        for goal in branch.goals:
            props |= normal_props(goal)
        missing = sorted(props - context.keys())
        return missing[0] if missing else None

    def _leaf(self, branch: _Branch) -> Leaf:
        if branch.inconsistent:
            return Leaf(NormalTheory(frozenset({INCONSISTENT})), tuple(branch.goals))
        return Leaf(NormalTheory(frozenset(branch.hyps)), tuple(branch.goals))


def normalize(
    judgements: Iterable[Judgement],
    level: LogicLevel = LogicLevel.L1STAR,
    *,
    goals: Iterable[Judgement] = (),
    saturate: bool = True,
) -> BranchTree:
    """Build the normalization tree of ``judgements``.

    ``goals`` are normalized alongside the hypotheses; every supplementary
    judgement introduced by a split joins the hypotheses. With
    ``saturate=False`` no proposition splits are added after the structural
    rules, which reproduces the bare conversion trees.
    """
    inputs = tuple(judgements)
    goal_inputs = tuple(goals)
    for j in (*inputs, *goal_inputs):
        if level_of(j) > level:
            raise LevelError(f"{to_text(j)!r} is outside logic {level.label}")
    started = time.perf_counter()
    with tracer.start_as_current_span("normalize") as span:
        branch = _Branch([])
        seeded: list[tuple[Role, Judgement]] = [("hyp", j) for j in inputs]
        seeded += [("goal", j) for j in goal_inputs]
        for role, j in seeded:
            clause = clause_of(j)
            provenance = Provenance("internalize", j, produced=(clause,))
            branch.steps.append(RewriteStep("internalize", role, provenance))
            branch.pending.append((role, clause))
        expander = _Expander(saturate)
        root = expander.run(branch)
        tree = BranchTree(inputs, goal_inputs, level, root)
        leaf_count = sum(1 for node in tree.nodes() if node.leaf is not None)
        span.set_attribute("leaves", leaf_count)
        span.set_attribute("splits", expander.splits)
    logger.log_struct(
        {
            "event": "normalize",
            "judgements": len(inputs),
            "goals": len(goal_inputs),
            "leaves": leaf_count,
            "splits": expander.splits,
            "seconds": round(time.perf_counter() - started, 6),
        },
        severity="INFO",
    )
    return tree


def leaf_list(t: BranchTree) -> list[Leaf]:
    """Leaves in branch order (first supplementary judgement first)."""
    return [node.leaf for node in t.nodes() if node.leaf is not None]


def leaves(t: BranchTree, satisfiable_only: bool = False) -> list[NormalTheory]:
    theories = [leaf.theory for leaf in leaf_list(t)]
    if satisfiable_only:
        theories = [theory for theory in theories if not theory.inconsistent]
    return theories


def check_normal_theory(theory: NormalTheory) -> list[str]:
    """Problems with ``theory`` as a normal theory; empty when it is one."""
    if theory.inconsistent:
        return []
    problems = []
    assertive: dict[str, int] = {}
    alethic: set[str] = set()
    for j in theory.judgements:
        if isinstance(j, Alethic | Finitist):
            assertive[j.prop] = assertive.get(j.prop, 0) + 1
        if isinstance(j, Alethic):
            alethic.add(j.prop)
    for j in theory.judgements:
        if isinstance(j, Affine) and j.props & alethic:
            problems.append(f"alethic proposition in {print_normal(j)}")
    occurring = set().union(*(normal_props(j) for j in theory.judgements)) if theory.judgements else set()
    for p in sorted(occurring):
        if assertive.get(p, 0) != 1:
            problems.append(f"{p} has {assertive.get(p, 0)} assertive judgements")
    return problems


def format_tree(t: BranchTree) -> str:
    """Indented text rendering of a normalization tree."""
    lines: list[str] = []

    def walk(node: BranchNode, depth: int, label: str) -> None:
        pad = "  " * depth
        if label:
            lines.append(f"{pad}{label}")
        for step in node.steps:
            lines.append(f"{pad}  rewrite {step.rule} ({step.role})")
        if node.split is not None:
            first, second = node.split.pair
            lines.append(f"{pad}  split {node.split.rule} [{node.split.kind}]")
            walk(node.children[0], depth + 1, f"assume {to_text(first)}")
            walk(node.children[1], depth + 1, f"assume {to_text(second)}")
        elif node.leaf is not None:
            theory = node.leaf.theory
            lines.append(f"{pad}  leaf{' (inconsistent)' if theory.inconsistent else ''}")
            for j in theory.as_judgements(t.level):
                lines.append(f"{pad}    {to_text(j)}")
            for goal in node.leaf.goals:
                lines.append(f"{pad}    goal {print_normal(goal, t.level)}")

    walk(t.root, 0, "")
    return "\n".join(lines)