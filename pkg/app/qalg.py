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
"""Quantitative equational logic encoded with equality atoms as propositions."""

from __future__ import annotations

import re
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count, product

from app.decide import InferenceVerdict, Violated, check_inference_model
from app.errors import MetricTableError, ParseError
from app.extval import ZERO, ExtValue, parse_ext
from app.semantics import Model, satisfies, satisfies_all
from app.syntax import Atom, Formula, Judgement, numeral, tensor_all
from app.utils.logs import get_logger

logger = get_logger(__name__)

RULES = ("refl", "symm", "triang", "max", "nexp", "cont")


@dataclass(frozen=True)
class Signature:
    """Operation symbols with their arities."""

    ops: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for name, arity in self.ops.items():
            if arity < 0:
                raise ValueError(f"operation {name} has negative arity")
        object.__setattr__(self, "ops", dict(sorted(self.ops.items())))

    def __hash__(self) -> int:
        return hash(tuple(self.ops.items()))

    def arity(self, name: str) -> int | None:
        return self.ops.get(name)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class App:
    op: str
    args: tuple[Term, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.op
        return f"{self.op}({','.join(str(a) for a in self.args)})"


Term = Var | App


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for arg in t.args:
            yield from subterms(arg)


@dataclass(frozen=True)
class EqAtom:
    """The proposition ``s=t``, oriented as written."""

    s: Term
    t: Term

    @property
    def prop(self) -> str:
        return f"{self.s}={self.t}"

    @property
    def atom(self) -> Atom:
        return Atom(self.prop)

    def __str__(self) -> str:
        return self.prop


def _bound(eps: Sequence[Fraction]) -> list[Formula]:
    parts = [numeral(e) for e in eps if e != 0]
    return [tensor_all(parts)] if parts else []


def bounded(eps: Fraction | Sequence[Fraction], eq: EqAtom) -> Judgement:
    """``eps |- s=t``; a sum of bounds is written as a tensor of numerals."""
    values = [eps] if isinstance(eps, Fraction | int) else list(eps)
    return Judgement(_bound([Fraction(e) for e in values]), eq.atom)


@dataclass(frozen=True)
class RuleInstance:
    rule: str
    premises: tuple[Judgement, ...]
    conclusion: Judgement

    def holds(self, m: Model) -> bool:
        return not satisfies_all(m, self.premises) or satisfies(m, self.conclusion)


@dataclass(frozen=True)
class ContStream:
    """Hypotheses ``eps + 1/i |- s=t`` for i = 1, 2, ... concluding ``eps |- s=t``."""

    eq: EqAtom
    eps: Fraction

    def bounds(self) -> Iterator[Fraction]:
        for i in count(1):
            yield self.eps + Fraction(1, i)

    def hypotheses(self) -> Iterator[Judgement]:
        for bound in self.bounds():
            yield bounded(bound, self.eq)

    @property
    def conclusion(self) -> Judgement:
        return bounded(self.eps, self.eq)


@dataclass(frozen=True)
class RuleInstances:
    finitary: tuple[RuleInstance, ...]
    cont: tuple[ContStream, ...]

    def by_rule(self, rule: str) -> list[RuleInstance]:
        return [i for i in self.finitary if i.rule == rule]


def close_terms(terms: Iterable[Term]) -> list[Term]:
    """The subterm closure of ``terms`` in first-seen order."""
    seen: dict[Term, None] = {}
    for t in terms:
        for sub in subterms(t):
            seen.setdefault(sub, None)
    return list(seen)


def instantiate_rules(sig: Signature, terms: Iterable[Term], eps: Iterable[Fraction | int]) -> RuleInstances:
    """All rule instances over the subterm closure of ``terms`` and the bounds ``eps``.

    Nonexpansiveness is instantiated for pairs of universe terms headed by
    the same operation, so every proposition mentioned names two universe
    terms.
    """
    universe = close_terms(terms)
    bounds = sorted({Fraction(e) for e in eps})
    for t in universe:
        if isinstance(t, App) and sig.arity(t.op) != len(t.args):
            raise ValueError(f"term {t} does not match the signature")
    finitary: list[RuleInstance] = []
    for t in universe:
        finitary.append(RuleInstance("refl", (), bounded([], EqAtom(t, t))))
    pairs = list(product(universe, repeat=2))
    for (s, t), e in product(pairs, bounds):
        finitary.append(RuleInstance("symm", (bounded(e, EqAtom(s, t)),), bounded(e, EqAtom(t, s))))
    for t, u, s in product(universe, repeat=3):
        for e1, e2 in product(bounds, repeat=2):
            finitary.append(
                RuleInstance(
                    "triang",
                    (bounded(e1, EqAtom(t, u)), bounded(e2, EqAtom(u, s))),
                    bounded([e1, e2], EqAtom(t, s)),
                )
            )
    for (s, t), e1, e2 in product(pairs, bounds, bounds):
        finitary.append(RuleInstance("max", (bounded(e1, EqAtom(s, t)),), bounded([e1, e2], EqAtom(s, t))))
    applied = [t for t in universe if isinstance(t, App)]
    for left, right in product(applied, repeat=2):
        if left.op != right.op:
            continue
        for e in bounds:
            premises = tuple(bounded(e, EqAtom(a, b)) for a, b in zip(left.args, right.args, strict=True))
            finitary.append(RuleInstance("nexp", premises, bounded(e, EqAtom(left, right))))
    cont = tuple(ContStream(EqAtom(s, t), e) for (s, t), e in product(pairs, bounds))
    return RuleInstances(tuple(finitary), cont)


# Metric interpretations.

DistanceTable = Mapping[tuple[str, str], ExtValue]


def distance(d: DistanceTable, x: str, y: str) -> ExtValue:
    if (x, y) in d:
        return d[(x, y)]
    if (y, x) in d:
        return d[(y, x)]
    if x == y:
        return ZERO
    raise MetricTableError(f"no distance between {x} and {y}")


def validate_table(d: DistanceTable) -> None:
    for (x, y), value in d.items():
        if x == y and value != ZERO:
            raise MetricTableError(f"distance from {x} to itself is {value}, not 0")
        reverse = d.get((y, x))
        if reverse is not None and reverse != value:
            raise MetricTableError(f"distance {x} {y} is {value} but {y} {x} is {reverse}")


def metric_model(points: Mapping[Term, str], d: DistanceTable, *, validate: bool = True) -> Model:
    """Assign ``s=t`` the distance between the points of ``s`` and ``t``."""
    if validate:
        validate_table(d)
    values = {
        EqAtom(s, t).prop: distance(d, points[s], points[t])
        for s, t in product(points, repeat=2)
    }
    return Model(values)


def interpret(
    terms: Iterable[Term],
    variables: Mapping[str, str],
    operations: Mapping[str, Mapping[tuple[str, ...], str]],
) -> dict[Term, str]:
    """Points of ``terms`` and their subterms under a variable assignment and operation tables."""

    def point(t: Term) -> str:
        match t:
            case Var(name):
                return variables[name]
            case App(op, args):
                return operations[op][tuple(point(a) for a in args)]
        raise TypeError(t)

    return {t: point(t) for t in close_terms(terms)}


# Checking.


@dataclass(frozen=True)
class RuleFailure:
    index: int
    instance: RuleInstance


@dataclass(frozen=True)
class ContCheck:
    stream: ContStream
    verdict: InferenceVerdict


@dataclass(frozen=True)
class RuleReport:
    checked: Mapping[str, int]
    failures: tuple[RuleFailure, ...]
    cont: tuple[ContCheck, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.failures and not any(isinstance(c.verdict, Violated) for c in self.cont)


def check_rules(m: Model, instances: RuleInstances, budget: int = 10) -> RuleReport:
    """Check every instance in ``m``; continuity streams are checked on a prefix of ``budget``."""
    checked = dict.fromkeys(RULES, 0)
    failures = []
    for index, instance in enumerate(instances.finitary):
        checked[instance.rule] += 1
        if not instance.holds(m):
            failures.append(RuleFailure(index, instance))
    cont = []
    for stream in instances.cont:
        checked["cont"] += 1
        cont.append(ContCheck(stream, check_inference_model(m, stream.hypotheses(), stream.conclusion, budget)))
    logger.log_struct(
        {"event": "qalg_check", "checked": checked, "failures": len(failures)},
        severity="INFO" if not failures else "WARNING",
    )
    return RuleReport(checked, tuple(failures), tuple(cont))


# Files.

_TERM_TOKEN = re.compile(r"(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<punct>[(),])|(?P<space>\s+)|(?P<bad>.)")
_OP_LINE = re.compile(r"^op\s+(?P<name>[A-Za-z_][A-Za-z0-9_']*)\s*/\s*(?P<arity>\d+)$")
_TERM_LINE = re.compile(r"^term\s+(?P<name>[A-Za-z_][A-Za-z0-9_']*)\s*=\s*(?P<body>.+)$")


def parse_term(text: str, sig: Signature) -> Term:
    """``f(x, y)``; identifiers declared as operations are applications."""
    tokens: list[tuple[str, int]] = []
    for match in _TERM_TOKEN.finditer(text):
        if match.lastgroup == "space":
            continue
        if match.lastgroup == "bad":
            raise ParseError(f"unexpected character {match.group()!r} in term", match.start())
        tokens.append((match.group(), match.start()))
    tokens.append(("", len(text)))
    index = 0

    def term() -> Term:
        nonlocal index
        name, at = tokens[index]
        if not name or name in "(),":
            raise ParseError(f"expected a term, got {name or 'end of input'!r}", at)
        index += 1
        arity = sig.arity(name)
        if arity is None:
            if tokens[index][0] == "(":
                raise ParseError(f"{name} is not a declared operation", at)
            return Var(name)
        args: list[Term] = []
        if arity:
            expect("(")
            args.append(term())
            while tokens[index][0] == ",":
                index += 1
                args.append(term())
            expect(")")
            if len(args) != arity:
                raise ParseError(f"{name} takes {arity} arguments, got {len(args)}", at)
        return App(name, tuple(args))

    def expect(symbol: str) -> None:
        nonlocal index
        got, at = tokens[index]
        if got != symbol:
            raise ParseError(f"expected {symbol!r}, got {got or 'end of input'!r}", at)
        index += 1

    result = term()
    if tokens[index][0]:
        raise ParseError(f"unexpected {tokens[index][0]!r} after term", tokens[index][1])
    return result


@dataclass(frozen=True)
class SignatureFile:
    signature: Signature
    terms: Mapping[str, Term]

    def points(self) -> dict[Term, str]:
        """Each declared term is its own point, named as declared."""
        named = {t: name for name, t in self.terms.items()}
        return {t: named.get(t, str(t)) for t in close_terms(self.terms.values())}


def _lines(text: str) -> Iterator[tuple[int, str]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line


def parse_signature_file(text: str) -> SignatureFile:
    """Lines ``op f/2`` and ``term t1 = f(x, y)``; operations precede their use."""
    ops: dict[str, int] = {}
    terms: dict[str, Term] = {}
    for number, line in _lines(text):
        if (op := _OP_LINE.match(line)) is not None:
            if op["name"] in ops:
                raise ParseError(f"operation {op['name']} declared twice", line=number)
            ops[op["name"]] = int(op["arity"])
            continue
        if (declared := _TERM_LINE.match(line)) is not None:
            if declared["name"] in terms:
                raise ParseError(f"term {declared['name']} declared twice", line=number)
            try:
                terms[declared["name"]] = parse_term(declared["body"], Signature(ops))
            except ParseError as exc:
                raise ParseError(exc.message, exc.position, line=number) from exc
            continue
        raise ParseError(f"expected 'op name/arity' or 'term name = term', got {line!r}", line=number)
    return SignatureFile(Signature(ops), terms)


def parse_distance_table(text: str) -> dict[tuple[str, str], ExtValue]:
    """Triples ``x y d`` with ``d`` a rational or ``inf``."""
    table: dict[tuple[str, str], ExtValue] = {}
    for number, line in _lines(text):
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"expected 'x y distance', got {line!r}", line=number)
        x, y, value = parts
        try:
            table[(x, y)] = parse_ext(value)
        except ParseError as exc:
            raise ParseError(exc.message, line=number) from exc
    return table
