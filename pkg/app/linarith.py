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
"""Exact linear arithmetic: Fourier-Motzkin elimination with certificates.

Constraints have the canonical form ``sum(c_i * x_i) + d >= 0`` (or ``> 0``).
Every row derived during elimination remembers the nonnegative combination of
input rows it came from, so an infeasible system yields a certificate that can
be re-checked by plain expansion, and entailment answers carry the multipliers
``t, t0`` with ``goal = sum(t_i * hyp_i) + t0``.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from opentelemetry import trace

from app.errors import DecisionError
from app.extval import format_rational
from app.utils.logs import get_logger

logger = get_logger(__name__)
tracer = trace.get_tracer(__name__)

Point = Mapping[str, Fraction]


class Relation(enum.Enum):
    GEQ = ">="
    GT = ">"


def _clean(coeffs: Mapping[str, Fraction | int]) -> tuple[tuple[str, Fraction], ...]:
    return tuple(
        sorted((name, Fraction(c)) for name, c in coeffs.items() if Fraction(c) != 0)
    )


@dataclass(frozen=True)
class AffineConstraint:
    """``sum(coeffs[x] * x) + const`` related to 0 by ``relation``.

    ``origin`` is provenance only: the multipliers over the rows of the system
    this constraint was derived from. It takes no part in equality.
    """

    terms: tuple[tuple[str, Fraction], ...]
    const: Fraction = Fraction(0)
    relation: Relation = Relation.GEQ
    origin: tuple[tuple[int, Fraction], ...] = field(default=(), compare=False)

    @classmethod
    def of(
        cls,
        coeffs: Mapping[str, Fraction | int],
        const: Fraction | int = 0,
        relation: Relation = Relation.GEQ,
    ) -> AffineConstraint:
        return cls(_clean(coeffs), Fraction(const), relation)

    @property
    def coeffs(self) -> dict[str, Fraction]:
        return dict(self.terms)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(name for name, _ in self.terms)

    @property
    def strict(self) -> bool:
        return self.relation is Relation.GT

    def evaluate(self, point: Point) -> Fraction:
        return sum((c * Fraction(point.get(x, 0)) for x, c in self.terms), self.const)

    def holds_at(self, point: Point) -> bool:
        value = self.evaluate(point)
        return value > 0 if self.strict else value >= 0

    def __str__(self) -> str:
        parts = [f"{format_signed(c)}*{x}" for x, c in self.terms]
        parts.append(format_signed(self.const))
        return " + ".join(parts) + f" {self.relation.value} 0"


def format_signed(q: Fraction) -> str:
    return "-" + format_rational(-q) if q < 0 else format_rational(q)


@dataclass(frozen=True)
class LinSystem:
    constraints: tuple[AffineConstraint, ...] = ()
    nonneg: frozenset[str] = frozenset()

    def __init__(
        self, constraints: Iterable[AffineConstraint] = (), nonneg: Iterable[str] = ()
    ) -> None:
        object.__setattr__(self, "constraints", tuple(constraints))
        object.__setattr__(self, "nonneg", frozenset(nonneg))

    @property
    def universe(self) -> frozenset[str]:
        names = set(self.nonneg)
        for constraint in self.constraints:
            names |= constraint.variables
        return frozenset(names)

    def rows(self) -> tuple[AffineConstraint, ...]:
        """Constraints followed by one ``x >= 0`` row per nonnegative variable."""
        bounds = tuple(AffineConstraint.of({x: 1}) for x in sorted(self.nonneg))
        return self.constraints + bounds

    def holds_at(self, point: Point) -> bool:
        return all(row.holds_at(point) for row in self.rows())

    def dump(self) -> str:
        return "\n".join(str(row) for row in self.rows())


@dataclass(frozen=True)
class Combination:
    """Nonnegative multipliers over system rows plus a nonnegative slack ``t0``."""

    multipliers: tuple[tuple[int, Fraction], ...] = ()
    slack: Fraction = Fraction(0)

    def __init__(self, multipliers: Mapping[int, Fraction | int] | None = None, slack: Fraction | int = 0) -> None:
        items = tuple(sorted((int(i), Fraction(t)) for i, t in (multipliers or {}).items() if Fraction(t) != 0))
        if any(t < 0 for _, t in items):
            raise ValueError("combination multipliers must be nonnegative")
        if Fraction(slack) < 0:
            raise ValueError("combination slack must be nonnegative")
        object.__setattr__(self, "multipliers", items)
        object.__setattr__(self, "slack", Fraction(slack))

    def __getitem__(self, index: int) -> Fraction:
        return dict(self.multipliers).get(index, Fraction(0))

    def expand(self, rows: Sequence[AffineConstraint]) -> tuple[dict[str, Fraction], Fraction]:
        """``sum(t_i * row_i)`` as (coefficients, constant), slack excluded."""
        coeffs: dict[str, Fraction] = {}
        const = Fraction(0)
        for index, t in self.multipliers:
            row = rows[index]
            for x, c in row.terms:
                coeffs[x] = coeffs.get(x, Fraction(0)) + t * c
            const += t * row.const
        return {x: c for x, c in coeffs.items() if c != 0}, const


@dataclass(frozen=True)
class Witness:
    point: Mapping[str, Fraction]


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Multipliers whose expansion is a constant row that cannot hold."""

    combination: Combination

    def verify(self, system: LinSystem) -> bool:
        rows = system.rows()
        if any(index >= len(rows) for index, _ in self.combination.multipliers):
            return False
        coeffs, const = self.combination.expand(rows)
        if coeffs:
            return False
        strict = any(rows[index].strict for index, _ in self.combination.multipliers)
        return const < 0 or (const == 0 and strict)


@dataclass(frozen=True)
class Countermodel:
    point: Mapping[str, Fraction]


@dataclass(frozen=True)
class Vacuous:
    """Entailment holds because the hypotheses alone are infeasible."""

    certificate: InfeasibilityCertificate


# Elimination engine.


@dataclass
class _Row:
    coeffs: dict[str, Fraction]
    const: Fraction
    strict: bool
    origin: dict[int, Fraction]

    @classmethod
    def seed(cls, index: int, constraint: AffineConstraint) -> _Row:
        return cls(constraint.coeffs, constraint.const, constraint.strict, {index: Fraction(1)})

    def combine(self, k: Fraction, other: _Row, l: Fraction) -> _Row:
        coeffs = {x: k * c for x, c in self.coeffs.items()}
        for x, c in other.coeffs.items():
            coeffs[x] = coeffs.get(x, Fraction(0)) + l * c
        origin = {i: k * t for i, t in self.origin.items()}
        for i, t in other.origin.items():
            origin[i] = origin.get(i, Fraction(0)) + l * t
        return _Row(
            {x: c for x, c in coeffs.items() if c != 0},
            k * self.const + l * other.const,
            self.strict or other.strict,
            origin,
        )

    def normalized(self) -> _Row:
        scale = max((abs(c) for c in self.coeffs.values()), default=abs(self.const))
        if scale in (0, 1):
            return self
        return _Row(
            {x: c / scale for x, c in self.coeffs.items()},
            self.const / scale,
            self.strict,
            {i: t / scale for i, t in self.origin.items()},
        )

    @property
    def contradictory(self) -> bool:
        return not self.coeffs and (self.const < 0 or (self.const == 0 and self.strict))

    @property
    def trivial(self) -> bool:
        return not self.coeffs and not self.contradictory

    def to_constraint(self) -> AffineConstraint:
        return AffineConstraint(
            _clean(self.coeffs),
            self.const,
            Relation.GT if self.strict else Relation.GEQ,
            tuple(sorted((i, t) for i, t in self.origin.items() if t != 0)),
        )


def _prune(rows: list[_Row]) -> list[_Row]:
    """Drop trivial, duplicate and dominated rows; keep one contradiction if any."""
    best: dict[tuple[tuple[str, Fraction], ...], _Row] = {}
    for row in rows:
        if row.trivial:
            continue
        if row.contradictory:
            return [row]
        row = row.normalized()
        key = _clean(row.coeffs)
        kept = best.get(key)
        # same direction: smaller constant is tighter, strict wins ties
        if kept is None or row.const < kept.const or (row.const == kept.const and row.strict and not kept.strict):
            best[key] = row
    return [best[key] for key in sorted(best)]


def _eliminate(rows: list[_Row], v: str) -> list[_Row]:
    positive = [row for row in rows if row.coeffs.get(v, 0) > 0]
    negative = [row for row in rows if row.coeffs.get(v, 0) < 0]
    result = [row for row in rows if v not in row.coeffs]
    for p in positive:
        for n in negative:
            result.append(p.combine(-n.coeffs[v], n, p.coeffs[v]))
    return _prune(result)


def _pick_variable(rows: list[_Row]) -> str:
    counts: dict[str, list[int]] = {}
    for row in rows:
        for x, c in row.coeffs.items():
            counts.setdefault(x, [0, 0])[0 if c > 0 else 1] += 1
    return min(counts, key=lambda x: (counts[x][0] * counts[x][1], x))


def fm_eliminate(s: LinSystem, v: str) -> LinSystem:
    """Project ``v`` out of ``s``; result rows carry origins over ``s.rows()``."""
    rows = [_Row.seed(i, c) for i, c in enumerate(s.rows())]
    projected = _eliminate(rows, v)
    return LinSystem(row.to_constraint() for row in projected)


def _bound_value(rows: list[_Row], v: str, point: dict[str, Fraction]) -> Fraction:
    lower: tuple[Fraction, bool] | None = None
    upper: tuple[Fraction, bool] | None = None
    for row in rows:
        a = row.coeffs.get(v)
        if a is None:
            continue
        rest = row.const + sum(
            (c * point.get(x, Fraction(0)) for x, c in row.coeffs.items() if x != v),
            Fraction(0),
        )
        bound = -rest / a
        if a > 0 and (lower is None or bound > lower[0] or (bound == lower[0] and row.strict)):
            lower = (bound, row.strict)
        if a < 0 and (upper is None or bound < upper[0] or (bound == upper[0] and row.strict)):
            upper = (bound, row.strict)

    def fits(x: Fraction) -> bool:
        if lower is not None and (x < lower[0] or (x == lower[0] and lower[1])):
            return False
        return upper is None or not (x > upper[0] or (x == upper[0] and upper[1]))

    candidates = [Fraction(0)]
    if lower is not None:
        candidates += [lower[0], lower[0] + 1]
    if upper is not None:
        candidates += [upper[0], upper[0] - 1]
    if lower is not None and upper is not None:
        candidates.append((lower[0] + upper[0]) / 2)
    for candidate in candidates:
        if fits(candidate):
            return candidate
    raise DecisionError(f"no value for {v}: bounds {lower} / {upper}")


def _run(rows: list[_Row]) -> tuple[list[tuple[str, list[_Row]]], _Row | None]:
    """Eliminate every variable; return the stages and a contradiction if found."""
    stages: list[tuple[str, list[_Row]]] = []
    rows = _prune(rows)
    while True:
        if rows and rows[0].contradictory:
            return stages, rows[0]
        if not any(row.coeffs for row in rows):
            return stages, None
        v = _pick_variable(rows)
        stages.append((v, rows))
        rows = _eliminate(rows, v)
        if logger.enabled("DEBUG"):
            logger.log_struct(
                {"event": "fm_eliminate", "variable": v, "rows_before": len(stages[-1][1]), "rows_after": len(rows)},
                severity="DEBUG",
            )


def feasible(s: LinSystem) -> Witness | InfeasibilityCertificate:
    """Decide ``s`` exactly, returning a point or a checkable certificate."""
    with tracer.start_as_current_span("linarith.feasible") as span:
        rows = s.rows()
        span.set_attribute("rows", len(rows))
        stages, contradiction = _run([_Row.seed(i, c) for i, c in enumerate(rows)])
        if contradiction is not None:
            return InfeasibilityCertificate(Combination(contradiction.origin))
        point: dict[str, Fraction] = {}
        for v, stage_rows in reversed(stages):
            point[v] = _bound_value(stage_rows, v, point)
        for x in s.universe:
            point.setdefault(x, Fraction(0))
        return Witness(dict(sorted(point.items())))


def entails(hyps: LinSystem, goal: AffineConstraint) -> Combination | Countermodel | Vacuous:
    """Decide whether every point satisfying ``hyps`` satisfies ``goal``."""
    rows = hyps.rows()
    if any(row.strict for row in rows) or goal.strict:
        raise ValueError("entails expects non-strict hypotheses and goal")
    negated = AffineConstraint(tuple((x, -c) for x, c in goal.terms), -goal.const, Relation.GT)
    result = feasible(LinSystem((*rows, negated)))
    if isinstance(result, Witness):
        return Countermodel(result.point)
    combination = result.combination
    mu = combination[len(rows)]
    if mu == 0:
        return Vacuous(result)
    _, const = combination.expand((*rows, negated))
    return Combination(
        {i: t / mu for i, t in combination.multipliers if i < len(rows)},
        -const / mu,
    )


def verify_combination(hyps: LinSystem, goal: AffineConstraint, c: Combination) -> bool:
    """Check ``goal == sum(t_i * hyp_i) + t0`` coefficient by coefficient."""
    rows = hyps.rows()
    if any(index >= len(rows) or rows[index].strict for index, _ in c.multipliers):
        return False
    coeffs, const = c.expand(rows)
    return coeffs == goal.coeffs and const + c.slack == goal.const
