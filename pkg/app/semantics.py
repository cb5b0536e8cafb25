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
"""Models, evaluation, judgement satisfaction and diagrammatic theories."""

from __future__ import annotations

import random
import re
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from types import MappingProxyType
from typing import Literal

from app.errors import ParseError
from app.extval import INF, ONE, ZERO, ExtValue, add, parse_ext, scale, tsub
from app.syntax import (
    And,
    Atom,
    Bot,
    Formula,
    Judgement,
    Limp,
    One,
    Or,
    Scale,
    Tensor,
    Top,
    atoms,
    numeral,
)

Profile = Literal["mixed", "finite-only", "boundary"]


@dataclass(frozen=True)
class Model:
    """A valuation of propositions in [0, inf]; unmapped names get ``default``."""

    assignment: Mapping[str, ExtValue] = field(default_factory=dict)
    default: ExtValue = ZERO

    def __post_init__(self) -> None:
        frozen = {name: ExtValue.of(value) for name, value in self.assignment.items()}
        object.__setattr__(self, "assignment", MappingProxyType(frozen))

    def __getitem__(self, name: str) -> ExtValue:
        return self.assignment.get(name, self.default)

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.assignment.items())), self.default))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Model):
            return NotImplemented
        return dict(self.assignment) == dict(other.assignment) and self.default == other.default

    def with_values(self, values: Mapping[str, ExtValue]) -> Model:
        return Model({**self.assignment, **values}, self.default)

    def __str__(self) -> str:
        parts = [f"{name} = {value}" for name, value in sorted(self.assignment.items())]
        return "\n".join(parts)


def eval_formula(m: Model, f: Formula) -> ExtValue:
    """Value of ``f`` in ``m``; larger values mean "less true"."""
    match f:
        case Bot():
            return INF
        case Top():
            return ZERO
        case One():
            return ONE
        case Atom(name):
            return m[name]
        case And(a, b):
            return max(eval_formula(m, a), eval_formula(m, b))
        case Or(a, b):
            return min(eval_formula(m, a), eval_formula(m, b))
        case Tensor(a, b):
            return add(eval_formula(m, a), eval_formula(m, b))
        case Limp(a, b):
            return tsub(eval_formula(m, b), eval_formula(m, a))
        case Scale(coeff, body):
            return scale(coeff, eval_formula(m, body))
    raise TypeError(f"not a formula: {f!r}")


# eval_formula avoids shadowing the builtin inside this module.
eval = eval_formula


def satisfies(m: Model, j: Judgement) -> bool:
    """``m`` satisfies ``Γ |- ψ`` when the sum over Γ is at least m(ψ)."""
    total = sum((eval_formula(m, a) for a in j.antecedents), ZERO)
    return total >= eval_formula(m, j.consequent)


def satisfies_all(m: Model, js: Iterable[Judgement]) -> bool:
    return all(satisfies(m, j) for j in js)


# Diagrammatic theories.


@dataclass(frozen=True, slots=True)
class InfiniteAxiom:
    """``p |- bot``."""


@dataclass(frozen=True, slots=True)
class ValueAxioms:
    """The pair ``eps |- p`` and ``p |- eps``."""

    eps: Fraction


DiagramEntry = InfiniteAxiom | ValueAxioms


@dataclass(frozen=True)
class DiagramAxioms:
    entries: Mapping[str, DiagramEntry]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))

    @property
    def support(self) -> frozenset[str]:
        return frozenset(self.entries)


def model_to_diagram(m: Model, props: Iterable[str]) -> DiagramAxioms:
    entries: dict[str, DiagramEntry] = {}
    for name in props:
        value = m[name]
        entries[name] = InfiniteAxiom() if value.is_infinite else ValueAxioms(value.value)
    return DiagramAxioms(entries)


def diagram_to_model(d: DiagramAxioms) -> Model:
    return Model(
        {
            name: INF if isinstance(entry, InfiniteAxiom) else ExtValue(entry.eps)
            for name, entry in d.entries.items()
        }
    )


def diagram_judgements(d: DiagramAxioms) -> list[Judgement]:
    """The diagrammatic theory written out as judgements."""
    result = []
    for name, entry in sorted(d.entries.items()):
        p = Atom(name)
        if isinstance(entry, InfiniteAxiom):
            result.append(Judgement([p], Bot()))
        else:
            eps = numeral(entry.eps)
            result.append(Judgement([eps], p))
            result.append(Judgement([p], eps))
    return result


# Sampling.

_PROFILE_WEIGHTS: dict[str, tuple[float, float, float, float]] = {
    # zero, small rational, large rational, infinity
    "mixed": (0.2, 0.45, 0.15, 0.2),
    "finite-only": (0.2, 0.6, 0.2, 0.0),
    "boundary": (0.5, 0.0, 0.0, 0.5),
}


def _draw(rng: random.Random, weights: tuple[float, float, float, float]) -> ExtValue:
    kind = rng.choices(("zero", "small", "large", "inf"), weights=weights)[0]
    if kind == "zero":
        return ZERO
    if kind == "inf":
        return INF
    if kind == "small":
        return ExtValue(Fraction(rng.randint(0, 12), rng.randint(1, 4)))
    return ExtValue(Fraction(rng.randint(10, 1000), rng.randint(1, 3)))


def sample_model(
    props: Iterable[str],
    seed: int | random.Random = 0,
    profile: Profile = "mixed",
    weights: tuple[float, float, float, float] | None = None,
) -> Model:
    """Random model over ``props``; deterministic for a given integer seed."""
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    if profile not in _PROFILE_WEIGHTS:
        raise ValueError(f"unknown sampling profile {profile!r}")
    chosen = weights or _PROFILE_WEIGHTS[profile]
    return Model({name: _draw(rng, chosen) for name in sorted(props)})


GRID = (ZERO, ExtValue(Fraction(1, 2)), ONE, ExtValue(2), INF)
COARSE_GRID = (ZERO, ONE, INF)
_GRID_LIMIT = 729


def _candidates(props: list[str], samples: int, seed: int) -> Iterator[Model]:
    for grid in (GRID, COARSE_GRID):
        if len(grid) ** len(props) <= _GRID_LIMIT:
            for values in product(grid, repeat=len(props)):
                yield Model(dict(zip(props, values, strict=True)))
            break
    rng = random.Random(seed)
    for profile in ("boundary", "mixed"):
        for _ in range(samples // 2):
            yield sample_model(props, rng, profile)


def search_countermodel(
    premises: Iterable[Judgement],
    conclusion: Judgement,
    *,
    samples: int = 200,
    seed: int = 0,
) -> Model | None:
    """A model of ``premises`` falsifying ``conclusion``, or None if none is found.

    Every assignment from a small value grid is tried (a coarser one when
    there are many propositions), then seeded random models. None is not a
    proof of consequence.
    """
    hyps = list(premises)
    props = sorted(set().union(*(atoms(j) for j in (*hyps, conclusion))))
    for m in _candidates(props, samples, seed):
        if satisfies_all(m, hyps) and not satisfies(m, conclusion):
            return m
    return None


_ASSIGNMENT = re.compile(r'^(?:"(?P<quoted>[^"]+)"|(?P<plain>[^=\s"]+))\s*=\s*(?P<value>.+)$')


def parse_model(text: str, default: ExtValue = ZERO) -> Model:
    """Parse a model file: lines ``ident = rational | inf``."""
    values: dict[str, ExtValue] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        match = _ASSIGNMENT.match(line)
        if match is None:
            raise ParseError("expected 'name = value'", line=number)
        name = match["quoted"] or match["plain"]
        try:
            values[name] = parse_ext(match["value"].split("#", 1)[0])
        except ParseError as exc:
            raise ParseError(exc.message, line=number) from exc
    return Model(values, default)
