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
"""Embeddings of Boolean and Lukasiewicz propositional logic."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from app.syntax import (
    ONE,
    TOP,
    And,
    Atom,
    Bot,
    Formula,
    Judgement,
    Limp,
    Or,
    Scale,
    Tensor,
    Top,
    atoms,
    neg,
)

# Boolean fragment.


def tertium_non_datur(f: Formula) -> Judgement:
    return Judgement([], Or(f, neg(f)))


def boolean_theory(props: Iterable[str]) -> list[Judgement]:
    """``|- p or not p`` for each proposition; its models are exactly 0/inf valued."""
    return [tertium_non_datur(Atom(p)) for p in sorted(set(props))]


def classical_value(f: Formula, truth: Mapping[str, bool]) -> bool:
    """Truth of ``f`` with 0 read as true and inf as false."""
    match f:
        case Top():
            return True
        case Bot():
            return False
        case Atom(name):
            return truth[name]
        case And(a, b) | Tensor(a, b):
            return classical_value(a, truth) and classical_value(b, truth)
        case Or(a, b):
            return classical_value(a, truth) or classical_value(b, truth)
        case Limp(a, b):
            return not classical_value(a, truth) or classical_value(b, truth)
    raise ValueError(f"{f!r} is outside the Boolean fragment")


def classically_valid(j: Judgement) -> bool:
    """Truth-table check of ``j``: every valuation making the antecedents true makes the consequent true."""
    names = sorted(atoms(j))
    for values in product((True, False), repeat=len(names)):
        truth = dict(zip(names, values, strict=True))
        if all(classical_value(a, truth) for a in j.antecedents) and not classical_value(j.consequent, truth):
            return False
    return True


# Lukasiewicz and continuous logic.


class LukFormula:
    """Formulas built from top, variables, negation, implication and halving."""


@dataclass(frozen=True)
class LukTop(LukFormula):
    pass


@dataclass(frozen=True)
class LukVar(LukFormula):
    name: str


@dataclass(frozen=True)
class LukNeg(LukFormula):
    body: LukFormula


@dataclass(frozen=True)
class LukImp(LukFormula):
    left: LukFormula
    right: LukFormula


@dataclass(frozen=True)
class LukHalf(LukFormula):
    body: LukFormula


LUK_TOP = LukTop()


def luk_value(f: LukFormula, w: Mapping[str, Fraction]) -> Fraction:
    """Value in [0, 1]; 0 is truth."""
    match f:
        case LukTop():
            return Fraction(0)
        case LukVar(name):
            return Fraction(w[name])
        case LukNeg(body):
            return 1 - luk_value(body, w)
        case LukImp(left, right):
            return max(luk_value(left, w) - luk_value(right, w), Fraction(0))
        case LukHalf(body):
            return luk_value(body, w) / 2
    raise TypeError(f"not a Lukasiewicz formula: {f!r}")


def luk_vars(f: LukFormula) -> frozenset[str]:
    match f:
        case LukVar(name):
            return frozenset({name})
        case LukNeg(body) | LukHalf(body):
            return luk_vars(body)
        case LukImp(left, right):
            return luk_vars(left) | luk_vars(right)
    return frozenset()


def encode(f: LukFormula) -> Formula:
    """``e(p) = p or 1``, ``e(not a) = e(a) -o 1``, ``e(a -> b) = e(b) -o e(a)``, ``e(a/2) = 1/2 * e(a)``."""
    match f:
        case LukTop():
            return TOP
        case LukVar(name):
            return Or(Atom(name), ONE)
        case LukNeg(body):
            return Limp(encode(body), ONE)
        case LukImp(left, right):
            return Limp(encode(right), encode(left))
        case LukHalf(body):
            return Scale(Fraction(1, 2), encode(body))
    raise TypeError(f"not a Lukasiewicz formula: {f!r}")


def one_bounded(f: Formula) -> Judgement:
    """``!!f |- 1 -o f``: finite values are at most 1."""
    return Judgement([neg(neg(f))], Limp(ONE, f))


def bounded_theory(props: Iterable[str]) -> list[Judgement]:
    return [one_bounded(Atom(p)) for p in sorted(set(props))]


def lukasiewicz_axioms(phi: LukFormula, psi: LukFormula, theta: LukFormula) -> dict[str, LukFormula]:
    """Instances of the four Lukasiewicz axioms."""
    imp = LukImp
    return {
        "A1": imp(imp(phi, psi), phi),
        "A2": imp(imp(imp(theta, phi), imp(theta, psi)), imp(psi, phi)),
        "A3": imp(imp(phi, imp(phi, psi)), imp(psi, imp(psi, phi))),
        "A4": imp(imp(phi, psi), imp(LukNeg(psi), LukNeg(phi))),
    }


def halving_axioms(phi: LukFormula) -> dict[str, LukFormula]:
    """The two extra axioms of continuous logic."""
    half = LukHalf(phi)
    return {
        "A5": LukImp(half, LukImp(phi, half)),
        "A6": LukImp(LukImp(phi, half), half),
    }


def encoded_goal(f: LukFormula) -> Judgement:
    return Judgement([], encode(f))

