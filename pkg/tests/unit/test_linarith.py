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
from fractions import Fraction

import pytest
from hypothesis import given

from app.errors import DecisionError
from app.linarith import (
    AffineConstraint,
    Combination,
    Countermodel,
    InfeasibilityCertificate,
    LinSystem,
    Relation,
    Vacuous,
    Witness,
    _bound_value,
    _Row,
    entails,
    feasible,
    fm_eliminate,
    verify_combination,
)
from tests.unit.strategies import constraints, systems

row = AffineConstraint.of


def test_feasible_returns_a_point() -> None:
    s = LinSystem([row({"x": 1, "y": -1}), row({"y": 1}, -2)], nonneg=["x"])
    result = feasible(s)
    assert isinstance(result, Witness)
    assert s.holds_at(result.point)


def test_infeasible_returns_a_certificate() -> None:
    s = LinSystem([row({"x": 1}, -1), row({"x": -1})])
    result = feasible(s)
    assert isinstance(result, InfeasibilityCertificate)
    assert result.verify(s)
    assert result.combination.multipliers == ((0, Fraction(1)), (1, Fraction(1)))


def test_strict_rows_are_respected() -> None:
    tight = LinSystem([row({"x": 1}), AffineConstraint.of({"x": -1}, 0, Relation.GT)])
    assert isinstance(feasible(tight), InfeasibilityCertificate)
    loose = LinSystem([row({"x": 1}), AffineConstraint.of({"x": -1}, 1, Relation.GT)])
    assert isinstance(feasible(loose), Witness)


def test_nonneg_variables_become_rows() -> None:
    s = LinSystem([row({"x": -1}, -1)], nonneg=["x"])
    assert s.rows()[1] == row({"x": 1})
    result = feasible(s)
    assert isinstance(result, InfeasibilityCertificate)
    assert result.verify(s)


def test_fm_eliminate_projects() -> None:
    s = LinSystem([row({"x": 1, "y": -1}), row({"y": 1}, -1)])
    projected = fm_eliminate(s, "y")
    assert projected.constraints == (row({"x": 1}, -1),)
    assert dict(projected.constraints[0].origin) == {0: 1, 1: 1}


def test_entails_scaled_hypothesis() -> None:
    hyps = LinSystem([row({"x": 1, "y": -1})])
    goal = row({"x": 2, "y": -2}, 1)
    result = entails(hyps, goal)
    assert result == Combination({0: 2}, 1)
    assert verify_combination(hyps, goal, result)


def test_entails_countermodel() -> None:
    hyps = LinSystem([], nonneg=["x"])
    result = entails(hyps, row({"x": 1}, -1))
    assert isinstance(result, Countermodel)
    assert hyps.holds_at(result.point)
    assert not row({"x": 1}, -1).holds_at(result.point)


def test_entails_vacuous() -> None:
    hyps = LinSystem([row({"x": 1}, -1), row({"x": -1})])
    result = entails(hyps, row({"y": 1}))
    assert isinstance(result, Vacuous)
    assert result.certificate.verify(hyps)


def test_entails_rejects_strict_input() -> None:
    with pytest.raises(ValueError):
        entails(LinSystem(), AffineConstraint.of({"x": 1}, 0, Relation.GT))


def test_verify_combination_rejects_wrong_multipliers() -> None:
    hyps = LinSystem([row({"x": 1, "y": -1})])
    goal = row({"x": 2, "y": -2}, 1)
    assert not verify_combination(hyps, goal, Combination({0: 1}, 1))
    assert not verify_combination(hyps, goal, Combination({3: 2}, 1))


def test_combination_must_be_nonnegative() -> None:
    with pytest.raises(ValueError):
        Combination({0: -1})
    with pytest.raises(ValueError):
        Combination({}, -1)


def test_back_substitution_without_a_value_is_a_decision_error() -> None:
    rows = [_Row.seed(0, row({"x": 1}, -1)), _Row.seed(1, row({"x": -1}))]
    with pytest.raises(DecisionError, match="no value for x"):
        _bound_value(rows, "x", {})


@given(systems())
def test_feasible_answers_check(s: LinSystem) -> None:
    result = feasible(s)
    if isinstance(result, Witness):
        assert s.holds_at(result.point)
    else:
        assert result.verify(s)


@given(systems(), constraints())
def test_entails_answers_check(hyps: LinSystem, goal: AffineConstraint) -> None:
    result = entails(hyps, goal)
    match result:
        case Combination():
            assert verify_combination(hyps, goal, result)
        case Countermodel(point):
            assert hyps.holds_at(point)
            assert not goal.holds_at(point)
        case Vacuous(certificate):
            assert certificate.verify(hyps)
