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

from app.errors import ParseError
from app.extval import (
    INF,
    ONE,
    ZERO,
    ExtValue,
    add,
    format_rational,
    parse_ext,
    scale,
    tsub,
)
from tests.unit.strategies import ext_values, small_fractions


def v(x: int | str) -> ExtValue:
    return ExtValue.of(x)


@pytest.mark.parametrize(
    "a, b, expected",
    [
        (INF, INF, ZERO),
        (INF, v(7), INF),
        (v(7), INF, ZERO),
        (v(5), v(3), v(2)),
        (v(3), v(5), ZERO),
        (ZERO, ZERO, ZERO),
        (v("7/2"), v("1/2"), v(3)),
    ],
)
def test_truncated_subtraction(a: ExtValue, b: ExtValue, expected: ExtValue) -> None:
    assert tsub(a, b) == expected


def test_zero_times_infinity_is_zero() -> None:
    assert scale(0, INF) == ZERO
    assert scale(Fraction(1, 3), INF) == INF
    assert scale(Fraction(1, 2), v(3)) == v("3/2")


def test_negative_scalar_rejected() -> None:
    with pytest.raises(ValueError):
        scale(-1, ONE)


def test_addition_absorbs_infinity() -> None:
    assert add(INF, ZERO) == INF
    assert add(v("1/3"), v("2/3")) == ONE
    assert sum([ONE, ONE, v("1/2")], ZERO) == v("5/2")


def test_order_puts_infinity_on_top() -> None:
    assert ZERO < ONE < INF
    assert max(v(3), INF) == INF
    assert min(v(3), INF) == v(3)


@pytest.mark.parametrize("text", ["inf", "0", "3", "3/4", " 10 / 4 "])
def test_parse_and_print(text: str) -> None:
    value = parse_ext(text)
    assert parse_ext(str(value)) == value


def test_rationals_print_reduced() -> None:
    assert format_rational(Fraction(10, 4)) == "5/2"
    assert str(v("6/3")) == "2"
    assert str(INF) == "inf"


@pytest.mark.parametrize("text", ["1/0", "-1", "abc", "", "1.5"])
def test_parse_errors(text: str) -> None:
    with pytest.raises(ParseError):
        parse_ext(text)


def test_negative_values_rejected() -> None:
    with pytest.raises(ValueError):
        ExtValue(Fraction(-1))


@given(ext_values, ext_values, ext_values)
def test_truncated_subtraction_is_residual(a: ExtValue, b: ExtValue, c: ExtValue) -> None:
    assert (add(a, b) >= c) == (a >= tsub(c, b))


@given(ext_values, ext_values)
def test_addition_commutes(a: ExtValue, b: ExtValue) -> None:
    assert add(a, b) == add(b, a)


@given(small_fractions, ext_values, ext_values)
def test_scaling_distributes_over_addition(r: Fraction, a: ExtValue, b: ExtValue) -> None:
    assert scale(r, add(a, b)) == add(scale(r, a), scale(r, b))
