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
"""Exact arithmetic in the Lawvere quantale [0, inf].

Values are nonnegative rationals or infinity. The numeric order is used
throughout (``a <= b`` compares magnitudes); the quantale's lattice order is
its reverse.
"""

from __future__ import annotations

import functools
import re
from dataclasses import dataclass
from fractions import Fraction

from app.errors import ParseError

_RATIONAL = re.compile(r"\s*(\d+)(?:\s*/\s*(\d+))?\s*")


@functools.total_ordering
@dataclass(frozen=True, slots=True)
class ExtValue:
    """An element of [0, inf].

    ``finite`` holds the rational magnitude, or ``None`` for infinity. Use the
    module constants ``ZERO``, ``ONE``, ``INF`` and :meth:`of` to build values.
    """

    finite: Fraction | None

    def __post_init__(self) -> None:
        if self.finite is None:
            return
        q = Fraction(self.finite)
        if q < 0:
            raise ValueError(f"negative value {q} is outside [0, inf]")
        object.__setattr__(self, "finite", q)

    @classmethod
    def of(cls, value: ExtValue | Fraction | int | str) -> ExtValue:
        if isinstance(value, ExtValue):
            return value
        if isinstance(value, str):
            return parse_ext(value)
        return cls(Fraction(value))

    @property
    def is_infinite(self) -> bool:
        return self.finite is None

    @property
    def value(self) -> Fraction:
        if self.finite is None:
            raise ValueError("infinity has no rational value")
        return self.finite

    def __lt__(self, other: object) -> bool:
        if not isinstance(other, ExtValue):
            return NotImplemented
        if self.finite is None:
            return False
        if other.finite is None:
            return True
        return self.finite < other.finite

    def __add__(self, other: ExtValue) -> ExtValue:
        return add(self, other)

    def __radd__(self, other: int) -> ExtValue:
        # lets builtin sum() start from 0
        if other == 0:
            return self
        return NotImplemented

    def __str__(self) -> str:
        if self.finite is None:
            return "inf"
        return format_rational(self.finite)

    def __repr__(self) -> str:
        return f"ExtValue({self})"


ZERO = ExtValue(Fraction(0))
ONE = ExtValue(Fraction(1))
INF = ExtValue(None)


def format_rational(q: Fraction) -> str:
    """Render ``q`` as ``p`` or ``p/q``."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(text: str) -> Fraction:
    """Parse a nonnegative rational literal ``p`` or ``p/q``."""
    match = _RATIONAL.fullmatch(text)
    if match is None:
        raise ParseError(f"invalid rational literal {text!r}")
    num, den = match.group(1), match.group(2)
    if den is not None and int(den) == 0:
        raise ParseError(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def parse_ext(text: str) -> ExtValue:
    """Parse ``inf`` or a rational literal."""
    if text.strip() == "inf":
        return INF
    return ExtValue(parse_rational(text))


def add(a: ExtValue, b: ExtValue) -> ExtValue:
    """Extended sum; infinity absorbs."""
    if a.finite is None or b.finite is None:
        return INF
    return ExtValue(a.finite + b.finite)


def tsub(a: ExtValue, b: ExtValue) -> ExtValue:
    """Truncated subtraction ``a - b``; note ``inf - inf = 0``."""
    if a <= b:
        return ZERO
    if a.finite is None:
        return INF
    assert b.finite is not None
    return ExtValue(a.finite - b.finite)


def scale(r: Fraction | int, a: ExtValue) -> ExtValue:
    """Scalar product ``r * a`` with ``0 * inf = 0``."""
    r = Fraction(r)
    if r < 0:
        raise ValueError(f"negative scalar {r}")
    if r == 0:
        return ZERO
    if a.finite is None:
        return INF
    return ExtValue(r * a.finite)


def leq(a: ExtValue, b: ExtValue) -> bool:
    return a <= b
