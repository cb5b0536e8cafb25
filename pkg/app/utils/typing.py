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
from typing import Literal

from pydantic import (
    BaseModel,
    Field,
)

from app.extval import ExtValue, format_rational

Rational = str


class ModelPayload(BaseModel):
    """A valuation; values are rationals ``p/q`` or ``inf``."""

    assignment: dict[str, Rational] = Field(default_factory=dict)
    default: Rational = "0"


class CombinationPayload(BaseModel):
    """Nonnegative multipliers keyed by system row, plus the slack."""

    multipliers: dict[int, Rational] = Field(default_factory=dict)
    slack: Rational = "0"


class GoalReport(BaseModel):
    goal: str
    combination: CombinationPayload


class LeafReport(BaseModel):
    leaf: int
    reason: Literal["inconsistent", "infeasible", "goals"]
    certificate: CombinationPayload | None = None
    goals: list[GoalReport] = Field(default_factory=list)


class VerdictReport(BaseModel):
    """Output of ``sat`` and ``entails``."""

    command: Literal["sat", "entails"]
    verdict: Literal["satisfiable", "unsatisfiable", "entailed", "refuted"]
    level: Literal["L", "L1", "L1star"]
    model: ModelPayload | None = Field(
        default=None, description="Witness (sat) or countermodel (entails)."
    )
    leaf: int | None = None
    leaves: list[LeafReport] = Field(default_factory=list)
    proofs: list[str] = Field(default_factory=list)


class SplitReport(BaseModel):
    rule: str
    kind: Literal["tot", "wem"]
    pair: list[str]


class LeafTheoryReport(BaseModel):
    inconsistent: bool
    judgements: list[str]
    goals: list[str] = Field(default_factory=list)


class TreeNodeReport(BaseModel):
    """One node of a normalization tree."""

    assumed: str | None = None
    steps: list[str] = Field(default_factory=list)
    split: SplitReport | None = None
    children: list["TreeNodeReport"] = Field(default_factory=list)
    leaf: LeafTheoryReport | None = None


class ProofReport(BaseModel):
    verdict: Literal["accepted", "rejected"]
    steps: int
    step: int | None = None
    reason: str | None = None


class EvalReport(BaseModel):
    formula: str
    value: Rational


class SampleReport(BaseModel):
    model: ModelPayload
    satisfies: bool


class SampleListReport(BaseModel):
    """Output of ``sample``."""

    seed: int
    profile: str
    samples: list[SampleReport] = Field(default_factory=list)


class RuleFailureReport(BaseModel):
    rule: str
    premises: list[str]
    conclusion: str


class ContReport(BaseModel):
    stream: str
    verdict: Literal["satisfies", "hyps-hold-so-far", "violated"]
    detail: str


class RuleCheckReport(BaseModel):
    """Output of ``qalg-check``."""

    ok: bool
    checked: dict[str, int]
    failures: list[RuleFailureReport] = Field(default_factory=list)
    cont: list[ContReport] = Field(default_factory=list)


def rational(value: Fraction | ExtValue) -> Rational:
    if isinstance(value, ExtValue):
        return str(value)
    return format_rational(value)

