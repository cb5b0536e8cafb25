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
"""Runtime configuration.

Module-level settings come from the environment; per-invocation settings live
in :class:`RunConfig`.
"""

import os
from collections.abc import Iterable
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, Field, field_validator

from app.errors import LevelError, ParseError
from app.extval import ExtValue, parse_ext
from app.syntax import Formula, Judgement, LogicLevel, level_of, to_text

CLOUD_LOGGING = os.getenv("LLQ_CLOUD_LOGGING", "false").lower() == "true"
TRACING = os.getenv("LLQ_TRACING", "false").lower() == "true"
CLOUD_TRACING = os.getenv("LLQ_CLOUD_TRACING", "false").lower() == "true"
LOG_LEVEL = os.getenv("LLQ_LOG_LEVEL", "WARNING")
JOBS = int(os.getenv("LLQ_JOBS", "1"))
CONT_BUDGET = int(os.getenv("LLQ_CONT_BUDGET", "10"))
SEED = int(os.getenv("LLQ_SEED", "0"))


class RunConfig(BaseModel):
    """Settings for one CLI invocation."""

    level: Literal["L", "L1", "L1star"] = "L1star"
    inputs: list[Path] = Field(default_factory=list)
    output: Literal["text", "json"] = "text"
    seed: int = SEED
    profile: Literal["mixed", "finite-only", "boundary"] = "mixed"
    jobs: int = Field(default=JOBS, ge=1)
    cont_budget: int = Field(default=CONT_BUDGET, ge=1)
    default: str = "0"
    elaborate: bool = False
    boolean: bool = False

    @field_validator("default")
    @classmethod
    def _default_is_value(cls, value: str) -> str:
        try:
            parse_ext(value)
        except ParseError as exc:
            raise ValueError(str(exc)) from exc
        return value

    @property
    def logic_level(self) -> LogicLevel:
        return LogicLevel.from_label(self.level)

    @property
    def default_value(self) -> ExtValue:
        return parse_ext(self.default)

    def check_level(self, items: Iterable[Formula | Judgement]) -> None:
        """Raise LevelError if any item needs a richer logic than ``level``."""
        for item in items:
            needed = level_of(item)
            if needed > self.logic_level:
                raise LevelError(
                    f"{to_text(item)!r} is outside logic {self.level} "
                    f"(needs {needed.label})"
                )
