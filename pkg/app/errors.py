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
"""Exception hierarchy shared by every module of the reasoner."""


class ReasonerError(Exception):
    """Base class for all errors raised by the reasoner."""


class ParseError(ReasonerError):
    """Raised when formula, judgement or file text does not match the grammar."""

    def __init__(self, message: str, position: int | None = None, line: int | None = None) -> None:
        self.message = message
        self.position = position
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if position is not None:
            where.append(f"column {position + 1}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class EmptyProofError(ParseError):
    """Raised when a proof file holds no steps."""


class LevelError(ReasonerError):
    """Raised when syntax exceeds the requested logic level."""


class NormalizationError(ReasonerError):
    """Raised when a normalization step fails to decrease the complexity measure."""


class CertificateError(ReasonerError):
    """Raised when a combination does not verify against its system."""


class RuleError(ReasonerError):
    """Raised for an ill-formed rule instantiation."""


class ProofConstructionError(ReasonerError):
    """Raised when a proof combinator receives incompatible proofs."""


class MonotonicityError(ReasonerError):
    """Raised when an inductive hypothesis stream is not monotone on its prefix."""


class MetricTableError(ReasonerError):
    """Raised for distance tables that are not symmetric or have a non-zero diagonal."""


class DecisionError(ReasonerError):
    """Raised when a witness or countermodel fails its semantic re-check
    or back-substitution finds no value for a variable."""
