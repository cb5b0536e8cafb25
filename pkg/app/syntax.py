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
"""Formula and judgement syntax: ASTs, logic levels, parser and printer.

Concrete syntax (ASCII)::

    formula   := limp
    limp      := lat (("-o" | "o-o") lat)*          right associative
    lat       := tens (("/\\" | "\\/") tens)*        left associative
    tens      := unary ("(x)" unary)*               left associative
    unary     := rational "*" unary | "!" unary | atom
    atom      := "bot" | "top" | "1" | rational | ident | '"' name '"' | "(" formula ")"
    judgement := [formula ("," formula)*] "|-" formula

``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import enum
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass
from fractions import Fraction

from app.errors import ParseError
from app.extval import format_rational, parse_rational


class Formula:
    """Base class of the formula AST."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True, slots=True)
class Bot(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Top(Formula):
    pass


@dataclass(frozen=True, slots=True)
class One(Formula):
    pass


@dataclass(frozen=True, slots=True)
class Atom(Formula):
    name: str

    def __post_init__(self) -> None:
        if not self.name or '"' in self.name or "\n" in self.name:
            raise ValueError(f"invalid proposition name {self.name!r}")


@dataclass(frozen=True, slots=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Tensor(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Limp(Formula):
    """``left -o right``, valued ``m(right) - m(left)`` truncated at 0."""

    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class Scale(Formula):
    coeff: Fraction
    body: Formula

    def __post_init__(self) -> None:
        coeff = Fraction(self.coeff)
        if coeff < 0:
            raise ValueError(f"negative scale coefficient {coeff}")
        object.__setattr__(self, "coeff", coeff)


BOT = Bot()
TOP = Top()
ONE = One()


@dataclass(frozen=True, slots=True)
class Judgement:
    """A sequent ``antecedents |- consequent``; order and repetitions are kept."""

    antecedents: tuple[Formula, ...]
    consequent: Formula

    def __init__(self, antecedents: Iterable[Formula], consequent: Formula) -> None:
        object.__setattr__(self, "antecedents", tuple(antecedents))
        object.__setattr__(self, "consequent", consequent)

    def __str__(self) -> str:
        return print_judgement(self)


class LogicLevel(enum.IntEnum):
    L = 0
    L1 = 1
    L1STAR = 2

    @property
    def label(self) -> str:
        return {LogicLevel.L: "L", LogicLevel.L1: "L1", LogicLevel.L1STAR: "L1star"}[self]

    @classmethod
    def from_label(cls, label: str) -> LogicLevel:
        for level in cls:
            if level.label.lower() == label.lower():
                return level
        raise ValueError(f"unknown logic level {label!r}")


# Derived connectives.


def neg(f: Formula) -> Formula:
    return Limp(f, BOT)


def biimp(f: Formula, g: Formula) -> Formula:
    return And(Limp(f, g), Limp(g, f))


def ntimes(n: int, f: Formula) -> Formula:
    """``n``-fold tensor of ``f``; ``ntimes(0, f)`` is top."""
    if n < 0:
        raise ValueError("ntimes needs n >= 0")
    if n == 0:
        return TOP
    result = f
    for _ in range(n - 1):
        result = Tensor(f, result)
    return result


def numeral(r: Fraction | int) -> Formula:
    return Scale(Fraction(r), ONE)


def tensor_all(parts: Iterable[Formula]) -> Formula:
    """Right-nested tensor of ``parts``; top when empty."""
    items = list(parts)
    if not items:
        return TOP
    result = items[-1]
    for item in reversed(items[:-1]):
        result = Tensor(item, result)
    return result


def atoms(f: Formula | Judgement) -> frozenset[str]:
    if isinstance(f, Judgement):
        names: set[str] = set()
        for part in (*f.antecedents, f.consequent):
            names |= atoms(part)
        return frozenset(names)
    match f:
        case Atom(name):
            return frozenset({name})
        case And(a, b) | Or(a, b) | Tensor(a, b) | Limp(a, b):
            return atoms(a) | atoms(b)
        case Scale(_, body):
            return atoms(body)
    return frozenset()


def size(f: Formula) -> int:
    match f:
        case And(a, b) | Or(a, b) | Tensor(a, b) | Limp(a, b):
            return 1 + size(a) + size(b)
        case Scale(_, body):
            return 1 + size(body)
    return 1


def level_of(f: Formula | Judgement) -> LogicLevel:
    """Smallest logic level whose syntax admits ``f``."""
    if isinstance(f, Judgement):
        return max(
            (level_of(part) for part in (*f.antecedents, f.consequent)),
            default=LogicLevel.L,
        )
    match f:
        case One():
            return LogicLevel.L1
        case Scale(_, One()):
            return LogicLevel.L1
        case Scale(_, _):
            return LogicLevel.L1STAR
        case And(a, b) | Or(a, b) | Tensor(a, b) | Limp(a, b):
            return max(level_of(a), level_of(b))
    return LogicLevel.L


# Tokenizer.

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
    |(?P<comment>\#[^\n]*)
    |(?P<biimp>o-o)
    |(?P<limp>-o)
    |(?P<tensor>\(x\))
    |(?P<and>/\\)
    |(?P<or>\\/)
    |(?P<turnstile>\|-)
    |(?P<rational>\d+(?:/\d+)?)
    |(?P<star>\*)
    |(?P<bang>!)
    |(?P<lparen>\()
    |(?P<rparen>\))
    |(?P<comma>,)
    |(?P<quoted>"[^"\n]*")
    |(?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)

_PLAIN_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
KEYWORDS = frozenset({"bot", "top", "inf"})
_OPERAND_ENDS = frozenset({"ident", "quoted", "rational", "rparen"})


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    text: str
    position: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN.match(text, position)
        if match is None:
            if text[position] == "-" and text[position + 1 : position + 2].isdigit():
                raise ParseError("negative scale coefficient", position)
            raise ParseError(f"unexpected character {text[position]!r}", position)
        kind = match.lastgroup
        assert kind is not None
        if kind == "biimp" and not (tokens and tokens[-1].kind in _OPERAND_ENDS):
            # an atom named o followed by -o
            tokens.append(Token("ident", "o", position))
            position += 1
            continue
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, match.group(), position))
        position = match.end()
    tokens.append(Token("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, kind: str) -> Token:
        token = self.current
        if token.kind != kind:
            shown = token.text or "end of input"
            raise ParseError(f"expected {kind}, found {shown!r}", token.position)
        return self.advance()

    def finish(self) -> None:
        if self.current.kind != "eof":
            raise ParseError(f"unexpected {self.current.text!r}", self.current.position)

    def formula(self) -> Formula:
        left = self.lattice()
        if self.current.kind in ("limp", "biimp"):
            op = self.advance().kind
            right = self.formula()
            return Limp(left, right) if op == "limp" else biimp(left, right)
        return left

    def lattice(self) -> Formula:
        result = self.tensor()
        while self.current.kind in ("and", "or"):
            op = self.advance().kind
            right = self.tensor()
            result = And(result, right) if op == "and" else Or(result, right)
        return result

    def tensor(self) -> Formula:
        result = self.unary()
        while self.current.kind == "tensor":
            self.advance()
            result = Tensor(result, self.unary())
        return result

    def unary(self) -> Formula:
        token = self.current
        if token.kind == "bang":
            self.advance()
            return neg(self.unary())
        if token.kind == "rational":
            self.advance()
            if self.current.kind == "star":
                self.advance()
                return Scale(self._rational(token), self.unary())
            if token.text == "1":
                return ONE
            return numeral(self._rational(token))
        if token.kind == "ident" and token.text == "inf" and self.tokens[self.index + 1].kind == "star":
            raise ParseError("infinite scale coefficient", token.position)
        return self.atom()

    def atom(self) -> Formula:
        token = self.advance()
        match token.kind:
            case "ident":
                if token.text == "bot":
                    return BOT
                if token.text == "top":
                    return TOP
                if token.text in KEYWORDS:
                    raise ParseError(f"reserved word {token.text!r}", token.position)
                return Atom(token.text)
            case "quoted":
                name = token.text[1:-1]
                if not name:
                    raise ParseError("empty quoted proposition", token.position)
                return Atom(name)
            case "lparen":
                inner = self.formula()
                self.expect("rparen")
                return inner
        shown = token.text or "end of input"
        raise ParseError(f"expected a formula, found {shown!r}", token.position)

    def judgement(self) -> Judgement:
        antecedents: list[Formula] = []
        if self.current.kind != "turnstile":
            antecedents.append(self.formula())
            while self.current.kind == "comma":
                self.advance()
                antecedents.append(self.formula())
        self.expect("turnstile")
        return Judgement(antecedents, self.formula())

    @staticmethod
    def _rational(token: Token) -> Fraction:
        try:
            return parse_rational(token.text)
        except ParseError as exc:
            raise ParseError(str(exc), token.position) from exc


def parse_formula(text: str) -> Formula:
    parser = _Parser(text)
    result = parser.formula()
    parser.finish()
    return result


def parse_judgement(text: str) -> Judgement:
    parser = _Parser(text)
    result = parser.judgement()
    parser.finish()
    return result


def parse_theory(text: str) -> list[Judgement]:
    """Parse a theory file: one judgement per non-blank, non-comment line."""
    judgements = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.split("#", 1)[0].strip():
            continue
        try:
            judgements.append(parse_judgement(line))
        except ParseError as exc:
            raise ParseError(exc.message, exc.position, line=number) from exc
    return judgements


# Printer.

_LIMP, _LAT, _TENS, _UNARY, _ATOM = 1, 2, 3, 4, 5


def _biimp_parts(f: Formula) -> tuple[Formula, Formula] | None:
    match f:
        case And(Limp(a, b), Limp(c, d)) if a == d and b == c:
            return a, b
    return None


def _precedence(f: Formula) -> int:
    match f:
        case Limp(_, Bot()):
            return _UNARY
        case Limp():
            return _LIMP
        case And() if _biimp_parts(f) is not None:
            return _LIMP
        case And() | Or():
            return _LAT
        case Tensor():
            return _TENS
        case Scale():
            return _UNARY
    return _ATOM


def _name(name: str) -> str:
    if _PLAIN_IDENT.fullmatch(name) and name not in KEYWORDS:
        return name
    return f'"{name}"'


def _fmt(f: Formula, context: int) -> str:
    text = _render(f)
    return f"({text})" if _precedence(f) < context else text


def _render(f: Formula) -> str:
    if (parts := _biimp_parts(f)) is not None:
        return f"{_fmt(parts[0], _LAT)} o-o {_fmt(parts[1], _LIMP)}"
    match f:
        case Bot():
            return "bot"
        case Top():
            return "top"
        case One():
            return "1"
        case Atom(name):
            return _name(name)
        case Limp(body, Bot()):
            return "!" + _fmt(body, _UNARY)
        case Limp(a, b):
            return f"{_fmt(a, _LAT)} -o {_fmt(b, _LIMP)}"
        case And(a, b):
            return f"{_fmt(a, _LAT)} /\\ {_fmt(b, _TENS)}"
        case Or(a, b):
            return f"{_fmt(a, _LAT)} \\/ {_fmt(b, _TENS)}"
        case Tensor(a, b):
            return f"{_fmt(a, _TENS)} (x) {_fmt(b, _UNARY)}"
        case Scale(coeff, body):
            return f"{format_rational(coeff)}*{_fmt(body, _UNARY)}"
    raise TypeError(f"not a formula: {f!r}")


def print_formula(f: Formula) -> str:
    return _render(f)


def print_judgement(j: Judgement) -> str:
    consequent = _fmt(j.consequent, _LIMP)
    if not j.antecedents:
        return f"|- {consequent}"
    return ", ".join(_fmt(a, _LIMP) for a in j.antecedents) + " |- " + consequent


def to_text(item: Formula | Judgement) -> str:
    """Print a formula or judgement; the result parses back to ``item``."""
    if isinstance(item, Judgement):
        return print_judgement(item)
    return print_formula(item)


def iter_subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    match f:
        case And(a, b) | Or(a, b) | Tensor(a, b) | Limp(a, b):
            yield from iter_subformulas(a)
            yield from iter_subformulas(b)
        case Scale(_, body):
            yield from iter_subformulas(body)
