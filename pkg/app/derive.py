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
"""Affine rewriting lemmas expanded into primitive rule steps.

A ``Rewrite`` relates two interderivable formulas built from propositions,
``1``, ``top``, tensor and scalars. Its steps are emitted on demand in either
direction. ``AffineSequent`` extends a proof of a single-antecedent judgement
towards a target affine judgement by weakening, by adding the same factor to
both sides and by cancelling finite factors.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from app.errors import ProofConstructionError
from app.proofkit import ProofBuilder, RuleId, by_cases, rule_instance
from app.syntax import (
    BOT,
    ONE,
    TOP,
    And,
    Atom,
    Formula,
    Judgement,
    Limp,
    One,
    Scale,
    Tensor,
    Top,
    neg,
    tensor_all,
    to_text,
)

# A proposition name, or None for the constant 1.
Key = str | None
Coefficients = dict[Key, Fraction]


def _order(key: Key) -> tuple[bool, str]:
    return key is None, key or ""


def factor(key: Key, coeff: Fraction | int) -> Formula:
    """``coeff*key`` as printed in affine judgements."""
    base: Formula = ONE if key is None else Atom(key)
    return base if coeff == 1 else Scale(Fraction(coeff), base)


def side(coeffs: Mapping[Key, Fraction]) -> Formula:
    items = sorted(((k, c) for k, c in coeffs.items() if c != 0), key=lambda kc: _order(kc[0]))
    return tensor_all(factor(k, c) for k, c in items)


def coefficients(terms: Iterable[tuple[str, Fraction]], const: Fraction) -> Coefficients:
    coeffs: Coefficients = {p: c for p, c in terms if c != 0}
    if const != 0:
        coeffs[None] = const
    return coeffs


def _key_coeff(f: Formula) -> tuple[Key, Fraction]:
    match f:
        case Atom(name):
            return name, Fraction(1)
        case One():
            return None, Fraction(1)
        case Scale(c, Atom(name)):
            return name, c
        case Scale(c, One()):
            return None, c
    raise ProofConstructionError(f"{to_text(f)!r} is not a scaled proposition")


def _leaves(f: Formula) -> list[Formula]:
    if isinstance(f, Tensor):
        return _leaves(f.left) + _leaves(f.right)
    return [f]


# Steps.


def _step(b: ProofBuilder, rule: RuleId, premises: Sequence[int] = (), **inst: Any) -> int:
    expected, _ = rule_instance(rule, inst)
    found = tuple(b.conclusion(i) for i in premises)
    if found != expected:
        shown = "; ".join(to_text(j) for j in found)
        raise ProofConstructionError(f"{rule.value} does not apply to [{shown}]")
    return b.apply(rule, premises, **inst)


def _chain(b: ProofBuilder, first: int, second: int) -> int:
    """Cut ``gamma |- phi`` against ``phi |- psi``."""
    premise, follow = b.conclusion(first), b.conclusion(second)
    return _step(
        b, RuleId.CUT, [first, second],
        gamma=list(premise.antecedents), delta=[], phi=premise.consequent, psi=follow.consequent,
    )


# Rewrites.


@dataclass(frozen=True)
class Rewrite:
    """``emit(b, True)`` proves ``source |- target``, ``emit(b, False)`` the converse."""

    source: Formula
    target: Formula
    emit: Callable[[ProofBuilder, bool], int]

    @property
    def trivial(self) -> bool:
        return self.source == self.target

    def inverse(self) -> Rewrite:
        return Rewrite(self.target, self.source, lambda b, forward: self.emit(b, not forward))


def identity(f: Formula) -> Rewrite:
    return Rewrite(f, f, lambda b, _: _step(b, RuleId.ID, phi=f))


def then(*rewrites: Rewrite) -> Rewrite:
    parts = [r for r in rewrites if not r.trivial]
    if not parts:
        return identity(rewrites[0].source)
    for first, second in zip(parts, parts[1:]):
        if first.target != second.source:
            raise ProofConstructionError(
                f"cannot follow {to_text(first.target)!r} with a rewrite of {to_text(second.source)!r}"
            )
    if len(parts) == 1:
        return parts[0]

    def emit(b: ProofBuilder, forward: bool) -> int:
        order = parts if forward else parts[::-1]
        index = order[0].emit(b, forward)
        for r in order[1:]:
            index = _chain(b, index, r.emit(b, forward))
        return index

    return Rewrite(parts[0].source, parts[-1].target, emit)


def law(rule: RuleId, *, reverse: bool = False, **inst: Any) -> Rewrite:
    """Read the equivalence axiom ``rule`` left to right (or right to left)."""
    _, theorem = rule_instance(rule, inst)
    both = theorem.consequent
    if not (isinstance(both, And) and isinstance(both.left, Limp)):
        raise ProofConstructionError(f"{rule.value} is not an equivalence")
    left, right = both.left.left, both.left.right

    def emit(b: ProofBuilder, forward: bool) -> int:
        along = forward != reverse
        axiom = _step(b, rule, **inst)
        arrow = _step(
            b, RuleId.AND3, [axiom],
            gamma=[], phi=Limp(left, right), psi=Limp(right, left), pick="left" if along else "right",
        )
        src, dst = (left, right) if along else (right, left)
        return _step(b, RuleId.TENS2B, [arrow], gamma=[], psi=src, theta=dst)

    return Rewrite(right, left, emit) if reverse else Rewrite(left, right, emit)


def in_head(r: Rewrite, rest: Formula) -> Rewrite:
    """``a (x) rest`` to ``c (x) rest`` from ``a`` to ``c``."""
    if r.trivial:
        return identity(Tensor(r.source, rest))

    def emit(b: ProofBuilder, forward: bool) -> int:
        a, c = (r.source, r.target) if forward else (r.target, r.source)
        inner = r.emit(b, forward)
        goal = Tensor(c, rest)
        start = _step(b, RuleId.ID, phi=goal)
        split = _step(b, RuleId.TENS1B, [start], gamma=[], phi=c, psi=rest, theta=goal)
        swapped = _step(b, RuleId.PERM, [split], gamma=[], delta=[], phi=c, psi=rest, theta=goal)
        cut = _step(b, RuleId.CUT, [inner, swapped], gamma=[a], delta=[rest], phi=c, psi=goal)
        return _step(b, RuleId.TENS1A, [cut], gamma=[], phi=a, psi=rest, theta=goal)

    return Rewrite(Tensor(r.source, rest), Tensor(r.target, rest), emit)


def in_tail(first: Formula, r: Rewrite) -> Rewrite:
    """``first (x) a`` to ``first (x) c`` from ``a`` to ``c``."""
    if r.trivial:
        return identity(Tensor(first, r.source))

    def emit(b: ProofBuilder, forward: bool) -> int:
        a, c = (r.source, r.target) if forward else (r.target, r.source)
        inner = r.emit(b, forward)
        goal = Tensor(first, c)
        start = _step(b, RuleId.ID, phi=goal)
        split = _step(b, RuleId.TENS1B, [start], gamma=[], phi=first, psi=c, theta=goal)
        cut = _step(b, RuleId.CUT, [inner, split], gamma=[a], delta=[first], phi=c, psi=goal)
        swapped = _step(b, RuleId.PERM, [cut], gamma=[], delta=[], phi=a, psi=first, theta=goal)
        return _step(b, RuleId.TENS1A, [swapped], gamma=[], phi=first, psi=a, theta=goal)

    return Rewrite(Tensor(first, r.source), Tensor(first, r.target), emit)


def _drop_top(w: Formula, *, left: bool) -> Rewrite:
    """``top (x) w`` (or ``w (x) top``) to ``w``."""
    joined = Tensor(TOP, w) if left else Tensor(w, TOP)

    def emit(b: ProofBuilder, forward: bool) -> int:
        if forward:
            start = _step(b, RuleId.ID, phi=w)
            index = _step(b, RuleId.WEAK, [start], gamma=[w], phi=w, psi=TOP)
            if left:
                index = _step(b, RuleId.PERM, [index], gamma=[], delta=[], phi=w, psi=TOP, theta=w)
            return _step(b, RuleId.TENS1A, [index], gamma=[], phi=joined.left, psi=joined.right, theta=w)
        start = _step(b, RuleId.ID, phi=joined)
        index = _step(b, RuleId.TENS1B, [start], gamma=[], phi=joined.left, psi=joined.right, theta=joined)
        if left:
            index = _step(b, RuleId.PERM, [index], gamma=[], delta=[], phi=TOP, psi=w, theta=joined)
        unit = _step(b, RuleId.TOP, gamma=[])
        return _step(b, RuleId.CUT, [unit, index], gamma=[], delta=[w], phi=TOP, psi=joined)

    return Rewrite(joined, w, emit)


def _vanish(f: Formula) -> Rewrite:
    """``0*x`` or ``r*top`` to ``top``."""
    if not isinstance(f, Scale) or not (f.coeff == 0 or isinstance(f.body, Top)):
        raise ProofConstructionError(f"{to_text(f)!r} is not zero-valued")
    c, body = f.coeff, f.body

    def emit(b: ProofBuilder, forward: bool) -> int:
        if forward:
            return _step(b, RuleId.TOP, gamma=[f])
        zero = Scale(Fraction(0), body)
        axiom = _step(b, RuleId.S5, phi=body)
        index = _step(b, RuleId.WEAK, [axiom], gamma=[], phi=zero, psi=TOP)
        if f == zero:
            return index
        # top |- 0*top |- r*(0*top) |- r*top
        nested = law(RuleId.S2, r=c, s=0, phi=TOP).emit(b, False)
        erase = _step(b, RuleId.TOP, gamma=[zero])
        lifted = _step(b, RuleId.S1A, [erase], r=c, phi=zero, psi=TOP)
        return _chain(b, _chain(b, index, nested), lifted)

    return Rewrite(f, TOP, emit)


def reshape(source: Formula, target: Formula) -> Rewrite:
    """Reorder and regroup the tensor factors of ``source`` into ``target``."""
    if source == target:
        return identity(source)
    if Counter(_leaves(source)) != Counter(_leaves(target)):
        raise ProofConstructionError(f"{to_text(source)!r} and {to_text(target)!r} have different factors")

    def emit(b: ProofBuilder, forward: bool) -> int:
        start, goal = (source, target) if forward else (target, source)
        regroup = _Regroup(b, goal)
        regroup.unfold()
        regroup.assemble(start)
        if regroup.items != [start]:
            raise ProofConstructionError(f"factors left over after regrouping {to_text(start)!r}")
        return regroup.index

    return Rewrite(source, target, emit)


class _Regroup:
    """Antecedents of ``... |- goal`` rearranged with PERM and the tensor rules."""

    def __init__(self, b: ProofBuilder, goal: Formula) -> None:
        self.b = b
        self.goal = goal
        self.index = _step(b, RuleId.ID, phi=goal)
        self.items: list[Formula] = [goal]
        self.ids: list[int] = [0]
        self.fresh = 1
        self.free: set[int] = set()

    def _apply(self, rule: RuleId, **inst: Any) -> None:
        self.index = _step(self.b, rule, [self.index], theta=self.goal, **inst)

    def _new_id(self) -> int:
        self.fresh += 1
        return self.fresh - 1

    def _swap(self, k: int) -> None:
        items = self.items
        self._apply(RuleId.PERM, gamma=items[:k], phi=items[k], psi=items[k + 1], delta=items[k + 2 :])
        items[k], items[k + 1] = items[k + 1], items[k]
        self.ids[k], self.ids[k + 1] = self.ids[k + 1], self.ids[k]

    def _move(self, k: int, to: int) -> None:
        for position in range(k, to):
            self._swap(position)

    def unfold(self) -> None:
        while nested := [k for k, f in enumerate(self.items) if isinstance(f, Tensor)]:
            self._move(nested[-1], len(self.items) - 1)
            last = self.items[-1]
            assert isinstance(last, Tensor)
            self._apply(RuleId.TENS1B, gamma=self.items[:-1], phi=last.left, psi=last.right)
            self.items[-1:] = [last.left, last.right]
            self.ids[-1:] = [self._new_id(), self._new_id()]
        self.free = set(self.ids)

    def assemble(self, tree: Formula) -> int:
        """Build ``tree`` as the last antecedent; returns its id."""
        if isinstance(tree, Tensor):
            first = self.assemble(tree.left)
            self.assemble(tree.right)
            self._move(self.ids.index(first), len(self.items) - 2)
            self._apply(RuleId.TENS1A, gamma=self.items[:-2], phi=tree.left, psi=tree.right)
            self.items[-2:] = [tree]
            self.ids[-2:] = [self._new_id()]
            return self.ids[-1]
        for k in range(len(self.items) - 1, -1, -1):
            if self.ids[k] in self.free and self.items[k] == tree:
                self.free.discard(self.ids[k])
                self._move(k, len(self.items) - 1)
                return self.ids[-1]
        raise ProofConstructionError(f"no factor {to_text(tree)!r} left to regroup")


def _flatten(f: Formula) -> tuple[Rewrite, list[Formula]]:
    """Rewrite ``f`` into a right-nested tensor of scaled propositions."""
    match f:
        case Top():
            return identity(f), []
        case Atom() | One():
            return identity(f), [f]
        case Scale(c, _) if c == 0:
            return _vanish(f), []
        case Scale(c, body) if c == 1:
            rest, parts = _flatten(body)
            return then(law(RuleId.S3, reverse=True, phi=body), rest), parts
        case Scale(_, Atom() | One()):
            return identity(f), [f]
        case Scale(_, Top()):
            return _vanish(f), []
        case Scale(c, Scale(d, body)):
            rest, parts = _flatten(Scale(c * d, body))
            return then(law(RuleId.S2, r=c, s=d, phi=body), rest), parts
        case Scale(c, Tensor(left, right)):
            rest, parts = _flatten(Tensor(Scale(c, left), Scale(c, right)))
            return then(law(RuleId.S4, op="tensor", r=c, phi=left, psi=right), rest), parts
        case Tensor(left, right):
            first, lparts = _flatten(left)
            second, rparts = _flatten(right)
            lside, rside = tensor_all(lparts), tensor_all(rparts)
            steps = [in_head(first, right), in_tail(lside, second)]
            if not lparts:
                steps.append(_drop_top(rside, left=True))
            elif not rparts:
                steps.append(_drop_top(lside, left=False))
            else:
                steps.append(reshape(Tensor(lside, rside), tensor_all(lparts + rparts)))
            return then(*steps), lparts + rparts
    raise ProofConstructionError(f"{to_text(f)!r} is not a sum of scaled propositions")


def _as_scaled(f: Formula) -> Rewrite:
    if isinstance(f, Scale):
        return identity(f)
    return law(RuleId.S3, phi=f)


def merge(a: Formula, b: Formula) -> Rewrite:
    """``r*x (x) s*x`` to ``(r+s)*x`` (S6)."""
    (key, r), (other, s) = _key_coeff(a), _key_coeff(b)
    if key != other:
        raise ProofConstructionError(f"cannot merge {to_text(a)!r} with {to_text(b)!r}")
    base: Formula = ONE if key is None else Atom(key)
    steps = [
        in_head(_as_scaled(a), b),
        in_tail(Scale(r, base), _as_scaled(b)),
        law(RuleId.S6, reverse=True, r=r, s=s, phi=base),
    ]
    if r + s == 1:
        steps.append(law(RuleId.S3, reverse=True, phi=base))
    return then(*steps)


def _repeated(items: Sequence[Formula]) -> tuple[int, int] | None:
    seen: dict[Key, int] = {}
    for k, f in enumerate(items):
        key, _ = _key_coeff(f)
        if key in seen:
            return seen[key], k
        seen[key] = k
    return None


def _collect(parts: list[Formula]) -> Rewrite:
    items = list(parts)
    current = tensor_all(items)
    steps = [identity(current)]
    while (pair := _repeated(items)) is not None:
        a, c = items[pair[0]], items[pair[1]]
        others = [f for k, f in enumerate(items) if k not in pair]
        joined = merge(a, c)
        if others:
            rest = tensor_all(others)
            steps += [reshape(current, Tensor(Tensor(a, c), rest)), in_head(joined, rest)]
            current = Tensor(joined.target, rest)
        else:
            steps += [reshape(current, Tensor(a, c)), joined]
            current = joined.target
        items = [joined.target, *others]
    items.sort(key=lambda f: _order(_key_coeff(f)[0]))
    steps.append(reshape(current, tensor_all(items)))
    return then(*steps)


def canonical(f: Formula) -> tuple[Rewrite, Coefficients]:
    """Rewrite an affine side into sorted, merged form with its coefficients."""
    flat, parts = _flatten(f)
    coeffs: Coefficients = {}
    for part in parts:
        key, c = _key_coeff(part)
        coeffs[key] = coeffs.get(key, Fraction(0)) + c
    return then(flat, _collect(parts)), coeffs


# Finiteness.


def unit_is_finite(b: ProofBuilder) -> int:
    """``|- !!1``, by cases on ``|- !1``, which the one rule refutes."""
    finite = Judgement([], neg(neg(ONE)))
    infinite = Judgement([], neg(ONE))
    left = ProofBuilder()
    assumed = left.hyp(infinite)
    either = _step(left, RuleId.OR2, [assumed], gamma=[], phi=neg(ONE), psi=ONE, pick="right")
    absurd = _step(left, RuleId.ONE, [either])
    anything = _step(left, RuleId.BOT, phi=finite.consequent)
    _step(left, RuleId.CUT, [absurd, anything], gamma=[], delta=[], phi=BOT, psi=finite.consequent)
    right = ProofBuilder()
    right.hyp(finite)
    return b.extend(by_cases(left.build(), right.build(), (infinite, finite)))


def scaled_is_finite(b: ProofBuilder, finite: int, r: Fraction) -> int:
    """``|- !!(r*x)`` from ``|- !!x`` (r > 0)."""
    fact = b.conclusion(finite)
    if fact.antecedents or not (isinstance(fact.consequent, Limp) and isinstance(fact.consequent.left, Limp)):
        raise ProofConstructionError(f"{to_text(fact)!r} is not a finiteness judgement")
    base = fact.consequent.left.left
    scaled_base = Scale(r, base)
    negated = neg(scaled_base)
    refuted = _step(b, RuleId.TENS2B, [finite], gamma=[], psi=neg(base), theta=BOT)
    lifted = _step(b, RuleId.S1A, [refuted], r=r, phi=neg(base), psi=BOT)
    collapse = _step(b, RuleId.S7, r=r)
    scaled_refuted = _chain(b, lifted, collapse)
    start = _step(b, RuleId.ID, phi=negated)
    applied = _step(b, RuleId.TENS2B, [start], gamma=[negated], psi=scaled_base, theta=BOT)
    anything = _step(b, RuleId.BOT, phi=Scale(r, BOT))
    widened = _step(
        b, RuleId.CUT, [applied, anything],
        gamma=[negated, scaled_base], delta=[], phi=BOT, psi=Scale(r, BOT),
    )
    curried = _step(b, RuleId.TENS2A, [widened], gamma=[negated], psi=scaled_base, theta=Scale(r, BOT))
    pushed = law(RuleId.S4, op="limp", r=r, phi=base, psi=BOT).emit(b, False)
    through = _chain(b, _chain(b, curried, pushed), scaled_refuted)
    return _step(b, RuleId.TENS2A, [through], gamma=[], psi=negated, theta=BOT)


# Sequents.


class AffineSequent:
    """A growing proof whose last step concludes ``lhs |- rhs``."""

    def __init__(self, b: ProofBuilder, index: int, finite: Iterable[str] = ()) -> None:
        if len(b.conclusion(index).antecedents) != 1:
            raise ProofConstructionError(f"{to_text(b.conclusion(index))!r} needs exactly one antecedent")
        self.b = b
        self.index = index
        self.finite = frozenset(finite)
        self._facts: dict[Key, int] = {}

    @property
    def lhs(self) -> Formula:
        return self.b.conclusion(self.index).antecedents[0]

    @property
    def rhs(self) -> Formula:
        return self.b.conclusion(self.index).consequent

    def rewrite_lhs(self, r: Rewrite) -> None:
        if r.source != self.lhs:
            raise ProofConstructionError(f"rewrite does not start at {to_text(self.lhs)!r}")
        if not r.trivial:
            self.index = _chain(self.b, r.emit(self.b, False), self.index)

    def rewrite_rhs(self, r: Rewrite) -> None:
        if r.source != self.rhs:
            raise ProofConstructionError(f"rewrite does not start at {to_text(self.rhs)!r}")
        if not r.trivial:
            self.index = _chain(self.b, self.index, r.emit(self.b, True))

    def canonicalize(self) -> tuple[Coefficients, Coefficients]:
        left, lcoeffs = canonical(self.lhs)
        self.rewrite_lhs(left)
        right, rcoeffs = canonical(self.rhs)
        self.rewrite_rhs(right)
        return lcoeffs, rcoeffs

    def weaken(self, f: Formula) -> None:
        """``A |- B`` to ``A (x) f |- B``."""
        lhs, rhs = self.lhs, self.rhs
        widened = _step(self.b, RuleId.WEAK, [self.index], gamma=[lhs], phi=rhs, psi=f)
        self.index = _step(self.b, RuleId.TENS1A, [widened], gamma=[], phi=lhs, psi=f, theta=rhs)

    def add(self, f: Formula) -> None:
        """``A |- B`` to ``A (x) f |- B (x) f``."""
        b, lhs, rhs = self.b, self.lhs, self.rhs
        goal = Tensor(rhs, f)
        start = _step(b, RuleId.ID, phi=goal)
        split = _step(b, RuleId.TENS1B, [start], gamma=[], phi=rhs, psi=f, theta=goal)
        swapped = _step(b, RuleId.PERM, [split], gamma=[], delta=[], phi=rhs, psi=f, theta=goal)
        cut = _step(b, RuleId.CUT, [self.index, swapped], gamma=[lhs], delta=[f], phi=rhs, psi=goal)
        self.index = _step(b, RuleId.TENS1A, [cut], gamma=[], phi=lhs, psi=f, theta=goal)

    def _finite_fact(self, key: Key, coeff: Fraction) -> int:
        if key not in self._facts:
            if key is None:
                self._facts[key] = unit_is_finite(self.b)
            elif key in self.finite:
                self._facts[key] = self.b.hyp(Judgement([], neg(neg(Atom(key)))))
            else:
                raise ProofConstructionError(f"cancelling {key} needs |- !!{key}")
        fact = self._facts[key]
        return fact if coeff == 1 else scaled_is_finite(self.b, fact, coeff)

    def cancel(self, key: Key, coeff: Fraction) -> None:
        """``f (x) A |- f (x) B`` to ``A |- B`` for a finite ``f`` (LIMP2)."""
        f = factor(key, coeff)
        lhs, rhs = self.lhs, self.rhs
        if not (isinstance(lhs, Tensor) and isinstance(rhs, Tensor) and lhs.left == f == rhs.left):
            raise ProofConstructionError(f"{to_text(f)!r} does not lead both sides")
        b, rest = self.b, lhs.right
        fact = self._finite_fact(key, coeff)
        split = _step(b, RuleId.TENS1B, [self.index], gamma=[], phi=f, psi=rest, theta=rhs)
        swapped = _step(b, RuleId.PERM, [split], gamma=[], delta=[], phi=f, psi=rest, theta=rhs)
        curried = _step(b, RuleId.TENS2A, [swapped], gamma=[rest], psi=f, theta=rhs)
        same = _step(b, RuleId.ID, phi=rhs)
        peeled = _step(b, RuleId.LIMP2, [same, fact], gamma=[], phi=f, psi=rhs.right, theta=rhs)
        self.index = _chain(b, curried, peeled)

    def settle(self, lhs: Mapping[Key, Fraction], rhs: Mapping[Key, Fraction]) -> None:
        """Reach ``side(lhs) |- side(rhs)``; net coefficients must already agree."""
        have_l, have_r = self.canonicalize()
        zero = Fraction(0)
        for key in sorted(set(have_l) | set(have_r) | set(lhs) | set(rhs), key=_order):
            extra = have_l.get(key, zero) - lhs.get(key, zero)
            if extra != have_r.get(key, zero) - rhs.get(key, zero):
                raise ProofConstructionError(f"net coefficient of {key or '1'} differs from the goal")
            if extra < 0:
                self.add(factor(key, -extra))
                have_l, have_r = self.canonicalize()
            elif extra > 0:
                rest_l, rest_r = _without(have_l, key, extra), _without(have_r, key, extra)
                f = factor(key, extra)
                self.rewrite_lhs(canonical(Tensor(f, side(rest_l)))[0].inverse())
                self.rewrite_rhs(canonical(Tensor(f, side(rest_r)))[0].inverse())
                self.cancel(key, extra)
                have_l, have_r = rest_l, rest_r


def _without(coeffs: Coefficients, key: Key, amount: Fraction) -> Coefficients:
    rest = dict(coeffs)
    rest[key] -= amount
    if rest[key] == 0:
        del rest[key]
    return rest
