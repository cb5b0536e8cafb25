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
from pathlib import Path
from typing import Any

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.errors import EmptyProofError, ParseError, ProofConstructionError, RuleError
from app.proofkit import (
    Accepted,
    Proof,
    ProofBuilder,
    Rejected,
    RuleId,
    by_cases,
    check,
    combine,
    format_proof,
    parse_proof,
    rule_instance,
    scaled,
)
from app.semantics import Model, satisfies, satisfies_all
from app.syntax import And, Judgement, Limp, Tensor, neg, parse_formula, parse_judgement, parse_theory
from tests.unit.strategies import formulas, models, positive_fractions, small_fractions

SCHEMATIC = [rule for rule in RuleId if rule not in (RuleId.HYP, RuleId.ADMISSIBLE)]

j = parse_judgement
f = parse_formula


def load(fixtures_dir: Path, name: str) -> tuple[Proof, list[Judgement]]:
    proof = parse_proof((fixtures_dir / f"{name}.proof").read_text())
    assumptions = parse_theory((fixtures_dir / f"{name}.assumptions").read_text())
    return proof, assumptions


def test_deduction_failure_derivation(fixtures_dir: Path) -> None:
    proof, assumptions = load(fixtures_dir, "deduction_failure")
    assert len(proof) == 8
    assert proof.theorem == j("|- rho -o theta")
    assert check(proof, assumptions) == Accepted()


def test_hypothesis_must_be_assumed(fixtures_dir: Path) -> None:
    proof, _ = load(fixtures_dir, "deduction_failure")
    assert check(proof) == Rejected(1, "not an assumption")


def test_missing_side_premise_is_rejected(fixtures_dir: Path) -> None:
    proof, assumptions = load(fixtures_dir, "limp2_missing_side")
    verdict = check(proof, assumptions)
    assert isinstance(verdict, Rejected)
    assert verdict.step == 2
    assert "2 premises" in verdict.reason


def test_identity_step() -> None:
    assert check(parse_proof("1: p |- p BY ID {phi=p}")) == Accepted()


def test_wrong_conclusion_is_rejected() -> None:
    verdict = check(parse_proof("1: p |- q BY ID {phi=p}"))
    assert verdict == Rejected(1, "conclusion should be 'p |- p'")


def test_forward_premise_reference_is_rejected() -> None:
    b = ProofBuilder()
    b.hyp(j("p |- q"))
    b.add(type(b.steps[0])(j("p |- q"), RuleId.WEAK, (1,), {}))
    verdict = check(b.build(), [j("p |- q")])
    assert verdict == Rejected(2, "premises must refer to earlier steps")


@pytest.mark.parametrize(
    "rule, inst, expected",
    [
        (RuleId.S6, {"r": 1, "s": 2, "phi": f("p")}, "|- 3*p o-o 1*p (x) 2*p"),
        (RuleId.TOT, {"phi": f("p"), "psi": f("q")}, "|- (p -o q) \\/ (q -o p)"),
        (RuleId.WEM, {"phi": f("p")}, "|- !p \\/ !!p"),
        (RuleId.S5, {"phi": f("p -o q")}, "|- 0*(p -o q)"),
        (RuleId.S7, {"r": Fraction(1, 2)}, "1/2*bot |- bot"),
    ],
)
def test_rule_instance(rule: RuleId, inst: dict[str, Any], expected: str) -> None:
    premises, conclusion = rule_instance(rule, inst)
    assert conclusion == j(expected)


def test_limp2_side_premise() -> None:
    premises, conclusion = rule_instance(RuleId.LIMP2, {"gamma": [], "phi": f("p"), "psi": f("r"), "theta": f("q")})
    assert premises == (j("q |- p (x) r"), j("|- !!p"))
    assert conclusion == j("p -o q |- r")


@pytest.mark.parametrize(
    "rule, inst",
    [
        (RuleId.S1A, {"r": 0, "phi": f("p"), "psi": f("q")}),
        (RuleId.S2, {"r": -1, "s": 1, "phi": f("p")}),
        (RuleId.S4, {"op": "xor", "r": 1, "phi": f("p"), "psi": f("q")}),
        (RuleId.AND3, {"gamma": [], "phi": f("p"), "psi": f("q"), "pick": "middle"}),
        (RuleId.CUT, {"gamma": [], "phi": f("p")}),
        (RuleId.HYP, {}),
    ],
)
def test_bad_instantiations(rule: RuleId, inst: dict[str, Any]) -> None:
    with pytest.raises(RuleError):
        rule_instance(rule, inst)


def _instantiation(draw: st.DrawFn) -> dict[str, Any]:
    parts = st.lists(formulas(max_leaves=2), max_size=2)
    return {
        "gamma": draw(parts),
        "delta": draw(parts),
        "phi": draw(formulas(max_leaves=3)),
        "psi": draw(formulas(max_leaves=3)),
        "theta": draw(formulas(max_leaves=3)),
        "r": draw(positive_fractions),
        "s": draw(small_fractions),
        "op": draw(st.sampled_from(["and", "or", "tensor", "limp"])),
        "pick": draw(st.sampled_from(["left", "right"])),
    }


instantiations = st.composite(_instantiation)


@given(st.sampled_from(SCHEMATIC), instantiations())
def test_rule_instances_check_as_one_step_proofs(rule: RuleId, inst: dict[str, Any]) -> None:
    premises, _ = rule_instance(rule, inst)
    b = ProofBuilder()
    refs = [b.hyp(p) for p in premises]
    b.apply(rule, refs, **inst)
    assert check(b.build(), premises) == Accepted()


@given(st.sampled_from(SCHEMATIC), instantiations(), models())
def test_rules_are_sound(rule: RuleId, inst: dict[str, Any], m: Model) -> None:
    premises, conclusion = rule_instance(rule, inst)
    if satisfies_all(m, premises):
        assert satisfies(m, conclusion)


DEDUCTION_FAILURE = parse_proof((Path(__file__).resolve().parents[1] / "fixtures" / "deduction_failure.proof").read_text())


@given(models(("eta", "rho", "theta")))
def test_fixture_proof_is_sound(m: Model) -> None:
    proof = DEDUCTION_FAILURE
    if satisfies(m, proof.steps[0].conclusion):
        assert satisfies(m, proof.theorem)


def _hyp(text: str) -> Proof:
    b = ProofBuilder()
    b.hyp(j(text))
    return b.build()


def _identity(text: str) -> Proof:
    b = ProofBuilder()
    b.apply(RuleId.ID, phi=f(text))
    return b.build()


def test_combine_identities() -> None:
    proof = combine(_identity("p"), _identity("q"), 1, 1)
    assert proof.theorem == j("1*p (x) 1*q |- 1*p (x) 1*q")
    assert check(proof) == Accepted()


def test_combine_single_scales() -> None:
    proof = combine(_hyp("p |- q"), None, 2)
    assert proof.theorem == j("2*p |- 2*q")
    assert check(proof, [j("p |- q")]) == Accepted()
    assert scaled(_hyp("p |- q"), 2).theorem == proof.theorem


@given(models())
def test_chained_combination_is_sound(m: Model) -> None:
    hyps = [j("p |- q"), j("q |- r"), j("r (x) 1 |- p")]
    proof = combine(combine(_hyp("p |- q"), _hyp("q |- r"), 2, Fraction(1, 3)), _hyp("r (x) 1 |- p"), 1, 3)
    assert check(proof, hyps) == Accepted()
    if satisfies_all(m, hyps):
        assert satisfies(m, proof.theorem)


def test_combine_needs_positive_factors() -> None:
    with pytest.raises(ProofConstructionError):
        combine(_identity("p"), _identity("q"), 0, 1)
    with pytest.raises(ProofConstructionError):
        combine(_identity("p"), _hyp("|- q"), 1, 1)


def _top() -> Proof:
    b = ProofBuilder()
    b.apply(RuleId.TOP, gamma=[])
    return b.build()


def test_by_cases_on_finiteness() -> None:
    proof = by_cases(_top(), _top(), (j("|- !p"), j("|- !!p")))
    assert proof.theorem == j("|- top")
    assert check(proof) == Accepted()


def test_by_cases_rejects_mismatches() -> None:
    with pytest.raises(ProofConstructionError):
        by_cases(_top(), _identity("p"), (j("|- !p"), j("|- !!p")))
    with pytest.raises(ProofConstructionError):
        by_cases(_top(), _top(), (j("|- !p"), j("|- !q")))


def _distributivity_branch(kept: str, other: str) -> Proof:
    """``(phi (x) theta) /\\ (psi (x) theta) |- (phi /\\ psi) (x) theta`` when ``kept`` is the larger value."""
    phi, psi, theta = f("phi"), f("psi"), f("theta")
    k, o = f(kept), f(other)
    target = Tensor(And(phi, psi), theta)
    b = ProofBuilder()
    order = b.hyp(Judgement([], Limp(k, o)))
    k_to_o = b.apply(RuleId.TENS2B, [order], gamma=[], psi=k, theta=o)
    k_to_k = b.apply(RuleId.ID, phi=k)
    premises = [k_to_k, k_to_o] if kept == "phi" else [k_to_o, k_to_k]
    to_meet = b.apply(RuleId.AND2, premises, gamma=[k], phi=phi, psi=psi)
    ident = b.apply(RuleId.ID, phi=target)
    split = b.apply(RuleId.TENS1B, [ident], gamma=[], phi=And(phi, psi), psi=theta, theta=target)
    swapped = b.apply(RuleId.PERM, [split], gamma=[], delta=[], phi=And(phi, psi), psi=theta, theta=target)
    cut = b.apply(RuleId.CUT, [to_meet, swapped], gamma=[k], delta=[theta], phi=And(phi, psi), psi=target)
    joined = b.apply(RuleId.TENS1A, [cut], gamma=[], phi=k, psi=theta, theta=target)
    b.apply(
        RuleId.AND1, [joined], gamma=[],
        phi=Tensor(k, theta), psi=Tensor(o, theta), theta=target,
        pick="left" if kept == "phi" else "right",
    )
    return b.build()


def test_distributivity_by_totality() -> None:
    left = _distributivity_branch("phi", "psi")
    right = _distributivity_branch("psi", "phi")
    pair = (j("|- phi -o psi"), j("|- psi -o phi"))
    assert check(left, [pair[0]]) == Accepted()
    assert check(right, [pair[1]]) == Accepted()
    proof = by_cases(left, right, pair)
    assert proof.theorem == j("(phi (x) theta) /\\ (psi (x) theta) |- (phi /\\ psi) (x) theta")
    assert check(proof) == Accepted()


def test_totality_branch_errors_surface() -> None:
    left = _distributivity_branch("phi", "psi")
    pair = (j("|- phi -o psi"), j("|- psi -o phi"))
    proof = by_cases(left, left, pair)
    verdict = check(proof)
    assert isinstance(verdict, Rejected)
    assert "psi -o phi" in verdict.reason


def test_proof_file_round_trip(fixtures_dir: Path) -> None:
    proof, _ = load(fixtures_dir, "deduction_failure")
    text = format_proof(proof)
    assert text.splitlines()[3] == "4: eta (x) rho |- theta BY TENS2b [3] {gamma=[]; psi=eta (x) rho; theta=theta}"
    assert parse_proof(text) == proof


@pytest.mark.parametrize(
    "text, line",
    [
        ("1: p |- p BY FOO", 1),
        ("1: p |- p BY ID {phi=p}\n2: p |- p BY WEAK [3] {gamma=[p]; phi=p; psi=p}", 2),
        ("1: p |- p BY ID {phi=p}\n1: p |- p BY ID {phi=p}", 2),
        ("# header\n1: p |- p BY ADMISSIBLE(totality)", 2),
        ("1: p |- p by id", 1),
        ("1: p |- BY ID {phi=p}", 1),
    ],
)
def test_parse_proof_errors(text: str, line: int) -> None:
    with pytest.raises(ParseError) as info:
        parse_proof(text)
    assert info.value.line == line


def test_empty_proof(fixtures_dir: Path) -> None:
    with pytest.raises(EmptyProofError):
        parse_proof((fixtures_dir / "empty.proof").read_text())


def test_negation_helpers_in_schemas() -> None:
    premises, conclusion = rule_instance(RuleId.S8, {"r": 1, "s": 3, "phi": f("p")})
    assert premises == (Judgement([], neg(neg(f("p")))),)
    assert conclusion == j("|- 2*p o-o (1*p -o 3*p)")
