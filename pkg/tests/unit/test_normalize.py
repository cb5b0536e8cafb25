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
from hypothesis import given, settings
from hypothesis import strategies as st

from app.errors import LevelError
from app.normalize import (
    INCONSISTENT,
    NOT_NORMAL,
    TAUTOLOGICAL,
    Affine,
    Alethic,
    AlethicKind,
    Finitist,
    Geq,
    NormalTheory,
    Provenance,
    check_normal_theory,
    classify,
    flatten,
    format_tree,
    leaf_list,
    leaves,
    normalize,
    print_normal,
)
from app.proofkit import Accepted, Rejected, RuleId, check
from app.semantics import Model, sample_model, satisfies_all
from app.syntax import And, Atom, Judgement, LogicLevel, Tensor, parse_formula, parse_judgement
from tests.unit.strategies import judgements, models


def theory(*texts: str) -> frozenset:
    return frozenset(classify(parse_judgement(t)) for t in texts)


def leaf_sets(texts: list[str], **kwargs: bool) -> set[frozenset]:
    tree = normalize([parse_judgement(t) for t in texts], **kwargs)
    return {leaf.judgements for leaf in leaves(tree)}


@pytest.mark.parametrize(
    "text, expected",
    [
        ("2*(p (x) q)", "2*p (x) 2*q"),
        ("2*(3*p)", "6*p"),
        ("0*(p -o q)", "top"),
        ("1/2*(bot /\\ 1)", "bot /\\ 1/2*1"),
    ],
)
def test_flatten(text: str, expected: str) -> None:
    assert flatten(parse_formula(text)) == parse_formula(expected)


@pytest.mark.parametrize(
    "text, expected",
    [
        ("p |- bot", Alethic("p", AlethicKind.INFINITE)),
        ("|- !p", Alethic("p", AlethicKind.INFINITE)),
        ("top |- p", Alethic("p", AlethicKind.ZERO)),
        ("|- !!p", Finitist("p")),
        ("2*1 |- 1", TAUTOLOGICAL),
        ("bot |- p -o q", TAUTOLOGICAL),
        ("1 |- 2*1", INCONSISTENT),
        ("|- bot", INCONSISTENT),
        ("p, 2*(q (x) 1) |- 3*r", Affine.of({"p": 1, "q": 2}, 2, {"r": 3}, 0)),
        ("p (x) q |- bot", NOT_NORMAL),
        ("p |- q \\/ r", NOT_NORMAL),
    ],
)
def test_classify(text: str, expected: object) -> None:
    assert classify(parse_judgement(text)) == expected


def test_print_normal_uses_level_syntax() -> None:
    a = Affine.of({"p": 2}, 0, {"q": 1}, Fraction(1, 2))
    assert print_normal(a) == "2*p |- q (x) 1/2*1"
    assert print_normal(Affine.of({"p": 2}, 0, {"q": 1}, 1), LogicLevel.L1) == "p (x) p |- q (x) 1"


def test_disjunction_tree() -> None:
    result = leaf_sets(["theta |- (phi \\/ psi) (x) rho"], saturate=False)
    assert result == {
        theory("psi |- phi", "theta |- phi (x) rho"),
        theory("phi |- psi", "theta |- psi (x) rho"),
    }


def test_implication_tree() -> None:
    result = leaf_sets(["theta |- (phi -o psi) (x) rho"], saturate=False)
    assert result == {
        theory("phi |- psi", "theta |- rho"),
        theory("|- !!psi", "psi |- phi", "theta (x) phi |- psi (x) rho"),
        theory("|- !!phi", "|- !psi", "|- !theta"),
        theory("|- !phi", "|- !psi", "theta |- rho"),
    }


def test_one_axiom_has_only_inconsistent_leaves() -> None:
    tree = normalize([parse_judgement("|- 1 \\/ !1")])
    assert leaves(tree)
    assert all(leaf.inconsistent for leaf in leaves(tree))
    assert leaves(tree, satisfiable_only=True) == []


def test_empty_input() -> None:
    assert leaves(normalize([])) == [NormalTheory()]


def test_normal_input_is_kept() -> None:
    result = leaf_sets(["p |- q", "|- !!p", "|- !!q"], saturate=False)
    assert result == {theory("p |- q", "|- !!p", "|- !!q")}


def test_level_is_checked() -> None:
    with pytest.raises(LevelError):
        normalize([parse_judgement("2*p |- q")], LogicLevel.L)


def test_saturated_leaves_are_normal_theories() -> None:
    tree = normalize([parse_judgement("theta |- (phi -o psi) (x) rho")])
    for theory_ in leaves(tree):
        assert check_normal_theory(theory_) == []
        facts = theory_.facts()
        for affine in theory_.affines():
            assert affine.props <= facts.keys()


def test_check_normal_theory_flags_problems() -> None:
    bad = NormalTheory(theory("p |- q", "top |- p", "|- !!q", "|- !q"))
    problems = check_normal_theory(bad)
    assert "alethic proposition in p |- q" in problems
    assert "q has 2 assertive judgements" in problems


def test_format_tree() -> None:
    tree = normalize([parse_judgement("theta |- (phi \\/ psi) (x) rho")], saturate=False)
    text = format_tree(tree)
    assert "split or-right [tot]" in text
    assert "assume |- psi -o phi" in text


def _assumptions(proof) -> list[Judgement]:
    return [step.conclusion for step in proof.steps if step.rule is RuleId.HYP]


def test_every_edge_replays() -> None:
    tree = normalize(
        [parse_judgement("theta |- (phi -o psi) (x) rho"), parse_judgement("p /\\ !q |- r")]
    )
    edges = list(tree.edges())
    assert edges
    for edge in edges:
        for proof in edge.forward_proofs():
            assert check(proof, _assumptions(proof)) == Accepted()
        backward = edge.backward_proof()
        if backward is not None:
            assert check(backward, _assumptions(backward)) == Accepted()


def test_tampered_provenance_is_rejected() -> None:
    tree = normalize([parse_judgement("theta |- (phi \\/ psi) (x) rho")], saturate=False)
    edge = next(e for e in tree.edges() if e.rule == "or-right")
    proof = edge.forward_proofs()[0]
    last = proof.steps[-1]
    forged = Judgement([parse_formula("theta")], parse_formula("rho"))
    steps = (*proof.steps[:-1], type(last)(forged, last.rule, last.premises, last.instantiation, last.name))
    assert check(type(proof)(steps), _assumptions(proof)) != Accepted()


P, Q, R = Atom("p"), Atom("q"), Atom("r")
AND_RIGHT = Geq((P,), (And(Q, R),))


def test_unsound_rule_output_is_rejected() -> None:
    edge = Provenance("and-right", AND_RIGHT, produced=(Geq((P,), (Q,)), Geq((P,), (Tensor(R, R),))))
    kept, wrong = edge.forward_proofs()
    assert check(kept, _assumptions(kept)) == Accepted()
    verdict = check(wrong, _assumptions(wrong))
    assert isinstance(verdict, Rejected)
    assert verdict.step == 2
    assert verdict.reason.startswith("and-right step fails in the model")


def test_dropped_rule_output_is_rejected_on_the_way_back() -> None:
    edge = Provenance("and-right", AND_RIGHT, produced=(Geq((P,), (Q,)),))
    [forward] = edge.forward_proofs()
    assert check(forward, _assumptions(forward)) == Accepted()
    backward = edge.backward_proof()
    assert backward is not None
    verdict = check(backward, _assumptions(backward))
    assert isinstance(verdict, Rejected)
    assert "fails in the model" in verdict.reason


def test_sound_rule_output_replays() -> None:
    edge = Provenance("and-right", AND_RIGHT, produced=(Geq((P,), (Q,)), Geq((P,), (R,))))
    backward = edge.backward_proof()
    assert backward is not None
    assert check(backward, _assumptions(backward)) == Accepted()
    assert all(check(f, _assumptions(f)) == Accepted() for f in edge.forward_proofs())


@settings(max_examples=40, deadline=None)
@given(st.lists(judgements(max_leaves=3), max_size=2), st.lists(models(), min_size=1, max_size=8))
def test_models_of_input_are_models_of_some_leaf(js: list[Judgement], ms: list[Model]) -> None:
    tree = normalize(js)
    theories = [leaf.theory.as_judgements() for leaf in leaf_list(tree)]
    for m in ms:
        assert satisfies_all(m, js) == any(satisfies_all(m, t) for t in theories)


FOUR_PROPS = ("p", "q", "r", "s")
SAMPLED_MODELS = [sample_model(FOUR_PROPS, seed, profile) for seed in range(100) for profile in ("mixed", "boundary")]


@pytest.mark.slow
@settings(settings.get_profile("acceptance"))
@given(st.lists(judgements(props=FOUR_PROPS, max_leaves=3), min_size=1, max_size=3))
def test_models_of_input_are_models_of_some_leaf_at_scale(js: list[Judgement]) -> None:
    theories = [leaf.theory.as_judgements() for leaf in leaf_list(normalize(js))]
    for m in SAMPLED_MODELS:
        assert satisfies_all(m, js) == any(satisfies_all(m, t) for t in theories)
