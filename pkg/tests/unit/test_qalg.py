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

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.decide import HypsHoldSoFar, Satisfies, Violated
from app.errors import MetricTableError, ParseError
from app.extval import INF, ExtValue
from app.qalg import (
    App,
    EqAtom,
    Signature,
    Var,
    bounded,
    check_rules,
    close_terms,
    distance,
    instantiate_rules,
    interpret,
    metric_model,
    parse_distance_table,
    parse_signature_file,
    parse_term,
)
from app.semantics import satisfies
from app.syntax import Judgement, Tensor, numeral

from tests.unit.strategies import small_fractions

x, y, z = Var("x"), Var("y"), Var("z")
MAX = Signature({"f": 2})
TERMS = [App("f", (x, y)), App("f", (y, z))]
HALF = Fraction(1, 2)

# Points a < b < c on the line at 0, 1/2 and 2; f is max.
LINE = {
    ("a", "b"): ExtValue(HALF),
    ("b", "c"): ExtValue(Fraction(3, 2)),
    ("a", "c"): ExtValue(2),
}
ORDER = "abc"
MAX_TABLE = {(p, q): max(p, q, key=ORDER.index) for p in ORDER for q in ORDER}


def line_points() -> dict:
    return interpret(TERMS, {"x": "a", "y": "b", "z": "c"}, {"f": MAX_TABLE})


def test_refl_has_no_premises() -> None:
    instances = instantiate_rules(MAX, [x], [])
    [refl] = instances.by_rule("refl")
    assert refl.premises == ()
    assert refl.conclusion == Judgement([], EqAtom(x, x).atom)


def test_triang_adds_bounds_with_tensor() -> None:
    instances = instantiate_rules(MAX, [x, y], [HALF, 1])
    expected = (
        (bounded(HALF, EqAtom(x, y)), bounded(1, EqAtom(y, x))),
        Judgement([Tensor(numeral(HALF), numeral(1))], EqAtom(x, x).atom),
    )
    shapes = [(i.premises, i.conclusion) for i in instances.by_rule("triang")]
    assert expected in shapes


def test_nexp_pairs_arguments() -> None:
    t1, t2 = TERMS
    instances = instantiate_rules(MAX, TERMS, [HALF])
    nexp = [i for i in instances.by_rule("nexp") if i.conclusion == bounded(HALF, EqAtom(t1, t2))]
    assert [i.premises for i in nexp] == [(bounded(HALF, EqAtom(x, y)), bounded(HALF, EqAtom(y, z)))]


def test_zero_bound_is_dropped() -> None:
    assert bounded(0, EqAtom(x, y)) == Judgement([], EqAtom(x, y).atom)
    assert bounded([0, HALF], EqAtom(x, y)) == bounded(HALF, EqAtom(x, y))


def test_instance_counts() -> None:
    universe = close_terms(TERMS)
    n, b = len(universe), 3
    instances = instantiate_rules(MAX, TERMS, [0, HALF, 1])
    assert n == 5
    assert len(instances.by_rule("refl")) == n
    assert len(instances.by_rule("symm")) == n * n * b
    assert len(instances.by_rule("triang")) == n**3 * b * b
    assert len(instances.by_rule("max")) == n * n * b * b
    assert len(instances.cont) == n * n * b


def test_signature_mismatch() -> None:
    with pytest.raises(ValueError, match="does not match"):
        instantiate_rules(MAX, [App("f", (x,))], [HALF])


def test_distance_gives_proposition_value() -> None:
    m = metric_model({x: "s", y: "t"}, {("s", "t"): ExtValue(HALF)})
    assert m[EqAtom(x, y).prop] == ExtValue(HALF)
    assert m[EqAtom(y, x).prop] == ExtValue(HALF)
    assert m[EqAtom(x, x).prop] == ExtValue(0)
    assert satisfies(m, bounded(HALF, EqAtom(x, y)))
    assert not satisfies(m, bounded(Fraction(1, 4), EqAtom(x, y)))


def test_line_with_max_passes_every_rule() -> None:
    m = metric_model(line_points(), LINE)
    report = check_rules(m, instantiate_rules(MAX, TERMS, [0, HALF, 1]), budget=3)
    assert report.ok
    assert report.failures == ()
    assert report.checked["nexp"] == 2 * 2 * 3
    assert all(isinstance(c.verdict, Satisfies | HypsHoldSoFar) for c in report.cont)
    assert not any(isinstance(c.verdict, Violated) for c in report.cont)


def test_broken_triangle_is_localized() -> None:
    table = {**LINE, ("a", "c"): ExtValue(3)}
    m = metric_model(line_points(), table)
    report = check_rules(m, instantiate_rules(MAX, TERMS, [0, HALF, Fraction(3, 2), 2]), budget=3)
    assert not report.ok
    assert {f.instance.rule for f in report.failures} == {"triang"}
    assert {m[f.instance.conclusion.consequent.name] for f in report.failures} == {ExtValue(3)}


def test_asymmetric_table_fails_symm() -> None:
    table = {("a", "b"): ExtValue(HALF), ("b", "a"): ExtValue(1)}
    m = metric_model({x: "a", y: "b"}, table, validate=False)
    report = check_rules(m, instantiate_rules(MAX, [x, y], [HALF]), budget=2)
    failed = {f.instance.rule for f in report.failures}
    assert "symm" in failed
    assert "refl" not in failed


@given(st.lists(small_fractions, min_size=6, max_size=6))
def test_symm_holds_iff_table_is_symmetric(values: list[Fraction]) -> None:
    pairs = [(p, q) for p in "abc" for q in "abc" if p != q]
    table = {pair: ExtValue(v) for pair, v in zip(pairs, values, strict=True)}
    m = metric_model({x: "a", y: "b", z: "c"}, table, validate=False)
    instances = instantiate_rules(MAX, [x, y, z], values)
    symm_ok = all(i.holds(m) for i in instances.by_rule("symm"))
    assert symm_ok == all(table[(p, q)] == table[(q, p)] for p, q in pairs)
    assert all(i.holds(m) for i in instances.by_rule("refl"))


def test_cont_verdicts_on_a_metric() -> None:
    m = metric_model({x: "a", y: "b"}, {("a", "b"): ExtValue(1)})
    instances = instantiate_rules(MAX, [x, y], [0, HALF, 1])
    report = check_rules(m, instances, budget=3)
    verdicts = {(str(c.stream.eq), c.stream.eps): c.verdict for c in report.cont}
    assert verdicts[("x=y", Fraction(1))] == Satisfies("conclusion holds")
    assert verdicts[("x=y", HALF)] == Satisfies("hypothesis 3 fails")
    assert verdicts[("x=y", Fraction(0))] == Satisfies("hypothesis 2 fails")


def test_table_validation() -> None:
    with pytest.raises(MetricTableError, match="itself"):
        metric_model({x: "a"}, {("a", "a"): ExtValue(1)})
    with pytest.raises(MetricTableError, match="but b a"):
        metric_model({x: "a", y: "b"}, {("a", "b"): ExtValue(1), ("b", "a"): ExtValue(2)})
    with pytest.raises(MetricTableError, match="no distance"):
        metric_model({x: "a", y: "b"}, {})
    assert distance({("a", "b"): INF}, "b", "a") == INF


def test_parse_term() -> None:
    sig = Signature({"f": 2, "g": 1})
    t = parse_term("f(x, g(y))", sig)
    assert t == App("f", (x, App("g", (y,))))
    assert str(t) == "f(x,g(y))"
    assert parse_term("x", sig) == x


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("f(x)", "takes 2 arguments"),
        ("h(x)", "not a declared operation"),
        ("f(x, y", "end of input"),
        ("x y", "after term"),
        ("x + y", "unexpected character"),
    ],
)
def test_parse_term_errors(text: str, message: str) -> None:
    with pytest.raises(ParseError, match=message):
        parse_term(text, Signature({"f": 2, "g": 1}))


def test_signature_file(fixtures_dir: Path) -> None:
    declared = parse_signature_file((fixtures_dir / "line.sig").read_text())
    assert declared.signature.arity("f") == 2
    assert declared.terms["c"] == App("f", (x, y))
    assert declared.points() == {App("f", (x, y)): "c", x: "a", y: "b"}


@pytest.mark.parametrize(
    ("text", "line"),
    [
        ("op f/2\nop f/1\n", 2),
        ("op f/2\n\nterm t = g(x)\n", 3),
        ("# comment\nbogus\n", 2),
        ("term t = x\nterm t = y\n", 2),
    ],
)
def test_signature_file_errors(text: str, line: int) -> None:
    with pytest.raises(ParseError) as exc:
        parse_signature_file(text)
    assert exc.value.line == line


def test_distance_table() -> None:
    table = parse_distance_table("x y 1/2\n# far away\nx z inf  # unreachable\n")
    assert table == {("x", "y"): ExtValue(HALF), ("x", "z"): INF}


@pytest.mark.parametrize("text", ["x y\n", "x y z w\n", "x y -1\n"])
def test_distance_table_errors(text: str) -> None:
    with pytest.raises(ParseError) as exc:
        parse_distance_table(text)
    assert exc.value.line == 1
