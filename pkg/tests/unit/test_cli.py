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
import json
from pathlib import Path

import pytest

from app.cli import main
from app.utils.typing import (
    EvalReport,
    ProofReport,
    RuleCheckReport,
    SampleListReport,
    TreeNodeReport,
    VerdictReport,
)


def run(capsys: pytest.CaptureFixture[str], *argv: str | Path) -> tuple[int, str, str]:
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_eval(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    code, out, _ = run(capsys, "eval", fixtures_dir / "deduction_failure.model", "eta (x) rho -o theta")
    assert code == 0
    assert out.strip() == "3/4"
    code, out, _ = run(capsys, "eval", fixtures_dir / "deduction_failure.model", "bot", "--json")
    assert EvalReport.model_validate_json(out).value == "inf"


def test_sat_unsatisfiable(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    code, out, _ = run(capsys, "sat", fixtures_dir / "one.theory", "--json")
    assert code == 1
    report = VerdictReport.model_validate_json(out)
    assert report.verdict == "unsatisfiable"
    assert report.leaves
    assert all(leaf.reason == "inconsistent" for leaf in report.leaves)


def test_sat_satisfiable(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    code, out, _ = run(capsys, "sat", fixtures_dir / "disjunction.theory")
    assert code == 0
    assert out.startswith("satisfiable")


def test_entails(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    theory = fixtures_dir / "deduction_failure.assumptions"
    code, out, _ = run(capsys, "entails", theory, "|- rho -o theta", "--json", "--elaborate")
    assert code == 0
    report = VerdictReport.model_validate_json(out)
    assert report.verdict == "entailed"
    assert report.level == "L1star"


def test_entails_refuted(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    code, out, _ = run(capsys, "entails", fixtures_dir / "disjunction.theory", "rho |- theta", "--json")
    assert code == 1
    report = VerdictReport.model_validate_json(out)
    assert report.verdict == "refuted"
    assert report.model is not None


def test_boolean_models_only(capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
    theory = tmp_path / "empty.theory"
    theory.write_text("# no hypotheses\n")
    code, _, _ = run(capsys, "entails", theory, "p |- p (x) p")
    assert code == 1
    code, out, _ = run(capsys, "entails", theory, "p |- p (x) p", "--boolean")
    assert code == 0
    assert out.startswith("entailed")
    pinned = tmp_path / "pinned.theory"
    pinned.write_text("1 |- p\n|- p -o 1\n")
    code, _, _ = run(capsys, "sat", pinned)
    assert code == 0
    code, _, _ = run(capsys, "sat", pinned, "--boolean")
    assert code == 1


def test_level_is_enforced(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    code, out, err = run(capsys, "sat", fixtures_dir / "one.theory", "--logic", "L")
    assert code == 2
    assert out == ""
    assert "outside logic L" in err


def test_deeply_nested_input_is_bad_input(
    capsys: pytest.CaptureFixture[str], caplog: pytest.LogCaptureFixture, fixtures_dir: Path
) -> None:
    nested = "(" * 3000 + "eta" + ")" * 3000
    code, out, err = run(capsys, "eval", fixtures_dir / "deduction_failure.model", nested)
    assert code == 2
    assert out == ""
    assert "nested too deeply" in err
    assert "input_too_deep" in caplog.text


def test_check_proof(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    code, out, _ = run(
        capsys, "check-proof",
        fixtures_dir / "deduction_failure.proof", fixtures_dir / "deduction_failure.assumptions",
    )
    assert code == 0
    assert out.strip() == "accepted (8 steps)"

    code, out, _ = run(
        capsys, "check-proof",
        fixtures_dir / "limp2_missing_side.proof", fixtures_dir / "limp2_missing_side.assumptions", "--json",
    )
    assert code == 1
    report = ProofReport.model_validate_json(out)
    assert (report.verdict, report.step) == ("rejected", 2)


def test_check_empty_proof(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    code, out, _ = run(capsys, "check-proof", fixtures_dir / "empty.proof")
    assert code == 1
    assert out.strip() == "rejected: empty proof"


def test_normalize_structural(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    code, out, _ = run(capsys, "normalize", fixtures_dir / "disjunction.theory", "--structural", "--json")
    assert code == 0
    root = TreeNodeReport.model_validate_json(out)
    assert root.split is not None
    assert len(root.children) == 2


def test_sample_is_seeded(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    argv = ("sample", fixtures_dir / "implication.theory", "--count", "3", "--seed", "7", "--json")
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    report = SampleListReport.model_validate_json(first)
    assert len(report.samples) == 3
    assert first == second


def test_qalg_check(capsys: pytest.CaptureFixture[str], fixtures_dir: Path) -> None:
    signature = fixtures_dir / "line.sig"
    code, out, _ = run(capsys, "qalg-check", signature, fixtures_dir / "line.dist", "--cont-budget", "3", "--json")
    assert code == 0
    report = RuleCheckReport.model_validate_json(out)
    assert report.ok
    assert report.checked["refl"] == 3

    code, out, _ = run(capsys, "qalg-check", signature, fixtures_dir / "broken.dist", "--cont-budget", "3")
    assert code == 1
    assert out.startswith("failed")
    assert "triang fails" in out


def test_schema(capsys: pytest.CaptureFixture[str]) -> None:
    code, out, _ = run(capsys, "schema")
    assert code == 0
    assert "verdict" in json.loads(out)["properties"]


@pytest.mark.parametrize(
    "argv",
    [
        ("sat", "no-such.theory"),
        ("sat", "{fixtures}/one.theory", "--jobs", "0"),
        ("sat", "{fixtures}/one.theory", "--default", "-1"),
        ("eval", "{fixtures}/deduction_failure.model", "eta |-"),
    ],
)
def test_input_errors(capsys: pytest.CaptureFixture[str], fixtures_dir: Path, argv: tuple[str, ...]) -> None:
    code, out, err = run(capsys, *(a.format(fixtures=fixtures_dir) for a in argv))
    assert code == 2
    assert out == ""
    assert err.startswith("error:")
