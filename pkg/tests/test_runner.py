"""Job execution and the command line."""

import json
import logging

import pytest

from jetlie.cli import build_parser, job_from_args, main, render_json
from jetlie.config import Config
from jetlie.dsl import JobSpec, parse_input
from jetlie.errors import DomainError, JetlieError
from jetlie.runner import default_command, default_formulas, input_digest, run

DOCUMENT_KEYS = {
    "command",
    "input_digest",
    "status",
    "results",
    "residuals",
    "dimensions",
    "generators",
    "ranks",
}


@pytest.fixture
def cli_logging():
    """main() installs console handlers; drop them so later tests get fresh streams"""
    yield
    logger = logging.getLogger("jetlie")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
    logger.setLevel(logging.WARNING)


# ============================================================================
# Runner
# ============================================================================


def test_default_command(line):
    system = parse_input((Config.SAMPLES_DIR / "flat_plane.jlie").read_text()).system
    assert default_command(JobSpec(system=system)) == "solve"
    assert default_command(JobSpec(manifold=line)) == "manifold-analyze"
    with pytest.raises(JetlieError, match="nothing to run"):
        default_command(JobSpec())


def test_default_formulas():
    assert default_formulas(1, 1, None) == ["R1", "R2", "R3", "R4"]
    assert default_formulas(1, 1, 4) == ["R4", "partial"]
    assert default_formulas(1, 1, 6) == ["partial"]
    assert default_formulas(2, 1, 2) == ["general_R2"]
    assert default_formulas(1, 2, 3) == ["general_R3", "general_partial"]


@pytest.mark.parametrize(
    "command, options",
    [
        ("bound", {"n": 1, "m": 1, "p": 2, "l0": 2, "l0star": 1, "mu0": 3}),
        ("bound", {"n": 1, "m": 1, "kappa": 3, "theorem1": 1}),
        ("prolong", {"kappa": 2, "q": "x1", "r": "0"}),
        ("verify-closed-forms", {"kappa": 3}),
        ("closure", {"family": "weighted", "kappa": 3}),
    ],
)
def test_documents_share_their_keys(command, options):
    result = run(JobSpec(command, options=options))
    assert set(result.document) == DOCUMENT_KEYS
    assert result.document["command"] == command
    assert result.ok and result.exit_code == 0


def test_bound_values():
    result = run(JobSpec("bound", options={"n": 1, "m": 1, "p": 2, "l0": 2, "l0star": 1, "mu0": 3}))
    assert result.document["results"] == {"kappa0": 9, "bound": 770}
    result = run(JobSpec("bound", options={"n": 2, "m": 2, "kappa": 2, "theorem1": 1}))
    assert result.document["results"] == {"theorem1_bound": 24}


def test_bound_needs_its_options():
    with pytest.raises(DomainError, match="needs l0, l0star"):
        run(JobSpec("bound", options={"n": 1, "m": 1, "p": 1, "mu0": 1}))
    with pytest.raises(DomainError, match="needs kappa"):
        run(JobSpec("bound", options={"n": 1, "m": 1, "theorem1": 1}))


def test_prolong_of_scaling():
    result = run(JobSpec("prolong", options={"kappa": 2, "q": "x1", "r": "0"}))
    coefficients = result.document["results"]["coefficients"]
    assert coefficients == {"u1[x1]": "-u1[x1]", "u1[x1,x1]": "-2*u1[x1,x1]"}


def test_solve_document(free_particle):
    result = run(JobSpec("solve", free_particle, options={"shape": "projective"}))
    document = result.document
    assert result.ok
    assert document["dimensions"] == {"dimension": 8, "theorem1_bound": 8}
    assert len(document["generators"]) == 8
    assert document["results"]["shape"]["matches"]


def test_determine_fails_on_residues():
    job = parse_input((Config.SAMPLES_DIR / "incompatible.jlie").read_text())
    result = run(job)
    document = result.document
    assert not result.ok and result.exit_code == 1
    assert document["status"] == "failed"
    assert document["results"]["compatible"] is False
    assert document["residuals"]
    assert document["dimensions"]["equations"] > 0


def test_determine_passes_without_residues(free_particle):
    result = run(JobSpec("determine", free_particle))
    assert result.ok
    assert result.document["results"]["compatible"] is True
    assert result.document["residuals"] == {}


def test_manifold_document(line):
    result = run(JobSpec("manifold-analyze", manifold=line, options={"mu0": 1}))
    ranks = result.document["ranks"]
    assert ranks["chains"][-1] == 3
    assert result.document["residuals"]["functional_equation_zero"] is True
    assert "covering, k_min = 3" in result.lines


def test_digest_is_deterministic():
    job = JobSpec("bound", options={"n": 1, "m": 1, "kappa": 3, "theorem1": 1})
    first, second = run(job).document, run(job).document
    assert first == second
    assert len(first["input_digest"]) == 64
    assert input_digest("a") != input_digest("b")


def test_closure_refuses_projective_above_order_two():
    with pytest.raises(DomainError, match="order-2 systems"):
        run(JobSpec("closure", options={"family": "projective", "n": 1, "m": 1, "kappa": 3}))
    result = run(JobSpec("closure", options={"family": "projective", "n": 1, "m": 1, "kappa": 2}))
    assert result.ok
    assert result.document["dimensions"] == {"dimension": 8, "expected": 8}


@pytest.mark.parametrize("name", ["line.jlie", "degenerate_plane.jlie", "jet_bound.jlie"])
def test_json_output_is_byte_identical(name):
    text = (Config.SAMPLES_DIR / name).read_text(encoding="utf-8")
    outputs = {render_json(run(parse_input(text), input_digest(text))) for _ in range(2)}
    assert len(outputs) == 1


def test_handlers_need_their_subject(line):
    with pytest.raises(DomainError, match="needs a system block"):
        run(JobSpec("solve", manifold=line))
    with pytest.raises(DomainError, match="needs a manifold block"):
        run(JobSpec("manifold-analyze"))


# ============================================================================
# Command line
# ============================================================================


def test_parser_builds_jobs():
    args = build_parser().parse_args(["prolong", "--kappa", "3", "--Q", "x1", "--R", "u1"])
    job, digest = job_from_args(args)
    assert job.command == "prolong"
    assert job.options == {"kappa": 3, "q": "x1", "r": "u1"}
    assert digest is None

    argv = ["bound", "--theorem1", "--n", "1", "--m", "1", "--kappa", "3"]
    args = build_parser().parse_args(argv)
    job, _ = job_from_args(args)
    assert job.options == {"n": 1, "m": 1, "kappa": 3, "theorem1": 1}


def test_file_options_merge_with_flags():
    path = Config.SAMPLES_DIR / "scalar_ode3.jlie"
    args = build_parser().parse_args(["solve", str(path), "--degree", "2"])
    job, digest = job_from_args(args)
    assert job.options == {"degree": 2, "shape": "scalar-ode"}
    assert digest == input_digest(path.read_text(encoding="utf-8"))


def test_main_text_output(capsys, cli_logging):
    code = main(["--no-log-file", "bound", "--theorem1", "--n", "1", "--m", "1", "--kappa", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("jetlie bound: PASS")
    assert "kappa=3: 7" in out


def test_main_json_output(capsys, cli_logging):
    code = main(["--no-log-file", "--format", "json", "verify-closed-forms", "--kappa", "3"])
    document = json.loads(capsys.readouterr().out)
    assert code == 0
    assert document["status"] == "ok"
    assert [r["formula"] for r in document["results"]["reports"]] == ["R3", "partial"]


def test_main_manifold_from_file(capsys, cli_logging):
    path = Config.SAMPLES_DIR / "degenerate_plane.jlie"
    code = main(["--no-log-file", "--format", "json", "manifold", "analyze", str(path)])
    document = json.loads(capsys.readouterr().out)
    assert code == 0
    assert document["results"]["degenerate_witness"] == "d/dx2"


def test_main_json_is_repeatable(capsys, cli_logging):
    argv = ["--no-log-file", "--format", "json", "run", str(Config.SAMPLES_DIR / "line.jlie")]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first


def test_main_input_errors(tmp_path, capsys, cli_logging):
    assert main(["--no-log-file", "run", str(tmp_path / "missing.jlie")]) == 2
    assert "cannot read" in capsys.readouterr().err

    broken = tmp_path / "broken.jlie"
    broken.write_text("system {\n independent: x;\n order: 2.5;\n}\n", encoding="utf-8")
    assert main(["--no-log-file", "run", str(broken)]) == 2
    assert "line 3" in capsys.readouterr().err

    assert main(["--no-log-file", "bound", "--n", "1", "--m", "1"]) == 2


def test_main_failed_check_exits_one(tmp_path, capsys, cli_logging):
    path = tmp_path / "mismatch.jlie"
    path.write_text(
        "system { independent: x; dependent: u; order: 2; homogeneous; }\n"
        "job { command: solve; degree: 1; shape: projective; }\n",
        encoding="utf-8",
    )
    assert main(["--no-log-file", "run", str(path)]) == 1
    assert "FAIL" in capsys.readouterr().out
