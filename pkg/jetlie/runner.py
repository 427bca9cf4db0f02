"""
Job execution shared by the command line and batch runs.

- run(job) dispatches on the command and returns a JobResult
- every result carries a deterministic JSON document and plain-text lines
- check failures set ok=False (exit code 1); input errors raise JetlieError (exit code 2)
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from sympy.polys.domains import QQ

from .algebra import rat_str
from .closed_forms import closed_form_check
from .determine import determining_system, integrability_residues
from .dsl import JobSpec, render_input
from .errors import DomainError, JetlieError
from .jet import JetSpace
from .manifold import analyze_manifold, jet_bound
from .prolong import VectorField, prolong_field
from .solve import generator_coefficients, match_solution_shape, solve_system, theorem1_bound
from .symfields import (
    closure_check,
    exp_flow,
    finite_symmetry_check,
    generator_family,
    sample_solutions,
)

logger = logging.getLogger(__name__)

FINITE_PARAMETERS = (QQ(1), QQ(-1), QQ(1, 2))


@dataclass
class JobResult:
    """Outcome of one job"""

    command: str
    ok: bool
    document: Dict[str, Any] = field(default_factory=dict)
    lines: List[str] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1


def input_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def default_command(job: JobSpec) -> str:
    if job.command is not None:
        return job.command
    if job.system is not None:
        return "solve"
    if job.manifold is not None:
        return "manifold-analyze"
    raise JetlieError("nothing to run: the input has no system, manifold or job block")


def _option(job: JobSpec, key: str, default: Any = None) -> Any:
    return job.options.get(key, default)


def _require_system(job: JobSpec, command: str):
    if job.system is None:
        raise DomainError(f"{command} needs a system block")
    return job.system


# Handlers return (ok, results, extras, lines)
Outcome = Tuple[bool, Dict[str, Any], Dict[str, Any], List[str]]


def _prolong(job: JobSpec) -> Outcome:
    n, m, kappa = _option(job, "n", 1), _option(job, "m", 1), _option(job, "kappa", 2)
    space = JetSpace(n, m)
    q, r = _option(job, "q"), _option(job, "r")
    if q is None and r is None:
        X = VectorField.symbolic(space)
    else:
        qs = q.split(",") if q else ["0"] * n
        rs = r.split(",") if r else ["0"] * m
        X = VectorField.parse(space, qs, rs)
    prolonged = prolong_field(X, kappa)
    coefficients = {
        coord.label(space): prolonged.coefficient(coord).format()
        for coord in prolonged.coordinates()
    }
    lines = [f"X = {X.format()}"] + [f"{label}: {value}" for label, value in coefficients.items()]
    return True, {"field": X.format(), "kappa": kappa, "coefficients": coefficients}, {}, lines


def _determine(job: JobSpec) -> Outcome:
    spec = _require_system(job, "determine")
    system = determining_system(spec)
    residues = [res for res in integrability_residues(spec) if not res.is_zero()]
    residuals = {
        f"{res.first.label(spec.space)} / {res.second.label(spec.space)}": res.value.format()
        for res in residues
    }
    if residues:
        logger.warning(f"⚠️ {len(residues)} nonzero integrability residues")
    results = {
        "equations": system.format(),
        "symbols": [s.label(spec.space) for s in system.symbols()],
        "linear": system.is_linear(),
        "compatible": not residues,
    }
    lines = [f"{len(system)} determining equations"] + system.format()
    for label, value in residuals.items():
        lines.append(f"residue {label}: {value}")
    extras = {"residuals": residuals, "dimensions": {"equations": len(system)}}
    return not residues, results, extras, lines


def _solve(job: JobSpec) -> Outcome:
    spec = _require_system(job, "solve")
    report = solve_system(spec, _option(job, "degree"))
    results = report.to_dict()
    ok = bool(report.verified) and bool(report.independent)
    shape = _option(job, "shape")
    lines = [
        f"dimension {report.dimension} at ansatz degree {report.ansatz_degree}"
        f" (stabilized: {'yes' if report.stabilized else 'no'})"
    ]
    if shape is not None:
        match = match_solution_shape(report, shape)
        results["shape"] = {"name": shape, "matches": match.matches, "detail": match.detail}
        ok = ok and match.matches
        lines.append(f"shape {shape}: {match.detail}")
    dimensions = {"dimension": report.dimension}
    if spec.is_homogeneous():
        dimensions["theorem1_bound"] = theorem1_bound(spec.n, spec.m, spec.kappa)
    lines += [f"X{k} = {X.format()}" for k, X in enumerate(report.generators, 1)]
    extras = {
        "dimensions": dimensions,
        "generators": [generator_coefficients(X) for X in report.generators],
    }
    return ok, results, extras, lines


def default_formulas(n: int, m: int, kappa: Optional[int]) -> List[str]:
    if (n, m) == (1, 1):
        if kappa is None:
            return ["R1", "R2", "R3", "R4"]
        formulas = [f"R{kappa}"] if kappa <= 4 else []
        return formulas + (["partial"] if kappa >= 3 else [])
    if kappa is None:
        return ["general_R1", "general_R2", "general_R3"]
    formulas = [f"general_R{kappa}"] if kappa <= 3 else []
    return formulas + (["general_partial"] if kappa >= 3 else [])


def _verify_closed_forms(job: JobSpec) -> Outcome:
    n, m, kappa = _option(job, "n", 1), _option(job, "m", 1), _option(job, "kappa")
    formula = _option(job, "formula")
    formulas = [formula] if formula else default_formulas(n, m, kappa)
    if not formulas:
        raise DomainError(f"no closed form for n={n}, m={m}, kappa={kappa}")
    reports = [
        closed_form_check(
            n,
            m,
            name,
            kappa,
            _option(job, "mode", "corrected"),
            bool(_option(job, "exhaustive", 0)),
        )
        for name in formulas
    ]
    lines = [
        f"{r.formula} (n={r.n}, m={r.m}, order {r.kappa}, {r.mode}): {r.status}"
        f" [{r.checked} coefficients]"
        for r in reports
    ]
    for r in reports:
        lines += [f"  correction: {c}" for c in r.corrections]
        lines += [f"  {d['coefficient']}: {d['monomial']}" for d in r.differences[:10]]
        lines += [f"  conflict: {c}" for c in r.conflicts]
    ok = all(r.matches for r in reports)
    return ok, {"reports": [r.to_dict() for r in reports]}, {}, lines


def _family_kappa(job: JobSpec, family: str) -> int:
    return _option(job, "kappa", 2 if family == "projective" else 3)


def _closure(job: JobSpec) -> Outcome:
    family = _option(job, "family", "projective")
    n, m = _option(job, "n", 1), _option(job, "m", 1)
    kappa = _family_kappa(job, family)
    gens = generator_family(family, n, m, kappa)
    report = closure_check([g.field() for g in gens])
    expected = theorem1_bound(n, m, kappa)
    results = report.to_dict()
    results["expected_dimension"] = expected
    results["generators"] = [g.label for g in gens]
    ok = report.closed and report.dimension == expected
    lines = [
        f"{family} family (n={n}, m={m}, kappa={kappa}): "
        + ("closed" if report.closed else f"not closed, bracket {report.offending_bracket}"),
        f"dimension {report.dimension}, expected {expected}",
    ]
    return ok, results, {"dimensions": {"dimension": report.dimension, "expected": expected}}, lines


def _finite_check(job: JobSpec) -> Outcome:
    family = _option(job, "family", "weighted")
    n, m = _option(job, "n", 1), _option(job, "m", 1)
    kappa = _family_kappa(job, family)
    gens = generator_family(family, n, m, kappa)
    space = JetSpace(n, m)
    solutions = sample_solutions(space, kappa)
    checks = []
    lines = []
    for gen in gens:
        for s in FINITE_PARAMETERS:
            report = finite_symmetry_check(exp_flow(gen, s), kappa, solutions)
            entry = {"generator": gen.label, "parameter": rat_str(s)}
            entry.update(report.to_dict())
            checks.append(entry)
            lines.append(f"{gen.label} at s={rat_str(s)}: {'pass' if report else 'fail'}")
    ok = all(c["passed"] for c in checks)
    return ok, {"family": family, "kappa": kappa, "checks": checks}, {}, lines


def _manifold_analyze(job: JobSpec) -> Outcome:
    if job.manifold is None:
        raise DomainError("manifold-analyze needs a manifold block")
    report = analyze_manifold(
        job.manifold, _option(job, "kmax"), _option(job, "degree", 2), _option(job, "mu0")
    )
    results = report.to_dict()
    extras = {
        "ranks": {
            "parameters": report.parameters.profile,
            "variables": report.variables.profile,
            "chains": report.covering.rank_profile,
        },
        "residuals": {
            "functional_equation_zero": report.dual_residual_zero,
            "associated_system_zero": report.system_residual_zero,
        },
        "dimensions": {"manifold": report.manifold.dimension},
    }
    lines = report.verdicts()
    if report.system is not None:
        lines.append(f"associated system of order {report.system.kappa}:")
        lines += [
            f"  {coord.label(report.system.space)} = {rhs.format()}"
            for coord, rhs in sorted(report.system.equations.items())
        ]
    if report.bound is not None:
        lines.append(f"jet order {report.bound[0]}, dimension bound {report.bound[1]}")
    return report.passed, results, extras, lines


def _bound(job: JobSpec) -> Outcome:
    n, m = _option(job, "n"), _option(job, "m")
    if n is None or m is None:
        raise DomainError("bound needs n and m")
    if _option(job, "theorem1", 0):
        kappa = _option(job, "kappa")
        if kappa is None:
            raise DomainError("bound --theorem1 needs kappa")
        value = theorem1_bound(n, m, kappa)
        return True, {"theorem1_bound": value}, {"dimensions": {"bound": value}}, [
            f"symmetry algebra dimension for n={n}, m={m}, kappa={kappa}: {value}"
        ]
    keys = ("p", "l0", "l0star", "mu0")
    missing = [k for k in keys if _option(job, k) is None]
    if missing:
        raise DomainError(f"bound needs {', '.join(missing)}")
    kappa0, value = jet_bound(n, m, *(job.options[k] for k in keys))
    return True, {"kappa0": kappa0, "bound": value}, {"dimensions": {"bound": value}}, [
        f"kappa0 = {kappa0}",
        f"bound = {value}",
    ]


HANDLERS: Dict[str, Callable[[JobSpec], Outcome]] = {
    "prolong": _prolong,
    "determine": _determine,
    "solve": _solve,
    "verify-closed-forms": _verify_closed_forms,
    "closure": _closure,
    "finite-check": _finite_check,
    "manifold-analyze": _manifold_analyze,
    "bound": _bound,
}


def run(job: JobSpec, digest: Optional[str] = None) -> JobResult:
    """Execute a job; the document has the same keys for every command"""
    command = default_command(job)
    digest = digest or input_digest(render_input(job))
    logger.info(f"🚀 Running {command}")
    ok, results, extras, lines = HANDLERS[command](job)
    document = {
        "command": command,
        "input_digest": digest,
        "status": "ok" if ok else "failed",
        "results": results,
        "residuals": extras.get("residuals"),
        "dimensions": extras.get("dimensions"),
        "generators": extras.get("generators"),
        "ranks": extras.get("ranks"),
    }
    logger.info(f"{'✅' if ok else '❌'} {command} finished: {document['status']}")
    return JobResult(command, ok, document, lines)
