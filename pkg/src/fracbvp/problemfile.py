"""JSON problem files.

A problem file is one JSON object::

    {
      "schema_version": 1,
      "problem": {
        "q": "3/2", "sigma": "1/3", "nu": "1/4", "xi": "3/5",
        "terms": [{"eta": "4/5", "alpha": 1, "beta": "1/3", "gamma": 3}, ...],
        "f": "expression in t and x"
      },
      "certificates": {
        "banach": {"L": "1/7"},                  # L optional: sampled if absent
        "boyd_wong": {"g": "expression in t"},
        "leray_schauder": {"p": "expression in t", "psi": "expression in u"}
      },
      "solver": {"n_nodes": 1025, "oversample": 4, "tol": 1e-9, "max_iter": 200}
    }

Numbers may be JSON numbers or strings; ``"313/105"`` style rationals are
read exactly before conversion to float.  Unknown keys are rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from fracbvp import exprlang
from fracbvp.exprlang import Expr, ExprError
from fracbvp.fracops import QuadratureConfig
from fracbvp.model import BoundaryTerm, ProblemError, ProblemSpec

__all__ = ["SCHEMA_VERSION", "ProblemFileError", "SolverSettings", "ProblemFile",
           "load_problem_file", "parse_problem_document", "parse_number"]

SCHEMA_VERSION = 1


class ProblemFileError(ValueError):
    """Invalid problem file; the message starts with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class SolverSettings:
    n_nodes: int = 1025
    oversample: int = 4
    tol: float = 1e-9
    max_iter: int = 200

    @property
    def quad(self) -> QuadratureConfig:
        return QuadratureConfig(self.n_nodes, self.oversample)


@dataclass(frozen=True)
class ProblemFile:
    schema_version: int
    problem: ProblemSpec
    banach: dict | None = None  # {"L": float | None}
    boyd_wong: dict | None = None  # {"g": Expr}
    leray_schauder: dict | None = None  # {"p": Expr, "psi": Expr}
    solver: SolverSettings = field(default_factory=SolverSettings)

    @property
    def has_certificates(self) -> bool:
        return any(b is not None for b in (self.banach, self.boyd_wong, self.leray_schauder))


def parse_number(value: Any, path: str) -> float:
    if isinstance(value, bool) or value is None:
        raise ProblemFileError(path, f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            raise ProblemFileError(path, f"not a number: {value!r}") from None
    raise ProblemFileError(path, f"expected a number, got {type(value).__name__}")


def _parse_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemFileError(path, f"expected an integer, got {value!r}")
    return value


def _object(value: Any, path: str, allowed: set, required: set = frozenset()) -> dict:
    if not isinstance(value, dict):
        raise ProblemFileError(path, "expected an object")
    unknown = set(value) - allowed
    if unknown:
        raise ProblemFileError(f"{path}.{sorted(unknown)[0]}" if path else sorted(unknown)[0],
                               "unknown field")
    missing = set(required) - set(value)
    if missing:
        name = sorted(missing)[0]
        raise ProblemFileError(f"{path}.{name}" if path else name, "missing required field")
    return value


def _expr(value: Any, path: str, variables) -> Expr:
    if not isinstance(value, str):
        raise ProblemFileError(path, "expected an expression string")
    try:
        return exprlang.parse(value, variables)
    except ExprError as exc:
        raise ProblemFileError(path, str(exc)) from None


def _problem(doc: Any) -> ProblemSpec:
    doc = _object(doc, "problem", {"q", "sigma", "nu", "xi", "terms", "f"},
                  {"q", "sigma", "nu", "xi", "terms", "f"})
    nums = {k: parse_number(doc[k], f"problem.{k}") for k in ("q", "sigma", "nu", "xi")}
    if not isinstance(doc["terms"], list) or not doc["terms"]:
        raise ProblemFileError("problem.terms", "expected a non-empty list")
    terms = []
    for i, raw in enumerate(doc["terms"]):
        path = f"problem.terms[{i}]"
        raw = _object(raw, path, {"eta", "alpha", "beta", "gamma"}, {"eta"})
        values = {k: parse_number(raw.get(k, 0), f"{path}.{k}")
                  for k in ("eta", "alpha", "beta", "gamma")}
        try:
            terms.append(BoundaryTerm(**values))
        except ProblemError as exc:
            raise ProblemFileError(f"{path}.{exc.field}", str(exc)) from None
    f = _expr(doc["f"], "problem.f", {"t", "x"})
    try:
        return ProblemSpec(nums["q"], nums["sigma"], nums["nu"], nums["xi"], tuple(terms), f)
    except ProblemError as exc:
        field_name = exc.field or ""
        if field_name.startswith("terms") or field_name in ("q", "sigma", "nu", "xi"):
            field_name = f"problem.{field_name}"
        raise ProblemFileError(field_name, str(exc)) from None


def parse_problem_document(doc: Any) -> ProblemFile:
    """Validate an already decoded JSON document."""
    doc = _object(doc, "", {"schema_version", "problem", "certificates", "solver"},
                  {"schema_version", "problem"})
    version = _parse_int(doc["schema_version"], "schema_version")
    if version != SCHEMA_VERSION:
        raise ProblemFileError("schema_version", f"unsupported version {version}")
    problem = _problem(doc["problem"])

    banach = boyd_wong = leray = None
    certs = _object(doc.get("certificates", {}), "certificates",
                    {"banach", "boyd_wong", "leray_schauder"})
    if "banach" in certs:
        block = _object(certs["banach"], "certificates.banach", {"L"})
        L = None
        if "L" in block:
            L = parse_number(block["L"], "certificates.banach.L")
            if not L > 0:
                raise ProblemFileError("certificates.banach.L", "must be positive")
        banach = {"L": L}
    if "boyd_wong" in certs:
        block = _object(certs["boyd_wong"], "certificates.boyd_wong", {"g"}, {"g"})
        boyd_wong = {"g": _expr(block["g"], "certificates.boyd_wong.g", {"t"})}
    if "leray_schauder" in certs:
        block = _object(certs["leray_schauder"], "certificates.leray_schauder",
                        {"p", "psi"}, {"p", "psi"})
        leray = {"p": _expr(block["p"], "certificates.leray_schauder.p", {"t"}),
                 "psi": _expr(block["psi"], "certificates.leray_schauder.psi", {"u"})}

    raw = _object(doc.get("solver", {}), "solver", {"n_nodes", "oversample", "tol", "max_iter"})
    defaults = SolverSettings()
    settings = SolverSettings(
        n_nodes=_parse_int(raw.get("n_nodes", defaults.n_nodes), "solver.n_nodes"),
        oversample=_parse_int(raw.get("oversample", defaults.oversample), "solver.oversample"),
        tol=parse_number(raw.get("tol", defaults.tol), "solver.tol"),
        max_iter=_parse_int(raw.get("max_iter", defaults.max_iter), "solver.max_iter"),
    )
    try:
        settings.quad
    except ValueError as exc:
        raise ProblemFileError("solver", str(exc)) from None
    if not settings.tol > 0:
        raise ProblemFileError("solver.tol", "must be positive")
    if settings.max_iter < 1:
        raise ProblemFileError("solver.max_iter", "must be >= 1")
    return ProblemFile(version, problem, banach, boyd_wong, leray, settings)


def load_problem_file(path) -> ProblemFile:
    """Read and validate a problem file from disk."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError("", f"cannot read {path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError("", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_problem_document(doc)
