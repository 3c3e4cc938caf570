import json
from pathlib import Path

import pytest

from fracbvp.problemfile import (
    ProblemFileError,
    load_problem_file,
    parse_number,
    parse_problem_document,
)

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"


def base_doc(**overrides):
    doc = {
        "schema_version": 1,
        "problem": {
            "q": "3/2", "sigma": "1/3", "nu": "1/4", "xi": "3/5",
            "terms": [{"eta": "4/5", "alpha": 1, "beta": "1/3", "gamma": 3},
                      {"eta": "6/7", "alpha": "1/2", "beta": "2/3", "gamma": "1/7"}],
            "f": "sin(x)/7",
        },
    }
    doc.update(overrides)
    return doc


@pytest.mark.parametrize("name", ["ex41.json", "ex42.json", "ex43.json", "linear.json"])
def test_shipped_files_load(name):
    pf = load_problem_file(PROBLEMS / name)
    assert pf.schema_version == 1
    assert pf.has_certificates


def test_rationals_are_exact():
    pf = parse_problem_document(base_doc())
    assert pf.problem.terms[1].gamma == 1 / 7
    assert pf.problem.q == 1.5
    assert parse_number("313/105", "x") == 313 / 105
    assert parse_number(" -2 ", "x") == -2.0
    assert parse_number(0.25, "x") == 0.25


@pytest.mark.parametrize("value", [True, None, "1/0", "abc", [1]])
def test_bad_numbers(value):
    with pytest.raises(ProblemFileError):
        parse_number(value, "p")


def test_defaults():
    pf = parse_problem_document(base_doc())
    assert pf.banach is None and pf.boyd_wong is None and pf.leray_schauder is None
    assert not pf.has_certificates
    assert pf.solver.n_nodes == 1025 and pf.solver.quad.oversample == 4


def test_banach_without_L():
    pf = parse_problem_document(base_doc(certificates={"banach": {}}))
    assert pf.banach == {"L": None}


def mutate(path, value):
    doc = base_doc()
    node = doc
    *parents, last = path
    for key in parents:
        node = node[key]
    node[last] = value
    return doc


@pytest.mark.parametrize("doc, field", [
    (base_doc(schema_version=2), "schema_version"),
    (base_doc(schema_version="1"), "schema_version"),
    (base_doc(extra=1), "extra"),
    (mutate(["problem", "terms", 0, "alfa"], 1), "problem.terms[0].alfa"),
    (mutate(["problem", "terms", 1, "eta"], "4/5"), "problem.terms[1].eta"),
    (mutate(["problem", "terms", 0, "eta"], 1.5), "problem.terms[0].eta"),
    (mutate(["problem", "q"], 2.5), "problem.q"),
    (mutate(["problem", "xi"], "9/10"), "problem.xi"),
    (mutate(["problem", "f"], "sin(y)"), "problem.f"),
    (mutate(["problem", "f"], 3), "problem.f"),
    (mutate(["problem", "terms"], []), "problem.terms"),
    (base_doc(certificates={"banach": {"L": 0}}), "certificates.banach.L"),
    (base_doc(certificates={"boyd_wong": {}}), "certificates.boyd_wong.g"),
    (base_doc(certificates={"boyd_wong": {"g": "x"}}), "certificates.boyd_wong.g"),
    (base_doc(certificates={"leray_schauder": {"p": "1", "psi": "t"}}),
     "certificates.leray_schauder.psi"),
    (base_doc(certificates={"newton": {}}), "certificates.newton"),
    (base_doc(solver={"n_nodes": 16}), "solver"),
    (base_doc(solver={"tol": -1}), "solver.tol"),
    (base_doc(solver={"max_iter": 1.5}), "solver.max_iter"),
])
def test_field_path_errors(doc, field):
    with pytest.raises(ProblemFileError) as info:
        parse_problem_document(doc)
    assert info.value.path == field
    assert str(info.value).startswith(field)


def test_delta2_zero_named():
    doc = mutate(["problem", "terms"], [{"eta": 0.7, "beta": 0, "gamma": 1}])
    with pytest.raises(ProblemFileError) as info:
        parse_problem_document(doc)
    assert info.value.path == "Delta2"


def test_load_errors(tmp_path):
    with pytest.raises(ProblemFileError):
        load_problem_file(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(ProblemFileError) as info:
        load_problem_file(bad)
    assert "line 1" in str(info.value)
    good = tmp_path / "good.json"
    good.write_text(json.dumps(base_doc()), encoding="utf-8")
    assert load_problem_file(good).problem.xi == 0.6
