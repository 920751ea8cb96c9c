import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuntz_lab import fixtures
from cuntz_lab.cli import (
    EXIT,
    builtin_documents,
    cu_document,
    descriptor_from_json,
    descriptor_to_json,
    diagram_document,
    load_document,
    main,
    parse_descriptor,
    serialize,
)
from cuntz_lab.errors import SchemaError, ValidationError

DESCRIPTORS = (fixtures.finite_descriptors() + fixtures.kpure_fixtures()
               + [fixtures.elliott_thomsen_E(), fixtures.wedge_descriptor()])


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("fixtures")
    assert main(["fixtures", "--out", str(out)]) == 0
    return out


def write(tmp_path, name, doc):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else serialize(doc))
    return str(path)


def run_json(capsys, argv):
    code = main(argv + ["--json"])
    return code, json.loads(capsys.readouterr().out)


# -- serialization -----------------------------------------------------------------

@pytest.mark.parametrize("d", DESCRIPTORS, ids=lambda d: d.name)
def test_descriptor_round_trip(d):
    text = serialize(descriptor_to_json(d))
    again = serialize(descriptor_to_json(descriptor_from_json(json.loads(text))))
    assert again == text


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_cu_document_round_trip(tmp_path_factory, seed):
    S = fixtures.random_finite_cu(random.Random(seed))
    path = tmp_path_factory.mktemp("cu") / "s.json"
    path.write_text(serialize(cu_document("s", S)))
    kind, (name, T) = load_document(path)
    assert kind == "cu" and name == "s"
    assert serialize(cu_document("s", T)) == path.read_text()


def test_builtin_documents_load(fixture_dir):
    names = [name for name, _ in builtin_documents()]
    assert sorted(p.name for p in fixture_dir.iterdir()) == sorted(names)
    for name, doc in builtin_documents():
        kind, _ = load_document(fixture_dir / name)
        assert kind == doc["kind"]
        assert (fixture_dir / name).read_text() == serialize(doc)


# -- exit codes and reports ------------------------------------------------------------

def test_axioms_reports_weak_cancellation_witness(fixture_dir, capsys):
    code, report = run_json(capsys, ["axioms", str(fixture_dir / "e_2.json")])
    assert code == EXIT["fail"]
    assert report["status"] == "fail"
    assert report["witnesses"]["weak_cancellation"] == [2, 1, 2]


def test_axioms_pass_on_extended_integers(fixture_dir):
    assert main(["axioms", str(fixture_dir / "z_infty.json")]) == 0


def test_validate_and_invariants(fixture_dir, capsys):
    E = str(fixture_dir / "elliott_thomsen_E.json")
    assert main(["validate", E]) == 0
    capsys.readouterr()
    code, report = run_json(capsys, ["invariants", E])
    assert code == EXIT["fail"]
    assert report["witnesses"]
    assert main(["invariants", str(fixture_dir / "kpure_rr0_sample.json")]) == 0


def test_recover(fixture_dir, capsys):
    code, report = run_json(capsys, ["recover", str(fixture_dir / "z_infty.json")])
    assert code == EXIT["fail"]
    assert main(["recover", str(fixture_dir / "kpure_rr0_sample.json")]) == 0


def test_compare(fixture_dir):
    E = str(fixture_dir / "elliott_thomsen_E.json")
    assert main(["compare", E, E]) == 0
    assert main(["compare", str(fixture_dir / "e_2.json"), str(fixture_dir / "e_3.json")]) == 1
    assert main(["compare", str(fixture_dir / "circle_z2.json"),
                 str(fixture_dir / "circle_z2_alt.json")]) == 0


def test_limit_builtin(fixture_dir, capsys):
    code, report = run_json(capsys, ["limit", str(fixture_dir / "coordinate_diagram.json")])
    assert code == 0 and report["status"] == "pass"


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10**6))
def test_limit_on_random_cone(tmp_path_factory, seed):
    rng = random.Random(seed)
    D = fixtures.random_diagram(rng)
    cone = fixtures.random_cone(D, rng)
    path = tmp_path_factory.mktemp("diag") / "d.json"
    path.write_text(serialize(diagram_document("d", D, cone=cone)))
    assert main(["limit", str(path)]) == 0


def test_out_writes_only_the_report(fixture_dir, tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["axioms", str(fixture_dir / "e_3.json"), "--json", "--out", str(out)]) == 1
    assert capsys.readouterr().out == ""
    report = json.loads(out.read_text())
    assert report["command"] == "axioms"
    assert set(report) == {"command", "status", "witnesses", "details", "timings"}


# -- input errors ---------------------------------------------------------------------

def test_empty_file(tmp_path):
    path = write(tmp_path, "empty.json", "")
    assert main(["validate", path]) == EXIT["error"]
    with pytest.raises(SchemaError, match="empty"):
        load_document(path)


def test_malformed_json_reports_position(tmp_path):
    path = write(tmp_path, "bad.json", '{"kind": "cu",\n "name": }')
    with pytest.raises(SchemaError, match="line 2"):
        load_document(path)
    assert main(["axioms", path]) == EXIT["error"]


def test_schema_violation(tmp_path):
    doc = descriptor_to_json(fixtures.block_descriptor(2))
    doc["format_version"] = 2
    assert main(["validate", write(tmp_path, "v2.json", doc)]) == EXIT["error"]
    doc = descriptor_to_json(fixtures.block_descriptor(2))
    doc["ideals"][0]["name"] = 7
    with pytest.raises(SchemaError, match="ideals"):
        load_document(write(tmp_path, "bad.json", doc))


def test_missing_file(tmp_path):
    assert main(["axioms", str(tmp_path / "nope.json")]) == EXIT["error"]


def test_broken_functoriality(tmp_path):
    path = write(tmp_path, "broken.json", descriptor_to_json(fixtures.functoriality_breaker()))
    with pytest.raises(ValidationError) as err:
        parse_descriptor(path)
    assert str(err.value).startswith("functoriality")
    assert "{0,1,2}" in str(err.value)
    assert main(["invariants", path]) == EXIT["error"]
    assert main(["validate", path]) == EXIT["fail"]
