import json
import os

import pytest

from dgcat.cli import main, write_fixture_documents
from dgcat import schema


@pytest.fixture(scope="module")
def fixture_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("docs")
    write_fixture_documents(str(d))
    return d


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_timing(text):
    rep = json.loads(text)
    rep.pop("timing_ms", None)
    return rep


def test_round_trip_byte_identical(fixture_dir):
    for name in sorted(os.listdir(fixture_dir)):
        path = fixture_dir / name
        text = path.read_text()
        kind, field, payload = schema.parse_document(text)
        if kind == "category":
            body = schema.category_to_json(payload)
        elif kind == "twisted-complex":
            cat, cs, ms, ks = payload
            body = schema.tc_bundle_to_json(cat, cs, ms, ks)
        elif kind == "sod-claim":
            cat, claim = payload
            body = schema.sod_claim_to_json(cat, claim)
        elif kind == "equiv-certificate":
            body = schema.equiv_cert_to_json(payload)
        elif kind == "ledger":
            body = schema.ledger_to_json(payload, field)
        elif kind == "functor":
            body = schema.functor_to_json(payload)
        elif kind == "gen-certificate":
            cat, cert = payload
            body = schema.gencert_to_json(cat, cert)
        else:
            continue
        assert schema.dumps(schema.document(kind, field, body)) == text, name


def test_validate_category_exit0(fixture_dir, capsys):
    code, out, _ = run_cli(capsys, "validate", str(fixture_dir / "kronecker.category.json"))
    assert code == 0
    rep = strip_timing(out)
    assert all(v["ok"] for v in rep["verdicts"])


def test_validate_broken_document_exit1(fixture_dir, tmp_path, capsys):
    text = (fixture_dir / "kronecker.category.json").read_text()
    doc = json.loads(text)
    # break d^2 = 0 by injecting a bogus differential on Hom(e1,e2)
    doc["body"]["homs"]["e1|e2"]["complex"]["dims"]["1"] = 2
    doc["body"]["homs"]["e1|e2"]["complex"]["dims"]["2"] = 1
    doc["body"]["homs"]["e1|e2"]["complex"]["diff"] = {
        "0": {"rows": 2, "cols": 2, "entries": [[0, 0, "1"], [1, 1, "1"]]},
        "1": {"rows": 1, "cols": 2, "entries": [[0, 0, "1"]]},
    }
    doc["body"]["homs"]["e1|e2"]["names"]["1"] = ["t0", "t1"]
    doc["body"]["homs"]["e1|e2"]["names"]["2"] = ["s0"]
    bad = tmp_path / "bad.category.json"
    bad.write_text(schema.dumps(doc))
    code, out, _ = run_cli(capsys, "validate", str(bad))
    assert code == 1
    rep = strip_timing(out)
    assert any("d_squared" in v["name"] for v in rep["verdicts"])


def test_validate_malformed_exit2(tmp_path, capsys):
    p = tmp_path / "garbage.json"
    p.write_text("{not json")
    code, out, err = run_cli(capsys, "validate", str(p))
    assert code == 2


def test_ext_kronecker(fixture_dir, capsys):
    code, out, _ = run_cli(capsys, "ext", str(fixture_dir / "kronecker.category.json"))
    assert code == 0
    rep = strip_timing(out)
    rows = rep["tables"]["ext"]
    assert rows[1][1] == '{"0": 1}' and rows[1][2] == '{"0": 2}'
    assert rows[2][1] == "{}"


def test_ext_unknown_object(fixture_dir, capsys):
    code, out, err = run_cli(capsys, "ext", str(fixture_dir / "kronecker.category.json"), "--objects", "bogus")
    assert code == 2


def test_check_sod_pass_fail(fixture_dir, capsys):
    code, out, _ = run_cli(capsys, "check-sod", str(fixture_dir / "kronecker.sod-claim.json"))
    assert code == 0
    code, out, _ = run_cli(capsys, "check-sod", str(fixture_dir / "kronecker_broken.sod-claim.json"))
    assert code == 1
    code, out, _ = run_cli(capsys, "check-sod", str(fixture_dir / "kronecker_squared.sod-claim.json"))
    assert code == 0


def test_ring_eq_and_measure(fixture_dir, capsys):
    ledger = str(fixture_dir / "motivic.ledger.json")
    code, out, _ = run_cli(capsys, "ring", ledger, "eq", "[P1]*[P1]", "4*[pt]")
    assert code == 0
    rep = strip_timing(out)
    assert rep["verdicts"][0]["detail"] == "equal"
    assert any("[PAPER]" in p for p in rep["provenance"])
    code, out, _ = run_cli(capsys, "ring", ledger, "eq", "[P1]", "3*[pt]")
    assert code == 1
    rep = strip_timing(out)
    assert rep["verdicts"][0]["detail"] == "unequal_within_bound"
    code, out, _ = run_cli(capsys, "ring", ledger, "measure")
    assert code == 0
    code, out, _ = run_cli(capsys, "ring", ledger, "invariants")
    assert code == 0


def test_ring_relate_writes_new_version(fixture_dir, tmp_path, capsys):
    ledger = str(fixture_dir / "motivic.ledger.json")
    out_path = str(tmp_path / "new.ledger.json")
    code, out, _ = run_cli(
        capsys,
        "ring", ledger, "relate",
        "--expr", "[BlP2pt] - 4*[pt]",
        "--provenance", "external-paper-fact",
        "--citation", "derived blowup class",
        "--out", out_path,
    )
    assert code == 0
    kind, field, led2 = schema.parse_document(open(out_path).read())
    from dgcat.ptring import ClassExpr

    assert led2.eq(ClassExpr.gen("BlP2pt"), ClassExpr.unit(4)) == "equal"


def test_cone_golden_and_reduce(fixture_dir, tmp_path, capsys):
    bundle = str(fixture_dir / "kronecker_ev.twisted-complex.json")
    code, out, _ = run_cli(capsys, "cone", bundle, "--morphism", "ev")
    assert code == 0
    rep = strip_timing(out)
    golden = os.path.join(os.path.dirname(__file__), "golden", "cone_ev.json")
    produced = json.dumps(rep["document"], sort_keys=True, separators=(",", ":")) + "\n"
    with open(golden) as fh:
        assert produced == fh.read()
    # reduce(cone_id) -> empty complex
    code, out, _ = run_cli(capsys, "reduce", bundle, "--complex", "cone_id_e1")
    assert code == 0
    rep = strip_timing(out)
    assert rep["document"]["body"]["complexes"]["reduced"]["terms"] == []


def test_determinism_modulo_timing(fixture_dir, capsys):
    ledger = str(fixture_dir / "motivic.ledger.json")
    _, out1, _ = run_cli(capsys, "ring", ledger, "measure")
    _, out2, _ = run_cli(capsys, "ring", ledger, "measure")
    assert strip_timing(out1) == strip_timing(out2)


def test_karoubi_command(fixture_dir, tmp_path, capsys):
    # build a document with an idempotent on e1 + e1
    from dgcat.fixtures import kronecker_category
    from dgcat import pretr

    k2 = kronecker_category()
    e1 = k2.obj("e1")
    x = pretr.direct_sum(pretr.embed(k2, e1), pretr.embed(k2, e1))
    e = pretr.TwistedMorphism(x, x, 0, {(0, 0): k2.identity(e1)})
    k = pretr.KaroubiObject(x, e, pretr.zero_morphism(x, x, -1))
    body = schema.tc_bundle_to_json(k2, idempotents={"proj": k})
    p = tmp_path / "karoubi.twisted-complex.json"
    p.write_text(schema.dumps(schema.document("twisted-complex", "Q", body)))
    code, out, _ = run_cli(capsys, "karoubi", str(p), "--a", "proj", "--degrees", "0..0")
    assert code == 0
    rep = strip_timing(out)
    assert rep["tables"]["karoubi_hom"][1] == [0, 1]


def test_check_qe_command(fixture_dir, capsys):
    code, out, _ = run_cli(capsys, "check-qe", str(fixture_dir / "kronecker_block_e1_point.equiv-certificate.json"))
    assert code == 0


def test_serre_command(capsys):
    code, out, _ = run_cli(capsys, "serre", "--fixture", "a2")
    assert code == 0
    code, out, _ = run_cli(capsys, "serre", "--fixture", "kronecker-identity")
    assert code == 1
    code, out, _ = run_cli(capsys, "serre", "--fixture", "point")
    assert code == 0


def test_tensor_command(fixture_dir, tmp_path, capsys):
    out_path = str(tmp_path / "t.category.json")
    code, out, _ = run_cli(
        capsys, "tensor", str(fixture_dir / "kronecker.category.json"), str(fixture_dir / "point.category.json"), "--out", out_path
    )
    assert code == 0
    kind, field, cat = schema.parse_document(open(out_path).read())
    assert len(cat.objects) == 2


def test_markdown_output(fixture_dir, capsys):
    code, out, _ = run_cli(capsys, "--output", "md", "check-sod", str(fixture_dir / "kronecker.sod-claim.json"))
    assert code == 0
    assert "PASS" in out


def test_validate_functor_and_gencert_documents(fixture_dir, capsys):
    code, out, _ = run_cli(capsys, "validate", str(fixture_dir / "kronecker_identity.functor.json"))
    assert code == 0
    code, out, _ = run_cli(capsys, "validate", str(fixture_dir / "kronecker_ev_cone.gen-certificate.json"))
    assert code == 0
    rep = strip_timing(out)
    assert rep["verdicts"][0]["detail"] == "layers=2"


def test_ring_fact_subcommand(fixture_dir, tmp_path, capsys):
    ledger = str(fixture_dir / "motivic.ledger.json")
    out_path = str(tmp_path / "facts.ledger.json")
    code, out, _ = run_cli(
        capsys,
        "ring", ledger, "fact",
        "--a", "P2", "--b", "P2",
        "--value", "9*[pt]",
        "--provenance", "external-paper-fact",
        "--citation", "Segre product model",
        "--out", out_path,
    )
    assert code == 0
    kind, field, led2 = schema.parse_document(open(out_path).read())
    from dgcat.ptring import ClassExpr

    assert led2.eq(ClassExpr.parse("[P2]*[P2]"), ClassExpr.unit(9)) == "equal"
    # conflicting fact is rejected with exit 1
    code, out, _ = run_cli(
        capsys,
        "ring", out_path, "fact",
        "--a", "P2", "--b", "P2",
        "--value", "8*[pt]",
        "--provenance", "external-paper-fact",
        "--citation", "wrong",
        "--out", str(tmp_path / "x.json"),
    )
    assert code == 1


def test_validate_ledger_document(fixture_dir, capsys):
    code, out, _ = run_cli(capsys, "validate", str(fixture_dir / "motivic.ledger.json"))
    assert code == 0


def test_check_sod_jobs_deterministic_cli(fixture_dir, capsys):
    path = str(fixture_dir / "kronecker_squared.sod-claim.json")
    _, out1, _ = run_cli(capsys, "--jobs", "1", "check-sod", path)
    _, out4, _ = run_cli(capsys, "--jobs", "4", "check-sod", path)
    assert strip_timing(out1) == strip_timing(out4)


def test_summand_step_serialization_roundtrip(tmp_path):
    from dgcat.fixtures import kronecker_category
    from dgcat import pretr, sodgen

    k2 = kronecker_category()
    e1 = k2.obj("e1")
    x = pretr.direct_sum(pretr.embed(k2, e1), pretr.embed(k2, e1))
    e = pretr.TwistedMorphism(x, x, 0, {(0, 0): k2.identity(e1)})
    fin = pretr.TwistedMorphism(x, pretr.embed(k2, e1), 0, {(0, 0): k2.identity(e1)})
    cert = sodgen.GenerationCertificate(
        (e1,),
        (sodgen.Leaf(e1, 0), sodgen.Leaf(e1, 0), sodgen.Sum((0, 1)), sodgen.Summand(2, e, pretr.zero_morphism(x, x, -1))),
        pretr.embed(k2, e1),
        fin,
    )
    assert sodgen.verify_generation(k2, cert).ok
    doc = schema.dumps(schema.document("gen-certificate", "Q", schema.gencert_to_json(k2, cert)))
    kind, field, payload = schema.parse_document(doc)
    cat2, cert2 = payload
    res = sodgen.verify_generation(cat2, cert2)
    assert res.ok and res.layer_count == 2
    assert schema.dumps(schema.document("gen-certificate", field, schema.gencert_to_json(cat2, cert2))) == doc


def test_random_category_schema_roundtrip():
    import random as _r
    import sys as _s, os as _o

    _s.path.insert(0, _o.path.dirname(__file__))
    from gens import random_category
    from dgcat.ptring import categories_structurally_equal

    rng = _r.Random(55)
    for _ in range(10):
        cat = random_category(rng)
        doc = schema.dumps(schema.document("category", cat.field, schema.category_to_json(cat)))
        kind, field, cat2 = schema.parse_document(doc)
        assert categories_structurally_equal(cat, cat2)
        assert schema.dumps(schema.document("category", field, schema.category_to_json(cat2))) == doc


def test_ring_relate_verified_sod_from_documents(fixture_dir, tmp_path, capsys):
    """Drive the fully verified pipeline from the CLI: register a fresh
    ledger relation from a shipped SOD claim document."""
    # start from a minimal ledger: pt + P1 registered, no relations
    from dgcat.fixtures import kronecker_category, point_category
    from dgcat.ptring import Ledger

    led = Ledger(degree_bound=2)
    led = led.register_generator("pt", point_category(), unit_alias=True)
    led = led.register_generator("P1", kronecker_category())
    base = tmp_path / "base.ledger.json"
    base.write_text(schema.dumps(schema.document("ledger", "Q", schema.ledger_to_json(led, None))))
    out_path = str(tmp_path / "with_relation.ledger.json")
    code, out, _ = run_cli(
        capsys,
        "ring", str(base), "relate",
        "--claim", str(fixture_dir / "kronecker.sod-claim.json"),
        "--label", "P1",
        "--out", out_path,
    )
    assert code == 0
    kind, field, led2 = schema.parse_document(open(out_path).read())
    from dgcat.ptring import ClassExpr

    assert led2.eq(ClassExpr.gen("P1"), ClassExpr.unit(2)) == "equal"
    # a broken claim is rejected with exit 1
    code, out, _ = run_cli(
        capsys,
        "ring", str(base), "relate",
        "--claim", str(fixture_dir / "kronecker_broken.sod-claim.json"),
        "--label", "P1",
        "--out", str(tmp_path / "never.json"),
    )
    assert code == 1
