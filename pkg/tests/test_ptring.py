import pytest

from dgcat.dgcore import tensor
from dgcat.fixtures import (
    broken_kronecker_sod_claim,
    kronecker_category,
    kronecker_sod_claim,
    motivic_ledger,
    point_category,
    tensor_object_order,
)
from dgcat.functors import check_quasi_equiv
from dgcat.ptring import (
    ClassExpr,
    Ledger,
    Provenance,
    ProvenanceError,
    SODProvenance,
    TensorProvenance,
    point_equivalence_certificate,
)
from dgcat.sodgen import exceptional_sod_claim


def test_class_expr_algebra_and_parse():
    e = ClassExpr.parse("2*[pt] + [P1]*[P1] - 3*[X]")
    assert e.terms == {(): 2, ("P1", "P1"): 1, ("X",): -3}
    assert ClassExpr.parse(e.format()) == e
    assert e.sub(e).is_zero()
    assert ClassExpr.gen("a").mul(ClassExpr.gen("b")).terms == {("a", "b"): 1}


def small_ledger():
    led = Ledger(degree_bound=4)
    pt = point_category()
    k2 = kronecker_category()
    led = led.register_generator("pt", pt, unit_alias=True)
    led = led.register_generator("P1", k2)
    claim = kronecker_sod_claim(k2)
    prov = Provenance(
        "verified-sod",
        payload=SODProvenance("P1", claim, (ClassExpr.unit(), ClassExpr.unit()), ("point", "point")),
    )
    return led.add_relation(ClassExpr.gen("P1").sub(ClassExpr.unit(2)), prov)


def test_verified_sod_relation_ingestion():
    led = small_ledger()
    assert led.eq(ClassExpr.gen("P1"), ClassExpr.unit(2)) == "equal"
    assert led.eq(ClassExpr.gen("P1"), ClassExpr.unit(3)) == "unequal_within_bound"


def test_broken_sod_rejected_at_ingestion():
    led = Ledger()
    k2 = kronecker_category()
    led = led.register_generator("pt", point_category(), unit_alias=True)
    led = led.register_generator("P1", k2)
    claim = broken_kronecker_sod_claim(k2)
    prov = Provenance(
        "verified-sod",
        payload=SODProvenance("P1", claim, (ClassExpr.unit(), ClassExpr.unit()), ("point", "point")),
    )
    with pytest.raises(ProvenanceError):
        led.add_relation(ClassExpr.gen("P1").sub(ClassExpr.unit(2)), prov)


def test_paper_fact_requires_citation_and_is_tagged():
    led = Ledger().register_generator("E").register_generator("Z")
    with pytest.raises(ProvenanceError):
        led.add_relation(ClassExpr.gen("E").sub(ClassExpr.gen("Z").scale(3)), Provenance("external-paper-fact"))
    led = led.add_relation(
        ClassExpr.gen("E").sub(ClassExpr.gen("Z").scale(3)),
        Provenance("external-paper-fact", citation="projective bundle formula"),
    )
    rep = led.eq_report(ClassExpr.gen("E"), ClassExpr.gen("Z").scale(3))
    assert rep["verdict"] == "equal"
    assert rep["relations"][0]["tag"] == "[PAPER]"


def test_eq_missing_fact_unknown():
    led = small_ledger()
    p1sq = ClassExpr.gen("P1").mul(ClassExpr.gen("P1"))
    assert led.eq(p1sq, ClassExpr.unit(4)) == "unknown"
    assert led.eq(p1sq, p1sq) == "equal"  # exact-zero difference stays equal


def test_eq_with_product_fact():
    led = small_ledger()
    k2 = kronecker_category()
    t = tensor(k2, k2)
    led = led.register_generator("P1xP1", t)
    claim = exceptional_sod_claim(t, tensor_object_order(t))
    led = led.add_relation(
        ClassExpr.gen("P1xP1").sub(ClassExpr.unit(4)),
        Provenance("verified-sod", payload=SODProvenance("P1xP1", claim, tuple(ClassExpr.unit() for _ in range(4)), tuple("point" for _ in range(4)))),
    )
    led = led.add_product_fact("P1", "P1", ClassExpr.gen("P1xP1"), Provenance("verified-tensor", payload=TensorProvenance("generator")))
    assert led.eq(ClassExpr.gen("P1").mul(ClassExpr.gen("P1")), ClassExpr.unit(4)) == "equal"


def test_unit_law_facts_automatic():
    led = small_ledger()
    # [pt] * x = x needs no fact table entry
    assert led.eq(ClassExpr.parse("[pt]*[P1]"), ClassExpr.gen("P1")) == "equal"


def test_conflicting_fact_rejected():
    led = small_ledger()
    led2 = led.register_generator("A").register_generator("B")
    led2 = led2.add_product_fact("A", "B", ClassExpr.unit(1), Provenance("external-paper-fact", citation="x"))
    with pytest.raises(ProvenanceError):
        led2.add_product_fact("A", "B", ClassExpr.unit(2), Provenance("external-paper-fact", citation="y"))
    # re-adding a provably equal fact is accepted (idempotent)
    led3 = led2.add_product_fact("B", "A", ClassExpr.unit(1), Provenance("external-paper-fact", citation="x"))
    assert led3.version > led2.version


def test_group_invariants_examples():
    led = Ledger(degree_bound=1).register_generator("g")
    assert led.group_invariants() == (2, [])  # unit monomial + g
    led2 = small_ledger()
    led2.degree_bound = 1
    assert led2.group_invariants() == (1, [])
    led3 = Ledger(degree_bound=1).register_generator("g")
    led3 = led3.add_relation(ClassExpr.gen("g").scale(2), Provenance("external-paper-fact", citation="forced"))
    rank, torsion = led3.group_invariants()
    assert rank == 1 and torsion == [2]


def test_motivic_ledger_measure():
    led = motivic_ledger()
    rep = led.derive_measure_check()
    assert rep["pass"], rep
    assert set(rep["checks"].values()) == {"equal"}
    # dataset missing a product fact -> unknown, reported
    led2 = motivic_ledger()
    led2.facts = {k: v for k, v in led2.facts.items() if k != ("BlP2pt", "P1")}
    led2._sat_cache = None
    rep2 = led2.derive_measure_check()
    assert not rep2["pass"]
    assert rep2["checks"]["BlP2pt"] == "unknown"


def test_eq_congruence_on_motivic_ledger():
    led = motivic_ledger()
    a = ClassExpr.gen("P1")
    b = ClassExpr.unit(2)
    c = ClassExpr.gen("P2")
    d = ClassExpr.unit(3)
    assert led.eq(a, b) == led.eq(c, d) == "equal"
    assert led.eq(a.add(c), b.add(d)) == "equal"
    assert led.eq(a.mul(c), b.mul(d)) in ("equal", "unknown")
    assert led.eq(a.mul(c), b.mul(d)) == "equal"  # fact (P1,P2) registered


def test_eq_commutative():
    led = motivic_ledger()
    ab = ClassExpr.parse("[P1]*[P2]")
    ba = ClassExpr.parse("[P2]*[P1]")
    assert led.eq(ab, ba) == "equal"


def test_block_point_equivalences():
    k2 = kronecker_category()
    pt = point_category()
    for label in ("e1", "e2"):
        cert = point_equivalence_certificate(k2, k2.obj(label), pt)
        assert check_quasi_equiv(cert).ok


def test_product_admissibility_semantic_check():
    """The Kronecker SOD tensored with the point category passes as an SOD
    claim on K2 (x) pt -- the product-admissibility obligations, run not
    assumed."""
    from dgcat.sodgen import check_sod

    k2 = kronecker_category()
    pt = point_category()
    t = tensor(k2, pt)
    claim = exceptional_sod_claim(t, tensor_object_order(t))
    assert check_sod(t, claim).ok


def test_beta_report_and_gamma_flavor():
    led = motivic_ledger()
    assert led.flavor == "Gamma"
    rep = led.beta_report()
    assert rep["from"] == "Gamma" and rep["to"] == "PT"
    with pytest.raises(ValueError):
        led.register_generator("weird", geometric=False)


def test_group_invariants_empty_ledger_rank_zero():
    assert Ledger().group_invariants() == (0, [])


def test_degenerate_category_is_legal_zero_class():
    from dgcat.dgcore import from_quiver
    from dgcat.exactlin import QQ

    empty_cat = from_quiver(QQ, [], [])
    assert empty_cat.validate() == []
    assert len(empty_cat.objects) == 0
    # the zero class is the empty expression
    assert ClassExpr().is_zero()


def test_motivic_pipeline_over_fp():
    """The whole verified pipeline also runs over F_101."""
    from dgcat.exactlin import GF
    from dgcat.fixtures import kronecker_category as kc, kronecker_sod_claim as ksc, motivic_ledger as ml
    from dgcat.sodgen import check_sod as cs

    f = GF(101)
    cat = kc(f)
    assert cs(cat, ksc(cat)).ok
    led = ml(f)
    rep = led.derive_measure_check()
    assert rep["pass"]
