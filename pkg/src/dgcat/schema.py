"""Document schema: canonical JSON serialization for categories, functors,
twisted complexes, certificates, claims, and ledgers.

Exact scalars are encoded as strings ("3/7", "5 mod 101").  Serialization is
canonical (sorted keys, sorted sparse entries, fixed separators), so
parse -> serialize round-trips byte-identically.  Ledgers are parsed by
replaying registrations, relations, and facts, which re-runs all provenance
verification on ingestion.
"""

from __future__ import annotations

import json

from .dgcore import DGCategory, Hom, Morphism, ObjId, tensor
from .exactlin import ChainComplex, Matrix, field_from_spec
from .functors import DGFunctor, EquivCertificate
from .pretr import KaroubiObject, Term, TwistedComplex, TwistedMorphism
from .ptring import ClassExpr, Ledger, Provenance, SODProvenance, TensorProvenance
from .sodgen import ConeStep, CutWitness, GenerationCertificate, Leaf, SODClaim, Sum, Summand

SCHEMA_VERSION = 1

KINDS = ("category", "functor", "twisted-complex", "gen-certificate", "sod-claim", "equiv-certificate", "ledger")


class DocumentError(Exception):
    pass


def dumps(doc):
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"


def loads(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"not valid JSON: {e}") from e
    if not isinstance(doc, dict) or "kind" not in doc or "body" not in doc or "field" not in doc:
        raise DocumentError("document must have kind, field, body")
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DocumentError(f"unsupported schema_version {doc.get('schema_version')!r}")
    if doc["kind"] not in KINDS:
        raise DocumentError(f"unknown document kind {doc['kind']!r}")
    return doc


def document(kind, field, body):
    return {"schema_version": SCHEMA_VERSION, "kind": kind, "field": field.name if hasattr(field, "name") else field, "body": body}


# -- scalars / matrices / complexes -------------------------------------------


def matrix_to_json(m):
    return {
        "rows": m.rows,
        "cols": m.cols,
        "entries": [[i, j, m.field.format(v)] for (i, j), v in sorted(m.entries.items())],
    }


def matrix_from_json(field, data):
    ent = {}
    for i, j, s in data["entries"]:
        ent[(i, j)] = field.parse(s)
    return Matrix(field, data["rows"], data["cols"], ent)


def complex_to_json(c):
    return {
        "dims": {str(n): d for n, d in sorted(c.dims.items())},
        "diff": {str(n): matrix_to_json(m) for n, m in sorted(c.diff.items())},
    }


def complex_from_json(field, data):
    dims = {int(n): d for n, d in data["dims"].items()}
    diff = {int(n): matrix_from_json(field, m) for n, m in data["diff"].items()}
    return ChainComplex(field, dims, diff)


# -- categories ----------------------------------------------------------------


def _coords_to_json(field, coords):
    return {str(i): field.format(v) for i, v in sorted(coords.items())}


def _coords_from_json(field, data):
    return {int(i): field.parse(s) for i, s in data.items()}


def category_to_json(cat):
    body = {
        "name": cat.name,
        "objects": [o.label for o in cat.objects],
        "homs": {},
        "comp": {},
        "ids": {},
    }
    for (a, b), h in sorted(cat.homs.items(), key=lambda kv: (kv[0][0].index, kv[0][1].index)):
        body["homs"][f"{a.label}|{b.label}"] = {
            "complex": complex_to_json(h.complex),
            "names": {str(n): list(names) for n, names in sorted(h.names.items())},
        }
    for (a, b, c), table in sorted(cat.comp.items(), key=lambda kv: (kv[0][0].index, kv[0][1].index, kv[0][2].index)):
        rows = []
        for (p, i, q, j), cons in sorted(table.items()):
            rows.append([p, i, q, j, _coords_to_json(cat.field, cons)])
        body["comp"][f"{a.label}|{b.label}|{c.label}"] = rows
    for o, m in sorted(cat.ids.items(), key=lambda kv: kv[0].index):
        body["ids"][o.label] = {"degree": m.degree, "coords": _coords_to_json(cat.field, m.coords)}
    return body


def category_from_json(field, body):
    objects = tuple(ObjId(lbl, i) for i, lbl in enumerate(body["objects"]))
    by_label = {o.label: o for o in objects}
    homs = {}
    for key, data in body["homs"].items():
        a, b = key.split("|")
        names = {int(n): tuple(v) for n, v in data["names"].items()}
        homs[(by_label[a], by_label[b])] = Hom(complex_from_json(field, data["complex"]), names)
    comp = {}
    for key, rows in body["comp"].items():
        a, b, c = key.split("|")
        table = {}
        for p, i, q, j, cons in rows:
            table[(p, i, q, j)] = _coords_from_json(field, cons)
        comp[(by_label[a], by_label[b], by_label[c])] = table
    ids = {}
    for lbl, data in body["ids"].items():
        o = by_label[lbl]
        ids[o] = Morphism(o, o, data["degree"], _coords_from_json(field, data["coords"]))
    return DGCategory(field, objects, homs, comp, ids, name=body.get("name", ""))


# -- twisted complexes ----------------------------------------------------------


def tc_to_json(x):
    return {
        "terms": [[t.obj.label, t.shift] for t in x.terms],
        "q": [
            [i, j, {"degree": m.degree, "coords": _coords_to_json(x.cat.field, m.coords)}]
            for (i, j), m in sorted(x.q.items())
        ],
    }


def tc_from_json(cat, data):
    terms = [Term(cat.obj(lbl), s) for lbl, s in data["terms"]]
    q = {}
    for i, j, m in data["q"]:
        src = terms[j].obj
        dst = terms[i].obj
        q[(i, j)] = Morphism(src, dst, m["degree"], _coords_from_json(cat.field, m["coords"]))
    return TwistedComplex(cat, terms, q)


def tm_to_json(f):
    return {
        "src": tc_to_json(f.src),
        "dst": tc_to_json(f.dst),
        "degree": f.degree,
        "entries": [
            [i, j, {"degree": m.degree, "coords": _coords_to_json(f.src.cat.field, m.coords)}]
            for (i, j), m in sorted(f.entries.items())
        ],
    }


def tm_from_json(cat, data):
    src = tc_from_json(cat, data["src"])
    dst = tc_from_json(cat, data["dst"])
    entries = {}
    for i, j, m in data["entries"]:
        entries[(i, j)] = Morphism(
            src.terms[j].obj, dst.terms[i].obj, m["degree"], _coords_from_json(cat.field, m["coords"])
        )
    return TwistedMorphism(src, dst, data["degree"], entries)


def tc_bundle_to_json(cat, complexes=None, morphisms=None, idempotents=None):
    """The twisted-complex document body: a category with named complexes,
    morphisms, and idempotent witnesses."""
    body = {"category": category_to_json(cat), "complexes": {}, "morphisms": {}, "idempotents": {}}
    for name, x in (complexes or {}).items():
        body["complexes"][name] = tc_to_json(x)
    for name, f in (morphisms or {}).items():
        body["morphisms"][name] = tm_to_json(f)
    for name, k in (idempotents or {}).items():
        body["idempotents"][name] = {
            "carrier": tc_to_json(k.carrier),
            "e": tm_to_json(k.e),
            "h": tm_to_json(k.h),
        }
    return body


def tc_bundle_from_json(field, body):
    cat = category_from_json(field, body["category"])
    complexes = {name: tc_from_json(cat, d) for name, d in body.get("complexes", {}).items()}
    morphisms = {name: tm_from_json(cat, d) for name, d in body.get("morphisms", {}).items()}
    idempotents = {}
    for name, d in body.get("idempotents", {}).items():
        idempotents[name] = KaroubiObject(
            tc_from_json(cat, d["carrier"]), tm_from_json(cat, d["e"]), tm_from_json(cat, d["h"])
        )
    return cat, complexes, morphisms, idempotents


# -- functors and equivalence certificates ---------------------------------------


def functor_to_json(fun):
    return {
        "name": fun.name,
        "src_category": category_to_json(fun.src),
        "dst_category": category_to_json(fun.dst),
        "obj_map": {a.label: b.label for a, b in sorted(fun.obj_map.items(), key=lambda kv: kv[0].index)},
        "mor_maps": {
            f"{a.label}|{b.label}": {str(n): matrix_to_json(m) for n, m in sorted(per.items())}
            for (a, b), per in sorted(fun.mor_maps.items(), key=lambda kv: (kv[0][0].index, kv[0][1].index))
        },
    }


def functor_from_json(field, body):
    src = category_from_json(field, body["src_category"])
    dst = category_from_json(field, body["dst_category"])
    obj_map = {src.obj(a): dst.obj(b) for a, b in body["obj_map"].items()}
    mor_maps = {}
    for key, per in body["mor_maps"].items():
        a, b = key.split("|")
        mor_maps[(src.obj(a), src.obj(b))] = {int(n): matrix_from_json(field, m) for n, m in per.items()}
    return DGFunctor(src, dst, obj_map, mor_maps, name=body.get("name", ""))


def equiv_cert_to_json(cert):
    body = functor_to_json(cert.functor)
    body["witnesses"] = {
        o.label: {"complex": tc_to_json(tc), "morphism": tm_to_json(f)}
        for o, (tc, f) in sorted(cert.witnesses.items(), key=lambda kv: kv[0].index)
    }
    return body


def equiv_cert_from_json(field, body):
    fun = functor_from_json(field, body)
    witnesses = {}
    for lbl, data in body["witnesses"].items():
        o = fun.dst.obj(lbl)
        witnesses[o] = (tc_from_json(fun.dst, data["complex"]), tm_from_json(fun.dst, data["morphism"]))
    return EquivCertificate(fun, witnesses)


# -- generation certificates and SOD claims ---------------------------------------


def _step_to_json(cat, step):
    if isinstance(step, Leaf):
        return {"kind": "leaf", "gen": step.gen.label, "shift": step.shift}
    if isinstance(step, Sum):
        return {"kind": "sum", "refs": list(step.refs)}
    if isinstance(step, ConeStep):
        return {"kind": "cone", "c_ref": step.c_ref, "d_ref": step.d_ref, "morphism": tm_to_json(step.morphism)}
    if isinstance(step, Summand):
        return {"kind": "summand", "ref": step.ref, "e": tm_to_json(step.e), "h": tm_to_json(step.h)}
    raise DocumentError(f"unknown step {step!r}")


def _step_from_json(cat, data):
    kind = data["kind"]
    if kind == "leaf":
        return Leaf(cat.obj(data["gen"]), data["shift"])
    if kind == "sum":
        return Sum(tuple(data["refs"]))
    if kind == "cone":
        return ConeStep(data["c_ref"], data["d_ref"], tm_from_json(cat, data["morphism"]))
    if kind == "summand":
        return Summand(data["ref"], tm_from_json(cat, data["e"]), tm_from_json(cat, data["h"]))
    raise DocumentError(f"unknown step kind {kind!r}")


def gencert_to_json(cat, cert, with_category=True):
    body = {
        "generators": [g.label for g in cert.generators],
        "steps": [_step_to_json(cat, s) for s in cert.steps],
        "target": tc_to_json(cert.target),
        "final_iso": tm_to_json(cert.final_iso) if cert.final_iso is not None else None,
    }
    if with_category:
        body["category"] = category_to_json(cat)
    return body


def gencert_from_json(cat, body):
    return GenerationCertificate(
        tuple(cat.obj(lbl) for lbl in body["generators"]),
        tuple(_step_from_json(cat, s) for s in body["steps"]),
        tc_from_json(cat, body["target"]),
        tm_from_json(cat, body["final_iso"]) if body["final_iso"] is not None else None,
    )


def sod_claim_to_json(cat, claim, with_category=True):
    body = {
        "ambient_generators": [g.label for g in claim.ambient_generators],
        "blocks": [[g.label for g in b] for b in claim.blocks],
        "admissibility": [
            {
                "generator": lbl,
                "cut": cut,
                "u": tm_to_json(w.u),
                "late_cert": gencert_to_json(cat, w.late_cert, with_category=False),
                "early_cert": gencert_to_json(cat, w.early_cert, with_category=False),
            }
            for (lbl, cut), w in sorted(claim.admissibility.items())
        ],
    }
    if with_category:
        body["category"] = category_to_json(cat)
    return body


def sod_claim_from_json(cat, body):
    admissibility = {}
    for item in body["admissibility"]:
        admissibility[(item["generator"], item["cut"])] = CutWitness(
            tm_from_json(cat, item["u"]),
            gencert_from_json(cat, item["late_cert"]),
            gencert_from_json(cat, item["early_cert"]),
        )
    return SODClaim(
        tuple(cat.obj(lbl) for lbl in body["ambient_generators"]),
        tuple(tuple(cat.obj(lbl) for lbl in b) for b in body["blocks"]),
        admissibility,
    )


# -- ledgers ---------------------------------------------------------------------


def _provenance_to_json(ledger, prov):
    out = {"kind": prov.kind, "citation": prov.citation}
    p = prov.payload
    if isinstance(p, SODProvenance):
        info = ledger.generators[p.label]
        out["payload"] = {
            "type": "sod",
            "label": p.label,
            "claim": sod_claim_to_json(info.payload, p.claim, with_category=False),
            "block_values": [v.format() for v in p.block_values],
            "block_idents": [list(i) if isinstance(i, tuple) else i for i in p.block_idents],
        }
    elif isinstance(p, TensorProvenance):
        out["payload"] = {"type": "tensor", "mode": p.mode, "product_kind": p.product_kind}
        if p.claim is not None:
            from .ptring import claim_category

            out["payload"]["claim"] = sod_claim_to_json(claim_category(p.claim), p.claim, with_category=False)
    elif p is None:
        out["payload"] = None
    else:
        raise DocumentError(f"unserializable provenance payload {p!r}")
    return out


def _provenance_from_json(generators, pair_or_label, data):
    kind = data["kind"]
    payload = data.get("payload")
    if payload is None:
        return Provenance(kind, data.get("citation", ""))
    if payload["type"] == "sod":
        cat = generators[payload["label"]].payload
        claim = sod_claim_from_json(cat, payload["claim"])
        p = SODProvenance(
            payload["label"],
            claim,
            tuple(ClassExpr.parse(v) for v in payload["block_values"]),
            tuple(tuple(i) if isinstance(i, list) else i for i in payload["block_idents"]),
        )
        return Provenance(kind, data.get("citation", ""), p)
    if payload["type"] == "tensor":
        claim = None
        if "claim" in payload:
            a, b = pair_or_label
            t = tensor(generators[a].payload, generators[b].payload)
            claim = sod_claim_from_json(t, payload["claim"])
        return Provenance(kind, data.get("citation", ""), TensorProvenance(payload["mode"], claim, payload.get("product_kind", "bullet")))
    raise DocumentError(f"unknown provenance payload type {payload['type']!r}")


def ledger_to_json(ledger, field):
    body = {
        "flavor": ledger.flavor,
        "degree_bound": ledger.degree_bound,
        "generators": [
            {
                "label": info.label,
                "unit_alias": info.unit_alias,
                "geometric": info.geometric,
                "category": category_to_json(info.payload) if info.payload is not None else None,
            }
            for info in (ledger.generators[lbl] for lbl in sorted(ledger.generators))
        ],
        "relations": [
            {"expr": r.expr.format(), "provenance": _provenance_to_json(ledger, r.provenance)} for r in ledger.relations
        ],
        "facts": [
            {"pair": list(f.pair), "value": f.value.format(), "provenance": _provenance_to_json(ledger, f.provenance)}
            for f in (ledger.facts[k] for k in sorted(ledger.facts))
        ],
    }
    return body


def ledger_from_json(field, body, verify=True):
    led = Ledger(degree_bound=body["degree_bound"], flavor=body["flavor"])
    for g in body["generators"]:
        payload = category_from_json(field, g["category"]) if g["category"] is not None else None
        led = led.register_generator(g["label"], payload, unit_alias=g["unit_alias"], geometric=g["geometric"])
    for r in body["relations"]:
        prov = _provenance_from_json(led.generators, None, r["provenance"])
        led = led.add_relation(ClassExpr.parse(r["expr"]), prov)
    for f in body["facts"]:
        pair = tuple(f["pair"])
        prov = _provenance_from_json(led.generators, pair, f["provenance"])
        led = led.add_product_fact(pair[0], pair[1], ClassExpr.parse(f["value"]), prov)
    return led


# -- top-level -------------------------------------------------------------------


def parse_document(text):
    doc = loads(text)
    field = field_from_spec(doc["field"])
    kind = doc["kind"]
    body = doc["body"]
    if kind == "category":
        return kind, field, category_from_json(field, body)
    if kind == "functor":
        return kind, field, functor_from_json(field, body)
    if kind == "twisted-complex":
        return kind, field, tc_bundle_from_json(field, body)
    if kind == "gen-certificate":
        cat = category_from_json(field, body["category"])
        return kind, field, (cat, gencert_from_json(cat, body))
    if kind == "sod-claim":
        cat = category_from_json(field, body["category"])
        return kind, field, (cat, sod_claim_from_json(cat, body))
    if kind == "equiv-certificate":
        return kind, field, equiv_cert_from_json(field, body)
    if kind == "ledger":
        return kind, field, ledger_from_json(field, body)
    raise DocumentError(f"unhandled kind {kind}")
