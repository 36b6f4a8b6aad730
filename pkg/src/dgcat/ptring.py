"""The Grothendieck ring of pretriangulated categories as a finitely
presented commutative ring at a degree bound.

Generators are registered category classes; additive relations come from
verified SODs (re-checked on ingestion) or explicitly tagged external paper
facts; the product of two generator classes is opaque until a product fact
identifies it.  Equality is decided in the degree-bounded quotient: formal
monomials are rewritten through the product table, relations are saturated
by all completely-rewritable monomial multiples, and membership in the
resulting integer lattice is decided by Smith normal form.  A relation
multiple that cannot be fully rewritten is never admitted, so missing facts
surface as "unknown", not as wrong answers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .dgcore import full_subcategory, tensor
from .exactlin import in_rowspan
from .functors import DGFunctor, EquivCertificate
from .pretr import embed, identity_morphism
from .sodgen import check_sod, check_exceptional_collection
from .exactlin import Matrix, smith_normal_form


class ProvenanceError(Exception):
    pass


def monomial(*labels):
    return tuple(sorted(labels))


UNIT = ()


class ClassExpr:
    """Integer linear combination of monomials in generator labels; the
    empty monomial is the unit class [pt]."""

    def __init__(self, terms=None):
        self.terms = {}
        for mono, c in (terms or {}).items():
            mono = tuple(sorted(mono))
            if c:
                self.terms[mono] = self.terms.get(mono, 0) + c
        self.terms = {m: c for m, c in self.terms.items() if c}

    @classmethod
    def unit(cls, coeff=1):
        return cls({UNIT: coeff})

    @classmethod
    def gen(cls, label, coeff=1):
        return cls({(label,): coeff})

    def add(self, other):
        t = dict(self.terms)
        for m, c in other.terms.items():
            t[m] = t.get(m, 0) + c
        return ClassExpr(t)

    def sub(self, other):
        return self.add(other.scale(-1))

    def scale(self, k):
        return ClassExpr({m: c * k for m, c in self.terms.items()})

    def mul(self, other):
        t = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(sorted(m1 + m2))
                t[m] = t.get(m, 0) + c1 * c2
        return ClassExpr(t)

    def degree(self):
        return max((len(m) for m in self.terms), default=0)

    def is_zero(self):
        return not self.terms

    def __eq__(self, other):
        return isinstance(other, ClassExpr) and self.terms == other.terms

    def __repr__(self):
        return f"ClassExpr({self.format()})"

    def format(self):
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, key=lambda m: (len(m), m)):
            c = self.terms[m]
            body = "*".join(f"[{x}]" for x in m) if m else "[pt]"
            if c == 1:
                parts.append(body)
            elif c == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{c}*{body}")
        out = parts[0]
        for p in parts[1:]:
            out += f" + {p}" if not p.startswith("-") else f" - {p[1:]}"
        return out

    @classmethod
    def parse(cls, s):
        """Parse "2*[pt] + [P1]*[P1] - 3*[X]"."""
        s = s.replace("-", "+-").replace(" ", "")
        terms = {}
        for chunk in s.split("+"):
            if not chunk:
                continue
            sign = 1
            if chunk.startswith("-"):
                sign = -1
                chunk = chunk[1:]
            coeff = 1
            labels = []
            for factor in chunk.split("*"):
                if not factor:
                    raise ValueError(f"bad term in {s!r}")
                if factor.startswith("["):
                    if not factor.endswith("]"):
                        raise ValueError(f"bad factor {factor!r}")
                    lbl = factor[1:-1]
                    if lbl != "pt":
                        labels.append(lbl)
                else:
                    coeff *= int(factor)
            m = tuple(sorted(labels))
            terms[m] = terms.get(m, 0) + sign * coeff
        return cls(terms)


@dataclass
class Provenance:
    kind: str  # verified-sod | verified-tensor | external-paper-fact | unit-law
    citation: str = ""
    payload: object = None

    def tag(self):
        return "[PAPER]" if self.kind == "external-paper-fact" else "verified"


@dataclass
class SODProvenance:
    """Machine-verified SOD relation: the claim decomposes the named
    generator's category into blocks, each identified with a class value."""

    label: str
    claim: object
    block_values: tuple  # one ClassExpr per block
    block_idents: tuple  # "point" or ("generator", label) per block


@dataclass
class TensorProvenance:
    """Machine-verified product fact for (a, b).

    mode "generator": the tensor category structurally equals the value
    generator's payload.  mode "point-sod": the payload claim decomposes the
    tensor category into n point blocks, value = n [pt].  The simpler
    pretriangulated-hull product (no idempotent completion) verifies
    identically at this level; product_kind records which product the fact
    is about.
    """

    mode: str
    claim: object = None
    product_kind: str = "bullet"  # bullet | pretr


@dataclass
class GeneratorInfo:
    label: str
    payload: object = None  # DGCategory or None
    unit_alias: bool = False
    geometric: bool = True


@dataclass
class Relation:
    expr: ClassExpr
    provenance: Provenance


@dataclass
class Fact:
    pair: tuple
    value: ClassExpr
    provenance: Provenance


def _point_block_ok(cat, block):
    """A singleton block with End = k, machine-identified with [pt]."""
    if len(block) != 1:
        return False
    return check_exceptional_collection(cat, list(block))


def claim_category(claim, fallback=None):
    """The category instance a claim's witnesses were built over."""
    for w in claim.admissibility.values():
        return w.u.src.cat
    return fallback


class Ledger:
    """Immutable-by-convention ledger; mutators return a new version."""

    def __init__(self, degree_bound=4, flavor="PT"):
        self.degree_bound = degree_bound
        self.flavor = flavor
        self.generators = {}
        self.relations = []
        self.facts = {}
        self.version = 0

    def _copy(self):
        l = Ledger(self.degree_bound, self.flavor)
        l.generators = dict(self.generators)
        l.relations = list(self.relations)
        l.facts = dict(self.facts)
        l.version = self.version + 1
        return l

    # -- registration ----------------------------------------------------

    def register_generator(self, label, payload=None, unit_alias=False, geometric=True):
        if label in self.generators:
            raise ValueError(f"generator {label!r} already registered")
        if self.flavor == "Gamma" and not geometric:
            raise ValueError("Gamma-flavored ledger admits only geometric generators")
        l = self._copy()
        l.generators[label] = GeneratorInfo(label, payload, unit_alias, geometric)
        return l

    def expr_gen(self, label):
        info = self.generators.get(label)
        if info is None:
            raise KeyError(f"unregistered generator {label!r}")
        if info.unit_alias:
            return ClassExpr.unit()
        return ClassExpr.gen(label)

    def _check_registered(self, expr):
        for m in expr.terms:
            for lbl in m:
                if lbl not in self.generators:
                    raise KeyError(f"unregistered generator {lbl!r}")

    def _resolve_aliases(self, expr):
        out = ClassExpr()
        for m, c in expr.terms.items():
            e = ClassExpr.unit(c)
            for lbl in m:
                e = e.mul(self.expr_gen(lbl))
            out = out.add(e)
        return out

    # -- relations and facts ----------------------------------------------

    def add_relation(self, expr, provenance):
        self._check_registered(expr)
        if provenance.kind == "verified-sod":
            self._verify_sod_provenance(expr, provenance)
        elif provenance.kind == "external-paper-fact":
            if not provenance.citation:
                raise ProvenanceError("external facts require a citation")
        else:
            raise ProvenanceError(f"unsupported relation provenance {provenance.kind!r}")
        l = self._copy()
        l.relations.append(Relation(self._resolve_aliases(expr), provenance))
        return l

    def _verify_sod_provenance(self, expr, provenance):
        p = provenance.payload
        if not isinstance(p, SODProvenance):
            raise ProvenanceError("verified-sod provenance requires an SODProvenance payload")
        info = self.generators.get(p.label)
        if info is None or info.payload is None:
            raise ProvenanceError(f"generator {p.label!r} has no registered category")
        cat = claim_category(p.claim, info.payload)
        if cat is not info.payload and not categories_structurally_equal(cat, info.payload):
            raise ProvenanceError("claim category does not match the registered category")
        if tuple(p.claim.ambient_generators) != tuple(cat.objects):
            raise ProvenanceError("SOD claim must cover all objects of the registered category")
        verdict = check_sod(cat, p.claim)
        if not verdict.ok:
            bad = [a for a in verdict.audit if not a.ok]
            raise ProvenanceError(f"SOD claim failed verification: {bad[:3]}")
        if len(p.block_values) != len(p.claim.blocks):
            raise ProvenanceError("one value per block required")
        for block, value, ident in zip(p.claim.blocks, p.block_values, p.block_idents):
            if ident == "point":
                if not _point_block_ok(cat, block):
                    raise ProvenanceError(f"block {block} is not machine-identifiable with the point")
                if value != ClassExpr.unit():
                    raise ProvenanceError("point blocks must carry the unit value")
            elif isinstance(ident, tuple) and ident[0] == "generator":
                ginfo = self.generators.get(ident[1])
                if ginfo is None:
                    raise ProvenanceError(f"block identified with unregistered generator {ident[1]!r}")
                if value != self.expr_gen(ident[1]):
                    raise ProvenanceError("block value must match its identifying generator")
            else:
                raise ProvenanceError(f"unknown block identification {ident!r}")
        claimed = self.expr_gen(p.label)
        for value in p.block_values:
            claimed = claimed.sub(value)
        if self._resolve_aliases(expr) != claimed:
            raise ProvenanceError("relation does not match the verified decomposition")

    def add_product_fact(self, a, b, value, provenance):
        for lbl in (a, b):
            if lbl not in self.generators:
                raise KeyError(f"unregistered generator {lbl!r}")
        self._check_registered(value)
        if value.degree() > 1:
            raise ProvenanceError("product-fact values must have degree <= 1")
        pair = tuple(sorted((a, b)))
        if provenance.kind == "verified-tensor":
            self._verify_tensor_provenance(pair, value, provenance)
        elif provenance.kind == "external-paper-fact":
            if not provenance.citation:
                raise ProvenanceError("external facts require a citation")
        else:
            raise ProvenanceError(f"unsupported fact provenance {provenance.kind!r}")
        value = self._resolve_aliases(value)
        if pair in self.facts:
            verdict = self.eq(self.facts[pair].value, value)
            if verdict != "equal":
                raise ProvenanceError(f"conflicting product fact for {pair}: existing value not provably equal ({verdict})")
            return self._copy()
        l = self._copy()
        l.facts[pair] = Fact(pair, value, provenance)
        return l

    def _verify_tensor_provenance(self, pair, value, provenance):
        p = provenance.payload
        if not isinstance(p, TensorProvenance):
            raise ProvenanceError("verified-tensor provenance requires a TensorProvenance payload")
        cats = []
        for lbl in pair:
            info = self.generators[lbl]
            if info.payload is None:
                raise ProvenanceError(f"generator {lbl!r} has no registered category")
            cats.append(info.payload)
        t = tensor(cats[0], cats[1])
        if p.mode == "generator":
            if len(value.terms) != 1 or set(value.terms.values()) != {1}:
                raise ProvenanceError("generator-mode facts need a single unit-coefficient generator value")
            (mono,) = value.terms
            if len(mono) != 1:
                raise ProvenanceError("generator-mode facts need a degree-1 value")
            target = self.generators.get(mono[0])
            if target is None or target.payload is None:
                raise ProvenanceError(f"value generator {mono[0]!r} has no registered category")
            if not categories_structurally_equal(t, target.payload):
                raise ProvenanceError("tensor category does not match the value generator's category")
        elif p.mode == "point-sod":
            if p.claim is None:
                raise ProvenanceError("point-sod mode requires a claim on the tensor category")
            ccat = claim_category(p.claim, t)
            if ccat is not t and not categories_structurally_equal(ccat, t):
                raise ProvenanceError("claim category does not match the tensor category")
            order = [ccat.obj(o.label) for o in p.claim.ambient_generators]
            if not check_exceptional_collection(ccat, order):
                raise ProvenanceError("tensor category is not exceptional in the claimed order")
            verdict = check_sod(ccat, p.claim)
            if not verdict.ok:
                raise ProvenanceError("tensor SOD claim failed verification")
            n = len(p.claim.blocks)
            if value != ClassExpr.unit(n):
                raise ProvenanceError(f"value must be {n}[pt] for a {n}-point-block decomposition")
        else:
            raise ProvenanceError(f"unknown tensor provenance mode {p.mode!r}")

    # -- normalization and the decision procedure --------------------------

    def _fact_value(self, a, b):
        if self.generators[a].unit_alias:
            return self.expr_gen(b)
        if self.generators[b].unit_alias:
            return self.expr_gen(a)
        f = self.facts.get(tuple(sorted((a, b))))
        return f.value if f else None

    def normalize(self, expr):
        """(normal form, complete): rewrite every monomial through the
        product table; complete=False when a monomial of degree >= 2
        survives or the degree bound is exceeded."""
        self._check_registered(expr)
        expr = self._resolve_aliases(expr)
        memo = {}

        def norm_mono(m):
            if m in memo:
                return memo[m]
            if len(m) > self.degree_bound:
                memo[m] = (ClassExpr({m: 1}), False)
                return memo[m]
            if len(m) <= 1:
                memo[m] = (ClassExpr({m: 1}), True)
                return memo[m]
            memo[m] = (ClassExpr({m: 1}), False)  # cycle guard
            for i in range(len(m)):
                for j in range(i + 1, len(m)):
                    val = self._fact_value(m[i], m[j])
                    if val is None:
                        continue
                    rest = tuple(x for t, x in enumerate(m) if t not in (i, j))
                    total = ClassExpr()
                    ok = True
                    for mono2, c2 in val.mul(ClassExpr({rest: 1})).terms.items():
                        sub, sub_ok = norm_mono(mono2)
                        ok = ok and sub_ok
                        total = total.add(sub.scale(c2))
                    if ok:
                        memo[m] = (total, True)
                        return memo[m]
            return memo[m]

        out = ClassExpr()
        complete = True
        for m, c in expr.terms.items():
            nf, ok = norm_mono(m)
            complete = complete and ok
            out = out.add(nf.scale(c))
        return out, complete

    def _coordinates(self):
        if not self.generators and not self.relations:
            return []
        gens = sorted(lbl for lbl, info in self.generators.items() if not info.unit_alias)
        return [UNIT] + [(g,) for g in gens]

    def _vector(self, expr, coords):
        idx = {m: i for i, m in enumerate(coords)}
        vec = [0] * len(coords)
        for m, c in expr.terms.items():
            vec[idx[m]] += c
        return vec

    def saturated_rows(self):
        """Lattice rows: every relation times every completely-rewritable
        monomial of total degree <= degree bound."""
        if getattr(self, "_sat_cache", None) is not None:
            return self._sat_cache
        coords = self._coordinates()
        gens = [m[0] for m in coords[1:]]
        monomials = [UNIT]
        frontier = [UNIT]
        for _ in range(self.degree_bound - 1):
            nxt = []
            for m in frontier:
                for g in gens:
                    mono = tuple(sorted(m + (g,)))
                    if mono not in nxt and mono not in monomials:
                        nxt.append(mono)
            monomials.extend(nxt)
            frontier = nxt
        rows = []
        for rel in self.relations:
            for m in monomials:
                prod = rel.expr.mul(ClassExpr({m: 1}))
                if prod.degree() > self.degree_bound:
                    continue
                nf, complete = self.normalize(prod)
                if not complete:
                    continue
                vec = self._vector(nf, coords)
                if any(vec):
                    rows.append(vec)
        self._sat_cache = (coords, rows)
        return self._sat_cache

    def eq(self, lhs, rhs):
        """equal | unequal_within_bound | unknown, with exact semantics in
        the degree-bounded presented quotient."""
        diff = lhs.sub(rhs)
        self._check_registered(diff)
        nf, complete = self.normalize(diff)
        if nf.is_zero():
            return "equal"
        if not complete or nf.degree() > 1:
            return "unknown"
        coords, rows = self.saturated_rows()
        if in_rowspan(rows, self._vector(nf, coords)):
            return "equal"
        return "unequal_within_bound"

    def eq_report(self, lhs, rhs):
        verdict = self.eq(lhs, rhs)
        used = [
            {"expr": r.expr.format(), "provenance": r.provenance.kind, "tag": r.provenance.tag(), "citation": r.provenance.citation}
            for r in self.relations
        ]
        facts = [
            {"pair": list(f.pair), "value": f.value.format(), "provenance": f.provenance.kind, "tag": f.provenance.tag(), "citation": f.provenance.citation}
            for f in self.facts.values()
        ]
        return {"verdict": verdict, "relations": used, "facts": facts}

    def group_invariants(self):
        """(free rank, torsion) of the degree-bounded additive quotient."""
        coords, rows = self.saturated_rows()
        if not rows:
            return len(coords), []
        snf = smith_normal_form(rows)
        rank = len(coords) - len(snf.diag)
        torsion = [d for d in snf.diag if d not in (0, 1)]
        return rank, torsion

    def derive_measure_check(self, line_label="P1"):
        """Check mu(L) = 1: with L = [P1] - [pt], eq(L*x, x) for every
        registered generator (and the unit)."""
        if line_label not in self.generators:
            raise KeyError(f"dataset incomplete: no generator {line_label!r}")
        L = ClassExpr.gen(line_label).sub(ClassExpr.unit())
        report = {}
        ok = True
        targets = [("pt", ClassExpr.unit())]
        for lbl in sorted(self.generators):
            if not self.generators[lbl].unit_alias:
                targets.append((lbl, ClassExpr.gen(lbl)))
        for name, x in targets:
            verdict = self.eq(L.mul(x), x)
            report[name] = verdict
            ok = ok and verdict == "equal"
        return {"pass": ok, "line": f"L = [{line_label}] - [pt]", "checks": report}

    def beta_report(self):
        """The forgetful re-flagging Gamma -> PT."""
        return {
            "from": self.flavor,
            "to": "PT",
            "generators": {lbl: ("geometric" if info.geometric else "abstract") for lbl, info in self.generators.items()},
        }


def categories_structurally_equal(c1, c2):
    if c1.field != c2.field:
        return False
    if [o.label for o in c1.objects] != [o.label for o in c2.objects]:
        return False
    h1 = {(a.label, b.label): h for (a, b), h in c1.homs.items()}
    h2 = {(a.label, b.label): h for (a, b), h in c2.homs.items()}
    if h1.keys() != h2.keys():
        return False
    for k in h1:
        if h1[k].complex != h2[k].complex:
            return False
    t1 = {(a.label, b.label, c.label): t for (a, b, c), t in c1.comp.items()}
    t2 = {(a.label, b.label, c.label): t for (a, b, c), t in c2.comp.items()}
    if t1 != t2:
        return False
    return {o.label: m.coords for o, m in c1.ids.items()} == {o.label: m.coords for o, m in c2.ids.items()}


def point_equivalence_certificate(cat, obj, point_cat):
    """Quasi-equivalence certificate point -> full subcategory on one
    exceptional object (used to identify blocks with [pt])."""
    sub = full_subcategory(cat, [obj])
    p = point_cat.objects[0]
    h = point_cat.hom(p, p)
    target = sub.hom(obj, obj)
    mor_maps = {(p, p): {0: Matrix(cat.field, target.dim(0), h.dim(0), {(i, 0): v for i, v in cat.identity(obj).coords.items()})}}
    fun = DGFunctor(point_cat, sub, {p: obj}, mor_maps, name=f"pt->{obj.label}")
    witnesses = {obj: (embed(sub, obj), identity_morphism(embed(sub, obj)))}
    return EquivCertificate(fun, witnesses)
