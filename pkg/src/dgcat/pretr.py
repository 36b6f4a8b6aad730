"""One-sided twisted complexes: the pretriangulated hull of a DG category.

Sign conventions (the only place signs are produced):

* An entry x: obj_j -> obj_i of a matrix between twisted complexes is a base
  morphism of *underlying* degree u(x) = total_degree + shift_i - shift_j.
* Entry-level products convert the base category's composition (which is a
  chain map from the tensor product, Koszul sign on the first argument) to
  the classical one:  o_compose(x, y) = (-1)^{u(x) u(y)} mul(x, y)  for x
  applied first.  With this, matrix products carry no further shift signs.
* The entrywise differential of an entry with target term shift s is
  (-1)^s d(x), and a twisted morphism f of total degree l differentiates as
  df = (d f_{ij}) + q' f - (-1)^l f q.
* Maurer-Cartan: dq + q^2 = 0 with the two rules above.
* The public compose() of twisted morphisms adds one total-degree Koszul
  sign, (-1)^{|f||g|}, so that the hull is again a DG category satisfying
  the dgcore Leibniz rule; for degree-0 morphisms nothing changes.

Under these rules the cone of a closed degree-0 morphism f: X -> Y is
literally (Y-terms ++ X-terms shifted by 1, blocks (q_Y, f, -q_X)), the
shift is (terms+n, (-1)^n q), and all structural cone relations hold on
the nose.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .dgcore import Morphism, ObjId
from .exactlin import ChainComplex, Matrix


@dataclass(frozen=True)
class Term:
    obj: ObjId
    shift: int


class TwistedComplex:
    """(⊕ C_i[r_i], q) with q strictly upper triangular, dq + q² = 0."""

    def __init__(self, cat, terms, q=None, check=True):
        self.cat = cat
        self.terms = tuple(t if isinstance(t, Term) else Term(*t) for t in terms)
        self.q = {}
        for (i, j), m in (q or {}).items():
            if m.is_zero():
                continue
            if i >= j:
                raise ValueError(f"q[{i},{j}] below or on the diagonal")
            exp = 1 + self.terms[i].shift - self.terms[j].shift
            if m.degree != exp:
                raise ValueError(f"q[{i},{j}] has underlying degree {m.degree}, expected {exp}")
            if (m.src, m.dst) != (self.terms[j].obj, self.terms[i].obj):
                raise ValueError(f"q[{i},{j}] endpoints wrong")
            self.q[(i, j)] = m
        if check:
            bad = maurer_cartan_defect(self)
            if bad:
                raise ValueError(f"Maurer-Cartan fails at {sorted(bad)[0]}")

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return (
            isinstance(other, TwistedComplex)
            and self.cat is other.cat
            and self.terms == other.terms
            and self.q == other.q
        )

    def __repr__(self):
        inner = " + ".join(f"{t.obj.label}[{t.shift}]" for t in self.terms) or "0"
        return f"Tw({inner})"


class TwistedMorphism:
    """Matrix morphism between twisted complexes, homogeneous total degree."""

    def __init__(self, src, dst, degree, entries=None):
        self.src = src
        self.dst = dst
        self.degree = degree
        self.entries = {}
        for (i, j), m in (entries or {}).items():
            if m.is_zero():
                continue
            exp = degree + dst.terms[i].shift - src.terms[j].shift
            if m.degree != exp:
                raise ValueError(f"entry ({i},{j}) has underlying degree {m.degree}, expected {exp}")
            if (m.src, m.dst) != (src.terms[j].obj, dst.terms[i].obj):
                raise ValueError(f"entry ({i},{j}) endpoints wrong")
            self.entries[(i, j)] = m

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        return (
            isinstance(other, TwistedMorphism)
            and self.src == other.src
            and self.dst == other.dst
            and self.degree == other.degree
            and self.entries == other.entries
        )

    def __repr__(self):
        return f"TwMor(deg {self.degree}, {len(self.entries)} entries)"


def _o_compose(cat, x, y):
    """Classical composite "x then y" with the Koszul conversion sign."""
    m = cat.mul(x, y)
    if (x.degree * y.degree) % 2:
        return cat.neg(m)
    return m


def _entry_add(cat, acc, key, m):
    if m.is_zero():
        return
    cur = acc.get(key)
    if cur is None:
        acc[key] = m
    else:
        s = cat.add(cur, m)
        if s.is_zero():
            del acc[key]
        else:
            acc[key] = s


def _matrix_product(cat, left_entries, right_entries):
    """Entries of "right after left": paths k --left--> j --right--> i."""
    out = {}
    by_mid = {}
    for (j, k), m in left_entries.items():
        by_mid.setdefault(j, []).append((k, m))
    for (i, j), g in right_entries.items():
        for k, f in by_mid.get(j, ()):
            _entry_add(cat, out, (i, k), _o_compose(cat, f, g))
    return out


def differential(f):
    """Hom differential of twisted morphisms: df = (d f_{ij}) + q' f - (-1)^l f q."""
    cat = f.src.cat
    out = {}
    for (i, j), m in f.entries.items():
        dm = cat.d(m)
        if f.dst.terms[i].shift % 2:
            dm = cat.neg(dm)
        _entry_add(cat, out, (i, j), dm)
    for key, m in _matrix_product(cat, f.entries, f.dst.q).items():
        _entry_add(cat, out, key, m)
    sign = -1 if f.degree % 2 else 1
    for key, m in _matrix_product(cat, f.src.q, f.entries).items():
        _entry_add(cat, out, key, m if sign < 0 else cat.neg(m))
    return TwistedMorphism(f.src, f.dst, f.degree + 1, out)


def maurer_cartan_defect(x):
    """Entries where dq + q² fails to vanish (empty dict = valid)."""
    cat = x.cat
    out = {}
    for (i, j), m in x.q.items():
        dm = cat.d(m)
        if x.terms[i].shift % 2:
            dm = cat.neg(dm)
        _entry_add(cat, out, (i, j), dm)
    for key, m in _matrix_product(cat, x.q, x.q).items():
        _entry_add(cat, out, key, m)
    return out


def is_closed(f):
    return differential(f).is_zero()


def embed(cat, a):
    return TwistedComplex(cat, [Term(a, 0)], {}, check=False)


def shift(x, n):
    if n == 0:
        return x
    cat = x.cat
    q = x.q if n % 2 == 0 else {k: cat.neg(m) for k, m in x.q.items()}
    return TwistedComplex(cat, [Term(t.obj, t.shift + n) for t in x.terms], q, check=False)


def shift_morphism(f, n):
    """f[n]: same entries viewed between shifted complexes (same degree)."""
    return TwistedMorphism(shift(f.src, n), shift(f.dst, n), f.degree, f.entries)


def direct_sum(x, y):
    if x.cat is not y.cat:
        raise ValueError("direct_sum: different base categories")
    off = len(x.terms)
    q = dict(x.q)
    for (i, j), m in y.q.items():
        q[(i + off, j + off)] = m
    return TwistedComplex(x.cat, x.terms + y.terms, q, check=False)


def identity_morphism(x):
    cat = x.cat
    return TwistedMorphism(x, x, 0, {(t, t): cat.identity(term.obj) for t, term in enumerate(x.terms)})


def zero_morphism(x, y, degree=0):
    return TwistedMorphism(x, y, degree, {})


def tm_add(f, g):
    assert (f.src, f.dst, f.degree) == (g.src, g.dst, g.degree)
    cat = f.src.cat
    out = dict(f.entries)
    for key, m in g.entries.items():
        _entry_add(cat, out, key, m)
    return TwistedMorphism(f.src, f.dst, f.degree, out)


def tm_scale(c, f):
    cat = f.src.cat
    if cat.field.is_zero(c):
        return TwistedMorphism(f.src, f.dst, f.degree, {})
    return TwistedMorphism(f.src, f.dst, f.degree, {k: cat.scale(c, m) for k, m in f.entries.items()})


def tm_neg(f):
    return tm_scale(f.src.cat.field.neg(f.src.cat.field.one()), f)


def compose(f, g):
    """Composite of f: X->Y then g: Y->Z, in the same Leibniz convention
    as the base category."""
    if f.dst != g.src:
        raise ValueError("compose: middle objects differ")
    cat = f.src.cat
    out = _matrix_product(cat, f.entries, g.entries)
    result = TwistedMorphism(f.src, g.dst, f.degree + g.degree, out)
    if (f.degree * g.degree) % 2:
        result = tm_neg(result)
    return result


class HomSpace:
    """The Hom chain complex between two twisted complexes, with the
    entry-indexed basis and conversions morphism <-> coordinate vector."""

    def __init__(self, x, y):
        self.x = x
        self.y = y
        self.cat = x.cat
        basis = {}
        pos = {}
        for i, ty in enumerate(y.terms):
            for j, tx in enumerate(x.terms):
                h = self.cat.hom(tx.obj, ty.obj)
                for u in h.complex.degrees():
                    n = u - ty.shift + tx.shift
                    lst = basis.setdefault(n, [])
                    for t in range(h.dim(u)):
                        pos[(i, j, u, t)] = (n, len(lst))
                        lst.append((i, j, u, t))
        self.basis = basis
        self.pos = pos
        dims = {n: len(lst) for n, lst in basis.items()}
        diff = {}
        fl = self.cat.field
        for n, lst in basis.items():
            rows = len(basis.get(n + 1, []))
            ent = {}
            for col, (i, j, u, t) in enumerate(lst):
                m = Morphism(x.terms[j].obj, y.terms[i].obj, u, {t: fl.one()})
                df = differential(TwistedMorphism(x, y, n, {(i, j): m}))
                for (i2, j2), mor in df.entries.items():
                    for t2, v in mor.coords.items():
                        row = self.pos[(i2, j2, mor.degree, t2)][1]
                        s = fl.add(ent.get((row, col), fl.zero()), v)
                        if fl.is_zero(s):
                            ent.pop((row, col), None)
                        else:
                            ent[(row, col)] = s
            m2 = Matrix(fl, rows, len(lst), ent)
            if not m2.is_zero():
                diff[n] = m2
        self.complex = ChainComplex(fl, dims, diff)
        self._cohomology = {}

    def to_vector(self, f):
        vec = {}
        for (i, j), m in f.entries.items():
            for t, v in m.coords.items():
                vec[self.pos[(i, j, m.degree, t)][1]] = v
        return vec

    def from_vector(self, degree, vec):
        fl = self.cat.field
        ent = {}
        for col, v in vec.items():
            if fl.is_zero(v):
                continue
            i, j, u, t = self.basis[degree][col]
            key = (i, j)
            m = ent.get(key)
            if m is None:
                ent[key] = Morphism(self.x.terms[j].obj, self.y.terms[i].obj, u, {t: v})
            else:
                m.coords[t] = fl.add(m.coords.get(t, fl.zero()), v)
        return TwistedMorphism(self.x, self.y, degree, {k: m for k, m in ent.items() if not m.is_zero()})

    def cohomology(self, n):
        if n not in self._cohomology:
            self._cohomology[n] = self.complex.cohomology(n)
        return self._cohomology[n]

    def cohomology_classes(self, n):
        """Representative cycles of a basis of H^n as TwistedMorphisms."""
        h = self.cohomology(n)
        return [self.from_vector(n, {i: v for (i, _), v in rep.entries.items()}) for rep in h.reps]

    def project(self, f):
        """Class coordinates of a cycle f in the H^{f.degree} basis."""
        return self.cohomology(f.degree).project(self.to_vector(f))


def hom_complex(x, y):
    return HomSpace(x, y).complex


def ho_hom(x, y, n):
    """dim Hom_{Ho}(x, y[n]) = dim H^n of the Hom complex."""
    return HomSpace(x, y).complex.cohomology_dim(n)


def cone(f):
    """Cone of a closed degree-0 morphism: (Y ⊕ X[1], (q_Y, f, -q_X))."""
    if f.degree != 0:
        raise ValueError("cone: morphism must have degree 0")
    if not is_closed(f):
        raise ValueError("cone: morphism must be closed")
    x, y = f.src, f.dst
    cat = x.cat
    m = len(y.terms)
    terms = list(y.terms) + [Term(t.obj, t.shift + 1) for t in x.terms]
    q = dict(y.q)
    for (i, j), mor in f.entries.items():
        q[(i, m + j)] = mor
    for (i, j), mor in x.q.items():
        q[(m + i, m + j)] = cat.neg(mor)
    return TwistedComplex(cat, terms, q, check=False)


def cone_maps(f):
    """The four structural maps (i, p, j, s) of the cone."""
    x, y = f.src, f.dst
    c = cone(f)
    cat = x.cat
    m = len(y.terms)
    x1 = shift(x, 1)
    imap = TwistedMorphism(x1, c, 0, {(m + t, t): cat.identity(term.obj) for t, term in enumerate(x.terms)})
    pmap = TwistedMorphism(c, x1, 0, {(t, m + t): cat.identity(term.obj) for t, term in enumerate(x.terms)})
    jmap = TwistedMorphism(y, c, 0, {(t, t): cat.identity(term.obj) for t, term in enumerate(y.terms)})
    smap = TwistedMorphism(c, y, 0, {(t, t): cat.identity(term.obj) for t, term in enumerate(y.terms)})
    return imap, pmap, jmap, smap


def _f_up(f):
    """f viewed as the degree-1 morphism X[1] -> Y with the same entries."""
    return TwistedMorphism(shift(f.src, 1), f.dst, 1, f.entries)


def verify_cone_axioms(c, f, maps=None):
    """Exact check of the nine relations of the cone definition."""
    x, y = f.src, f.dst
    imap, pmap, jmap, smap = maps if maps is not None else cone_maps(f)
    x1 = shift(x, 1)
    fu = _f_up(f)
    checks = [
        compose(imap, pmap) == identity_morphism(x1),
        compose(jmap, smap) == identity_morphism(y),
        compose(imap, smap).is_zero(),
        compose(jmap, pmap).is_zero(),
        tm_add(compose(pmap, imap), compose(smap, jmap)) == identity_morphism(c),
        differential(jmap).is_zero(),
        differential(pmap).is_zero(),
        differential(imap) == compose(fu, jmap),
        differential(smap) == tm_neg(compose(pmap, fu)),
    ]
    return all(checks)


def is_contractible(x, with_witness=False):
    """True iff d(h) = 1_x is solvable in End^{-1}(x); the witness re-verifies."""
    hs = HomSpace(x, x)
    idv = hs.to_vector(identity_morphism(x))
    fl = x.cat.field
    n = hs.complex.dim(0)
    d = hs.complex.d(-1)
    b = Matrix(fl, n, 1, {(i, 0): v for i, v in idv.items()})
    sol = d.solve(b)
    if sol is None:
        return (False, None) if with_witness else False
    h = hs.from_vector(-1, {i: v for (i, _), v in sol.entries.items()})
    assert differential(h) == identity_morphism(x), "contractibility witness failed re-verification"
    return (True, h) if with_witness else True


def is_ho_iso(f):
    """f closed degree 0 is a homotopy isomorphism iff Cone(f) is contractible."""
    return is_contractible(cone(f))


def reduce(x):
    """Gaussian elimination of invertible twist components.

    Returns (y, f) with y free of q-entries whose degree-0 component is
    invertible in the base category (when eliminable while keeping the
    complex one-sided), and f: x -> y a verified homotopy isomorphism.
    """
    cat = x.cat
    cur = x
    total = identity_morphism(x)
    while True:
        step = _reduce_step(cur)
        if step is None:
            break
        cur, proj = step
        total = compose(total, proj)
    if cur is not x:
        assert is_ho_iso(total), "reduction map failed homotopy-isomorphism verification"
    return cur, total


def _invert(cat, phi):
    """Two-sided inverse of a degree-0 base morphism, or None."""
    if phi.degree != 0 or phi.is_zero():
        return None
    h = cat.hom(phi.dst, phi.src)
    n = h.dim(0)
    if n == 0:
        return None
    fl = cat.field
    idt = cat.identity(phi.src)
    h_tt = cat.hom(phi.src, phi.src)
    rows = h_tt.dim(0)
    cols = {}
    for j in range(n):
        psi = cat.basis_morphism(phi.dst, phi.src, 0, j)
        for t, v in cat.mul(phi, psi).coords.items():
            cols[(t, j)] = v
    m = Matrix(fl, rows, n, cols)
    b = Matrix(fl, rows, 1, {(t, 0): v for t, v in idt.coords.items()})
    sol = m.solve(b)
    if sol is None:
        return None
    psi = Morphism(phi.dst, phi.src, 0, {j: v for (j, _), v in sol.entries.items()})
    if cat.mul(psi, phi) != cat.identity(phi.dst):
        return None
    return psi


def _reduce_step(x):
    cat = x.cat
    for (i, j) in sorted(x.q, key=lambda k: (k[1] - k[0], k[0])):
        phi = x.q[(i, j)]
        if phi.degree != 0:
            continue
        psi = _invert(cat, phi)
        if psi is None:
            continue
        keep = [t for t in range(len(x.terms)) if t not in (i, j)]
        new_index = {t: a for a, t in enumerate(keep)}
        q = {}
        ok = True
        for k in keep:
            for l in keep:
                entry = x.q.get((k, l))
                qkj = x.q.get((k, j))
                qil = x.q.get((i, l))
                if qkj is not None and qil is not None:
                    corr = _o_compose(cat, _o_compose(cat, qil, psi), qkj)
                    entry = cat.neg(corr) if entry is None else cat.add(entry, cat.neg(corr))
                if entry is not None and not entry.is_zero():
                    a, b = new_index[k], new_index[l]
                    if a >= b:
                        ok = False
                        break
                    q[(a, b)] = entry
            if not ok:
                break
        if not ok:
            continue
        y = TwistedComplex(cat, [x.terms[t] for t in keep], q, check=False)
        if maurer_cartan_defect(y):
            continue
        entries = {}
        for k in keep:
            entries[(new_index[k], k)] = cat.identity(x.terms[k].obj)
            qkj = x.q.get((k, j))
            if qkj is not None:
                entries[(new_index[k], i)] = cat.neg(_o_compose(cat, psi, qkj))
        proj = TwistedMorphism(x, y, 0, entries)
        if not is_closed(proj):
            continue
        return y, proj
    return None


@dataclass
class KaroubiObject:
    """Twisted complex with a verified homotopy idempotent.

    e is a degree-0 cycle on the carrier and h a degree -1 morphism
    witnessing e∘e - e = d(h) exactly.
    """

    carrier: TwistedComplex
    e: TwistedMorphism
    h: TwistedMorphism

    def verify(self):
        if self.e.degree != 0 or self.h.degree != -1:
            return False
        if not is_closed(self.e):
            return False
        defect = tm_add(compose(self.e, self.e), tm_neg(self.e))
        return differential(self.h) == defect


def karoubi_identity(x):
    """(x, [1]) with the trivial homotopy witness."""
    return KaroubiObject(x, identity_morphism(x), zero_morphism(x, x, -1))


def karoubi_complement(k):
    """(X, 1-e): (1-e)² - (1-e) = e² - e, so the same witness h works."""
    one = identity_morphism(k.carrier)
    return KaroubiObject(k.carrier, tm_add(one, tm_neg(k.e)), k.h)


def karoubi_hom(a, b, n):
    """dim of e_b · H^n Hom(carrier_a, carrier_b) · e_a."""
    if not a.verify():
        raise ValueError("source idempotent witness fails verification")
    if not b.verify():
        raise ValueError("target idempotent witness fails verification")
    hs = HomSpace(a.carrier, b.carrier)
    h = hs.cohomology(n)
    if h.dim == 0:
        return 0
    fl = a.carrier.cat.field
    cols = {}
    for t, z in enumerate(hs.cohomology_classes(n)):
        image = compose(compose(a.e, z), b.e)
        for r, v in hs.project(image).items():
            cols[(r, t)] = v
    return Matrix(fl, h.dim, h.dim, cols).rank()


def search_ho_iso(x, y, seed=0, attempts=100, enumerate_bound=10000):
    """Bounded search for a homotopy isomorphism x -> y.

    Over F_p enumerates H^0 classes when the class count is within the
    bound, otherwise (and over Q) samples randomly with a retry budget.
    Returns a verified TwistedMorphism or None; "not found" never means
    "not isomorphic".
    """
    hs = HomSpace(x, y)
    classes = hs.cohomology_classes(0)
    if not classes:
        return None
    fl = x.cat.field
    k = len(classes)

    def candidate(coeffs):
        f = zero_morphism(x, y)
        for c, z in zip(coeffs, classes):
            if not fl.is_zero(c):
                f = tm_add(f, tm_scale(c, z))
        return f if not f.is_zero() else None

    if hasattr(fl, "p") and fl.p**k <= enumerate_bound:
        coords = [0] * k
        while True:
            pos = 0
            while pos < k:
                coords[pos] += 1
                if coords[pos] < fl.p:
                    break
                coords[pos] = 0
                pos += 1
            if pos == k:
                return None
            f = candidate(coords)
            if f is not None and is_ho_iso(f):
                return f
    rng = random.Random(seed)
    span = fl.p if hasattr(fl, "p") else 7
    for _ in range(attempts):
        coeffs = [fl.from_int(rng.randrange(span) - (0 if hasattr(fl, "p") else span // 2)) for _ in range(k)]
        f = candidate(coeffs)
        if f is not None and is_ho_iso(f):
            return f
    return None
