"""Finite DG categories: representation, validation, quivers, opposite, tensor.

Composition convention: mul(f: A->B, g: B->C) is the composite A->C ("f then
g"), and composition is a chain map from Hom(A,B) (x) Hom(B,C), so the graded
Leibniz rule reads

    d(mul(f, g)) = mul(df, g) + (-1)^{deg f} mul(f, dg).

Hom complexes carry explicit ordered bases; all structure constants are
stored sparsely and every operation is deterministic in the basis order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactlin import ChainComplex, Matrix, check_same_field


@dataclass(frozen=True, order=True)
class ObjId:
    label: str
    index: int


@dataclass
class Hom:
    """A Hom chain complex together with basis names per degree."""

    complex: ChainComplex
    names: dict

    def dim(self, n):
        return self.complex.dim(n)

    def name(self, n, i):
        return self.names.get(n, [f"b{i}"] * (i + 1))[i]


@dataclass
class Morphism:
    src: ObjId
    dst: ObjId
    degree: int
    coords: dict  # basis index -> nonzero scalar

    def is_zero(self):
        return not self.coords

    def __eq__(self, other):
        return (
            isinstance(other, Morphism)
            and self.src == other.src
            and self.dst == other.dst
            and self.degree == other.degree
            and self.coords == other.coords
        )


@dataclass
class Violation:
    axiom: str
    where: tuple
    detail: str


class InfiniteDimensionalHom(Exception):
    pass


class DGCategory:
    """Finite DG category with chosen bases and sparse structure constants.

    comp[(A,B,C)][(p, i, q, j)] is a dict {k: scalar} expressing
    mul(basis_i^p(A,B), basis_j^q(B,C)) = sum_k scalar * basis_k^{p+q}(A,C).
    """

    def __init__(self, field, objects, homs, comp, ids, name=""):
        self.field = field
        self.objects = tuple(objects)
        self.homs = homs
        self.comp = comp
        self.ids = ids
        self.name = name
        self._by_label = {o.label: o for o in self.objects}

    def obj(self, label):
        return self._by_label[label]

    def hom(self, a, b):
        h = self.homs.get((a, b))
        if h is None:
            return Hom(ChainComplex(self.field, {}), {})
        return h

    def hom_dim(self, a, b, n):
        return self.hom(a, b).dim(n)

    def zero_morphism(self, a, b, degree=0):
        return Morphism(a, b, degree, {})

    def basis_morphism(self, a, b, degree, idx):
        return Morphism(a, b, degree, {idx: self.field.one()})

    def identity(self, a):
        return self.ids[a]

    def add(self, f, g):
        assert (f.src, f.dst, f.degree) == (g.src, g.dst, g.degree)
        fl = self.field
        coords = dict(f.coords)
        for k, v in g.coords.items():
            s = fl.add(coords.get(k, fl.zero()), v)
            if fl.is_zero(s):
                coords.pop(k, None)
            else:
                coords[k] = s
        return Morphism(f.src, f.dst, f.degree, coords)

    def scale(self, c, f):
        fl = self.field
        if fl.is_zero(c):
            return Morphism(f.src, f.dst, f.degree, {})
        return Morphism(f.src, f.dst, f.degree, {k: fl.mul(c, v) for k, v in f.coords.items()})

    def neg(self, f):
        return self.scale(self.field.neg(self.field.one()), f)

    def mul(self, f, g):
        """Composite of f: A->B then g: B->C."""
        if f.dst != g.src:
            raise ValueError(f"mul: {f.dst} != {g.src}")
        fl = self.field
        table = self.comp.get((f.src, f.dst, g.dst), {})
        out = {}
        for i, a in f.coords.items():
            for j, b in g.coords.items():
                cons = table.get((f.degree, i, g.degree, j))
                if not cons:
                    continue
                ab = fl.mul(a, b)
                for k, c in cons.items():
                    s = fl.add(out.get(k, fl.zero()), fl.mul(ab, c))
                    if fl.is_zero(s):
                        out.pop(k, None)
                    else:
                        out[k] = s
        return Morphism(f.src, g.dst, f.degree + g.degree, out)

    def d(self, f):
        """Hom-complex differential applied to a morphism."""
        m = self.hom(f.src, f.dst).complex.d(f.degree)
        return Morphism(f.src, f.dst, f.degree + 1, m.apply(f.coords))

    def morphism_equal(self, f, g):
        return f == g

    # -- validation -------------------------------------------------------

    def validate(self):
        """Report of every violated axiom (empty report = valid category)."""
        fl = self.field
        report = []
        for (a, b), h in sorted(self.homs.items()):
            for n in h.complex.validate():
                report.append(Violation("d_squared", (a.label, b.label, n), "d(n+1)·d(n) != 0"))
        for a in self.objects:
            ida = self.ids.get(a)
            if ida is None or ida.degree != 0:
                report.append(Violation("unit", (a.label,), "missing or wrong-degree identity"))
                continue
            if not self.d(ida).is_zero():
                report.append(Violation("unit_cycle", (a.label,), "d(id) != 0"))
        for (a, b), h in sorted(self.homs.items()):
            for n in h.complex.degrees():
                for i in range(h.dim(n)):
                    f = self.basis_morphism(a, b, n, i)
                    if a in self.ids and self.mul(self.ids[a], f) != f:
                        report.append(Violation("left_unit", (a.label, b.label, n, i), "id·f != f"))
                    if b in self.ids and self.mul(f, self.ids[b]) != f:
                        report.append(Violation("right_unit", (a.label, b.label, n, i), "f·id != f"))
        sign = fl.neg(fl.one())
        for a in self.objects:
            for b in self.objects:
                hab = self.hom(a, b)
                if not hab.complex.dims:
                    continue
                for c in self.objects:
                    hbc = self.hom(b, c)
                    if not hbc.complex.dims:
                        continue
                    for p in hab.complex.degrees():
                        for q in hbc.complex.degrees():
                            for i in range(hab.dim(p)):
                                f = self.basis_morphism(a, b, p, i)
                                df = self.d(f)
                                for j in range(hbc.dim(q)):
                                    g = self.basis_morphism(b, c, q, j)
                                    lhs = self.d(self.mul(f, g))
                                    rhs = self.mul(df, g)
                                    term = self.mul(f, self.d(g))
                                    if p % 2:
                                        term = self.scale(sign, term)
                                    rhs = self.add(rhs, term)
                                    if lhs != rhs:
                                        report.append(
                                            Violation("leibniz", (a.label, b.label, c.label, p, i, q, j), "d(fg) != (df)g ± f(dg)")
                                        )
        for a in self.objects:
            for b in self.objects:
                hab = self.hom(a, b)
                for c in self.objects:
                    hbc = self.hom(b, c)
                    for e in self.objects:
                        hce = self.hom(c, e)
                        for p in hab.complex.degrees():
                            for q in hbc.complex.degrees():
                                for r in hce.complex.degrees():
                                    for i in range(hab.dim(p)):
                                        f = self.basis_morphism(a, b, p, i)
                                        for j in range(hbc.dim(q)):
                                            g = self.basis_morphism(b, c, q, j)
                                            fg = self.mul(f, g)
                                            for k in range(hce.dim(r)):
                                                h = self.basis_morphism(c, e, r, k)
                                                if self.mul(fg, h) != self.mul(f, self.mul(g, h)):
                                                    report.append(
                                                        Violation(
                                                            "associativity",
                                                            (a.label, b.label, c.label, e.label, (p, i), (q, j), (r, k)),
                                                            "(fg)h != f(gh)",
                                                        )
                                                    )
        return report


def validate(cat):
    return cat.validate()


# -- quiver presentations -----------------------------------------------------


@dataclass
class Arrow:
    name: str
    src: str
    dst: str
    degree: int = 0


def from_quiver(field, vertices, arrows, relations=(), max_path_length=32, max_paths=4096):
    """DG category presented by a graded quiver with k-linear relations.

    vertices: list of labels.  arrows: list of Arrow or (name, src, dst[,deg])
    tuples.  relations: each a list of (coeff, [arrow names]) terms; all terms
    of one relation must be parallel paths of equal length and equal degree.
    The differential is zero.  Raises InfiniteDimensionalHom when path spaces
    fail to die out within the configured bounds.
    """
    arrows = [a if isinstance(a, Arrow) else Arrow(*a) for a in arrows]
    arrow_by_name = {a.name: a for a in arrows}
    if len(arrow_by_name) != len(arrows):
        raise ValueError("duplicate arrow names")
    for a in arrows:
        if a.src not in vertices or a.dst not in vertices:
            raise ValueError(f"arrow {a.name} endpoints not in vertex list")

    rels = []
    for rel in relations:
        terms = []
        sig = None
        for coeff, path in rel:
            path = tuple(path)
            if not path:
                raise ValueError("relations must involve paths of length >= 1")
            arrs = [arrow_by_name[n] for n in path]
            for x, y in zip(arrs, arrs[1:]):
                if x.dst != y.src:
                    raise ValueError(f"relation path {path} is not composable")
            key = (arrs[0].src, arrs[-1].dst, len(path), sum(a.degree for a in arrs))
            if sig is None:
                sig = key
            elif sig != key:
                raise ValueError("relation terms must be parallel, length- and degree-homogeneous")
            c = coeff if not isinstance(coeff, int) else field.from_int(coeff)
            terms.append((c, path))
        rels.append((sig, terms))

    # paths_by_len[L][(u,v)] = ordered list of arrow-name tuples
    paths_by_len = [{}]
    for v in vertices:
        paths_by_len[0].setdefault((v, v), []).append(())
    out_arrows = {}
    for a in arrows:
        out_arrows.setdefault(a.src, []).append(a)

    # chosen[(u,v)] = list of (L, path); per-component ideal data kept per length
    chosen = {}
    reducers = {}  # (u, v, L) -> (ordered paths, basis paths, solver Matrix)
    total_paths = len(vertices)

    def component_paths(L):
        comp = {}
        for (u, v), plist in paths_by_len[L].items():
            comp[(u, v)] = sorted(plist)
        return comp

    def ideal_vectors(u, v, L, paths):
        index = {p: t for t, p in enumerate(paths)}
        vecs = []
        for (rs, rd, rl, _deg), terms in rels:
            if rl > L:
                continue
            for lq in range(L - rl + 1):
                lp = L - rl - lq
                for q in paths_by_len[lq].get((u, rs), ()):
                    for pp in paths_by_len[lp].get((rd, v), ()):
                        vec = {}
                        for c, mid in terms:
                            t = index[q + mid + pp]
                            s = field.add(vec.get(t, field.zero()), c)
                            if field.is_zero(s):
                                vec.pop(t, None)
                            else:
                                vec[t] = s
                        if vec:
                            vecs.append(vec)
        return vecs

    L = 0
    while True:
        comp = component_paths(L)
        quotient_total = 0
        for (u, v), paths in sorted(comp.items()):
            vecs = ideal_vectors(u, v, L, paths)
            n = len(paths)
            ideal = Matrix(field, n, len(vecs), {(i, j): c for j, vec in enumerate(vecs) for i, c in vec.items()})
            base = ideal
            rank = base.rank()
            picked = []
            for t, p in enumerate(paths):
                cand = Matrix.hstack(field, n, [base, Matrix(field, n, 1, {(t, 0): field.one()})])
                r = cand.rank()
                if r > rank:
                    picked.append(p)
                    base, rank = cand, r
            quotient_total += len(picked)
            if picked or L == 0:
                chosen.setdefault((u, v), []).extend((L, p) for p in picked)
            basis_mat = Matrix(
                field, n, len(picked) + ideal.cols,
                {(paths.index(p), j): field.one() for j, p in enumerate(picked)}
                | {(i, len(picked) + j): c for (i, j), c in ideal.entries.items()},
            )
            reducers[(u, v, L)] = (paths, picked, basis_mat)
        if L > 0 and quotient_total == 0:
            break
        nxt = {}
        cnt = 0
        for (u, v), plist in paths_by_len[L].items():
            for p in plist:
                for a in out_arrows.get(v, ()):
                    nxt.setdefault((u, a.dst), []).append(p + (a.name,))
                    cnt += 1
        total_paths += cnt
        if total_paths > max_paths:
            raise InfiniteDimensionalHom(f"path count exceeded {max_paths}")
        paths_by_len.append(nxt)
        L += 1
        if L > max_path_length:
            raise InfiniteDimensionalHom(f"path length exceeded {max_path_length}")
    max_len = L

    def path_degree(p):
        return sum(arrow_by_name[n].degree for n in p)

    def path_name(p):
        return "*".join(p) if p else None

    objs = tuple(ObjId(v, i) for i, v in enumerate(vertices))
    by_label = {o.label: o for o in objs}
    homs = {}
    basis_index = {}  # (u, v) -> {path: (degree, idx)}
    for (u, v), items in sorted(chosen.items()):
        paths = [p for _, p in sorted(items)]
        by_deg = {}
        for p in paths:
            by_deg.setdefault(path_degree(p), []).append(p)
        dims = {n: len(ps) for n, ps in by_deg.items()}
        names = {n: tuple(path_name(p) or f"e_{u}" for p in ps) for n, ps in by_deg.items()}
        homs[(by_label[u], by_label[v])] = Hom(ChainComplex(field, dims), names)
        basis_index[(u, v)] = {p: (n, i) for n, ps in by_deg.items() for i, p in enumerate(ps)}

    def reduce_path(u, v, p):
        """Coordinates of a path's class in the chosen basis (sparse)."""
        L = len(p)
        if (u, v, L) not in reducers:
            return {}
        paths, picked, solver = reducers[(u, v, L)]
        if not picked:
            return {}
        if p in picked:
            n_i = basis_index[(u, v)][p]
            return {n_i: field.one()}
        t = paths.index(p)
        x = solver.solve(Matrix(field, len(paths), 1, {(t, 0): field.one()}))
        if x is None:
            raise RuntimeError("path reduction failed")
        out = {}
        for (j, _), c in x.entries.items():
            if j < len(picked):
                out[basis_index[(u, v)][picked[j]]] = c
        return out

    comp = {}
    for (u, v), idx_uv in basis_index.items():
        for (v2, w), idx_vw in basis_index.items():
            if v2 != v:
                continue
            table = {}
            for p, (np_, ip) in idx_uv.items():
                for q, (nq, iq) in idx_vw.items():
                    if len(p) + len(q) > max_len:
                        continue
                    red = reduce_path(u, w, p + q)
                    entry = {}
                    for (nr, ir), c in red.items():
                        if nr != np_ + nq:
                            raise RuntimeError("degree bookkeeping error in quiver composition")
                        entry[ir] = c
                    if entry:
                        table[(np_, ip, nq, iq)] = entry
            if table:
                comp[(by_label[u], by_label[v], by_label[w])] = table

    ids = {}
    for o in objs:
        n_i = basis_index[(o.label, o.label)][()]
        ids[o] = Morphism(o, o, n_i[0], {n_i[1]: field.one()})
    return DGCategory(field, objs, homs, comp, ids, name="quiver")


def build_category(field, objects, homs, comp, ids, name=""):
    return DGCategory(field, objects, homs, comp, ids, name)


def full_subcategory(cat, objs):
    """Full DG subcategory on the given objects (same bases)."""
    objs = tuple(objs)
    keep = set(objs)
    homs = {k: v for k, v in cat.homs.items() if k[0] in keep and k[1] in keep}
    comp = {k: v for k, v in cat.comp.items() if set(k) <= keep}
    ids = {o: cat.ids[o] for o in objs}
    return DGCategory(cat.field, objs, homs, comp, ids, name=f"{cat.name}|sub")


def opposite(cat):
    """Opposite DG category: Hom_op(A,B) = Hom(B,A), with the Koszul sign
    mul_op(f, g) = (-1)^{deg f deg g} mul(g, f)."""
    fl = cat.field
    homs = {(a, b): cat.hom(b, a) for (b, a) in cat.homs}
    comp = {}
    for (a, b, c) in {(z, y, x) for (x, y, z) in cat.comp}:
        # mul_op over A->B->C uses cat.mul over C->B->A
        table = {}
        src_table = cat.comp.get((c, b, a), {})
        for (q, j, p, i), cons in src_table.items():
            # original: mul(g: C->B at (q,j), f: B->A at (p,i)) -> Hom(C,A)
            sign = fl.one() if (p * q) % 2 == 0 else fl.neg(fl.one())
            table[(p, i, q, j)] = {k: fl.mul(sign, v) for k, v in cons.items()}
        if table:
            comp[(a, b, c)] = table
    ids = dict(cat.ids)
    return DGCategory(fl, cat.objects, homs, comp, ids, name=f"{cat.name}^op")


class TensorIndex:
    """Deterministic basis order for Hom_c (x) Hom_d at each total degree.

    Entries are keyed (p, q, i, j): degrees in the two factors and basis
    indices within those degrees.
    """

    def __init__(self, hc, hd):
        self.by_degree = {}
        self.pos = {}
        degs_c = hc.complex.degrees()
        degs_d = hd.complex.degrees()
        for p in degs_c:
            for q in degs_d:
                n = p + q
                lst = self.by_degree.setdefault(n, [])
                for i in range(hc.dim(p)):
                    for j in range(hd.dim(q)):
                        self.pos[(p, q, i, j)] = (n, len(lst))
                        lst.append((p, q, i, j))

    def dims(self):
        return {n: len(lst) for n, lst in self.by_degree.items()}


def tensor(c, d):
    """Tensor product DG category with the sign
    (f1 (x) g1)(f2 (x) g2) = (-1)^{deg g1 deg f2} f1 f2 (x) g1 g2."""
    check_same_field(c.field, d.field)
    fl = c.field
    objs = []
    pair = {}
    k = 0
    for a in c.objects:
        for b in d.objects:
            o = ObjId(f"({a.label},{b.label})", k)
            objs.append(o)
            pair[o] = (a, b)
            k += 1
    rev = {v: o for o, v in pair.items()}

    homs = {}
    indices = {}
    for o1 in objs:
        a1, b1 = pair[o1]
        for o2 in objs:
            a2, b2 = pair[o2]
            hc = c.hom(a1, a2)
            hd = d.hom(b1, b2)
            if not hc.complex.dims or not hd.complex.dims:
                continue
            idx = TensorIndex(hc, hd)
            indices[(o1, o2)] = idx
            dims = idx.dims()
            diff = {}
            for n, lst in idx.by_degree.items():
                ent = {}
                for col, (p, q, i, j) in enumerate(lst):
                    dc = hc.complex.d(p)
                    for (i2, ii), v in dc.entries.items():
                        if ii == i and (p + 1, q, i2, j) in idx.pos:
                            _, row = idx.pos[(p + 1, q, i2, j)]
                            ent[(row, col)] = fl.add(ent.get((row, col), fl.zero()), v)
                    dd = hd.complex.d(q)
                    sgn = fl.one() if p % 2 == 0 else fl.neg(fl.one())
                    for (j2, jj), v in dd.entries.items():
                        if jj == j and (p, q + 1, i, j2) in idx.pos:
                            _, row = idx.pos[(p, q + 1, i, j2)]
                            s = fl.add(ent.get((row, col), fl.zero()), fl.mul(sgn, v))
                            if fl.is_zero(s):
                                ent.pop((row, col), None)
                            else:
                                ent[(row, col)] = s
                mdims = len(idx.by_degree.get(n + 1, []))
                m = Matrix(fl, mdims, len(lst), {k2: v for k2, v in ent.items() if not fl.is_zero(v)})
                if not m.is_zero():
                    diff[n] = m
            names = {}
            for n, lst in idx.by_degree.items():
                names[n] = tuple(f"{hc.name(p, i)}(x){hd.name(q, j)}" for (p, q, i, j) in lst)
            homs[(o1, o2)] = Hom(ChainComplex(fl, dims, diff), names)

    comp = {}
    for o1 in objs:
        for o2 in objs:
            if (o1, o2) not in indices:
                continue
            a1, b1 = pair[o1]
            a2, b2 = pair[o2]
            idx12 = indices[(o1, o2)]
            for o3 in objs:
                if (o2, o3) not in indices or (o1, o3) not in indices:
                    continue
                a3, b3 = pair[o3]
                idx23 = indices[(o2, o3)]
                idx13 = indices[(o1, o3)]
                tc = c.comp.get((a1, a2, a3), {})
                td = d.comp.get((b1, b2, b3), {})
                table = {}
                for (p1, i1, p2, i2), cons_c in tc.items():
                    for (q1, j1, q2, j2), cons_d in td.items():
                        key1 = idx12.pos.get((p1, q1, i1, j1))
                        key2 = idx23.pos.get((p2, q2, i2, j2))
                        if key1 is None or key2 is None:
                            continue
                        sgn = fl.one() if (q1 * p2) % 2 == 0 else fl.neg(fl.one())
                        entry = {}
                        for ic, vc in cons_c.items():
                            for jd, vd in cons_d.items():
                                tgt = idx13.pos.get((p1 + p2, q1 + q2, ic, jd))
                                if tgt is None:
                                    continue
                                entry[tgt[1]] = fl.mul(sgn, fl.mul(vc, vd))
                        if entry:
                            key = (key1[0], key1[1], key2[0], key2[1])
                            tbl = table.setdefault(key, {})
                            for t, v in entry.items():
                                s = fl.add(tbl.get(t, fl.zero()), v)
                                if fl.is_zero(s):
                                    tbl.pop(t, None)
                                else:
                                    tbl[t] = s
                if table:
                    comp[(o1, o2, o3)] = table

    ids = {}
    for o in objs:
        a, b = pair[o]
        ida, idb = c.ids[a], d.ids[b]
        idx = indices[(o, o)]
        coords = {}
        for i, va in ida.coords.items():
            for j, vb in idb.coords.items():
                n, t = idx.pos[(0, 0, i, j)]
                coords[t] = fl.mul(va, vb)
        ids[o] = Morphism(o, o, 0, coords)
    t = DGCategory(fl, tuple(objs), homs, comp, ids, name=f"{c.name}(x){d.name}")
    t.pair_map = pair
    t.pair_rev = rev
    t.factors = (c, d)
    return t


def swap_iso(c, d):
    """The DG isomorphism c(x)d -> d(x)c, f(x)g -> (-1)^{deg f deg g} g(x)f."""
    from .functors import DGFunctor

    fl = c.field
    t1 = tensor(c, d)
    t2 = tensor(d, c)
    obj_map = {}
    for o in t1.objects:
        a, b = t1.pair_map[o]
        obj_map[o] = t2.pair_rev[(b, a)]
    mor_maps = {}
    for (o1, o2), h in t1.homs.items():
        a1, b1 = t1.pair_map[o1]
        a2, b2 = t1.pair_map[o2]
        idx1 = TensorIndex(c.hom(a1, a2), d.hom(b1, b2))
        idx2 = TensorIndex(d.hom(b1, b2), c.hom(a1, a2))
        per_degree = {}
        for n, lst in idx1.by_degree.items():
            rows = len(idx2.by_degree.get(n, []))
            ent = {}
            for col, (p, q, i, j) in enumerate(lst):
                _, row = idx2.pos[(q, p, j, i)]
                sgn = fl.one() if (p * q) % 2 == 0 else fl.neg(fl.one())
                ent[(row, col)] = sgn
            per_degree[n] = Matrix(fl, rows, len(lst), ent)
        mor_maps[(o1, o2)] = per_degree
    return DGFunctor(t1, t2, obj_map, mor_maps, name="swap")
