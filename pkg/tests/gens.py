"""Seeded random generators for categories and twisted complexes.

Valid DG categories are produced from constructions that guarantee the
axioms: graded acyclic quivers, square-zero loop algebras, two-object
categories whose Hom is a random complex with exact d^2 = 0 (built from
shift atoms under a random change of basis), plus tensor products and
opposites of those.
"""

from dgcat.dgcore import Arrow, DGCategory, Hom, Morphism, ObjId, from_quiver, opposite
from dgcat.exactlin import QQ, GF, ChainComplex, Matrix
from dgcat import pretr


def random_invertible(field, n, rng):
    """Random invertible matrix: unitriangular * permutation with signs."""
    ent = {}
    perm = list(range(n))
    rng.shuffle(perm)
    one = field.one()
    for i, p in enumerate(perm):
        ent[(i, p)] = one if rng.random() < 0.5 else field.neg(one)
    m = Matrix(field, n, n, ent)
    u = {(i, i): one for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.4:
                u[(i, j)] = field.from_int(rng.randrange(-2, 3))
    return Matrix(field, n, n, {k: v for k, v in u.items() if not field.is_zero(v)}).matmul(m)


def random_complex(field, rng, max_atoms=3, degree_span=(-2, 2)):
    """Random chain complex with exact d^2 = 0 and a scrambled basis."""
    atoms = []
    for _ in range(rng.randrange(1, max_atoms + 1)):
        d0 = rng.randrange(degree_span[0], degree_span[1] + 1)
        if rng.random() < 0.5:
            atoms.append(("point", d0))
        else:
            atoms.append(("interval", d0))
    dims = {}
    ent = {}
    for kind, d0 in atoms:
        if kind == "point":
            dims[d0] = dims.get(d0, 0) + 1
        else:
            i = dims.get(d0, 0)
            j = dims.get(d0 + 1, 0)
            dims[d0] = i + 1
            dims[d0 + 1] = j + 1
            ent.setdefault(d0, {})[(j, i)] = field.one()
    diff = {n: Matrix(field, dims.get(n + 1, 0), dims[n], e) for n, e in ent.items()}
    # conjugate by random invertible degreewise changes of basis
    changes = {n: random_invertible(field, d, rng) for n, d in dims.items()}
    inverses = {}
    for n, g in changes.items():
        cols = []
        for j in range(g.cols):
            e = Matrix(field, g.rows, 1, {(j, 0): field.one()})
            cols.append(g.solve(e))
        inverses[n] = Matrix(field, g.cols, g.rows, {(i, j): v for j, c in enumerate(cols) for (i, _), v in c.entries.items()})
    new_diff = {}
    for n, m in diff.items():
        new = changes[n + 1].matmul(m).matmul(inverses[n]) if n + 1 in changes else m
        if not new.is_zero():
            new_diff[n] = new
    return ChainComplex(field, dims, new_diff)


def bimodule_category(field, rng):
    """Two objects u, v with End = k and Hom(u,v) a random complex."""
    u, v = ObjId("u", 0), ObjId("v", 1)
    c = random_complex(field, rng)
    homs = {
        (u, u): Hom(ChainComplex(field, {0: 1}), {0: ("1",)}),
        (v, v): Hom(ChainComplex(field, {0: 1}), {0: ("1",)}),
        (u, v): Hom(c, {n: tuple(f"m{n}_{i}" for i in range(c.dim(n))) for n in c.degrees()}),
    }
    one = field.one()
    comp = {
        (u, u, u): {(0, 0, 0, 0): {0: one}},
        (v, v, v): {(0, 0, 0, 0): {0: one}},
    }
    t_uv = {}
    for n in c.degrees():
        for i in range(c.dim(n)):
            t_uv[(0, 0, n, i)] = {i: one}
    comp[(u, u, v)] = t_uv
    t_uv2 = {}
    for n in c.degrees():
        for i in range(c.dim(n)):
            t_uv2[(n, i, 0, 0)] = {i: one}
    comp[(u, v, v)] = t_uv2
    ids = {u: Morphism(u, u, 0, {0: one}), v: Morphism(v, v, 0, {0: one})}
    return DGCategory(field, (u, v), homs, comp, ids, name="bimodule")


def random_quiver_category(field, rng):
    n = rng.randrange(2, 4)
    vertices = [f"w{i}" for i in range(n)]
    arrows = []
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            for _ in range(rng.randrange(0, 3)):
                arrows.append(Arrow(f"a{k}", vertices[i], vertices[j], rng.randrange(-1, 2)))
                k += 1
    return from_quiver(field, vertices, arrows)


def random_category(rng, field=None):
    field = field or rng.choice([QQ, GF(101)])
    kind = rng.randrange(4)
    if kind == 0:
        cat = random_quiver_category(field, rng)
    elif kind == 1:
        cat = bimodule_category(field, rng)
    elif kind == 2:
        deg = rng.choice([0, 1, 2])
        rel = [[(1, ["e", "e"])]]
        cat = from_quiver(field, ["*"], [Arrow("e", "*", "*", deg)], rel)
    else:
        cat = opposite(bimodule_category(field, rng))
    return cat


def random_closed_degree0(hs, rng, max_tries=8):
    """Random closed degree-0 morphism from a HomSpace (possibly zero)."""
    cat = hs.cat
    fl = cat.field
    d0 = hs.complex.d(0)
    cycles = d0.nullspace() if hs.complex.dim(0) else []
    if not cycles:
        return pretr.zero_morphism(hs.x, hs.y)
    vec = {}
    for c in cycles:
        coeff = fl.from_int(rng.randrange(-2, 3))
        if fl.is_zero(coeff):
            continue
        for (i, _), v in c.entries.items():
            s = fl.add(vec.get(i, fl.zero()), fl.mul(coeff, v))
            if fl.is_zero(s):
                vec.pop(i, None)
            else:
                vec[i] = s
    return hs.from_vector(0, vec)


def random_twisted_complex(cat, rng, max_terms=5):
    """Random twisted complex built from shifts, sums, and cones of random
    closed degree-0 morphisms (Maurer-Cartan holds by construction)."""
    objs = list(cat.objects)
    x = pretr.shift(pretr.embed(cat, rng.choice(objs)), rng.randrange(-2, 3))
    while len(x.terms) < max_terms:
        move = rng.randrange(4)
        if move == 0:
            x = pretr.shift(x, rng.randrange(-1, 2))
        elif move == 1:
            y = pretr.shift(pretr.embed(cat, rng.choice(objs)), rng.randrange(-2, 3))
            x = pretr.direct_sum(x, y) if rng.random() < 0.5 else pretr.direct_sum(y, x)
        elif move == 2:
            y = pretr.shift(pretr.embed(cat, rng.choice(objs)), rng.randrange(-2, 3))
            f = random_closed_degree0(pretr.HomSpace(y, x), rng)
            x = pretr.cone(f)
        else:
            break
    return x
