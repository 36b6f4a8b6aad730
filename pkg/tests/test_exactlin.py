import random
from fractions import Fraction

import pytest

from dgcat.exactlin import (
    GF,
    QQ,
    ChainComplex,
    FieldMismatch,
    Matrix,
    field_from_spec,
    in_rowspan,
    int_det,
    smith_normal_form,
)


def dense_rank_oracle(rows):
    """Independent dense Gaussian elimination over Fraction."""
    m = [[Fraction(v) for v in row] for row in rows]
    rank = 0
    cols = len(m[0]) if m else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c] != 0:
                f = m[i][c] / m[rank][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


def test_rank_examples():
    assert Matrix.identity(QQ, 2).rank() == 2
    assert Matrix.zero(QQ, 3, 4).rank() == 0
    assert Matrix.from_rows(QQ, [[1, 2], [2, 4]]).rank() == 1


def test_rank_matches_oracle_random():
    rng = random.Random(7)
    for _ in range(60):
        r = rng.randrange(1, 6)
        c = rng.randrange(1, 6)
        rows = [[Fraction(rng.randrange(-3, 4), rng.randrange(1, 4)) for _ in range(c)] for _ in range(r)]
        m = Matrix.from_rows(QQ, rows)
        assert m.rank() == dense_rank_oracle(rows)
        assert m.rank() + m.nullity() == c


def test_rank_fp():
    p = GF(101)
    m = Matrix.from_rows(p, [[1, 2], [2, 4]])
    assert m.rank() == 1
    assert Matrix.identity(p, 3).rank() == 3


def test_field_mixing_rejected():
    a = Matrix.identity(QQ, 2)
    b = Matrix.identity(GF(5), 2)
    with pytest.raises(FieldMismatch):
        a.add(b)


def test_solve_examples():
    b = Matrix.column(QQ, [3, 1])
    assert Matrix.identity(QQ, 2).solve(b) == b
    assert Matrix.zero(QQ, 2, 2).solve(b) is None
    a = Matrix.from_rows(QQ, [[1, 1], [0, 1]])
    assert a.solve(b) == Matrix.column(QQ, [2, 1])


def test_solve_consistency_random():
    rng = random.Random(11)
    for _ in range(60):
        r, c = rng.randrange(1, 5), rng.randrange(1, 5)
        a = Matrix.from_rows(QQ, [[rng.randrange(-2, 3) for _ in range(c)] for _ in range(r)])
        b = Matrix.column(QQ, [rng.randrange(-2, 3) for _ in range(r)])
        x = a.solve(b)
        if x is None:
            assert Matrix.hstack(QQ, r, [a, b]).rank() > a.rank()
        else:
            assert a.matmul(x) == b


def test_nullspace_exact():
    a = Matrix.from_rows(QQ, [[1, 0, -1], [0, 1, 2]])
    (v,) = a.nullspace()
    assert a.matmul(v).is_zero()
    rng = random.Random(3)
    for _ in range(40):
        r, c = rng.randrange(1, 5), rng.randrange(1, 6)
        a = Matrix.from_rows(QQ, [[rng.randrange(-2, 3) for _ in range(c)] for _ in range(r)])
        basis = a.nullspace()
        assert len(basis) == a.nullity()
        for v in basis:
            assert a.matmul(v).is_zero()


def two_step_complex():
    # k --0--> k^2 --[1,0]--> k in degrees -1, 0, 1
    return ChainComplex(
        QQ,
        {-1: 1, 0: 2, 1: 1},
        {0: Matrix.from_rows(QQ, [[1, 0]])},
    )


def test_cohomology_examples():
    c = ChainComplex(QQ, {0: 1, 1: 1}, {0: Matrix.identity(QQ, 1)})
    assert c.cohomology_dim(0) == 0
    assert c.cohomology_dim(1) == 0

    z = ChainComplex(QQ, {0: 3})
    assert z.cohomology_dim(0) == 3

    c = two_step_complex()
    assert [c.cohomology_dim(n) for n in (-1, 0, 1)] == [1, 1, 0]


def test_cohomology_basis():
    z = ChainComplex(QQ, {0: 2})
    h = z.cohomology(0)
    assert h.dim == 2
    assert [r.entries for r in h.reps] == [{(0, 0): 1}, {(1, 0): 1}]

    c = ChainComplex(QQ, {0: 1, 1: 1}, {0: Matrix.identity(QQ, 1)})
    assert c.cohomology(0).dim == 0
    assert c.cohomology(1).dim == 0

    h = two_step_complex().cohomology(0)
    assert h.dim == 1
    (rep,) = h.reps
    assert two_step_complex().d(0).matmul(rep).is_zero()


def test_cohomology_project_lift_roundtrip():
    c = two_step_complex()
    h = c.cohomology(0)
    cycle = h.lift({0: Fraction(5)})
    assert h.project(cycle) == {0: Fraction(5)}

    # boundary invariance: k --id--> k --0--> 0 in degrees -1, 0
    cb = ChainComplex(QQ, {-1: 1, 0: 2}, {-1: Matrix.from_rows(QQ, [[1], [0]])})
    h0 = cb.cohomology(0)
    assert h0.dim == 1
    cycle = h0.lift({0: Fraction(3)})
    boundary = cb.d(-1).apply({0: Fraction(7)})
    shifted = dict(cycle)
    for k, v in boundary.items():
        shifted[k] = shifted.get(k, Fraction(0)) + v
    assert h0.project(shifted) == h0.project(cycle) == {0: Fraction(3)}
    with pytest.raises(ValueError):
        two_step_complex().cohomology(0).project({0: Fraction(1)})  # not a cycle


def test_euler_characteristic_invariance():
    rng = random.Random(23)
    for _ in range(30):
        dims = {0: rng.randrange(1, 4), 1: rng.randrange(1, 4)}
        m = Matrix.from_rows(QQ, [[rng.randrange(-1, 2) for _ in range(dims[0])] for _ in range(dims[1])])
        c = ChainComplex(QQ, dims, {0: m})
        assert c.validate() == []
        chi_dims = c.euler_characteristic()
        chi_h = sum((-1) ** n * c.cohomology_dim(n) for n in (0, 1))
        assert chi_dims == chi_h


def test_snf_examples():
    r = smith_normal_form([[2, 0], [0, 3]])
    assert r.diag == [1, 6]
    r = smith_normal_form([[1, 0], [0, 1]])
    assert r.diag == [1, 1]
    r = smith_normal_form([[2, 4], [4, 8]])
    assert r.diag == [2]  # rank 1, then zero diagonal


def mat_mul_int(a, b):
    n, k, m = len(a), len(b), len(b[0]) if b else 0
    return [[sum(a[i][t] * b[t][j] for t in range(k)) for j in range(m)] for i in range(n)]


def test_snf_transforms_unimodular():
    rng = random.Random(5)
    for _ in range(40):
        r, c = rng.randrange(1, 5), rng.randrange(1, 5)
        m = [[rng.randrange(-6, 7) for _ in range(c)] for _ in range(r)]
        res = smith_normal_form(m)
        assert abs(int_det(res.U)) == 1
        assert abs(int_det(res.V)) == 1
        d = mat_mul_int(mat_mul_int(res.U, m), res.V)
        for i in range(r):
            for j in range(c):
                expected = res.diag[i] if i == j and i < len(res.diag) else 0
                assert d[i][j] == expected
        for i in range(len(res.diag) - 1):
            assert res.diag[i + 1] % res.diag[i] == 0


def test_in_rowspan():
    rows = [[2, 0], [0, 3]]
    assert in_rowspan(rows, [2, 3])
    assert in_rowspan(rows, [4, 0])
    assert not in_rowspan(rows, [1, 0])
    assert in_rowspan([], [0, 0]) if True else None


def test_field_spec_roundtrip():
    assert field_from_spec("Q") is QQ
    f = field_from_spec("Fp:101")
    assert f.p == 101
    assert f.parse(f.format(55)) == 55
    assert QQ.parse("3/7") == Fraction(3, 7)
    assert QQ.format(Fraction(3, 7)) == "3/7"


def test_spec_named_conveniences():
    from dgcat.exactlin import rank, solve, cohomology_dim, cohomology_basis
    m = Matrix.from_rows(QQ, [[1, 2], [2, 4]])
    assert rank(m) == 1
    assert solve(Matrix.identity(QQ, 2), Matrix.column(QQ, [1, 2])) == Matrix.column(QQ, [1, 2])
    c = two_step_complex()
    assert cohomology_dim(c, 0) == 1
    assert cohomology_basis(c, 0).dim == 1
