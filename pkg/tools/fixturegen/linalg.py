"""Exact lattice helpers on top of python-flint.

Convention throughout: vectors are rows, a matrix ``T`` acts by ``v -> v * T``.
"""

from __future__ import annotations

from math import lcm

from flint import fmpq, fmpq_mat, fmpz_mat, fmpz_poly, nmod_mat


def identity(n: int) -> fmpz_mat:
    m = fmpz_mat(n, n)
    for i in range(n):
        m[i, i] = 1
    return m


def rows(m, idx) -> fmpz_mat:
    return fmpz_mat([[m[i, j] for j in range(m.ncols())] for i in idx])


def hstack(a: fmpz_mat, b: fmpz_mat) -> fmpz_mat:
    assert a.nrows() == b.nrows()
    return fmpz_mat(
        [[a[i, j] for j in range(a.ncols())] + [b[i, j] for j in range(b.ncols())]
         for i in range(a.nrows())]
    )


def vstack(a: fmpz_mat, b: fmpz_mat) -> fmpz_mat:
    assert a.ncols() == b.ncols()
    return fmpz_mat(a.tolist() + b.tolist())


def int_left_kernel(m: fmpz_mat) -> fmpz_mat:
    """Z-basis (rows) of {x in Z^k : x * m = 0}; automatically saturated."""
    k, n = m.nrows(), m.ncols()
    h = hstack(m, identity(k)).hnf()
    out = []
    for i in range(k):
        if all(h[i, j] == 0 for j in range(n)):
            out.append([h[i, n + j] for j in range(k)])
    if not out:
        return fmpz_mat(0, k)
    return fmpz_mat(out)


def involution_eigenlattice(w: fmpz_mat, sign: int) -> fmpz_mat:
    """Z-basis (rows) of {x : x * w = sign * x} for an integral involution w.

    Such x satisfy 2x = x * (w + sign), so the eigenlattice is the part of
    (1/2) Im(w + sign) that is integral; only an HNF without transform and
    linear algebra mod 2 are needed (the transform-tracking HNF in
    int_left_kernel can blow up at a few levels).
    """
    n = w.nrows()
    if w * w != identity(n):
        raise ValueError("not an involution")
    img = w + sign * identity(n)
    h = img.hnf()
    rank = next((i for i in range(n) if all(h[i, j] == 0 for j in range(n))), n)
    if rank == 0:
        return fmpz_mat(0, n)
    h = rows(h, range(rank))
    # y in Z^rank with y * h == 0 mod 2
    ker, k = nmod_mat(h.tolist(), 2).transpose().nullspace()
    kb = nmod_mat([[int(ker[i, j]) for i in range(rank)] for j in range(k)], 2).rref()[0] if k else None
    basis, pivots = [], set()
    for r in range(k):
        v = [int(kb[r, j]) for j in range(rank)]
        pivots.add(next(j for j in range(rank) if v[j]))
        basis.append(v)
    basis += [[2 if j == i else 0 for j in range(rank)] for i in range(rank) if i not in pivots]
    out = fmpz_mat(basis) * h
    return fmpz_mat([[int(out[i, j]) // 2 for j in range(n)] for i in range(rank)])


def saturate_rowspace(m: fmpz_mat) -> fmpz_mat:
    """Z-basis of (Q-rowspace of m) intersected with Z^n."""
    # x lies in the rowspace iff x is orthogonal to the right kernel of m
    right = int_left_kernel(m.transpose())  # rows y with m * y^T = 0
    if right.nrows() == 0:
        return identity(m.ncols())
    return int_left_kernel(right.transpose())


def pivot_columns(m: fmpz_mat) -> list[int]:
    r, _, rank = m.rref()
    piv = []
    row = 0
    for j in range(m.ncols()):
        if row < rank and r[row, j] != 0:
            piv.append(j)
            row += 1
    return piv


def coordinates(basis: fmpz_mat, vecs: fmpz_mat) -> fmpq_mat:
    """Rational X with X * basis == vecs (vecs assumed to lie in the rowspace)."""
    piv = pivot_columns(basis)
    b = fmpq_mat([[basis[i, j] for j in piv] for i in range(basis.nrows())])
    v = fmpq_mat([[vecs[i, j] for j in piv] for i in range(vecs.nrows())])
    x = (b.transpose().solve(v.transpose())).transpose()
    return x


def to_fmpz(m: fmpq_mat) -> fmpz_mat:
    out = fmpz_mat(m.nrows(), m.ncols())
    for i in range(m.nrows()):
        for j in range(m.ncols()):
            q = m[i, j]
            if q.q != 1:
                raise ValueError("matrix is not integral")
            out[i, j] = q.p
    return out


def restrict(basis: fmpz_mat, op: fmpz_mat) -> fmpz_mat:
    """Matrix of ``op`` on the (op-stable, saturated) sublattice spanned by ``basis``."""
    return to_fmpz(coordinates(basis, basis * op))


def poly_eval_mat(f: fmpz_poly, m: fmpz_mat) -> fmpz_mat:
    coeffs = [int(c) for c in f.coeffs()]
    n = m.nrows()
    acc = fmpz_mat(n, n)
    for c in reversed(coeffs):
        acc = acc * m
        if c:
            for i in range(n):
                acc[i, i] += c
    return acc


def cokernel_exponent(square: fmpz_mat) -> int:
    """Exponent of Z^n / rowspace(square) for a full-rank square matrix."""
    d = square.snf()
    e = 1
    for i in range(d.nrows()):
        e = lcm(e, abs(int(d[i, i])))
    return e


def denominators_lcm(m: fmpq_mat) -> int:
    e = 1
    for i in range(m.nrows()):
        for j in range(m.ncols()):
            e = lcm(e, int(m[i, j].q))
    return e


def mod_matrix(m, q: int) -> nmod_mat:
    out = nmod_mat(m.nrows(), m.ncols(), q)
    for i in range(m.nrows()):
        for j in range(m.ncols()):
            x = m[i, j]
            if isinstance(x, fmpq):
                out[i, j] = int(x.p) * pow(int(x.q), -1, q) % q
            else:
                out[i, j] = int(x) % q
    return out


def right_nullspace(m: fmpz_mat) -> fmpz_mat:
    """Columns spanning {y : m * y = 0} over Q (not saturated)."""
    x, k = m.nullspace()
    return fmpz_mat([[x[i, j] for j in range(k)] for i in range(x.nrows())]) if k else fmpz_mat(m.ncols(), 0)


def saturate_small(m: fmpz_mat) -> fmpz_mat:
    """Saturation in Z^n of the row lattice of a full-row-rank r x n matrix, r small."""
    r = m.nrows()
    if r == 0:
        return m
    piv = pivot_columns(m)
    assert len(piv) == r
    mp = fmpq_mat([[m[i, j] for j in piv] for i in range(r)])
    n_rat = mp.inv() * fmpq_mat(m)  # identity on the pivot columns
    d = denominators_lcm(n_rat)
    if d == 1:
        return to_fmpz(n_rat)
    n_int = to_fmpz(n_rat * d)
    # y in Z^r with y * n_int == 0 (mod d); only the column lattice of n_int matters
    cols = n_int.transpose()
    h = vstack(cols, identity(r) * d).hnf()
    h = rows(h, range(r))
    sols = int_left_kernel(vstack(h.transpose(), identity(r) * d))
    y = fmpz_mat([[sols[i, j] for j in range(r)] for i in range(sols.nrows())])
    y = rows(y.hnf(), range(r))
    return to_fmpz(fmpq_mat(y) * n_rat)
