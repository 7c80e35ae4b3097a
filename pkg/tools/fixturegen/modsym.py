"""Weight-2 modular symbols for Gamma_0(p), p an odd prime.

Manin symbols (c:d) in P^1(Z/p) are indexed by x for (x:1) and p for (1:0).
The integral structure is the Z-span of Manin symbols in the rational space
(relative homology modulo torsion); H_1(X_0(p), Z) is its boundary kernel.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

from flint import fmpq, fmpq_mat, fmpz_mat

from . import linalg


def merel_matrices(n: int) -> list[tuple[int, int, int, int]]:
    """Heilbronn-Merel set: a > b >= 0, d > c >= 0, ad - bc = n."""
    out = []
    for a in range(1, n + 1):
        for d in range(1, n + 1):
            for b in range(0, a):
                rem = a * d - n
                if rem < 0:
                    continue
                if b == 0:
                    if rem == 0:
                        out.extend((a, 0, c, d) for c in range(0, d))
                    continue
                if rem % b == 0:
                    c = rem // b
                    if c < d:
                        out.append((a, b, c, d))
    return out


def continued_fraction_convergents(num: int, den: int) -> list[tuple[int, int]]:
    """Convergents p_k/q_k of num/den, den > 0."""
    out = []
    p2, q2, p1, q1 = 0, 1, 1, 0
    while den:
        a, r = divmod(num, den)
        p, q = a * p1 + p2, a * q1 + q2
        out.append((p, q))
        p2, q2, p1, q1 = p1, q1, p, q
        num, den = den, r
    return out


class ModularSymbols:
    def __init__(self, p: int):
        if p < 3:
            raise ValueError("need an odd prime level")
        self.p = p
        self.n = p + 1
        self._inv = [0] + [pow(x, -1, p) for x in range(1, p)]
        self._relations()
        self._lattice()

    # -- P^1(Z/p) -------------------------------------------------------
    def index(self, c: int, d: int) -> int:
        p = self.p
        c %= p
        d %= p
        if d:
            return c * self._inv[d] % p
        if not c:
            raise ValueError("degenerate symbol")
        return p

    def symbol(self, i: int) -> tuple[int, int]:
        return (i, 1) if i < self.p else (1, 0)

    # -- presentation ---------------------------------------------------
    def _relations(self) -> None:
        n = self.n
        parent = list(range(n))
        sign = [1] * n
        zero = [False] * n

        def find(i):
            s = 1
            path = []
            while parent[i] != i:
                path.append(i)
                s *= sign[i]
                i = parent[i]
            root = i
            # path compression
            acc = s
            for j in path:
                old = sign[j]
                parent[j] = root
                sign[j] = acc
                acc *= old
            return root, s

        def union(i, j, s):
            # x_i = s * x_j
            ri, si = find(i)
            rj, sj = find(j)
            t = si * s * sj
            if ri == rj:
                if t == -1:
                    zero[ri] = True
                return
            parent[ri] = rj
            sign[ri] = t
            if zero[ri]:
                zero[rj] = True

        for i in range(n):
            c, d = self.symbol(i)
            union(i, self.index(d, -c), -1)

        roots = sorted({find(i)[0] for i in range(n)})
        live = [r for r in roots if not zero[r]]
        col = {r: k for k, r in enumerate(live)}

        rels = set()
        for i in range(n):
            c, d = self.symbol(i)
            acc: dict[int, int] = {}
            for j in (i, self.index(d, -c - d), self.index(-c - d, c)):
                r, s = find(j)
                if zero[r]:
                    continue
                acc[col[r]] = acc.get(col[r], 0) + s
            item = tuple(sorted((k, v) for k, v in acc.items() if v))
            if item:
                # normalise overall sign for dedup
                if item[0][1] < 0:
                    item = tuple((k, -v) for k, v in item)
                rels.add(item)

        ncol = len(live)
        rels = sorted(rels)
        if rels:
            rm = fmpz_mat(len(rels), ncol)
            for r, item in enumerate(rels):
                for k, v in item:
                    rm[r, k] = v
            red, den, rank = rm.rref()
        else:
            red, den, rank = fmpz_mat(0, ncol), 1, 0
        den = int(den)
        pivots = {}
        row = 0
        for j in range(ncol):
            if row < rank and red[row, j] != 0:
                pivots[j] = row
                row += 1
        free = [j for j in range(ncol) if j not in pivots]
        fpos = {j: k for k, j in enumerate(free)}
        dim = len(free)

        den = 1
        for j, r in pivots.items():
            den = lcm(den, abs(int(red[r, j])))
        # column j of the relation quotient, scaled by the common denominator
        colvec: list[dict[int, int]] = []
        for j in range(ncol):
            if j in fpos:
                colvec.append({fpos[j]: den})
                continue
            r = pivots[j]
            piv = int(red[r, j])
            v = {}
            for f in free:
                e = int(red[r, f])
                if e:
                    v[fpos[f]] = -e * den // piv
            colvec.append(v)
        self.den = den

        # symbol i  ->  (column, sign) or None when the symbol vanishes
        where = []
        for i in range(n):
            r, s = find(i)
            where.append(None if zero[r] else (col[r], s))
        self.dim = dim
        self.colvec = colvec
        self.where = where
        self.basis_symbols = [live[j] for j in free]

    def coords_of(self, combo: dict[int, int]) -> list[int]:
        """Coordinates in the free-symbol basis, scaled by ``self.den``."""
        v = [0] * self.dim
        for i, c in combo.items():
            w = self.where[i]
            if not c or w is None:
                continue
            k, s = w
            for pos, x in self.colvec[k].items():
                v[pos] += c * s * x
        return v

    # -- operators on the rational space ---------------------------------
    def _operator(self, image) -> fmpq_mat:
        rows_ = [self.coords_of(image(i)) for i in self.basis_symbols]
        return fmpq_mat(fmpz_mat(rows_)) / self.den

    def hecke_rational(self, ell: int) -> fmpq_mat:
        mats = merel_matrices(ell)
        p = self.p

        def image(i):
            c, d = self.symbol(i)
            out: dict[int, int] = {}
            for a, b, cc, dd in mats:
                u, v = c * a + d * cc, c * b + d * dd
                if u % p == 0 and v % p == 0:
                    continue
                j = self.index(u, v)
                out[j] = out.get(j, 0) + 1
            return out

        return self._operator(image)

    def fricke_rational(self) -> fmpq_mat:
        p = self.p

        def zero_to(num, den):
            # {0, num/den} as Manin symbols
            out = {0: 1}
            prev_q = 0
            for k, (_, q) in enumerate(continued_fraction_convergents(num, den)):
                s = -1 if k % 2 == 0 else 1  # (-1)^(k-1)
                j = self.index(q, s * prev_q)
                out[j] = out.get(j, 0) + 1
                prev_q = q
            return out

        def image(i):
            if i == 0:
                return {0: -1}
            if i == p:
                return {0: 1}
            # W(x:1) = {inf, -x/p} = {0, -x/p} - {0, inf}
            out = zero_to(-i, p)
            out[0] = out.get(0, 0) - 1
            return out

        return self._operator(image)

    def star_rational(self) -> fmpq_mat:
        def image(i):
            c, d = self.symbol(i)
            return {self.index(-c, d): 1}

        return self._operator(image)

    def boundary(self) -> list[Fraction]:
        """Coefficient of [inf] in the boundary of each basis symbol."""
        out = []
        for i in self.basis_symbols:
            c, d = self.symbol(i)
            out.append(Fraction((c % self.p == 0) - (d % self.p == 0)))
        return out

    # -- integral structure ---------------------------------------------
    def _lattice(self) -> None:
        den = self.den
        big = fmpz_mat(len(self.colvec), self.dim)
        for r, v in enumerate(self.colvec):
            for pos, x in v.items():
                big[r, pos] = x
        h = big.hnf()
        self.lam = linalg.rows(h, range(self.dim))  # Lambda basis, scaled by den
        self._lam_q = fmpq_mat(self.lam) / den
        self._lam_inv = self._lam_q.inv()

    def to_lattice(self, op: fmpq_mat) -> fmpz_mat:
        """Operator in the basis of Lambda (the Z-span of Manin symbols)."""
        return linalg.to_fmpz(self._lam_q * op * self._lam_inv)

    def cuspidal_lattice(self) -> fmpz_mat:
        """Rows (in Lambda coordinates) spanning H_1(X_0(p), Z)."""
        b = fmpq_mat(self.dim, 1, [fmpq(x.numerator, x.denominator) for x in self.boundary()])
        vals = self._lam_q * b
        col = linalg.to_fmpz(vals)
        return linalg.int_left_kernel(col)

    def rational_vector(self, scaled: list[int]) -> fmpq_mat:
        return fmpq_mat(fmpz_mat([scaled])) / self.den
