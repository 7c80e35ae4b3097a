"""Brandt module at prime level p via the supersingular 2-isogeny graph over F_{p^2}.

The module has rank g+1; B_2 acts as T_2 and Frobenius (j -> j^p) acts as
-w_p on cusp forms (+1 on the Eisenstein line).  Used as an independent check
of the modular-symbols decomposition and to extend dims/Fricke signs past 3000.
"""

from __future__ import annotations

from collections import deque

import flint
import mpmath
from flint import fmpz_mat, fmpz_poly



def _phi2(ctx_poly, j):
    """Phi_2(j, Y) as a polynomial in Y."""
    return ctx_poly([
        j**3 + 8748000000 * j - 162000 * j**2 - 157464000000000,
        1488 * j**2 + 40773375 * j + 8748000000,
        -(j**2) + 1488 * j - 162000,
        1,
    ])


def _reduced_forms(disc: int) -> list[tuple[int, int, int]]:
    out = []
    a = 1
    while 3 * a * a <= -disc:
        for b in range(-a + 1, a + 1):
            if (b * b - disc) % (4 * a):
                continue
            c = (b * b - disc) // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if flint.fmpz(a).gcd(b).gcd(c) == 1:
                out.append((a, b, c))
        a += 1
    return out


def hilbert_class_poly(disc: int) -> fmpz_poly:
    forms = _reduced_forms(disc)
    prec = 60 + 12 * len(forms) + int(3.7 * len(forms) * (-disc) ** 0.5)
    with mpmath.workdps(prec):
        poly = [mpmath.mpc(1)]
        for a, b, c in forms:
            tau = (-b + mpmath.sqrt(disc)) / (2 * a)
            jv = 1728 * mpmath.kleinj(tau)
            new = [mpmath.mpc(0)] * (len(poly) + 1)
            for i, co in enumerate(poly):
                new[i + 1] += co
                new[i] -= co * jv
            poly = new
        coeffs = [int(mpmath.nint(co.real)) for co in poly]
    return fmpz_poly(coeffs)


def _fundamental_discriminants():
    d = 3
    while True:
        disc = -d
        if disc % 4 in (0, 1):
            m = disc if disc % 4 == 1 else disc // 4
            sqfree = all(m % (k * k) for k in range(2, int(abs(m) ** 0.5) + 1))
            if disc % 4 == 1 and sqfree:
                yield disc
            elif disc % 4 == 0 and sqfree and m % 4 in (2, 3):
                yield disc
        d += 1


def supersingular_seed(p: int, field):
    if p % 4 == 3:
        return field(1728)
    if p % 3 == 2:
        return field(0)
    for disc in _fundamental_discriminants():
        if flint.fmpz(disc).jacobi(p) == -1:
            h = hilbert_class_poly(disc)
            ring = flint.fq_default_poly_ctx(field)
            roots = ring([field(int(c) % p) for c in h.coeffs()]).roots()
            if roots:
                return roots[0][0]


def _phi3(ctx_poly, j):
    """Phi_3(j, Y) as a polynomial in Y."""
    return ctx_poly([
        j**4 + 36864000 * j**3 + 452984832000000 * j**2 + 1855425871872000000000 * j,
        -1069956 * j**3 + 8900222976000 * j**2 - 770845966336000000 * j + 1855425871872000000000,
        2232 * j**3 + 2587918086 * j**2 + 8900222976000 * j + 452984832000000,
        -(j**3) + 2232 * j**2 - 1069956 * j + 36864000,
        1,
    ])


class Brandt:
    def __init__(self, p: int):
        self.p = p
        field = flint.fq_default_ctx(p, 2)
        ring = flint.fq_default_poly_ctx(field)
        seed = supersingular_seed(p, field)
        index = {seed: 0}
        verts = [seed]
        edges: list[dict[int, int]] = []
        queue = deque([seed])
        while queue:
            j = queue.popleft()
            row: dict[int, int] = {}
            for r, mult in _phi2(ring, j).roots():
                if r not in index:
                    index[r] = len(verts)
                    verts.append(r)
                    queue.append(r)
                row[index[r]] = row.get(index[r], 0) + mult
            edges.append(row)
        n = len(verts)
        b2 = fmpz_mat(n, n)
        for i, row in enumerate(edges):
            for k, m in row.items():
                b2[i, k] = m
        self.sigma = [index[j.frobenius()] for j in verts]
        b3 = fmpz_mat(n, n)
        for i, j in enumerate(verts):
            roots = _phi3(ring, j).roots()
            assert sum(m for _, m in roots) == 4
            for r, m in roots:
                b3[i, index[r]] += m
        self.n = n
        self.verts = verts
        self.b2 = b2
        self.b3 = b3

    def decomposition(self) -> list[tuple[int, int]]:
        """(dim, fricke) per Galois orbit of newforms."""
        blocks = self.factor_blocks()
        if any(m != 1 for _, m, _ in blocks):
            raise ValueError(f"no separating operator at level {self.p}")
        return [(d, s) for d, _, s in blocks]

    def factor_blocks(self) -> list[tuple[int, int, int]]:
        """(degree, multiplicity, fricke) of charpoly factors for the best B_2 + c B_3 found."""
        best = None
        for c in range(0, 8):
            blocks = self._decompose(self.b2 + c * self.b3, 3 + 4 * c)
            if all(m == 1 for _, m, _ in blocks):
                return blocks
            if best is None or len(blocks) > len(best):
                best = blocks
        return best

    def _sign_block(self, op: fmpz_mat, eig: int) -> fmpz_mat:
        """op restricted to the eig-eigenspace of the Frobenius permutation."""
        sigma = self.sigma
        reps = [i for i in range(self.n) if i <= sigma[i] and (eig == 1 or i != sigma[i])]
        k = len(reps)
        block = fmpz_mat(k, k)
        for a, i in enumerate(reps):
            for b, r in enumerate(reps):
                # image of e_i + eig*e_sigma(i), read off at representative r
                block[a, b] = op[i, r] + (eig * op[sigma[i], r] if sigma[i] != i else 0)
        return block

    def _decompose(self, op, eis) -> list[tuple[int, int, int]]:
        out = []
        for fr_eig, fricke in ((1, -1), (-1, 1)):
            block = self._sign_block(op, fr_eig)
            if block.nrows() == 0:
                continue
            for f, e in block.charpoly().factor()[1]:
                if fr_eig == 1 and f.degree() == 1 and f(eis) == 0:
                    if e == 1:
                        continue  # Eisenstein line
                    e -= 1
                out.append((f.degree(), e, fricke))
        return out


def _hecke(br: "Brandt", ell: int) -> fmpz_mat:
    """B_ell from the roots of Phi_ell(j, Y) at every supersingular j."""
    from .modpoly import evaluate_in_y

    field = flint.fq_default_ctx(br.p, 2)
    ring = flint.fq_default_poly_ctx(field)
    index = {j: i for i, j in enumerate(br.verts)}
    out = fmpz_mat(br.n, br.n)
    for i, j in enumerate(br.verts):
        roots = evaluate_in_y(ell, ring, field, br.p, j).roots()
        assert sum(m for _, m in roots) == ell + 1
        for r, m in roots:
            out[i, index[r]] += m
    return out


def resolve_blocks(br: "Brandt", ells=(5, 7), tries: int = 40) -> list[tuple[int, int]]:
    """(dim, fricke) per Galois orbit, using B_2, B_3 and further B_ell when needed."""
    import random

    blocks = br.factor_blocks()
    if all(m == 1 for _, m, _ in blocks):
        return [(d, s) for d, _, s in blocks]
    ops = [br.b2, br.b3] + [_hecke(br, ell) for ell in ells]
    eis = [3, 4] + [ell + 1 for ell in ells]
    rng = random.Random(br.p)
    for _ in range(tries):
        cs = [1] + [rng.randint(-3, 3) for _ in ops[1:]]
        op = sum((c * o for c, o in zip(cs[1:], ops[1:])), ops[0] * cs[0])
        out = br._decompose(op, sum(c * e for c, e in zip(cs, eis)))
        if all(m == 1 for _, m, _ in out):
            return [(d, s) for d, _, s in out]
    raise ValueError(f"level {br.p}: still unresolved")
