"""Per-level Hecke decomposition of H_1(X_0(p), Z) and modular-kernel exponents."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from flint import fmpq_mat, fmpz_mat, fmpz_poly, nmod_mat, nmod_poly

from . import linalg
from .modsym import ModularSymbols

# big primes for the central-value test (reduction mod q)
_TEST_PRIMES = (4611686018427388039, 4611686018427387847)


@dataclass
class Factor:
    poly: fmpz_poly  # irreducible factor of the separating operator's charpoly
    dim: int
    fricke: int
    traces: list[int] = field(default_factory=list)  # Tr a_2, Tr a_3, ...
    central_value_nonzero: bool | None = None


class Level:
    def __init__(self, p: int, trace_primes=(2, 3, 5, 7, 11, 13)):
        self.p = p
        self.ms = ModularSymbols(p)
        ms = self.ms
        self._rational_hecke = {ell: ms.hecke_rational(ell) for ell in trace_primes if ell != p}
        self.lattice = ms.cuspidal_lattice()
        self.genus = self.lattice.nrows() // 2
        self.hecke = {ell: linalg.restrict(self.lattice, ms.to_lattice(m))
                      for ell, m in self._rational_hecke.items()}
        self.fricke_rational = ms.fricke_rational()
        self.fricke = linalg.restrict(self.lattice, ms.to_lattice(self.fricke_rational))
        self._decompose()
        self._spaces: dict[int, tuple[fmpz_mat, fmpz_mat]] = {}

    # ------------------------------------------------------------------
    def _separating_operator(self) -> tuple[fmpz_mat, tuple[int, ...]]:
        """Smallest integer combination of Hecke operators with (charpoly) = (squarefree)^2."""
        keys = sorted(self.hecke)
        rng = random.Random(self.p)
        combos = [(1,)] + [(1, c) for c in range(1, 4)]
        combos += [tuple([1] + [rng.randint(-3, 3) for _ in keys[1:]]) for _ in range(12)]
        for coeffs in combos:
            op = fmpz_mat(2 * self.genus, 2 * self.genus)
            for c, ell in zip(coeffs, keys):
                op += c * self.hecke[ell]
            if self.genus == 0:
                return op, coeffs
            facs = op.charpoly().factor()[1]
            if all(e == 2 for _, e in facs):
                return op, coeffs
        raise RuntimeError(f"no separating Hecke operator found at level {self.p}")

    def _decompose(self) -> None:
        self.op, self.op_coeffs = self._separating_operator()
        factors = []
        for sign in (1, -1):
            sub = linalg.involution_eigenlattice(self.fricke, sign)
            if sub.nrows() == 0:
                continue
            cp = linalg.restrict(sub, self.op).charpoly()
            for f, e in cp.factor()[1]:
                assert e == 2
                factors.append(Factor(poly=f, dim=f.degree(), fricke=sign))
        assert sum(f.dim for f in factors) == self.genus
        self.factors = factors

    # ------------------------------------------------------------------
    def _factor_space(self, i: int) -> tuple[fmpz_mat, fmpz_mat]:
        """Saturated left kernel of f_i(T) (rows) and a rational right kernel (columns)."""
        if i not in self._spaces:
            fm = linalg.poly_eval_mat(self.factors[i].poly, self.op)
            left = linalg.right_nullspace(fm.transpose()).transpose()
            self._spaces[i] = (linalg.saturate_small(left), linalg.right_nullspace(fm))
        return self._spaces[i]

    def compute_traces(self) -> None:
        """Tr a_ell on each factor, computed modulo a large prime and lifted."""
        q = _TEST_PRIMES[0]
        op = linalg.mod_matrix(self.op, q)
        hecke = {ell: linalg.mod_matrix(m, q) for ell, m in self.hecke.items()}
        for f in self.factors:
            acc = nmod_mat(op.nrows(), op.ncols(), q)
            for c in reversed([int(x) for x in f.poly.coeffs()]):
                acc = acc * op
                for k in range(acc.nrows()):
                    acc[k, k] += c
            x, k = acc.transpose().nullspace()
            basis = nmod_mat([[x[r, c] for c in range(k)] for r in range(x.nrows())], q).transpose()
            piv = _pivots_mod(basis)
            sub = nmod_mat([[basis[r, c] for c in piv] for r in range(k)], q)
            traces = []
            for ell in sorted(hecke):
                img = basis * hecke[ell]
                img_p = nmod_mat([[img[r, c] for c in piv] for r in range(k)], q)
                coords = img_p * sub.inv()
                tr = sum(int(coords[r, r]) for r in range(k)) % q
                tr = tr - q if tr > q // 2 else tr
                assert tr % 2 == 0  # each eigenform appears twice in homology
                traces.append(tr // 2)
            f.traces = traces

    def kernel_exponent(self, members) -> int:
        """Exponent of A ∩ A' for A = sum of the listed factors, A' its complement.

        Equals the exponent of pi_A(L) / L_A with pi_A the rational projection
        along A'; computed as the lcm of denominators of the A-coordinates of
        the standard basis.
        """
        members = sorted(members)
        if not members or len(members) == len(self.factors):
            return 1
        if 2 * sum(self.factors[i].dim for i in members) > self.genus:
            # A and its complement share the same intersection; use the smaller side
            members = [i for i in range(len(self.factors)) if i not in members]
        l_a, c = self._factor_space(members[0])
        for i in members[1:]:
            l_i, c_i = self._factor_space(i)
            l_a = linalg.vstack(l_a, l_i)
            c = linalg.hstack(c, c_i)
        l_a = linalg.saturate_small(l_a)
        coords = fmpq_mat(c) * (fmpq_mat(l_a * c)).inv()
        return linalg.denominators_lcm(coords)

    # ------------------------------------------------------------------
    def central_value_test(self) -> None:
        """Mark factors whose L(f,1) is nonzero (winding element projects nontrivially)."""
        ms = self.ms
        keys = sorted(self._rational_hecke)
        winding = ms.coords_of({0: 1})
        votes = []
        for q in _TEST_PRIMES:
            op = None
            for c, ell in zip(self.op_coeffs, keys):
                m = linalg.mod_matrix(self._rational_hecke[ell], q)
                op = m * c if op is None else op + m * c
            v = linalg.mod_matrix(ms.rational_vector(winding), q)
            mu = _krylov_minpoly(v, op, q)
            full = nmod_poly([1], q)
            for f in self.factors:
                full *= nmod_poly([int(c) for c in f.poly.coeffs()], q)
            # separability mod q is required for the divisibility test to be meaningful
            eis = nmod_poly([-(self._eisenstein_value()), 1], q)
            total = full * eis
            assert total.gcd(total.derivative()).degree() == 0
            votes.append([mu % nmod_poly([int(c) for c in f.poly.coeffs()], q) == 0
                          for f in self.factors])
        assert votes[0] == votes[1]
        for f, nz in zip(self.factors, votes[0]):
            f.central_value_nonzero = nz

    def _eisenstein_value(self) -> int:
        keys = sorted(self._rational_hecke)
        return sum(c * (ell + 1) for c, ell in zip(self.op_coeffs, keys))


def _krylov_minpoly(v: nmod_mat, op: nmod_mat, q: int) -> nmod_poly:
    n = op.nrows()
    vecs = [v]
    for _ in range(n):
        vecs.append(vecs[-1] * op)
    k = nmod_mat([[vecs[i][0, j] for j in range(n)] for i in range(n + 1)], q)
    r, rank = k.transpose().rref()
    # first non-pivot column of the transposed Krylov matrix
    col = rank
    coeffs = [-(r[i, col]) for i in range(rank)] + [1]
    return nmod_poly([int(c) for c in coeffs], q)


def _pivots_mod(m: nmod_mat) -> list[int]:
    r, rank = m.rref()
    piv = []
    row = 0
    for j in range(m.ncols()):
        if row < rank and r[row, j] != 0:
            piv.append(j)
            row += 1
    return piv
