"""Classical modular polynomials Phi_l(X, Y) from exact integer q-expansions of j.

Phi_l(X, j(tau)) = (X - j(l tau)) * prod_k (X - j((tau + k)/l)).  Power sums of
the roots are integer q-series (the k-sum keeps only exponents divisible by l),
Newton's identities give the elementary symmetric functions, and each of those
is rewritten as a polynomial in j by cancelling principal parts.
"""

from __future__ import annotations

from functools import lru_cache


class Laurent:
    """Truncated integer Laurent series sum c[i] q^(v+i), exact below q^prec."""

    def __init__(self, v: int, c: list[int], prec: int):
        self.v, self.c, self.prec = v, c[: max(prec - v, 0)], prec

    def __mul__(self, o: "Laurent") -> "Laurent":
        prec = min(self.prec + o.v, o.prec + self.v)
        n = prec - self.v - o.v
        out = [0] * max(n, 0)
        for i, a in enumerate(self.c[:n]):
            if a:
                for k, b in enumerate(o.c[: n - i]):
                    out[i + k] += a * b
        return Laurent(self.v + o.v, out, prec)

    def coeff(self, e: int) -> int:
        if e >= self.prec:
            raise ValueError("beyond precision")
        i = e - self.v
        return self.c[i] if 0 <= i < len(self.c) else 0

    def add(self, o: "Laurent", scale: int = 1) -> "Laurent":
        v = min(self.v, o.v)
        prec = min(self.prec, o.prec)
        out = [self.coeff(e) + scale * o.coeff(e) for e in range(v, prec)]
        return Laurent(v, out, prec)


def _j_coefficients(n: int) -> list[int]:
    """Coefficients of q*j(q) up to q^(n-1)."""
    sigma3 = [0] * n
    for d in range(1, n):
        for m in range(d, n, d):
            sigma3[m] += d**3
    e4 = [1] + [240 * sigma3[m] for m in range(1, n)]
    e4_3 = _mul(_mul(e4, e4, n), e4, n)
    eta24 = [1] + [0] * (n - 1)  # prod (1 - q^m)^24
    for m in range(1, n):
        for _ in range(24):
            for i in range(n - 1, m - 1, -1):
                eta24[i] -= eta24[i - m]
    inv = [0] * n
    inv[0] = 1
    for i in range(1, n):
        inv[i] = -sum(eta24[k] * inv[i - k] for k in range(1, i + 1))
    return _mul(e4_3, inv, n)


def _mul(a: list[int], b: list[int], n: int) -> list[int]:
    out = [0] * n
    for i, x in enumerate(a[:n]):
        if x:
            for k, y in enumerate(b[: n - i]):
                out[i + k] += x * y
    return out


@lru_cache(maxsize=None)
def modular_polynomial(ell: int) -> tuple[tuple[int, ...], ...]:
    """coeffs[a][b] of X^a Y^b in Phi_ell (ell prime)."""
    deg = ell + 1
    check = 6
    # q-precision needed for the combined series, and t = q^(1/ell) precision for j(t)^n
    hi = check + 1 + deg * ell  # power-sum precision; each product loses one pole order
    nq = deg * ell + hi + 2
    ncoef = ell * (hi + 1) + deg + 2
    jc = _j_coefficients(max(ncoef, nq) + 2)
    j_q = Laurent(-1, jc[: nq + 1], nq)
    j_t = Laurent(-1, jc[:ncoef], ncoef - 1)  # in t

    power_sums = []
    jq_pow = Laurent(0, [1], nq * ell)
    jt_pow = Laurent(0, [1], ncoef)
    for n in range(1, deg + 1):
        jt_pow = jt_pow * j_t
        # j(l tau)^n = j(q^l)^n: j^n in q, then stretch exponents by ell
        jq_pow = jq_pow * Laurent(-1, jc[: nq + 2], nq + 1)
        lo = -n * ell
        vals = []
        for e in range(lo, hi):
            a = jq_pow.coeff(e // ell) if e % ell == 0 else 0
            b = ell * jt_pow.coeff(e * ell) if e * ell < jt_pow.prec else None
            if b is None:
                raise AssertionError("insufficient t precision")
            vals.append(a + b)
        power_sums.append(Laurent(lo, vals, hi))

    # Newton: k e_k = sum_{i=1..k} (-1)^(i-1) e_{k-i} p_i
    elem = [Laurent(0, [1], hi)]
    for k in range(1, deg + 1):
        acc = Laurent(0, [], hi)
        for i in range(1, k + 1):
            acc = acc.add(elem[k - i] * power_sums[i - 1], (-1) ** (i - 1))
        assert all(x % k == 0 for x in acc.c)
        elem.append(Laurent(acc.v, [x // k for x in acc.c], acc.prec))

    j_pows = [Laurent(0, [1], nq)]
    for _ in range(deg + 1):
        j_pows.append(j_pows[-1] * j_q)

    coeffs = [[0] * (deg + 1) for _ in range(deg + 1)]
    for k in range(deg + 1):
        s = elem[k]
        poly = {}
        for e in range(s.v, 1):
            c = s.coeff(e)
            if c:
                poly[-e] = c
                s = s.add(j_pows[-e], -c)
        assert all(s.coeff(e) == 0 for e in range(s.v, s.prec)), f"e_{k} is not a polynomial in j"
        for b, c in poly.items():
            coeffs[deg - k][b] += (-1) ** k * c
    return tuple(tuple(r) for r in coeffs)


def evaluate_in_y(ell: int, ctx_poly, field, p: int, j):
    """Phi_ell(j, Y) over a finite field of characteristic p."""
    co = modular_polynomial(ell)
    deg = ell + 1
    ys = []
    for b in range(deg + 1):
        acc = field(0)
        for a in range(deg, -1, -1):
            acc = acc * j + field(co[a][b] % p)
        ys.append(acc)
    return ctx_poly(ys)
