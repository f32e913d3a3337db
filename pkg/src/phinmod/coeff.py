"""Exact arithmetic in the coefficient field E and its p-adic valuation.

E is modelled as ``L[w]/(w^e - pi_L)`` where ``L = Q(zeta_m)``.  When ``p`` does
not divide ``m`` the base uniformizer ``pi_L`` is ``p`` itself; otherwise it is
``1 - zeta_{p^a}`` with ``p^a || m``.  In both cases ``w^e - pi_L`` is
Eisenstein at every prime above ``p``, so E is a field and the valuation of an
element can be read off its ``w``-parts.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Iterable, Sequence

import sympy

INF = float("inf")


class CoeffError(ValueError):
    """Raised on invalid coefficient-field operations."""


def _vp(n: int, p: int) -> int:
    if n == 0:
        raise CoeffError("valuation of 0")
    n = abs(n)
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k


def euler_phi(n: int) -> int:
    return int(sympy.totient(n))


@lru_cache(maxsize=None)
def cyclotomic_coeffs(n: int) -> tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, low degree first."""
    x = sympy.Symbol("x")
    poly = sympy.Poly(sympy.cyclotomic_poly(n, x), x)
    return tuple(int(c) for c in reversed(poly.all_coeffs()))


# --- polynomial helpers over Z/p^N (lists, low degree first) -------------------


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: Sequence[int], mod: int) -> list[int]:
    return _trim([c % mod for c in a])


def _pmul(a: Sequence[int], b: Sequence[int], mod: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, mod)


def _psub(a: Sequence[int], b: Sequence[int], mod: int) -> list[int]:
    n = max(len(a), len(b))
    return _pmod([(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)], mod)


def _padd(a: Sequence[int], b: Sequence[int], mod: int) -> list[int]:
    n = max(len(a), len(b))
    return _pmod([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)], mod)


def _pdivmod_monic(a: Sequence[int], g: Sequence[int], mod: int) -> tuple[list[int], list[int]]:
    r = _pmod(a, mod)
    dg = len(g) - 1
    if len(r) - 1 < dg:
        return [], r
    q = [0] * (len(r) - dg)
    r = list(r)
    for k in range(len(r) - 1, dg - 1, -1):
        c = r[k] % mod
        if c:
            q[k - dg] = c
            for i in range(dg + 1):
                r[k - dg + i] -= c * g[i]
    return _pmod(q, mod), _pmod(r[:dg], mod)


def _pdivmod_field(a: Sequence[int], b: Sequence[int], p: int) -> tuple[list[int], list[int]]:
    b = _pmod(b, p)
    inv = pow(b[-1], -1, p)
    monic = [(c * inv) % p for c in b]
    q, r = _pdivmod_monic(a, monic, p)
    return [(c * inv) % p for c in q], r


def _pxgcd(a: Sequence[int], b: Sequence[int], p: int) -> tuple[list[int], list[int], list[int]]:
    r0, r1 = _pmod(a, p), _pmod(b, p)
    s0, s1, t0, t1 = [1], [], [], [1]
    while r1:
        q, r = _pdivmod_field(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _psub(s0, _pmul(q, s1, p), p)
        t0, t1 = t1, _psub(t0, _pmul(q, t1, p), p)
    inv = pow(r0[-1], -1, p)
    return [(c * inv) % p for c in r0], [(c * inv) % p for c in s0], [(c * inv) % p for c in t0]


class PAdicEmbedding:
    """Embedding of ``Z[zeta_m]`` into the ring of integers of ``Q_p(zeta_m)``.

    The unramified part ``Z_p[zeta_{m'}]`` is presented as ``Z_p[Y]/(g)`` with
    ``g`` a Hensel-lifted factor of the ``m'``-th cyclotomic polynomial; the
    ``p``-power part is ``[pi]/(Phi_{p^a}(1 + pi))`` which is Eisenstein.
    Elements are tracked modulo ``p^N``; ``N`` grows on demand.
    """

    def __init__(self, p: int, m: int, precision: int = 8):
        self.p = p
        self.m = m
        a, mp = 0, m
        while mp % p == 0:
            mp //= p
            a += 1
        self.a = a
        self.m_prime = mp
        self.ram = euler_phi(p**a)
        self._lock = threading.Lock()
        phi_mp = list(cyclotomic_coeffs(mp))
        x = sympy.Symbol("x")
        if mp == 1:
            g0 = [(-1) % p, 1]
        else:
            _, facs = sympy.Poly(list(reversed(phi_mp)), x, modulus=p).factor_list()
            cands = []
            for fac, _mult in facs:
                coeffs = [int(c) % p for c in reversed(fac.all_coeffs())]
                cands.append(coeffs)
            g0 = min(cands, key=lambda c: (len(c), c))
        self.f = len(g0) - 1
        self._g0 = g0
        self._h0 = _pdivmod_field(phi_mp, g0, p)[0]
        _, s, t = _pxgcd(g0, self._h0, p)
        self._s, self._t = s, t
        self._phi_mp = phi_mp
        self.N = 0
        self.g: list[int] = []
        self._h: list[int] = []
        self._images: list[list[list[int]]] = []
        self.set_precision(max(precision, 1))

    # the lifted factor is unique given g mod p, so refinement is compatible
    def _lift(self, N: int) -> tuple[list[int], list[int]]:
        p = self.p
        g, h = list(self._g0), list(self._h0)
        for k in range(1, N):
            mod = p ** (k + 1)
            err = _psub(self._phi_mp, _pmul(g, h, mod), mod)
            err = [c // p**k for c in err]
            dg = _pdivmod_monic(_pmul(self._t, err, p), self._g0, p)[1]
            dh = _pdivmod_field(_pmul(self._s, err, p), self._h0, p)[1] if len(self._h0) > 1 else []
            g = _padd(g, [c * p**k for c in dg], mod)
            h = _padd(h, [c * p**k for c in dh], mod)
            g = g + [0] * (self.f + 1 - len(g))
            g[self.f] = 1
        return g, h

    def _eisenstein(self, mod: int) -> list[int]:
        # Phi_{p^a}(1 + pi) = sum_{k<p} (1+pi)^{k p^{a-1}}
        p, a = self.p, self.a
        x = sympy.Symbol("x")
        poly = sympy.Poly(sympy.cyclotomic_poly(p**a, x).subs(x, x + 1), x)
        return [int(c) % mod for c in reversed(poly.all_coeffs())]

    def set_precision(self, N: int) -> None:
        with self._lock:
            if N <= self.N:
                return
            self.g, self._h = self._lift(N)
            mod = self.p**N
            eis = self._eisenstein(mod) if self.a else [0, 1]
            mp, pa = self.m_prime, self.p**self.a
            u = pow(pa, -1, mp) if mp > 1 else 0
            w = pow(mp, -1, pa) if pa > 1 else 0
            images = []
            for t in range(euler_phi(self.m)):
                ypart = [0] * (((u * t) % mp) if mp > 1 else 0) + [1]
                ypart = _pdivmod_monic(ypart, self.g, mod)[1]
                if self.a:
                    base = [1]
                    for _ in range((w * t) % pa):
                        base = _pmul(base, [1, 1], mod)
                    pipart = _pdivmod_monic(base, eis, mod)[1]
                else:
                    pipart = [1]
                img = [[0] * self.f for _ in range(self.ram)]
                for i, ci in enumerate(pipart):
                    for k, dk in enumerate(ypart):
                        img[i][k] = (ci * dk) % mod
                images.append(img)
            self._images = images
            self.N = N

    def reduce(self, coeffs: Sequence[int]) -> list[list[int]]:
        mod = self.p**self.N
        out = [[0] * self.f for _ in range(self.ram)]
        for c, img in zip(coeffs, self._images):
            if c:
                for i in range(self.ram):
                    row, orow = img[i], out[i]
                    for k in range(self.f):
                        orow[k] += c * row[k]
        return [[c % mod for c in row] for row in out]

    def valuation_int(self, coeffs: Sequence[int], norm_bound: int | None = None) -> Fraction:
        """Valuation of an integral element of ``Z[zeta_m]`` (``v(p) = 1``)."""
        if not any(coeffs):
            raise CoeffError("valuation of 0")
        while True:
            N = self.N
            best: Fraction | None = None
            for i, row in enumerate(self.reduce(coeffs)):
                for c in row:
                    if c:
                        cand = Fraction(_vp(c, self.p)) + Fraction(i, self.ram)
                        if best is None or cand < best:
                            best = cand
            if best is not None:
                return best
            if norm_bound is not None and N > norm_bound + 1:
                raise CoeffError("valuation exceeded norm bound")
            self.set_precision(2 * N)


class CoeffField:
    """The context ``(p, m, e)`` shared by all elements of one model of E."""

    _registry: dict[tuple[int, int, int], "CoeffField"] = {}

    def __new__(cls, p: int, m: int, e: int = 1):
        key = (p, m, e)
        if key in cls._registry:
            return cls._registry[key]
        self = super().__new__(cls)
        self._setup(p, m, e)
        cls._registry[key] = self
        return self

    def _setup(self, p: int, m: int, e: int) -> None:
        if m < 1 or e < 1:
            raise CoeffError("m and e must be positive")
        if not sympy.isprime(p):
            raise CoeffError(f"p={p} is not prime")
        self.p, self.m, self.e = p, m, e
        self.phi = euler_phi(m)
        self.dim = self.phi * e
        self.cyclo = cyclotomic_coeffs(m)
        a, pa = 0, 1
        while m % (pa * p) == 0:
            pa *= p
            a += 1
        self.p_power = pa
        self.ram_L = euler_phi(pa)
        # ζ^k reduction table for k < 2*phi
        red: list[tuple[int, ...]] = []
        for k in range(2 * self.phi):
            vec = [0] * (k + 1)
            vec[k] = 1
            red.append(tuple(self._reduce_poly(vec)))
        self._red = red
        if a:
            base = [0] * self.phi
            base[0] = 1
            z = self._zeta_vec((m // pa) % m)
            self.pi_L = tuple(b - c for b, c in zip(base, z))
        else:
            pl = [0] * self.phi
            pl[0] = p
            self.pi_L = tuple(pl)
        self.value_group = Fraction(1, e * self.ram_L)
        self.embedding = PAdicEmbedding(p, m)
        self._inv_cache: dict[tuple, "ECoeff"] = {}
        self._val_cache: dict[tuple, Fraction] = {}

    def __repr__(self) -> str:
        return f"CoeffField(p={self.p}, m={self.m}, e={self.e})"

    def __reduce__(self):
        return (CoeffField, (self.p, self.m, self.e))

    # -- internal polynomial reduction in L = Q(zeta_m)
    def _reduce_poly(self, vec: list) -> list:
        n = self.phi
        cyc = self.cyclo
        vec = list(vec)
        for k in range(len(vec) - 1, n - 1, -1):
            c = vec[k]
            if c:
                vec[k] = 0
                for i in range(n):
                    vec[k - n + i] -= c * cyc[i]
        return (vec + [0] * n)[:n]

    def _zeta_vec(self, k: int) -> tuple[int, ...]:
        k %= self.m
        if k < 2 * self.phi:
            return self._red[k]
        vec = [0] * (k + 1)
        vec[k] = 1
        return tuple(self._reduce_poly(vec))

    def _lmul(self, x: Sequence[int], y: Sequence[int]) -> list[int]:
        n = self.phi
        out = [0] * (2 * n - 1)
        for i, a in enumerate(x):
            if a:
                for j, b in enumerate(y):
                    if b:
                        out[i + j] += a * b
        res = out[:n]
        red = self._red
        for k in range(n, 2 * n - 1):
            c = out[k]
            if c:
                r = red[k]
                for i in range(n):
                    if r[i]:
                        res[i] += c * r[i]
        return res

    # -- constructors
    def make(self, num: Sequence[int], den: int = 1) -> "ECoeff":
        return ECoeff._normalized(self, list(num), den)

    def zero(self) -> "ECoeff":
        return ECoeff(self, (0,) * self.dim, 1)

    def one(self) -> "ECoeff":
        return self.rational(1)

    def rational(self, r) -> "ECoeff":
        r = Fraction(r)
        num = [0] * self.dim
        num[0] = r.numerator
        return ECoeff(self, tuple(num), r.denominator)

    def zeta(self, k: int = 1) -> "ECoeff":
        """``zeta_m^k``."""
        num = list(self._zeta_vec(k)) + [0] * (self.dim - self.phi)
        return ECoeff(self, tuple(num), 1)

    def root_of_unity(self, k: int, order: int) -> "ECoeff":
        """``zeta_order^k``; ``order`` must divide ``m``."""
        if self.m % order:
            raise CoeffError(f"E does not contain the {order}-th roots of unity (m={self.m})")
        return self.zeta((self.m // order) * k)

    def uniformizer(self) -> "ECoeff":
        """The designated uniformizer: ``w`` if ``e > 1``, else ``pi_L``."""
        if self.e > 1:
            num = [0] * self.dim
            num[self.phi] = 1
            return ECoeff(self, tuple(num), 1)
        return ECoeff(self, tuple(self.pi_L), 1)

    def from_parts(self, parts: Sequence[Sequence]) -> "ECoeff":
        """Build from ``e`` lists of ``phi`` rationals (coefficient of ``w^k zeta^t``)."""
        if len(parts) != self.e or any(len(pt) != self.phi for pt in parts):
            raise CoeffError(f"expected {self.e} parts of length {self.phi}")
        fr = [Fraction(c) for pt in parts for c in pt]
        den = 1
        for c in fr:
            den = den * c.denominator // gcd(den, c.denominator)
        return self.make([int(c * den) for c in fr], den)

    def parse(self, text: str) -> "ECoeff":
        return parse_coeff(self, text)

    def mult_matrix(self, x: "ECoeff") -> list[list[Fraction]]:
        """Matrix of multiplication by ``x`` on the Q-basis ``w^k zeta^t``."""
        cols = []
        for idx in range(self.dim):
            num = [0] * self.dim
            num[idx] = 1
            prod = x * ECoeff(self, tuple(num), 1)
            cols.append([Fraction(c, prod.den) for c in prod.num])
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]


def _solve(mat: list[list[Fraction]], rhs: list[Fraction]) -> list[Fraction]:
    """Solve ``mat x = rhs`` by fraction-free (Bareiss) elimination over Z."""
    n = len(mat)
    den = 1
    for row in mat:
        for c in row:
            den = den * c.denominator // gcd(den, c.denominator)
    for c in rhs:
        den = den * c.denominator // gcd(den, c.denominator)
    a = [[int(c * den) for c in row] + [int(rhs[i] * den)] for i, row in enumerate(mat)]
    prev = 1
    for k in range(n):
        piv = next((r for r in range(k, n) if a[r][k]), None)
        if piv is None:
            raise ZeroDivisionError("singular multiplication matrix")
        a[k], a[piv] = a[piv], a[k]
        rk = a[k]
        pk = rk[k]
        for r in range(k + 1, n):
            ar = a[r]
            f = ar[k]
            a[r] = [(pk * ar[c] - f * rk[c]) // prev for c in range(n + 1)]
        prev = pk
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        row = a[i]
        acc = Fraction(row[n])
        for c in range(i + 1, n):
            if row[c]:
                acc -= row[c] * x[c]
        x[i] = acc / row[i]
    return x


def _det(mat: list[list[Fraction]]) -> Fraction:
    n = len(mat)
    a = [row[:] for row in mat]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        pv = a[col][col]
        det *= pv
        for r in range(col + 1, n):
            if a[r][col] != 0:
                fct = a[r][col] / pv
                a[r] = [a[r][k] - fct * a[col][k] for k in range(n)]
    return det


class ECoeff:
    """Immutable element of E: integer numerators over a common denominator."""

    __slots__ = ("field", "num", "den", "_hash")

    def __init__(self, field: CoeffField, num: tuple[int, ...], den: int):
        self.field = field
        self.num = num
        self.den = den
        self._hash = None

    @staticmethod
    def _normalized(field: CoeffField, num: list[int], den: int) -> "ECoeff":
        if den == 0:
            raise ZeroDivisionError("zero denominator")
        if den < 0:
            num = [-c for c in num]
            den = -den
        g = den
        for c in num:
            if c:
                g = gcd(g, c)
                if g == 1:
                    break
        if not any(num):
            return ECoeff(field, tuple([0] * field.dim), 1)
        if g > 1:
            num = [c // g for c in num]
            den //= g
        return ECoeff(field, tuple(num), den)

    def _check(self, other: "ECoeff") -> None:
        if other.field is not self.field:
            raise CoeffError(f"context mismatch: {self.field} vs {other.field}")

    def _coerce(self, other) -> "ECoeff":
        if isinstance(other, ECoeff):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.rational(other)
        raise TypeError(f"cannot combine ECoeff with {type(other).__name__}")

    def parts(self) -> list[list[int]]:
        phi = self.field.phi
        return [list(self.num[k * phi:(k + 1) * phi]) for k in range(self.field.e)]

    def is_zero(self) -> bool:
        return not any(self.num)

    def __bool__(self) -> bool:
        return any(self.num)

    def is_rational(self) -> bool:
        return not any(self.num[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise CoeffError("element is not rational")
        return Fraction(self.num[0], self.den)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and Fraction(self.num[0], self.den) == other
        if not isinstance(other, ECoeff):
            return NotImplemented
        return self.field is other.field and self.den == other.den and self.num == other.num

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.field.p, self.field.m, self.field.e, self.num, self.den))
        return self._hash

    def __add__(self, other) -> "ECoeff":
        o = self._coerce(other)
        d1, d2 = self.den, o.den
        if d1 == d2:
            return ECoeff._normalized(self.field, [a + b for a, b in zip(self.num, o.num)], d1)
        return ECoeff._normalized(self.field, [a * d2 + b * d1 for a, b in zip(self.num, o.num)], d1 * d2)

    __radd__ = __add__

    def __neg__(self) -> "ECoeff":
        return ECoeff(self.field, tuple(-c for c in self.num), self.den)

    def __sub__(self, other) -> "ECoeff":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "ECoeff":
        return self._coerce(other) - self

    def __mul__(self, other) -> "ECoeff":
        if isinstance(other, (int, Fraction)):
            r = Fraction(other)
            return ECoeff._normalized(self.field, [c * r.numerator for c in self.num], self.den * r.denominator)
        o = self._coerce(other)
        F = self.field
        if self.is_rational():
            return o * Fraction(self.num[0], self.den)
        if o.is_rational():
            return self * Fraction(o.num[0], o.den)
        phi, e = F.phi, F.e
        if e == 1:
            return ECoeff._normalized(F, F._lmul(self.num, o.num), self.den * o.den)
        xs, ys = self.parts(), o.parts()
        acc = [[0] * phi for _ in range(2 * e - 1)]
        for k, xk in enumerate(xs):
            if any(xk):
                for l, yl in enumerate(ys):
                    if any(yl):
                        prod = F._lmul(xk, yl)
                        tgt = acc[k + l]
                        for i in range(phi):
                            tgt[i] += prod[i]
        for k in range(2 * e - 2, e - 1, -1):
            if any(acc[k]):
                shifted = F._lmul(acc[k], F.pi_L)
                tgt = acc[k - e]
                for i in range(phi):
                    tgt[i] += shifted[i]
        num = [c for k in range(e) for c in acc[k]]
        return ECoeff._normalized(F, num, self.den * o.den)

    __rmul__ = __mul__

    def inverse(self) -> "ECoeff":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in E")
        F = self.field
        if self.is_rational():
            return F.rational(1 / Fraction(self.num[0], self.den))
        key = (self.num, self.den)
        hit = F._inv_cache.get(key)
        if hit is not None:
            return hit
        inv = self._torsion_inverse()
        if inv is None:
            rhs = [Fraction(0)] * F.dim
            rhs[0] = Fraction(1)
            sol = _solve(F.mult_matrix(self), rhs)
            den = 1
            for c in sol:
                den = den * c.denominator // gcd(den, c.denominator)
            inv = F.make([int(c * den) for c in sol], den)
        if len(F._inv_cache) < 200000:
            F._inv_cache[key] = inv
        return inv

    def _torsion_inverse(self, limit: int = 24) -> "ECoeff | None":
        """``x^(k-1) / x^k`` when a small power ``x^k`` is rational (roots of unity, w)."""
        nz = sum(1 for c in self.num if c)
        if nz > 2:
            return None
        acc = self
        for _ in range(min(limit, 2 * self.field.m * self.field.e)):
            nxt = acc * self
            if nxt.is_rational():
                return acc * Fraction(nxt.den, nxt.num[0])
            acc = nxt
        return None

    def __truediv__(self, other) -> "ECoeff":
        o = self._coerce(other)
        return self * o.inverse()

    def __rtruediv__(self, other) -> "ECoeff":
        return self._coerce(other) * self.inverse()

    def __pow__(self, k: int) -> "ECoeff":
        if k < 0:
            return self.inverse() ** (-k)
        result = self.field.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def norm(self) -> Fraction:
        """Absolute norm ``N_{E/Q}``."""
        return _det(self.field.mult_matrix(self))

    def valuation(self) -> Fraction | float:
        """``v_p`` with ``v_p(p) = 1``; ``inf`` for zero."""
        if self.is_zero():
            return INF
        F = self.field
        key = (self.num, self.den)
        hit = F._val_cache.get(key)
        if hit is not None:
            return hit
        best = None
        step = F.value_group
        for k, part in enumerate(self.parts()):
            if any(part):
                v = F.embedding.valuation_int(part) + k * step
                if best is None or v < best:
                    best = v
        val = best - _vp(self.den, F.p)
        if len(F._val_cache) < 200000:
            F._val_cache[key] = val
        return val

    def to_text(self) -> str:
        F = self.field
        parts = [[f"{Fraction(c, self.den).numerator}/{Fraction(c, self.den).denominator}" for c in pt]
                 for pt in self.parts()]
        return json.dumps({"p": F.p, "m": F.m, "e": F.e, "parts": parts}, separators=(",", ":"))

    def __repr__(self) -> str:
        return f"ECoeff({format_coeff(self)})"

    def __str__(self) -> str:
        return format_coeff(self)


def coeff_from_text(text: str) -> ECoeff:
    data = json.loads(text)
    F = CoeffField(int(data["p"]), int(data["m"]), int(data["e"]))
    return F.from_parts([[Fraction(c) for c in pt] for pt in data["parts"]])


def format_coeff(x: ECoeff) -> str:
    """Human-readable ``a*zeta^t*pi^k`` sum; parseable by :func:`parse_coeff`."""
    if x.is_zero():
        return "0"
    terms = []
    for k, part in enumerate(x.parts()):
        for t, c in enumerate(part):
            if not c:
                continue
            r = Fraction(c, x.den)
            factors = [str(r)]
            if t:
                factors.append(f"zeta^{t}")
            if k:
                factors.append(f"w^{k}")
            terms.append("*".join(factors))
    return " + ".join(terms).replace("+ -", "- ")


def parse_coeff(F: CoeffField, text: str) -> ECoeff:
    """Parse sums of products of rationals, ``zeta^k``, ``pi^k`` and ``w^k``.

    ``zeta`` is ``zeta_m``; ``w`` is the adjoined root; ``pi`` is the designated
    uniformizer of E (see :meth:`CoeffField.uniformizer`).
    """
    s = text.strip().replace(" ", "")
    if not s:
        raise CoeffError("empty coefficient")
    total = F.zero()
    for sign, body in _split_terms(s, text):
        term = F.one()
        for factor in body.split("*"):
            term = term * _parse_factor(F, factor, text)
        total = total - term if sign == "-" else total + term
    return total


def _split_terms(s: str, text: str) -> list[tuple[str, str]]:
    """Split on top-level ``+``/``-`` (not inside parentheses)."""
    terms, depth, start, sign = [], 0, 0, "+"
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0:
            if i > start:
                terms.append((sign, s[start:i]))
            elif i != 0:
                raise CoeffError(f"cannot parse coefficient {text!r}")
            sign, start = ch, i + 1
    if depth or start >= len(s):
        raise CoeffError(f"cannot parse coefficient {text!r}")
    terms.append((sign, s[start:]))
    return terms


def _parse_factor(F: CoeffField, factor: str, text: str) -> ECoeff:
    m = re.fullmatch(r"(zeta|pi|w)(?:\^\(?(-?\d+)\)?)?", factor)
    if m:
        name, exp = m.group(1), int(m.group(2) or 1)
        if name == "zeta":
            return F.zeta(exp)
        if name == "w":
            if F.e == 1:
                return F.uniformizer() ** exp
            num = [0] * F.dim
            num[F.phi] = 1
            return ECoeff(F, tuple(num), 1) ** exp
        return F.uniformizer() ** exp
    try:
        return F.rational(Fraction(factor))
    except (ValueError, ZeroDivisionError) as exc:
        raise CoeffError(f"bad factor {factor!r} in {text!r}") from exc


# --- square roots ------------------------------------------------------------


@dataclass(frozen=True)
class SqrtResult:
    """Outcome of :func:`sqrt_in_e`.

    ``status`` is ``"root"``, ``"no_root"`` (a proof of non-squareness was
    found) or ``"bound_exhausted"`` (no root found and no proof either; the
    negative answer holds only up to the search bound).
    """

    status: str
    root: ECoeff | None = None
    certificate: str = ""

    @property
    def has_root(self) -> bool:
        return self.status == "root"

    @property
    def conditional(self) -> bool:
        return self.status == "bound_exhausted"


def _residue_homs(F: CoeffField, den: int, count: int) -> Iterable[tuple[int, int, int]]:
    """Yield ``(ell, z, w)`` giving ring maps E -> F_ell (zeta->z, w->w)."""
    found = 0
    ell = F.m * F.e * 2 + 1
    while found < count and ell < 200000:
        ell += 1
        if (ell - 1) % F.m or not sympy.isprime(ell) or F.p % ell == 0 or den % ell == 0:
            continue
        g = sympy.primitive_root(ell)
        z = pow(g, (ell - 1) // F.m, ell)
        piL = sum(c * pow(z, t, ell) for t, c in enumerate(F.pi_L)) % ell
        if piL == 0:
            continue
        if F.e == 1:
            roots = [None]
        else:
            roots = [r for r in range(1, ell) if pow(r, F.e, ell) == piL][:2]
        for w in roots:
            yield ell, z, (w if w is not None else 0)
            found += 1


def _reduce_mod(x: ECoeff, ell: int, z: int, w: int) -> int:
    total = 0
    for k, part in enumerate(x.parts()):
        s = sum(c * pow(z, t, ell) for t, c in enumerate(part))
        total += s * pow(w, k, ell)
    return total * pow(x.den, -1, ell) % ell


def sqrt_in_e(d: ECoeff, bound: int = 6) -> SqrtResult:
    """Square root of ``d`` in E, or a (possibly bound-conditional) negative.

    Negative answers are proved either by a residue map to some ``F_ell`` where
    ``d`` becomes a non-residue, or by showing that no irreducible factor of
    ``charpoly_d(X^2)`` over Q has a root in E.  ``bound`` limits the number of
    auxiliary multipliers used when a factor is even.
    """
    F = d.field
    if d.is_zero():
        return SqrtResult("root", F.zero(), "zero")
    if d.is_rational():
        r = d.to_fraction()
        if r > 0:
            n, dd = sympy.integer_nthroot(r.numerator, 2), sympy.integer_nthroot(r.denominator, 2)
            if n[1] and dd[1]:
                return SqrtResult("root", F.rational(Fraction(n[0], dd[0])), "rational")
    for ell, z, w in _residue_homs(F, d.den, 12):
        val = _reduce_mod(d, ell, z, w)
        if val and pow(val, (ell - 1) // 2, ell) == ell - 1:
            return SqrtResult("no_root", None, f"non-residue mod {ell}")
    x = sympy.Symbol("x")
    multipliers = _multipliers(F, bound)
    for s in multipliers:
        ds = d * s * s
        M = sympy.Matrix(F.mult_matrix(ds))
        cp = M.charpoly(x).as_expr()
        poly = sympy.Poly(cp.subs(x, x**2), x)
        _, facs = poly.factor_list()
        any_even = False
        for fac, _mult in facs:
            coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(fac.all_coeffs())]
            odd = coeffs[1::2]
            even = coeffs[0::2]
            if not any(odd):
                any_even = True
                continue
            fe = _horner(F, even, ds)
            fo = _horner(F, odd, ds)
            if fo.is_zero():
                continue
            cand = -(fe / fo)
            if cand * cand == ds:
                return SqrtResult("root", cand / s, "factor")
        if not any_even:
            return SqrtResult("no_root", None, "no factor of charpoly(X^2) has a root in E")
    return SqrtResult("bound_exhausted", None, f"inconclusive after {len(multipliers)} multipliers")


def _horner(F: CoeffField, coeffs: Sequence[Fraction], x: ECoeff) -> ECoeff:
    acc = F.zero()
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def _multipliers(F: CoeffField, bound: int) -> list[ECoeff]:
    out = [F.one()]
    gens = []
    if F.phi > 1:
        gens.append(F.zeta(1))
    if F.e > 1:
        num = [0] * F.dim
        num[F.phi] = 1
        gens.append(ECoeff(F, tuple(num), 1))
    k = 1
    while len(out) < bound:
        cand = F.rational(k)
        for i, g in enumerate(gens):
            cand = cand + g ** (i + 1) * (k + i)
        if cand and cand not in out:
            out.append(cand)
        k += 1
        if k > 4 * bound + 4:
            break
    return out
