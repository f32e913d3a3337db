"""Field-tower bookkeeping, Galois groups in normal form, characters and torsors.

Groups are never stored as Cayley tables.  Each case has a normal form for its
elements and an explicit multiplication rule; relations are then *checked* by
multiplying, which is what makes an injected error detectable.

Characters take values in Q/Z (stored as :class:`fractions.Fraction` in
``[0, 1)``); the value ``x`` stands for the root of unity ``exp(2 pi i x)``,
realised in E as a power of ``zeta_m``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Hashable, Iterable, Sequence

import sympy

from .coeff import CoeffField, ECoeff

STEINBERG = "steinberg"
PS_IRREDUCIBLE = "ps-irreducible"
PS_NONSPLIT = "ps-nonsplit"
PS_SPLIT = "ps-split"
SC_UNRAMIFIED = "sc-unramified"
SC_RAMIFIED = "sc-ramified"
CASES = (STEINBERG, PS_IRREDUCIBLE, PS_NONSPLIT, PS_SPLIT, SC_UNRAMIFIED, SC_RAMIFIED)
CYCLIC_CASES = (STEINBERG, PS_IRREDUCIBLE, PS_NONSPLIT, PS_SPLIT)


class TowerError(ValueError):
    """Invalid tower or group parameters."""


def qz(x) -> Fraction:
    """Reduce a rational to its representative in [0, 1)."""
    x = Fraction(x)
    return x - (x.numerator // x.denominator)


def lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


# --- groups -------------------------------------------------------------------


class FiniteGroup:
    """Abstract finite group with a shift homomorphism to Z/n0."""

    name = "group"
    n0 = 1

    def __init__(self):
        self._elements: list | None = None

    identity: Hashable

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def shift(self, g) -> int:
        return 0

    def is_inertia(self, g) -> bool:
        return True

    def enumerate(self) -> list:
        raise NotImplementedError

    def elements(self) -> list:
        if self._elements is None:
            self._elements = self.enumerate()
        return self._elements

    def order(self) -> int:
        return len(self.elements())

    def power(self, g, k: int):
        if k < 0:
            g, k = self.inv(g), -k
        out = self.identity
        while k:
            if k & 1:
                out = self.mul(out, g)
            g = self.mul(g, g)
            k >>= 1
        return out

    def word(self, *parts):
        out = self.identity
        for g in parts:
            out = self.mul(out, g)
        return out

    def conj(self, g, x):
        """``g^{-1} x g``."""
        return self.word(self.inv(g), x, g)

    def element_order(self, g) -> int:
        k, x = 1, g
        while x != self.identity:
            x = self.mul(x, g)
            k += 1
        return k

    def closure(self, gens: Sequence) -> set:
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in seen:
                        seen.add(y)
                        nxt.append(y)
            frontier = nxt
        return seen


class CyclicGroup(FiniteGroup):
    """Z/d written additively; every element is inertia and has shift 0."""

    name = "cyclic"

    def __init__(self, d: int, n0: int = 1):
        super().__init__()
        if d < 1:
            raise TowerError("cyclic order must be positive")
        self.d = d
        self.n0 = n0
        self.identity = 0
        self.generators = {"g": 1 % d}

    def mul(self, a, b):
        return (a + b) % self.d

    def inv(self, a):
        return (-a) % self.d

    def enumerate(self):
        return list(range(self.d))


def _vec_add(u, v, p):
    return tuple((a + b) % p for a, b in zip(u, v))


def _vec_neg(u, p):
    return tuple((-a) % p for a in u)


def _basis(r: int):
    return [tuple(1 if k == i else 0 for k in range(r)) for i in range(r)]


class SCUnramifiedGroup(FiniteGroup):
    """Elements ``n * sigma^a`` with ``n = (d, u_plus, u_minus)``.

    ``d`` is the exponent of ``delta_0`` (order ``q^2 - 1``); ``u_plus`` and
    ``u_minus`` are vectors over Z/p of length ``m0 (n1 - 1)``, so each of the two
    unipotent factors has ``q^(n1-1)`` elements.  Conjugation
    ``sigma^a n sigma^-a`` raises ``delta`` to ``q^a`` and inverts ``u_minus`` for
    odd ``a``.
    """

    name = "sc-unramified"

    def __init__(self, p: int, m0: int, m1: int, n1: int, tamper: str | None = None):
        super().__init__()
        self.p, self.m0, self.m1, self.n1 = p, m0, m1, n1
        self.q = p**m0
        self.dmod = self.q**2 - 1
        self.r = m0 * (n1 - 1)
        self.sigma_order = 2 * m1
        self.n0 = 2 * m0 * m1
        self.tamper = tamper
        z = (0,) * self.r
        self.identity = ((0, z, z), 0)
        self.delta0 = ((1, z, z), 0)
        self.sigma = ((0, z, z), 1)
        self.gamma_plus = [((0, b, z), 0) for b in _basis(self.r)]
        self.gamma_minus = [((0, z, b), 0) for b in _basis(self.r)]
        self.generators = {"delta": self.delta0, "sigma": self.sigma}
        for k, g in enumerate(self.gamma_plus):
            self.generators[f"gamma1_{k}"] = g
        for k, g in enumerate(self.gamma_minus):
            self.generators[f"gamma2_{k}"] = g

    def _n_mul(self, x, y):
        p = self.p
        return ((x[0] + y[0]) % self.dmod, _vec_add(x[1], y[1], p), _vec_add(x[2], y[2], p))

    def _n_inv(self, x):
        return ((-x[0]) % self.dmod, _vec_neg(x[1], self.p), _vec_neg(x[2], self.p))

    def _conj_sigma(self, a: int, n):
        """``sigma^a n sigma^-a``."""
        a %= self.sigma_order
        d, up, um = n
        if self.tamper != "delta":
            d = d * pow(self.q, a, self.dmod) % self.dmod
        if a % 2 and self.tamper != "gamma2":
            um = _vec_neg(um, self.p)
        return (d, up, um)

    def mul(self, x, y):
        n1, a1 = x
        n2, a2 = y
        return (self._n_mul(n1, self._conj_sigma(a1, n2)), (a1 + a2) % self.sigma_order)

    def inv(self, x):
        n, a = x
        return (self._conj_sigma(-a, self._n_inv(n)), (-a) % self.sigma_order)

    def shift(self, g) -> int:
        return (g[1] * self.m0) % self.n0

    def is_inertia(self, g) -> bool:
        return g[1] == 0

    def vectors(self):
        return list(itertools.product(range(self.p), repeat=self.r))

    def enumerate(self):
        vs = self.vectors()
        return [((d, up, um), a) for a in range(self.sigma_order) for d in range(self.dmod)
                for up in vs for um in vs]

    def inertia_elements(self):
        vs = self.vectors()
        return [((d, up, um), 0) for d in range(self.dmod) for up in vs for um in vs]

    def residual_subgroup(self):
        """``Gal(F/K')``: elements ``n sigma^a`` with ``a`` even."""
        return [g for g in self.elements() if g[1] % 2 == 0]

    def coset_reps(self):
        return [self.identity, self.sigma]


class SCRamifiedGroup(FiniteGroup):
    """Elements ``iota^eps * h`` with ``h = (a, d, u_plus, u_minus)`` in the abelian
    group ``Gal(F/K') = <sigma> x k'^x x U_+ x U_-``.

    ``iota^2 = delta_0`` and ``iota^-1 h iota = theta(h)`` where ``theta`` sends
    ``sigma`` to ``sigma * delta_0^((q-1)/2)``, fixes ``delta`` and ``U_+`` and
    inverts ``U_-``.  The residue field of the ramified quadratic extension K' is
    that of K, so ``k'^x`` has order ``q - 1``.
    """

    name = "sc-ramified"

    def __init__(self, p: int, m0: int, m1: int, n1: int, tamper: str | None = None):
        super().__init__()
        self.p, self.m0, self.m1, self.n1 = p, m0, m1, n1
        self.q = p**m0
        self.dmod = self.q - 1
        self.half = (self.q - 1) // 2
        self.r = m0 * n1
        self.sigma_order = 2 * m1
        self.n0 = 2 * m0 * m1
        self.tamper = tamper
        z = (0,) * self.r
        self.h_identity = (0, 0, z, z)
        self.identity = (0, self.h_identity)
        self.delta0 = (0, (0, 1 % self.dmod, z, z))
        self.sigma = (0, (1 % self.sigma_order, 0, z, z))
        self.iota = (1, self.h_identity)
        self.gamma_plus = [(0, (0, 0, b, z)) for b in _basis(self.r)]
        self.gamma_minus = [(0, (0, 0, z, b)) for b in _basis(self.r)]
        self.generators = {"delta": self.delta0, "sigma": self.sigma, "iota": self.iota}
        for k, g in enumerate(self.gamma_plus):
            self.generators[f"gamma1_{k}"] = g
        for k, g in enumerate(self.gamma_minus):
            self.generators[f"gamma2_{k}"] = g

    def h_mul(self, x, y):
        p = self.p
        return ((x[0] + y[0]) % self.sigma_order, (x[1] + y[1]) % self.dmod,
                _vec_add(x[2], y[2], p), _vec_add(x[3], y[3], p))

    def h_inv(self, x):
        p = self.p
        return ((-x[0]) % self.sigma_order, (-x[1]) % self.dmod, _vec_neg(x[2], p), _vec_neg(x[3], p))

    def theta(self, h):
        """``iota^-1 h iota``."""
        a, d, up, um = h
        if self.tamper != "star":
            d = (d + a * self.half) % self.dmod
        if self.tamper != "gamma2":
            um = _vec_neg(um, self.p)
        return (a, d, up, um)

    def mul(self, x, y):
        e1, h1 = x
        e2, h2 = y
        h = self.h_mul(self.theta(h1) if e2 else h1, h2)
        if e1 + e2 == 2:
            # iota * iota = delta_0, and delta_0 is fixed by theta
            return (0, self.h_mul(h, self.delta0[1]))
        return ((e1 + e2) % 2, h)

    def inv(self, x):
        e, h = x
        if e == 0:
            return (0, self.h_inv(h))
        # (iota h)^-1 = h^-1 iota^-1 = iota * theta(h^-1) * delta_0^-1
        hi = self.theta(self.h_inv(h))
        hi = self.h_mul(hi, (0, (-1) % self.dmod, (0,) * self.r, (0,) * self.r))
        return (1, hi)

    def shift(self, g) -> int:
        return (g[1][0] * self.m0) % self.n0

    def is_inertia(self, g) -> bool:
        return g[1][0] == 0

    def vectors(self):
        return list(itertools.product(range(self.p), repeat=self.r))

    def h_elements(self):
        vs = self.vectors()
        return [(a, d, up, um) for a in range(self.sigma_order) for d in range(self.dmod)
                for up in vs for um in vs]

    def enumerate(self):
        hs = self.h_elements()
        return [(e, h) for e in (0, 1) for h in hs]

    def inertia_elements(self):
        return [g for g in self.elements() if self.is_inertia(g)]

    def residual_subgroup(self):
        """``Gal(F/K')``."""
        return [(0, h) for h in self.h_elements()]

    def coset_reps(self):
        return [self.identity, self.iota]


# --- relation reports ---------------------------------------------------------


@dataclass
class RelationCheck:
    label: str
    instance: str
    passed: bool

    def line(self) -> str:
        return f"{self.label} {self.instance}: {'pass' if self.passed else 'FAIL'}"


@dataclass
class RelationReport:
    checks: list[RelationCheck] = field(default_factory=list)

    def add(self, label: str, instance: str, ok: bool) -> None:
        self.checks.append(RelationCheck(label, instance, bool(ok)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[RelationCheck]:
        return [c for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def verify_group_relations(G: FiniteGroup, exhaustive_shift: bool | None = None) -> RelationReport:
    """Check every defining relation of ``G`` by explicit multiplication."""
    rep = RelationReport()
    if isinstance(G, CyclicGroup):
        g = G.generators["g"]
        rep.add("order", f"|g| = {G.d}", G.element_order(g) == G.d)
        rep.add("shift", "shift(g) = 0", G.shift(g) == 0)
        return rep
    q, m1 = G.q, G.m1
    sig, d0 = G.sigma, G.delta0
    rep.add("sigma^(2m1)=1", f"m1={m1}", G.power(sig, 2 * m1) == G.identity)
    rep.add("sigma^(2m1)=1", "order exactly 2m1", G.element_order(sig) == 2 * m1)
    rep.add("|delta_0|", f"= {G.dmod}", G.element_order(d0) == G.dmod)
    up = G.closure(G.gamma_plus)
    um = G.closure(G.gamma_minus)
    if isinstance(G, SCUnramifiedGroup):
        expect = q ** (G.n1 - 1)
        rep.add("(*)", "sigma^-1 delta sigma = delta^q", G.conj(sig, d0) == G.power(d0, q))
        for k, g in enumerate(G.gamma_plus):
            rep.add("(*)", f"sigma^-1 gamma1_{k} sigma = gamma1_{k}", G.conj(sig, g) == g)
        for k, g in enumerate(G.gamma_minus):
            rep.add("(*)", f"sigma^-1 gamma2_{k} sigma = gamma2_{k}^-1", G.conj(sig, g) == G.inv(g))
        rep.add("|U+|", f"= q^(n1-1) = {expect}", len(up) == expect)
        rep.add("|U-|", f"= q^(n1-1) = {expect}", len(um) == expect)
        order = 2 * m1 * (q * q - 1) * q ** (2 * (G.n1 - 1))
        rep.add("|G|", f"= {order}", G.order() == order)
        rep.add("shift", "shift(sigma) = m0", G.shift(sig) == G.m0 % G.n0)
    else:
        io = G.iota
        expect = q**G.n1
        rep.add("iota^2 = delta_0", "", G.mul(io, io) == d0)
        rep.add("iota", "iota^-1 delta iota = delta", G.conj(io, d0) == d0)
        for k, g in enumerate(G.gamma_plus):
            rep.add("iota", f"iota^-1 gamma1_{k} iota = gamma1_{k}", G.conj(io, g) == g)
        for k, g in enumerate(G.gamma_minus):
            rep.add("iota", f"iota^-1 gamma2_{k} iota = gamma2_{k}^-1", G.conj(io, g) == G.inv(g))
        rep.add("(star)", "iota^-1 sigma iota = sigma delta_0^((q-1)/2)",
                G.conj(io, sig) == G.mul(sig, G.power(d0, (q - 1) // 2)))
        rep.add("|U+|", f"= q^n1 = {expect}", len(up) == expect)
        rep.add("|U-|", f"= q^n1 = {expect}", len(um) == expect)
        order = 2 * 2 * m1 * (q - 1) * q ** (2 * G.n1)
        rep.add("|G|", f"= {order}", G.order() == order)
        rep.add("shift", "shift(sigma) = m0", G.shift(sig) == G.m0 % G.n0)
        rep.add("shift", "shift(iota) = 0", G.shift(io) == 0)
        lifts = [g for g in G.elements() if not _in_h(g) and G.mul(g, g) == G.identity]
        rep.add("(diamond)", "no order-2 lift of iota_0 in Gal(F/K)", not lifts)
        inert = [g for g in lifts if G.is_inertia(g)]
        rep.add("(diamond-inertia)", "no order-2 lift of iota_0 in I(F/K)", not inert)
    gens = list(G.generators.values())
    if exhaustive_shift is None:
        exhaustive_shift = G.order() <= 400
    pool = G.elements() if exhaustive_shift else gens
    ok = all((G.shift(G.mul(a, b)) - G.shift(a) - G.shift(b)) % G.n0 == 0 for a in pool for b in gens)
    rep.add("shift", "homomorphism", ok)
    ok = all(G.shift(g) == 0 for g in G.inertia_elements()[:2000])
    rep.add("shift", "vanishes on inertia", ok)
    return rep


# Claims that the displayed relations do not by themselves force; they are
# reported but are not construction invariants.  The full-group lift exists
# exactly when m1 is odd and q = 3 mod 4: (iota delta_0^d sigma^m1)^2 equals
# delta_0^(1 + 2d + m1 (q-1)/2).
UNFORCED_CLAIMS = ("(diamond)",)


def full_group_splits(q: int, m1: int) -> bool:
    """Closed form for the existence of an order-2 lift of iota_0 in Gal(F/K)."""
    return m1 % 2 == 1 and q % 4 == 3


def _in_h(g) -> bool:
    return g[0] == 0


# --- characters ---------------------------------------------------------------


@dataclass(frozen=True)
class CharacterData:
    """A character written as ``omega^s * chi_1 * chi_2`` (supercuspidal cases) or
    as an exponent ``c`` of a cyclic group (``g^k -> exp(2 pi i c k / d)``).

    ``chi1`` and ``chi2`` are exponent vectors over Z/p: the value on the
    unipotent element with coordinates ``u`` is ``exp(2 pi i (chi . u) / p)``.
    """

    kind: str
    s: int = 0
    chi1: tuple[int, ...] = ()
    chi2: tuple[int, ...] = ()
    c: int = 0

    def describe(self) -> str:
        if self.kind == "cyclic":
            return f"c={self.c}"
        return f"s={self.s} chi1={list(self.chi1)} chi2={list(self.chi2)}"


def _dot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


def char_value(G: FiniteGroup, chi: CharacterData, g) -> Fraction:
    """Value of ``chi`` in Q/Z at an element of its natural domain.

    Cyclic: all of ``G``.  SC-unramified: the inertia part ``n`` of ``n sigma^a``
    (``chi(sigma) = 1`` on ``Gal(F/K')``).  SC-ramified: ``Gal(F/K')``, with
    ``chi(sigma) = 1``.
    """
    if isinstance(G, CyclicGroup):
        return qz(Fraction(chi.c * g, G.d))
    if chi.kind != "sc":
        raise TowerError("character is not decomposed as omega^s chi1 chi2")
    if isinstance(G, SCUnramifiedGroup):
        (d, up, um), a = g
        if a % 2:
            raise TowerError("element outside Gal(F/K')")
    else:
        e, (a, d, up, um) = g
        if e:
            raise TowerError("element outside Gal(F/K')")
    return qz(Fraction(chi.s * d, G.dmod) + Fraction(_dot(chi.chi1, up) + _dot(chi.chi2, um), G.p))


def conjugate_char_value(G: FiniteGroup, chi: CharacterData, g) -> Fraction:
    """``chi^sigma`` (unramified) or ``chi^iota`` (ramified) on inertia of K'."""
    if isinstance(G, SCUnramifiedGroup):
        return char_value(G, chi, G.mul(G.mul(G.sigma, g), G.inv(G.sigma)))
    if isinstance(G, SCRamifiedGroup):
        return char_value(G, chi, G.mul(G.mul(G.iota, g), G.inv(G.iota)))
    return char_value(G, chi, g)


def character_order(G: FiniteGroup, chi: CharacterData) -> int:
    """Least common multiple of denominators of the values of ``chi``."""
    if isinstance(G, CyclicGroup):
        return G.d // gcd(G.d, chi.c % G.d) if chi.c % G.d else 1
    o = G.dmod // gcd(G.dmod, chi.s % G.dmod) if chi.s % G.dmod else 1
    if any(c % G.p for c in chi.chi1 + chi.chi2):
        o = lcm(o, G.p)
    return o


def check_extendability(G: FiniteGroup, chi: CharacterData) -> bool:
    """True exactly when ``chi`` extends (the closed-form criterion).

    SC-unramified: extends iff ``s = 0 mod q+1`` and ``chi_2^2 = 1``.
    SC-ramified: extends iff ``chi_2^2 = 1``.
    """
    if chi.kind != "sc":
        raise TowerError("character is not decomposed as omega^s chi1 chi2")
    chi2_sq_trivial = all((2 * c) % G.p == 0 for c in chi.chi2)
    if isinstance(G, SCUnramifiedGroup):
        return chi.s % (G.q + 1) == 0 and chi2_sq_trivial
    if isinstance(G, SCRamifiedGroup):
        return chi2_sq_trivial
    raise TowerError("extendability is only defined for supercuspidal groups")


def extends_brute_force(G: FiniteGroup, chi: CharacterData) -> bool:
    """Exhaustive search for a character of the larger group restricting to ``chi``.

    SC-unramified: ``chi`` on ``I(F/K)`` against characters of ``Gal(F/K)``.
    SC-ramified: ``chi`` on ``I(F/K')`` against characters of ``I(F/K)``.
    Every candidate is tested for multiplicativity on all pairs.
    """
    if isinstance(G, SCUnramifiedGroup):
        big = G.elements()
        step = Fraction(1, 2 * G.m1)
        cands = [k * step for k in range(2 * G.m1)]

        def psi(t, g):
            n, a = g
            return qz(char_value(G, chi, (n, 0)) + a * t)
    elif isinstance(G, SCRamifiedGroup):
        big = [g for g in G.elements() if G.is_inertia(g)]
        half = char_value(G, chi, G.delta0) / 2
        cands = [qz(half), qz(half + Fraction(1, 2))]

        def psi(t, g):
            e, h = g
            return qz(char_value(G, chi, (0, h)) + e * t)
    else:
        raise TowerError("brute-force extension is only defined for supercuspidal groups")
    for t in cands:
        vals = {g: psi(t, g) for g in big}
        if all(vals[G.mul(a, b)] == qz(vals[a] + vals[b]) for a in big for b in big):
            return True
    return False


def cyclic_char(c: int) -> CharacterData:
    return CharacterData("cyclic", c=c)


def sc_char(s: int, chi1: Sequence[int], chi2: Sequence[int]) -> CharacterData:
    return CharacterData("sc", s=s, chi1=tuple(chi1), chi2=tuple(chi2))


def root_value(F: CoeffField, x: Fraction) -> ECoeff:
    """The root of unity ``exp(2 pi i x)`` as an element of E."""
    x = qz(x)
    if F.m % x.denominator:
        raise TowerError(f"E lacks roots of unity of order {x.denominator} (m={F.m})")
    return F.zeta(x.numerator * (F.m // x.denominator))


# --- tower and torsor -----------------------------------------------------------


@dataclass(frozen=True)
class FieldTower:
    case: str
    p: int
    m0: int
    e_K: int
    m1: int = 1
    n1: int = 1
    d: int = 1

    @property
    def q(self) -> int:
        return self.p**self.m0

    @property
    def n0(self) -> int:
        return 2 * self.m0 * self.m1 if self.case in (SC_UNRAMIFIED, SC_RAMIFIED) else self.m0

    @property
    def deg_K(self) -> int:
        """``[K : Q_p]``."""
        return self.m0 * self.e_K

    @property
    def deg_F_over_K(self) -> int:
        if self.case == SC_UNRAMIFIED:
            return 2 * self.m1 * (self.q**2 - 1) * self.q ** (2 * (self.n1 - 1))
        if self.case == SC_RAMIFIED:
            return 4 * self.m1 * (self.q - 1) * self.q ** (2 * self.n1)
        return self.d

    @property
    def deg_F(self) -> int:
        return self.deg_K * self.deg_F_over_K


@dataclass
class EmbeddingTorsor:
    """Embeddings of K indexed by ``j``; embeddings of F by pairs ``(j, g)``.

    The right action is ``(j, g) . h = (j, g h)``; ``(j, 1)`` is the base point of
    the fiber over ``j``.  The restriction to F_0 sends ``(j, g)`` to
    ``j mod m0 - shift(g)`` in Z/n0.
    """

    tower: FieldTower
    group: FiniteGroup

    @property
    def J(self) -> list[int]:
        return list(range(self.tower.deg_K))

    def residue_index(self, j: int) -> int:
        return j % self.tower.m0

    def fiber(self, j: int) -> list[tuple[int, Hashable]]:
        return [(j, g) for g in self.group.elements()]

    def act(self, jf, h):
        j, g = jf
        return (j, self.group.mul(g, h))

    def component(self, jf) -> int:
        j, g = jf
        return (self.residue_index(j) - self.group.shift(g)) % self.group.n0

    def base_point(self, j: int):
        return (j, self.group.identity)


def build_group(tower: FieldTower, tamper: str | None = None) -> FiniteGroup:
    if tower.case in CYCLIC_CASES:
        return CyclicGroup(tower.d, tower.n0)
    if tower.case == SC_UNRAMIFIED:
        return SCUnramifiedGroup(tower.p, tower.m0, tower.m1, tower.n1, tamper=tamper)
    if tower.case == SC_RAMIFIED:
        return SCRamifiedGroup(tower.p, tower.m0, tower.m1, tower.n1, tamper=tamper)
    raise TowerError(f"unknown case {tower.case!r}")


def build_tower(case: str, p: int, m0: int = 1, e_K: int = 1, m1: int = 1, n1: int = 1,
                d: int = 1, verify: bool = True, tamper: str | None = None):
    """Return ``(FieldTower, EmbeddingTorsor, group)`` after validating relations."""
    if case not in CASES:
        raise TowerError(f"unknown case {case!r}; expected one of {', '.join(CASES)}")
    if p == 2:
        raise TowerError("p must be an odd prime")
    if not sympy.isprime(p):
        raise TowerError(f"p={p} is not prime")
    for name, val in (("m0", m0), ("e_K", e_K), ("m1", m1), ("n1", n1), ("d", d)):
        if val < 1:
            raise TowerError(f"{name} must be positive, got {val}")
    tower = FieldTower(case, p, m0, e_K, m1, n1, d)
    G = build_group(tower, tamper=tamper)
    if verify and tamper is None:
        rep = verify_group_relations(G)
        bad = [c for c in rep.failures() if c.label not in UNFORCED_CLAIMS]
        if bad:
            raise AssertionError("group construction bug: " + "; ".join(c.line() for c in bad))
    return tower, EmbeddingTorsor(tower, G), G


# --- Lemma-basis vectors ------------------------------------------------------


@dataclass
class BasisResult:
    vectors: list[dict]
    reps: list
    eigenspace_dim: int


def lemma_basis(torsor: EmbeddingTorsor, j: int, H: Sequence, reps: Sequence,
                chi: Callable[[Hashable], Fraction], F: CoeffField, verify: bool = True,
                H_gens: Sequence | None = None) -> BasisResult:
    """Basis of the ``chi^-1``-eigenspace of ``H`` acting on functions on a fiber.

    ``x_t`` is supported on the orbit ``(j, reps[t]) . H`` and satisfies
    ``x_t(j_F . h) = chi(h)^-1 x_t(j_F)`` with ``x_t(j, reps[t]) = 1``.
    """
    G = torsor.group
    vectors = []
    for r in reps:
        vec = {}
        for h in H:
            jf = (j, G.mul(r, h))
            val = root_value(F, -chi(h))
            if jf in vec and vec[jf] != val:
                raise TowerError("chi is not a character of H")
            vec[jf] = val
        vectors.append(vec)
    if not verify:
        return BasisResult(vectors, list(reps), len(vectors))
    dim = eigenspace_dimension(torsor, j, H_gens if H_gens is not None else H, chi)
    covered = set()
    for vec in vectors:
        covered |= set(vec)
    if dim != len(vectors) or len(covered) != sum(len(v) for v in vectors):
        raise TowerError("lemma basis does not span the eigenspace")
    if covered != set(torsor.fiber(j)):
        raise TowerError("orbits of H do not cover the fiber")
    return BasisResult(vectors, list(reps), dim)


def eigenspace_dimension(torsor: EmbeddingTorsor, j: int, H: Sequence, chi) -> int:
    """Dimension of ``{x : x(j_F h) = chi(h)^-1 x(j_F)}`` by orbit propagation.

    ``H`` may be the whole subgroup or just a generating set.  Each H-orbit
    contributes one free parameter if the propagated constraints are
    consistent around every cycle, and zero otherwise.
    """
    fib = torsor.fiber(j)
    seen: dict = {}
    dim = 0
    for start in fib:
        if start in seen:
            continue
        seen[start] = Fraction(0)
        stack = [start]
        consistent = True
        orbit = [start]
        while stack:
            x = stack.pop()
            for h in H:
                y = torsor.act(x, h)
                val = qz(seen[x] - chi(h))
                if y in seen:
                    if seen[y] != val:
                        consistent = False
                else:
                    seen[y] = val
                    orbit.append(y)
                    stack.append(y)
        if consistent:
            dim += 1
    return dim


def combine(vectors: Sequence[dict], coeffs: Sequence[ECoeff], F: CoeffField) -> dict:
    out: dict = {}
    for vec, a in zip(vectors, coeffs):
        for k, v in vec.items():
            out[k] = out.get(k, F.zero()) + a * v
    return out


def is_unit(vec: dict, fiber: Iterable) -> bool:
    return all(vec.get(k) is not None and not vec[k].is_zero() for k in fiber)
