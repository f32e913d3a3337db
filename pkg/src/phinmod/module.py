"""Rank-2 filtered (phi, N, Gal(F/K), E)-modules over the product ring prod_i E.

Conventions
-----------
* Components are indexed by ``i`` in Z/n0; ``A[i]`` is the matrix of
  ``phi: D_i -> D_{i+1}`` and ``N[i]`` that of ``N`` on ``D_i``.  Matrices act on
  column vectors of coordinates in the basis ``e_{i,1}, e_{i,2}``.
* ``G_i(g): D_i -> D_{i + shift(g)}``, and the semilinear action on D_F is
  ``(g x)_{j_F} = G(g) x_{j_F g}``.  Filtration stability therefore reads
  ``G(g) L_{j_F g} = L_{j_F}``.
* All t_H / t_N values are divided by [E : Q_p].
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Sequence

from .coeff import CoeffField, ECoeff, sqrt_in_e
from .tower import (CyclicGroup, EmbeddingTorsor, FieldTower, FiniteGroup, SCRamifiedGroup,
                    SCUnramifiedGroup)

Mat = tuple  # ((a, b), (c, d)) of ECoeff
Vec = tuple  # (u, v) of ECoeff


class ModuleError(ValueError):
    """Structural error in a module (not a failed axiom, which is reported)."""


# --- 2x2 linear algebra over E -------------------------------------------------


def mat(F: CoeffField, rows) -> Mat:
    def conv(x):
        return x if isinstance(x, ECoeff) else F.rational(x)
    return tuple(tuple(conv(x) for x in row) for row in rows)


def identity(F: CoeffField) -> Mat:
    return ((F.one(), F.zero()), (F.zero(), F.one()))


def zero_mat(F: CoeffField) -> Mat:
    return ((F.zero(), F.zero()), (F.zero(), F.zero()))


def scalar_mat(x: ECoeff) -> Mat:
    z = x.field.zero()
    return ((x, z), (z, x))


def diag(a: ECoeff, b: ECoeff) -> Mat:
    z = a.field.zero()
    return ((a, z), (z, b))


def _dot2(a: ECoeff, b: ECoeff, c: ECoeff, d: ECoeff) -> ECoeff:
    if a.is_zero() or b.is_zero():
        return c * d if not (c.is_zero() or d.is_zero()) else a.field.zero()
    if c.is_zero() or d.is_zero():
        return a * b
    return a * b + c * d


def mmul(X: Mat, Y: Mat) -> Mat:
    return ((_dot2(X[0][0], Y[0][0], X[0][1], Y[1][0]), _dot2(X[0][0], Y[0][1], X[0][1], Y[1][1])),
            (_dot2(X[1][0], Y[0][0], X[1][1], Y[1][0]), _dot2(X[1][0], Y[0][1], X[1][1], Y[1][1])))


def mvec(X: Mat, v: Vec) -> Vec:
    return (_dot2(X[0][0], v[0], X[0][1], v[1]), _dot2(X[1][0], v[0], X[1][1], v[1]))


def mscale(X: Mat, c) -> Mat:
    return tuple(tuple(x * c for x in row) for row in X)


def det(X: Mat) -> ECoeff:
    return X[0][0] * X[1][1] - X[0][1] * X[1][0]


def minv(X: Mat) -> Mat:
    d = det(X)
    if d.is_zero():
        raise ZeroDivisionError("singular matrix")
    di = d.inverse()
    return ((X[1][1] * di, -X[0][1] * di), (-X[1][0] * di, X[0][0] * di))


def is_zero_mat(X: Mat) -> bool:
    return all(x.is_zero() for row in X for x in row)


def is_scalar(X: Mat) -> bool:
    return X[0][1].is_zero() and X[1][0].is_zero() and X[0][0] == X[1][1]


def cross(u: Vec, v: Vec) -> ECoeff:
    return u[0] * v[1] - u[1] * v[0]


def same_line(u: Vec, v: Vec) -> bool:
    """Exact projective equality of two nonzero pairs."""
    return cross(u, v).is_zero()


def is_null(v: Vec) -> bool:
    return v[0].is_zero() and v[1].is_zero()


def line_key(v: Vec) -> Hashable:
    """Normal form of the projective point ``(u : v)``."""
    if v[0].is_zero():
        if v[1].is_zero():
            raise ModuleError("zero vector is not a line")
        return ("inf",)
    if v[1].is_zero():
        return ("slope", v[1])
    return ("slope", v[1] / v[0])


def apply_to_key(X: Mat, key) -> Hashable | None:
    """``line_key(X v)`` from ``line_key(v)`` for monomial ``X``; None otherwise."""
    a, b = X[0]
    c, d = X[1]
    if b.is_zero() and c.is_zero():
        if key[0] == "inf" or a == d:
            return key
        return ("slope", key[1] * d / a)
    if a.is_zero() and d.is_zero():
        # (u, v) -> (b v, c u)
        if key[0] == "inf":
            return ("slope", c.field.zero())
        if key[1].is_zero():
            return ("inf",)
        return ("slope", c / (b * key[1]))
    return None


def key_vector(F: CoeffField, key) -> Vec:
    if key[0] == "inf":
        return (F.zero(), F.one())
    return (F.one(), key[1])


# --- module data -----------------------------------------------------------------


@dataclass
class FiltrationData:
    """Weights per embedding of K and a line per embedding of F (when k1 < k2)."""

    weights: dict[int, tuple[int, int]]
    lines: dict[tuple, Vec] = field(default_factory=dict)

    def jumps(self) -> list[int]:
        return [j for j, (k1, k2) in sorted(self.weights.items()) if k1 < k2]

    def keys(self) -> dict:
        """``line_key`` of every line, computed once."""
        cache = self.__dict__.get("_keys")
        if cache is None or len(cache) != len(self.lines):
            cache = {jf: line_key(v) for jf, v in self.lines.items()}
            self.__dict__["_keys"] = cache
        return cache


@dataclass
class PhiNModule:
    field: CoeffField
    tower: FieldTower
    torsor: EmbeddingTorsor
    A: list[Mat]
    N: list[Mat]
    galois: dict[str, list[Mat]]
    meta: dict = field(default_factory=dict)

    @property
    def group(self) -> FiniteGroup:
        return self.torsor.group

    @property
    def n0(self) -> int:
        return len(self.A)

    def gen_element(self, name: str):
        return self.group.generators[name]

    def shift(self, name: str) -> int:
        return self.group.shift(self.gen_element(name))

    def has_monodromy(self) -> bool:
        return any(not is_zero_mat(X) for X in self.N)

    def transports(self) -> list[Mat]:
        """``T_i = A_{i-1} ... A_0: D_0 -> D_i`` for ``i = 0 .. n0``."""
        cached = self.meta.get("_transports")
        if cached is not None:
            return cached
        F = self.field
        out = [identity(F)]
        for X in self.A:
            out.append(mmul(X, out[-1]))
        self.meta["_transports"] = out
        return out

    def return_map(self) -> Mat:
        return self.transports()[-1]

    def inverse_transports(self) -> list[Mat]:
        cached = self.meta.get("_inv_transports")
        if cached is None:
            cached = [minv(T) for T in self.transports()[: self.n0]]
            self.meta["_inv_transports"] = cached
        return cached

    def galois_word(self, word: Sequence[tuple[str, int]], i: int) -> tuple[Mat, int]:
        """Matrix of a word in the generators starting at component ``i``.

        Returns ``(M, s)`` with ``M: D_i -> D_{i+s}``; evaluated right to left
        with ``G_i(x y) = G_{i+s(y)}(x) G_i(y)``.
        """
        F = self.field
        n0 = self.n0
        M = identity(F)
        cur = i
        total = 0
        for name, exp in reversed(list(word)):
            s = self.shift(name)
            for _ in range(abs(exp)):
                if exp > 0:
                    M = mmul(self.galois[name][cur % n0], M)
                    cur += s
                else:
                    cur -= s
                    M = mmul(minv(self.galois[name][cur % n0]), M)
            total += s * exp
        return M, total % n0


# --- defining relators ------------------------------------------------------------


def relators(G: FiniteGroup) -> list[tuple[str, list[tuple[str, int]]]]:
    """Defining relators of ``G`` as words ``[(generator, exponent), ...]``."""
    if isinstance(G, CyclicGroup):
        return [("g^d = 1", [("g", G.d)])]
    gp = [f"gamma1_{k}" for k in range(len(G.gamma_plus))]
    gm = [f"gamma2_{k}" for k in range(len(G.gamma_minus))]
    out = [("sigma^(2m1) = 1", [("sigma", 2 * G.m1)]),
           ("delta^|k'^x| = 1", [("delta", G.dmod)])]
    for g in gp + gm:
        out.append((f"{g}^p = 1", [(g, G.p)]))
    abelian = ["delta"] + gp + gm
    if isinstance(G, SCRamifiedGroup):
        abelian = ["sigma"] + abelian
    for a in range(len(abelian)):
        for b in range(a + 1, len(abelian)):
            x, y = abelian[a], abelian[b]
            out.append((f"[{x},{y}] = 1", [(x, -1), (y, -1), (x, 1), (y, 1)]))
    if isinstance(G, SCUnramifiedGroup):
        out.append(("(*) sigma^-1 delta sigma = delta^q", [("sigma", -1), ("delta", 1), ("sigma", 1), ("delta", -G.q)]))
        for g in gp:
            out.append((f"(*) sigma^-1 {g} sigma = {g}", [("sigma", -1), (g, 1), ("sigma", 1), (g, -1)]))
        for g in gm:
            out.append((f"(*) sigma^-1 {g} sigma = {g}^-1", [("sigma", -1), (g, 1), ("sigma", 1), (g, 1)]))
    else:
        out.append(("iota^2 = delta_0", [("iota", 2), ("delta", -1)]))
        out.append(("iota^-1 delta iota = delta", [("iota", -1), ("delta", 1), ("iota", 1), ("delta", -1)]))
        for g in gp:
            out.append((f"iota^-1 {g} iota = {g}", [("iota", -1), (g, 1), ("iota", 1), (g, -1)]))
        for g in gm:
            out.append((f"iota^-1 {g} iota = {g}^-1", [("iota", -1), (g, 1), ("iota", 1), (g, 1)]))
        out.append(("(star) iota^-1 sigma iota = sigma delta_0^((q-1)/2)",
                    [("iota", -1), ("sigma", 1), ("iota", 1), ("delta", -((G.q - 1) // 2)), ("sigma", -1)]))
    return out


def eval_word_in_group(G: FiniteGroup, word) -> Hashable:
    out = G.identity
    for name, exp in word:
        out = G.mul(out, G.power(G.generators[name], exp))
    return out


# --- validation ----------------------------------------------------------------------


@dataclass
class Check:
    label: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        tail = f" ({self.detail})" if self.detail else ""
        return f"{self.label}: {'pass' if self.passed else 'FAIL'}{tail}"


@dataclass
class ValidationReport:
    checks: list[Check] = field(default_factory=list)

    def add(self, label: str, ok: bool, detail: str = "") -> None:
        self.checks.append(Check(label, bool(ok), detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def _first_bad(indices, pred):
    for i in indices:
        if not pred(i):
            return i
    return None


def validate(D: PhiNModule, fil: FiltrationData | None = None) -> ValidationReport:
    """Check every module axiom exactly; failures carry the first bad index."""
    rep = ValidationReport()
    F = D.field
    n0 = D.n0
    p = F.p
    G = D.group
    rng = range(n0)
    if len(D.N) != n0:
        rep.add("shape", False, "len(N) != len(A)")
        return rep
    if n0 != D.tower.n0:
        rep.add("shape", False, f"n0={n0} but tower has {D.tower.n0}")
        return rep
    bad = _first_bad(rng, lambda i: not det(D.A[i]).is_zero())
    rep.add("phi bijective", bad is None, "" if bad is None else f"A_{bad} singular")
    bad = _first_bad(rng, lambda i: mmul(D.N[(i + 1) % n0], D.A[i]) == mscale(mmul(D.A[i], D.N[i]), p))
    rep.add("N phi = p phi N", bad is None, "" if bad is None else f"i={bad}")
    bad = _first_bad(rng, lambda i: is_zero_mat(mmul(D.N[i], D.N[i])))
    rep.add("N nilpotent", bad is None, "" if bad is None else f"N_{bad}^2 != 0")
    for name in G.generators:
        if name not in D.galois or len(D.galois[name]) != n0:
            rep.add("galois data", False, f"missing matrices for {name}")
            return rep
    for name, mats in D.galois.items():
        s = D.shift(name)
        bad = _first_bad(rng, lambda i: not det(mats[i]).is_zero())
        rep.add(f"G({name}) invertible", bad is None, "" if bad is None else f"i={bad}")
        bad = _first_bad(rng, lambda i: mmul(mats[(i + 1) % n0], D.A[i]) == mmul(D.A[(i + s) % n0], mats[i]))
        rep.add(f"G({name}) commutes with phi", bad is None, "" if bad is None else f"i={bad}")
        bad = _first_bad(rng, lambda i: mmul(mats[i], D.N[i]) == mmul(D.N[(i + s) % n0], mats[i]))
        rep.add(f"G({name}) commutes with N", bad is None, "" if bad is None else f"i={bad}")
    for label, word in relators(G):
        ok_group = eval_word_in_group(G, word) == G.identity
        bad = None
        for i in rng:
            M, s = D.galois_word(word, i)
            if s != 0 or M != identity(F):
                bad = i
                break
        rep.add(f"relation {label}", ok_group and bad is None,
                "" if bad is None else f"fails at i={bad}" if ok_group else "fails in the group")
    if fil is not None:
        _validate_filtration(D, fil, rep)
    return rep


def _validate_filtration(D: PhiNModule, fil: FiltrationData, rep: ValidationReport) -> None:
    T = D.torsor
    J = T.J
    ok = set(fil.weights) == set(J) and all(0 <= k1 <= k2 for k1, k2 in fil.weights.values())
    rep.add("weights 0 <= k1 <= k2", ok)
    if not ok:
        return
    expected = {jf for j in fil.jumps() for jf in T.fiber(j)}
    rep.add("filtration lines present exactly when k1 < k2", set(fil.lines) == expected)
    if set(fil.lines) != expected:
        return
    bad = _first_bad(sorted(expected, key=repr), lambda jf: not is_null(fil.lines[jf]))
    rep.add("filtration lines nonzero", bad is None, "" if bad is None else f"j_F={bad}")
    if bad is not None:
        return
    keys = fil.keys()
    bad = None
    for name in D.galois:
        g = D.gen_element(name)
        mats = D.galois[name]
        for jf in expected:
            jg = T.act(jf, g)
            X = mats[T.component(jg)]
            k = apply_to_key(X, keys[jg])
            if k is None:
                ok = same_line(mvec(X, fil.lines[jg]), fil.lines[jf])
            else:
                ok = k == keys[jf]
            if not ok:
                bad = (name, jf)
                break
        if bad:
            break
    rep.add("filtration Galois-stable", bad is None, "" if bad is None else f"g={bad[0]}, j_F={bad[1]}")


# --- invariants ----------------------------------------------------------------------


def t_N_module(D: PhiNModule) -> Fraction:
    return sum((det(X).valuation() for X in D.A), Fraction(0)) / D.n0


def t_H_module(D: PhiNModule, fil: FiltrationData) -> Fraction:
    total = sum(k1 + k2 for k1, k2 in fil.weights.values())
    return Fraction(-total, D.tower.deg_K)


@dataclass
class StableLine:
    """A phi-stable line family, recorded by its component-0 vector."""

    vec0: Vec
    kind: str
    key: Hashable = None

    def components(self, D: PhiNModule) -> list[Vec]:
        Ts = D.transports()
        return [mvec(Ts[i], self.vec0) for i in range(D.n0)]


def eigenvalue_valuation(D: PhiNModule, vec0: Vec) -> Fraction:
    """``v(mu)`` where ``R vec0 = mu vec0``."""
    img = mvec(D.return_map(), vec0)
    k = 0 if not vec0[0].is_zero() else 1
    return img[k].valuation() - vec0[k].valuation()


def t_N_line(D: PhiNModule, line: StableLine) -> Fraction:
    return eigenvalue_valuation(D, line.vec0) / D.n0


def t_H_line(D: PhiNModule, fil: FiltrationData, line: StableLine) -> Fraction:
    """Definition path: compare the line with Fil at every embedding of F."""
    T = D.torsor
    comps = line.components(D)
    total = 0
    for j in T.J:
        k1, k2 = fil.weights[j]
        if k1 == k2:
            total += k2 * len(T.fiber(j))
            continue
        for jf in T.fiber(j):
            total += k1 if same_line(comps[T.component(jf)], fil.lines[jf]) else k2
    return Fraction(-total, D.tower.deg_F)


class FilIndex:
    """Fil lines transported to component 0, counted per embedding of K."""

    def __init__(self, D: PhiNModule, fil: FiltrationData):
        self.D, self.fil = D, fil
        T = D.torsor
        Tinv = D.inverse_transports()
        self.counts: Counter = Counter()
        self.vectors: dict = {}
        fkeys = fil.keys()
        for j in fil.jumps():
            for jf in T.fiber(j):
                X = Tinv[T.component(jf)]
                key = apply_to_key(X, fkeys[jf])
                if key is None:
                    key = line_key(mvec(X, fil.lines[jf]))
                self.counts[(j, key)] += 1
                if key not in self.vectors:
                    self.vectors[key] = key_vector(D.field, key)

    def matches(self, j: int, key) -> int:
        return self.counts.get((j, key), 0)

    def t_H(self, line: StableLine) -> Fraction:
        D, fil = self.D, self.fil
        size = D.group.order()
        key = line.key if line.key is not None else line_key(line.vec0)
        total = 0
        for j, (k1, k2) in fil.weights.items():
            if k1 == k2:
                total += k2 * size
            else:
                c = self.matches(j, key)
                total += c * k1 + (size - c) * k2
        return Fraction(-total, D.tower.deg_F)


@dataclass
class StableLines:
    lines: list[StableLine]
    tag: str  # "finite" or "scalar-family"
    conditional: bool = False
    note: str = ""


def _eigenvector(R: Mat, lam: ECoeff) -> Vec:
    v = (R[0][1], lam - R[0][0])
    if is_null(v):
        v = (lam - R[1][1], R[1][0])
    return v


def phi_stable_lines(D: PhiNModule) -> StableLines:
    """phi-stable lines, ignoring N.  Scalar return maps give a family tag."""
    R = D.return_map()
    if is_scalar(R):
        return StableLines([], "scalar-family")
    a, b = R[0]
    c, d = R[1]
    vecs: list[Vec] = []
    conditional = False
    note = ""
    if c.is_zero() or b.is_zero():
        lam = [a, d] if a != d else [a]
        for x in lam:
            vecs.append(_eigenvector(R, x))
    else:
        tr, dt = a + d, a * d - b * c
        disc = tr * tr - dt * 4
        res = sqrt_in_e(disc)
        if res.has_root:
            r = res.root
            lams = [(tr + r) * Fraction(1, 2)]
            if not r.is_zero():
                lams.append((tr - r) * Fraction(1, 2))
            vecs = [_eigenvector(R, x) for x in lams]
        else:
            conditional = res.conditional
            note = res.certificate
    uniq: list[Vec] = []
    for v in vecs:
        if not any(same_line(v, u) for u in uniq):
            uniq.append(v)
    return StableLines([StableLine(v, "eigen", line_key(v)) for v in uniq], "finite", conditional, note)


def n_stable(D: PhiNModule, line: StableLine) -> bool:
    comps = line.components(D)
    return all(same_line(mvec(D.N[i], comps[i]), comps[i]) or is_null(mvec(D.N[i], comps[i]))
               for i in range(D.n0))


def generic_slope(F: CoeffField, critical: set) -> ECoeff:
    """A rational slope outside the finite set of critical slopes."""
    k = 1
    while True:
        x = F.rational(k)
        if ("slope", x) not in critical:
            return x
        k += 1


def stable_lines(D: PhiNModule, fil: FiltrationData | None = None,
                 index: FilIndex | None = None, use_N: bool = True) -> StableLines:
    """(phi, N)-stable lines; for a scalar return map, a finite candidate set.

    The candidate set is: the two coordinate lines, every Fil line transported
    back to component 0, and one generic line whose slope is none of those.
    """
    F = D.field
    base = phi_stable_lines(D)
    if base.tag == "finite":
        lines = base.lines
    else:
        cands: list[StableLine] = [StableLine((F.one(), F.zero()), "e1"), StableLine((F.zero(), F.one()), "e2")]
        for ln in cands:
            ln.key = line_key(ln.vec0)
        seen = {ln.key for ln in cands}
        if fil is not None:
            if index is None:
                index = FilIndex(D, fil)
            for key, v in index.vectors.items():
                if key not in seen:
                    seen.add(key)
                    cands.append(StableLine(v, "fil", key))
        g = generic_slope(F, seen)
        cands.append(StableLine((F.one(), g), "generic", ("slope", g)))
        lines = cands
    if use_N and D.has_monodromy():
        lines = [ln for ln in lines if n_stable(D, ln)]
    return StableLines(lines, base.tag, base.conditional, base.note)
