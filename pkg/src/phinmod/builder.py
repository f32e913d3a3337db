"""Canonical modules for each classification case, and random parameters."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from .coeff import CoeffField, ECoeff, sqrt_in_e
from .module import FiltrationData, PhiNModule, diag, identity, mat, scalar_mat, validate, zero_mat
from .tower import (CYCLIC_CASES, PS_IRREDUCIBLE, PS_NONSPLIT, PS_SPLIT, SC_RAMIFIED, SC_UNRAMIFIED,
                    STEINBERG, CharacterData, build_tower, char_value, character_order,
                    check_extendability, cyclic_char, lcm, lemma_basis, root_value, sc_char,
                    combine)


class BuildError(ValueError):
    """Parameters violate a precondition of the construction."""


@dataclass
class CaseParams:
    """Everything needed to build one module.

    ``scalars`` holds the Frobenius scalars by name: ``alpha`` (list, Steinberg),
    ``a``, ``b``, ``c`` (principal series), ``alpha1``, ``beta1`` (supercuspidal).
    ``partition`` maps each ``j`` with ``k1 < k2`` to ``"I1"``, ``"I2"`` or
    ``"I3"`` (cyclic cases); ``L`` holds the invariants ``L_j``; ``proj`` holds the
    projective parameters ``(a_j, b_j)`` (irreducible principal series) or
    ``(a_j1, a_j2)`` (supercuspidal).
    """

    case: str
    p: int
    m0: int = 1
    e_K: int = 1
    m1: int = 1
    n1: int = 1
    d: int = 1
    m: int | None = None
    e: int | None = None
    weights: dict = field(default_factory=dict)
    chars: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    partition: dict = field(default_factory=dict)
    L: dict = field(default_factory=dict)
    proj: dict = field(default_factory=dict)

    def jumps(self) -> list[int]:
        return [j for j, (k1, k2) in sorted(self.weights.items()) if k1 < k2]

    def field(self) -> CoeffField:
        return CoeffField(self.p, self.m or 1, self.e or 1)


def required_root_order(params: CaseParams) -> int:
    """Least ``m`` such that every character value lies in Q(zeta_m)."""
    _, _, G = build_tower(params.case, params.p, params.m0, params.e_K, params.m1, params.n1,
                          params.d, verify=False)
    chars = character_data(params)
    o = 1
    for chi in chars.values():
        o = lcm(o, character_order(G, chi))
    return o


def character_data(params: CaseParams) -> dict[str, CharacterData]:
    ch = params.chars
    if params.case in (STEINBERG, PS_IRREDUCIBLE, PS_NONSPLIT):
        return {"chi": cyclic_char(int(ch.get("c", 0)))}
    if params.case == PS_SPLIT:
        return {"chi1": cyclic_char(int(ch.get("c1", 0))), "chi2": cyclic_char(int(ch.get("c2", 0)))}
    return {"chi": sc_char(int(ch.get("s", 0)), ch.get("chi1", ()), ch.get("chi2", ()))}


def _require(params: CaseParams, names) -> None:
    missing = [n for n in names if n not in params.scalars]
    if missing:
        raise BuildError(f"{params.case}: missing scalar(s) {', '.join(missing)}")


def _check_partition(params: CaseParams, labels) -> None:
    jumps = params.jumps()
    if set(params.partition) != set(jumps):
        raise BuildError("partition must cover exactly the j with k1 < k2: "
                         f"expected {jumps}, got {sorted(params.partition)}")
    bad = {j: v for j, v in params.partition.items() if v not in labels}
    if bad:
        raise BuildError(f"partition labels must be in {labels}, got {bad}")


def build_module(params: CaseParams, check: bool = True) -> tuple[PhiNModule, FiltrationData]:
    """Build the canonical module and filtration of the given case."""
    tower, torsor, G = build_tower(params.case, params.p, params.m0, params.e_K, params.m1,
                                   params.n1, params.d)
    F = params.field()
    need = required_root_order(params)
    if F.m % need:
        raise BuildError(f"E = Q(zeta_{F.m}) lacks the roots of unity of order {need}")
    if set(params.weights) != set(torsor.J):
        raise BuildError(f"weights must be given for j in {torsor.J}")
    for j, (k1, k2) in params.weights.items():
        if not 0 <= k1 <= k2:
            raise BuildError(f"weights at j={j} must satisfy 0 <= k1 <= k2")
    chars = character_data(params)
    n0 = tower.n0
    one, zero = F.one(), F.zero()
    ident = identity(F)
    Nz = [zero_mat(F)] * n0
    lines: dict = {}
    meta = {"case": params.case, "chars": chars, "params": params}
    case = params.case

    if case in CYCLIC_CASES:
        gvals = {}
        for name, chi in chars.items():
            gvals[name] = root_value(F, char_value(G, chi, G.generators["g"]))

    if case == STEINBERG:
        _require(params, ["alpha"])
        alphas = list(params.scalars["alpha"])
        if len(alphas) != params.m0 or any(a.is_zero() for a in alphas):
            raise BuildError(f"steinberg needs {params.m0} nonzero alpha_i")
        _check_partition(params, ("I1", "I2"))
        A = [diag(F.rational(F.p) / alphas[(i + 1) % n0], one / alphas[(i + 1) % n0]) for i in range(n0)]
        N = [mat(F, [[0, 0], [1, 0]])] * n0
        galois = {"g": [scalar_mat(gvals["chi"])] * n0}
        for j in params.jumps():
            if params.partition[j] == "I1":
                v = (zero, one)
            else:
                v = (one, -params.L.get(j, zero))
            for jf in torsor.fiber(j):
                lines[jf] = v
    elif case in (PS_IRREDUCIBLE, PS_NONSPLIT, PS_SPLIT):
        N = Nz
        k = 1 % n0
        if case == PS_IRREDUCIBLE:
            _require(params, ["a", "b", "c"])
            a, b, c = (params.scalars[x] for x in "abc")
            if b.is_zero() or c.is_zero():
                raise BuildError("ps-irreducible needs b, c nonzero")
            res = sqrt_in_e(a * a + b * c * 4)
            if res.status != "no_root":
                raise BuildError("X^2 - aX - bc is not certified irreducible in E[X] "
                                 f"({res.status})")
            special = mat(F, [[a, b], [c, 0]])
            galois = {"g": [scalar_mat(gvals["chi"])] * n0}
            for j in params.jumps():
                v = tuple(params.proj[j])
                for jf in torsor.fiber(j):
                    lines[jf] = v
        elif case == PS_NONSPLIT:
            _require(params, ["a", "b"])
            a, b = params.scalars["a"], params.scalars["b"]
            if a.is_zero() or b.is_zero():
                raise BuildError("ps-nonsplit needs a, b nonzero")
            _check_partition(params, ("I1", "I2"))
            special = mat(F, [[a, b], [0, a]])
            galois = {"g": [scalar_mat(gvals["chi"])] * n0}
            for j in params.jumps():
                v = (one, zero) if params.partition[j] == "I1" else (-params.L.get(j, zero), one)
                for jf in torsor.fiber(j):
                    lines[jf] = v
        else:
            _require(params, ["a", "b"])
            a, b = params.scalars["a"], params.scalars["b"]
            if a.is_zero() or b.is_zero():
                raise BuildError("ps-split needs a, b nonzero")
            _check_partition(params, ("I1", "I2", "I3"))
            special = diag(one / a, one / b)
            galois = {"g": [diag(gvals["chi1"], gvals["chi2"])] * n0}
            c1, c2 = chars["chi1"], chars["chi2"]
            for j in params.jumps():
                lab = params.partition[j]
                if lab == "I3":
                    Lj = params.L.get(j)
                    if Lj is None or Lj.is_zero():
                        raise BuildError(f"I3 needs L_j in E^x at j={j}")
                    x1 = lemma_basis(torsor, j, G.elements(), [G.identity],
                                     lambda h: char_value(G, c1, h), F, H_gens=[G.generators["g"]]).vectors[0]
                    x2 = lemma_basis(torsor, j, G.elements(), [G.identity],
                                     lambda h: char_value(G, c2, h), F, H_gens=[G.generators["g"]]).vectors[0]
                for jf in torsor.fiber(j):
                    if lab == "I1":
                        lines[jf] = (one, zero)
                    elif lab == "I2":
                        lines[jf] = (zero, one)
                    else:
                        x0 = x2[jf] / x1[jf]
                        lines[jf] = (one, -(Lj * x0))
        A = [special if i == k else ident for i in range(n0)]
    elif case == SC_UNRAMIFIED:
        _require(params, ["alpha1", "beta1"])
        chi = chars["chi"]
        if check_extendability(G, chi):
            raise BuildError("chi extends: need s != 0 mod q+1 or chi_2^2 != 1")
        al, be = params.scalars["alpha1"], params.scalars["beta1"]
        if al.is_zero() or be.is_zero():
            raise BuildError("alpha1, beta1 must be nonzero")
        m0 = params.m0
        A = []
        for i in range(n0):
            if i % (2 * m0) == 0:
                A.append(diag(one / al, one / be))
            elif i % (2 * m0) == m0:
                A.append(diag(one / be, one / al))
            else:
                A.append(ident)
        N = Nz
        w = root_value(F, char_value(G, chi, G.delta0))
        wq = root_value(F, char_value(G, chi, G.delta0) * G.q)
        galois = {"sigma": [mat(F, [[0, 1], [1, 0]])] * n0, "delta": [diag(w, wq)] * n0}
        for k, g in enumerate(G.gamma_plus):
            galois[f"gamma1_{k}"] = [scalar_mat(root_value(F, char_value(G, chi, g)))] * n0
        for k, g in enumerate(G.gamma_minus):
            v = root_value(F, char_value(G, chi, g))
            galois[f"gamma2_{k}"] = [diag(v, v.inverse())] * n0
        _sc_lines(params, torsor, G, chi, F, lines, meta)
    elif case == SC_RAMIFIED:
        _require(params, ["alpha1"])
        chi = chars["chi"]
        if check_extendability(G, chi):
            raise BuildError("chi extends: need chi_2^2 != 1")
        al = params.scalars["alpha1"]
        if al.is_zero():
            raise BuildError("alpha1 must be nonzero")
        A = [scalar_mat(one / al) if i % params.m0 == 0 else ident for i in range(n0)]
        N = Nz
        w = root_value(F, char_value(G, chi, G.delta0))
        sign = F.rational(-1 if chi.s % 2 else 1)
        galois = {"sigma": [diag(one, sign)] * n0, "iota": [mat(F, [[0, w], [1, 0]])] * n0,
                  "delta": [scalar_mat(w)] * n0}
        for k, g in enumerate(G.gamma_plus):
            galois[f"gamma1_{k}"] = [scalar_mat(root_value(F, char_value(G, chi, g)))] * n0
        for k, g in enumerate(G.gamma_minus):
            v = root_value(F, char_value(G, chi, g))
            galois[f"gamma2_{k}"] = [diag(v, v.inverse())] * n0
        _sc_lines(params, torsor, G, chi, F, lines, meta)
    else:
        raise BuildError(f"unknown case {case!r}")

    D = PhiNModule(F, tower, torsor, A, N, galois, meta)
    fil = FiltrationData(dict(params.weights), lines)
    if check:
        rep = validate(D, fil)
        if not rep.passed:
            raise AssertionError("builder produced an invalid module: " + "; ".join(c.line() for c in rep.failures()))
    return D, fil


_LEMMA_CACHE: dict = {}


def _sc_lemma_basis(params: CaseParams, torsor, G, F: CoeffField, j: int):
    """Lemma basis for the residual subgroup; memoized since it depends only on the tower and chi."""
    chi = character_data(params)["chi"]
    key = (params.case, params.p, params.m0, params.e_K, params.m1, params.n1, chi.s,
           tuple(chi.chi1), tuple(chi.chi2), F.m, F.e, j)
    hit = _LEMMA_CACHE.get(key)
    if hit is not None:
        return hit
    H = G.residual_subgroup()
    reps = G.coset_reps()
    values: dict = {}
    if G.name == "sc-unramified":
        hgens = [G.mul(G.sigma, G.sigma)] + [g for name, g in G.generators.items() if name != "sigma"]

        def chi_h(h):
            if h not in values:
                values[h] = char_value(G, chi, (h[0], 0))
            return values[h]
    else:
        hgens = [g for name, g in G.generators.items() if name != "iota"]

        def chi_h(h):
            if h not in values:
                values[h] = char_value(G, chi, (0, (0,) + h[1][1:]))
            return values[h]
    res = lemma_basis(torsor, j, H, reps, chi_h, F, verify=False, H_gens=hgens)
    if len(_LEMMA_CACHE) > 256:
        _LEMMA_CACHE.clear()
    _LEMMA_CACHE[key] = res
    return res


def sc_x_functions(params: CaseParams, torsor, G, F: CoeffField) -> tuple[dict, object]:
    """For each jump j, the function ``x_j = a_j1 x_j1 + a_j2 x_j2`` on the fiber.

    Returns ``({j: {j_F: value}}, t)`` where ``t`` is the coset representative
    (sigma or iota) whose translate gives the second coordinate.
    """
    out = {}
    for j in params.jumps():
        pj = params.proj.get(j)
        if pj is None:
            raise BuildError(f"missing projective parameter (a_j1 : a_j2) at j={j}")
        a1, a2 = pj
        if a1.is_zero() and a2.is_zero():
            raise BuildError(f"(a_j1 : a_j2) = (0 : 0) at j={j}")
        res = _sc_lemma_basis(params, torsor, G, F, j)
        out[j] = combine(res.vectors, [a1, a2], F)
    return out, G.coset_reps()[1]


def _sc_lines(params, torsor, G, chi, F, lines, meta) -> None:
    """Fil lines ``(x_j(j_F) : x_j(j_F t))`` with ``t = sigma`` or ``iota``."""
    xs, t = sc_x_functions(params, torsor, G, F)
    zero = F.zero()
    for j, x in xs.items():
        for jf in torsor.fiber(j):
            lines[jf] = (x.get(jf, zero), x.get(torsor.act(jf, t), zero))
    meta["x_functions"] = xs


# --- coefficient-field choice -------------------------------------------------


def default_field_params(case: str, p: int, e_K: int, root_order: int) -> tuple[int, int]:
    """``(m, e)`` so that valuations in ``(1/(2 e_K)) Z`` are attained by powers of the uniformizer."""
    m = max(root_order, 1)
    e_L = 1
    if m % p == 0:
        e_L = p - 1
        pa = p
        while m % (pa * p) == 0:
            pa *= p
            e_L = pa - pa // p
    target = 2 * e_K
    e = target // gcd(target, e_L)
    return m, e


def power_of_uniformizer(F: CoeffField, v: Fraction) -> ECoeff:
    step = F.value_group
    k = Fraction(v) / step
    if k.denominator != 1:
        raise BuildError(f"valuation {v} is not in the value group of {F}")
    return F.uniformizer() ** int(k)


# --- random parameters --------------------------------------------------------


def _divisors(n: int) -> list[int]:
    return [k for k in range(1, n + 1) if n % k == 0]


def _rand_unit(F: CoeffField, rng: random.Random, allow_root: bool = True) -> ECoeff:
    kind = rng.random()
    if kind < 0.5:
        return F.rational(rng.choice([1, 1, -1, 2, 3, Fraction(1, 2), -2]))
    if kind < 0.8 and allow_root and F.m > 1:
        return F.zeta(rng.randrange(F.m)) * rng.choice([1, -1, 2])
    # 1 + small combination; the unit part is what matters for L-comparisons
    return F.one() + F.zeta(rng.randrange(max(F.m, 1))) * F.p


def _weights(J, rng: random.Random, kmax: int = 5) -> dict:
    out = {}
    for j in J:
        if rng.random() < 0.15:
            k = rng.randint(0, kmax)
            out[j] = (k, k)
        else:
            k1 = rng.randint(0, kmax - 1)
            out[j] = (k1, rng.randint(k1 + 1, kmax))
    return out


def random_params(case: str, rng: random.Random, p: int | None = None, satisfy: float = 0.7,
                  max_group: int = 700) -> CaseParams:
    """Seeded random parameters inside the desk-scale bounds.

    ``m0 <= 3``, ``e_K <= 2``, ``m1 <= 2``, ``n1 <= 2`` and weights ``<= 5``; the
    group order is capped at ``max_group`` so that a batch stays fast.  With
    probability ``satisfy`` the scalars are chosen to satisfy the t_H = t_N
    equation, otherwise they are perturbed by one step of the value group.
    """
    while True:
        try:
            params = _random_params_once(case, rng, p, satisfy)
        except _Retry:
            continue
        _, _, G = build_tower(params.case, params.p, params.m0, params.e_K, params.m1, params.n1,
                              params.d, verify=False)
        if G.order() <= max_group:
            return params


def instance_params(case: str, seed: int, k: int) -> CaseParams:
    """Parameters of instance ``k`` of a seeded batch, independent of the other instances."""
    return random_params(case, random.Random(f"{case}:{seed}:{k}"))


class _Retry(Exception):
    pass


def _random_params_once(case: str, rng: random.Random, p, satisfy: float) -> CaseParams:
    if case in CYCLIC_CASES:
        p = p or rng.choice([3, 5, 7])
        m0 = rng.choice([1, 1, 1, 2, 3]) if p == 3 else rng.choice([1, 1, 2])
        e_K = rng.choice([1, 1, 2])
        q = p**m0
        d = rng.choice([x for x in _divisors(q - 1) if x <= 6])
    elif case == SC_UNRAMIFIED:
        p = p or rng.choice([3, 3, 3, 5])
        m0 = 1 if p == 5 else rng.choice([1, 1, 1, 2])
        e_K = rng.choice([1, 1, 2])
        q = p**m0
        m1 = rng.choice([1, 2])
        n1 = rng.choice([1, 1, 2]) if q == 3 else 1
        d = 1
    else:
        p = p or 3
        m0, e_K = 1, rng.choice([1, 1, 2])
        q = p**m0
        m1 = rng.choice([1, 2])
        n1 = rng.choice([1, 1, 1, 2])
        d = 1
    J = list(range(m0 * e_K))
    weights = _weights(J, rng)
    params = CaseParams(case, p, m0, e_K, d=d, weights=weights)
    if case in (SC_UNRAMIFIED, SC_RAMIFIED):
        params.m1, params.n1 = m1, n1
    jumps = params.jumps()
    S = sum(k1 + k2 for k1, k2 in weights.values())
    good = rng.random() < satisfy

    # characters
    if case in (STEINBERG, PS_IRREDUCIBLE, PS_NONSPLIT):
        params.chars = {"c": rng.randrange(d)}
    elif case == PS_SPLIT:
        c1 = rng.randrange(d)
        c2 = c1 if rng.random() < 0.5 else rng.randrange(d)
        params.chars = {"c1": c1, "c2": c2}
    elif case == SC_UNRAMIFIED:
        r = m0 * (n1 - 1)
        dmod = q * q - 1
        chi1 = tuple(rng.randrange(p) for _ in range(r)) if rng.random() < 0.3 else (0,) * r
        chi2 = tuple(rng.randrange(p) for _ in range(r)) if rng.random() < 0.3 else (0,) * r
        chi2_sq_trivial = all((2 * c) % p == 0 for c in chi2)
        # prefer exponents with small order of omega^s to keep E small
        cands = [s for s in range(dmod) if not chi2_sq_trivial or s % (q + 1)]
        cands.sort(key=lambda s: (dmod // gcd(dmod, s) if s else 1, s))
        s = rng.choice(cands[: max(3, len(cands) // 4)])
        params.chars = {"s": s, "chi1": chi1, "chi2": chi2}
    else:
        r = m0 * n1
        chi1 = tuple(rng.randrange(p) for _ in range(r)) if rng.random() < 0.3 else (0,) * r
        chi2 = tuple(rng.randrange(p) for _ in range(r))
        if all(c == 0 for c in chi2):
            chi2 = (1,) + chi2[1:]
        params.chars = {"s": rng.randrange(q - 1), "chi1": chi1, "chi2": chi2}
    order = required_root_order(params)
    params.m, params.e = default_field_params(case, p, e_K, order)
    F = params.field()
    step = F.value_group
    half = Fraction(1, 2 * e_K)

    def off(v):
        return v if good else v + rng.choice([-1, 1]) * rng.choice([step, half, Fraction(1, e_K)])

    def unit():
        return _rand_unit(F, rng)

    if case == STEINBERG:
        total = Fraction(S + len(J), 2 * e_K)
        vals = [Fraction(rng.randint(-2, 2), 2 * e_K) for _ in range(m0 - 1)]
        vals = [off(total - sum(vals))] + vals
        params.scalars = {"alpha": [power_of_uniformizer(F, v) * unit() for v in vals]}
        params.partition = {j: rng.choice(["I1", "I2"]) for j in jumps}
        params.L = {j: rng.choice([F.zero(), unit()]) for j in jumps if params.partition[j] == "I2"}
    elif case == PS_IRREDUCIBLE:
        target = off(Fraction(-S, e_K))
        vb = Fraction(rng.randint(-3, 3), 2 * e_K)
        for _ in range(20):
            a = rng.choice([F.zero(), unit() * power_of_uniformizer(F, Fraction(rng.randint(-3, 3), 2 * e_K))])
            b = power_of_uniformizer(F, vb) * unit()
            c = power_of_uniformizer(F, target - vb) * unit()
            if sqrt_in_e(a * a + b * c * 4).status == "no_root":
                break
        else:
            raise _Retry()
        params.scalars = {"a": a, "b": b, "c": c}
        params.proj = {j: rng.choice([(F.one(), F.zero()), (F.zero(), F.one()), (F.one(), unit())]) for j in jumps}
    elif case == PS_NONSPLIT:
        va = off(Fraction(-S, 2 * e_K))
        params.scalars = {"a": power_of_uniformizer(F, va) * unit(), "b": unit()}
        params.partition = {j: rng.choice(["I1", "I2"]) for j in jumps}
        params.L = {j: rng.choice([F.zero(), unit()]) for j in jumps if params.partition[j] == "I2"}
    elif case == PS_SPLIT:
        tot = off(Fraction(S, e_K))
        equal = rng.random() < 0.3 and (tot / 2) / step == int((tot / 2) / step)
        if equal:
            va = tot / 2
        else:
            va = Fraction(rng.randint(0, 2 * S + 1), 2 * e_K) if S else Fraction(0)
        ua = unit()
        a = power_of_uniformizer(F, va) * ua
        if equal:
            b = a
        else:
            b = power_of_uniformizer(F, tot - va) * (ua if rng.random() < 0.5 else unit())
        params.scalars = {"a": a, "b": b}
        params.partition = {j: rng.choice(["I1", "I2", "I3", "I3"]) for j in jumps}
        pool = [unit() for _ in range(2)]
        params.L = {j: rng.choice(pool) for j in jumps if params.partition[j] == "I3"}
    elif case == SC_UNRAMIFIED:
        tot = off(Fraction(S, e_K))
        if rng.random() < 0.5:
            va = Fraction(rng.randint(0, 2 * S + 2), 2 * e_K)
        else:
            va = step * ((tot / 2) // step)  # as balanced as the value group allows
        params.scalars = {"alpha1": power_of_uniformizer(F, va) * unit(),
                          "beta1": power_of_uniformizer(F, tot - va) * unit()}
        params.proj = {j: _rand_proj(F, rng, unit) for j in jumps}
    else:
        va = off(Fraction(S, 2 * e_K))
        params.scalars = {"alpha1": power_of_uniformizer(F, va) * unit()}
        params.proj = {j: _rand_proj(F, rng, unit) for j in jumps}
    return params


def _rand_proj(F, rng, unit):
    r = rng.random()
    if r < 0.2:
        return (F.one(), F.zero())
    if r < 0.4:
        return (F.zero(), F.one())
    return (F.one(), unit())


# --- partition enumeration ------------------------------------------------------


def enumerate_admissible_partitions(params: CaseParams) -> list[dict]:
    """All labelings of the jump set passing the closed-form inequalities.

    Cyclic cases enumerate I1/I2 (and I3 for split) labels; for the
    supercuspidal cases the enumerated datum is the zero pattern of
    ``(a_j1, a_j2)``, encoded as ``"zero"`` / ``"unit"``.
    """
    from .admissibility import check_closed_form

    jumps = params.jumps()
    if params.case == PS_SPLIT:
        labels = ("I1", "I2", "I3")
    elif params.case in (STEINBERG, PS_NONSPLIT):
        labels = ("I1", "I2")
    elif params.case in (SC_UNRAMIFIED, SC_RAMIFIED):
        labels = ("zero", "unit")
    else:
        labels = ("any",)
    out = []
    F = params.field()
    for combo in itertools.product(labels, repeat=len(jumps)):
        part = dict(zip(jumps, combo))
        trial = _with_partition(params, part, F)
        verdict = check_closed_form(trial)
        if verdict.admissible:
            out.append(part)
    return out


def _with_partition(params: CaseParams, part: dict, F: CoeffField) -> CaseParams:
    import copy

    trial = copy.copy(params)
    if params.case in (SC_UNRAMIFIED, SC_RAMIFIED):
        trial.proj = {j: ((F.one(), F.zero()) if lab == "zero" else (F.one(), F.one())) for j, lab in part.items()}
        trial.partition = {}
    elif params.case == PS_IRREDUCIBLE:
        trial.partition = {}
    else:
        trial.partition = dict(part)
        L = dict(params.L)
        for j, lab in part.items():
            if lab in ("I2", "I3") and j not in L:
                # distinct invariants by default
                L[j] = F.rational(j + 2)
        trial.L = L
    return trial
