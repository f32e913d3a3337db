"""Classification of valid modules: phi-type, inertial type, Galois-type trichotomy."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .coeff import CoeffField, ECoeff, sqrt_in_e
from .module import PhiNModule, is_scalar, minv, mmul, phi_stable_lines
from .tower import (PS_IRREDUCIBLE, PS_NONSPLIT, PS_SPLIT, SC_RAMIFIED, SC_UNRAMIFIED, STEINBERG,
                    CyclicGroup, SCRamifiedGroup, SCUnramifiedGroup, check_extendability, qz, sc_char)

IRREDUCIBLE = "irreducible"
NONSPLIT = "non-split reducible"
SPLIT = "split reducible"


class ClassifyError(ValueError):
    pass


@dataclass
class PhiType:
    kind: str
    n_lines: int | None
    conditional: bool = False


def classify_phi(D: PhiNModule) -> PhiType:
    """Count phi-stable lines (ignoring N): 0, 1, or at least 2 / a whole family."""
    sl = phi_stable_lines(D)
    if sl.tag == "scalar-family":
        return PhiType(SPLIT, None)
    n = len(sl.lines)
    kind = IRREDUCIBLE if n == 0 else NONSPLIT if n == 1 else SPLIT
    return PhiType(kind, n, sl.conditional)


# --- roots of unity ----------------------------------------------------------------


_LOG_TABLES: dict = {}


def root_log(F: CoeffField, x: ECoeff) -> Fraction | None:
    """``k/m`` with ``x = zeta_m^k``, or None if ``x`` is not an m-th root of unity."""
    table = _LOG_TABLES.get(id(F))
    if table is None:
        table = {F.zeta(k): Fraction(k, F.m) for k in range(F.m)}
        _LOG_TABLES[id(F)] = table
    return table.get(x)


# --- inertial type -------------------------------------------------------------------


def _is_diagonal(X) -> bool:
    return X[0][1].is_zero() and X[1][0].is_zero()


@dataclass
class InertialType:
    """Action of the inertia subgroup on one component, by generator."""

    component: int
    matrices: dict
    characters: tuple | None = None  # per-generator log pairs when diagonal
    description: str = ""
    elements: dict = field(default_factory=dict, repr=False)

    def is_scalar(self) -> bool:
        return all(is_scalar(X) for X in self.matrices.values())

    def commutes(self) -> bool:
        mats = list(self.matrices.values())
        return all(mmul(X, Y) == mmul(Y, X) for X in mats for Y in mats)


def inertia_generators(G) -> list[str]:
    if isinstance(G, CyclicGroup):
        return ["g"]
    return [n for n, g in G.generators.items() if G.is_inertia(g)]


def inertial_type(D: PhiNModule, verify: bool = True) -> InertialType:
    """Restrict the Galois matrices at component 1 to the inertia subgroup."""
    G = D.group
    c = 1 % D.n0
    mats = {}
    for name in inertia_generators(G):
        if D.shift(name) != 0:
            raise ClassifyError(f"inertia generator {name} has nonzero shift {D.shift(name)}")
        mats[name] = D.galois[name][c]
    tau = InertialType(c, mats)
    if verify:
        tau.elements = _representation_closure(D, tau)
    F = D.field
    if all(_is_diagonal(X) for X in mats.values()):
        pairs = {}
        for name, X in mats.items():
            pairs[name] = (root_log(F, X[0][0]), root_log(F, X[1][1]))
        tau.characters = tuple(sorted(pairs.items()))
        if tau.is_scalar():
            tau.description = "scalar " + " ".join(f"{n}:{a}" for n, (a, _) in tau.characters)
        else:
            tau.description = "diagonal " + " ".join(f"{n}:({a},{b})" for n, (a, b) in tau.characters)
    else:
        tau.description = "non-diagonal (induced) " + " ".join(sorted(mats))
    return tau


def _representation_closure(D: PhiNModule, tau: InertialType) -> dict:
    """Extend the generator matrices to the whole inertia group; fail on inconsistency."""
    G = D.group
    F = D.field
    from .module import identity

    gens = [(D.gen_element(n), X) for n, X in tau.matrices.items()]
    rho = {G.identity: identity(F)}
    stack = [G.identity]
    while stack:
        x = stack.pop()
        for g, X in gens:
            y = G.mul(x, g)
            Y = mmul(rho[x], X)
            if y in rho:
                if rho[y] != Y:
                    raise ClassifyError("inertia matrices do not define a representation")
            else:
                rho[y] = Y
                stack.append(y)
    expected = len(G.inertia_elements()) if not isinstance(G, CyclicGroup) else G.order()
    if len(rho) != expected:
        raise ClassifyError("inertia generators do not generate the inertia subgroup")
    return rho


# --- trichotomy ----------------------------------------------------------------------


@dataclass
class Trichotomy:
    form: int
    method: str
    detail: str = ""


def galois_type_trichotomy(D: PhiNModule, tau: InertialType | None = None,
                           use_metadata: bool = True) -> Trichotomy:
    """(1) sum of two characters extending to Gal(F/K); (2) induced from the
    unramified quadratic; (3) induced from a ramified quadratic."""
    G = D.group
    meta = D.meta or {}
    if use_metadata and "case" in meta:
        case = meta["case"]
        if case in (STEINBERG, PS_IRREDUCIBLE, PS_NONSPLIT, PS_SPLIT):
            return Trichotomy(1, "metadata", case)
        chi = meta["chars"]["chi"]
        if check_extendability(G, chi):
            return Trichotomy(1, "metadata", "character extends")
        return Trichotomy(2 if case == SC_UNRAMIFIED else 3, "metadata", chi.describe())
    if tau is None:
        tau = inertial_type(D)
    if not tau.elements:
        tau.elements = _representation_closure(D, tau)
    if not tau.commutes():
        return Trichotomy(3, "eigen", "inertia acts irreducibly")
    P = _common_eigenbasis(D.field, list(tau.matrices.values()))
    Pi = minv(P)
    chars = []
    for k in range(2):
        chars.append({h: mmul(mmul(Pi, X), P)[k][k] for h, X in tau.elements.items()})
    if chars[0] == chars[1]:
        return Trichotomy(1, "eigen", "scalar on inertia")
    # does a residual element fix or swap the two inertia characters?
    residual = [g for g in G.elements() if not G.is_inertia(g)]
    if not residual:
        return Trichotomy(1, "eigen", "Gal(F/K) is inertia")
    s = residual[0]
    conj = {h: chars[0][G.mul(G.mul(G.inv(s), h), s)] for h in tau.elements}
    if conj == chars[0]:
        return Trichotomy(1, "eigen", "characters are Frobenius-stable")
    return Trichotomy(2, "eigen", "Frobenius swaps the inertia characters")


def _common_eigenbasis(F: CoeffField, mats):
    from .module import identity

    for X in mats:
        if is_scalar(X):
            continue
        if _is_diagonal(X):
            return identity(F)
        a, b = X[0]
        c, d = X[1]
        disc = (a - d) * (a - d) + b * c * 4
        res = sqrt_in_e(disc)
        if not res.has_root:
            raise ClassifyError("commuting inertia action is not diagonalizable over E")
        lams = [(a + d + res.root) * Fraction(1, 2), (a + d - res.root) * Fraction(1, 2)]
        cols = []
        for lam in lams:
            v = (b, lam - a) if not (b.is_zero() and (lam - a).is_zero()) else (lam - d, c)
            cols.append(v)
        return ((cols[0][0], cols[1][0]), (cols[0][1], cols[1][1]))
    return identity(F)


def scalar_type_check(D: PhiNModule, tau: InertialType | None = None) -> bool:
    """If N is nonzero the inertial type must be scalar."""
    if not D.has_monodromy():
        return True
    if tau is None:
        tau = inertial_type(D, verify=False)
    return tau.is_scalar()


# --- full classification -------------------------------------------------------------


@dataclass
class Classification:
    case: str
    phi: PhiType
    tau: InertialType
    trichotomy: Trichotomy
    chars: dict

    def records(self) -> list[str]:
        out = [f"case={self.case}", f"phi={self.phi.kind}", f"type={self.tau.description}",
               f"trichotomy=({self.trichotomy.form}) via {self.trichotomy.method}"]
        out += [f"char {k}={v}" for k, v in sorted(self.chars.items())]
        return out


def classify(D: PhiNModule) -> Classification:
    """Recover the case tag and character exponents from the module data alone."""
    G = D.group
    F = D.field
    phi = classify_phi(D)
    tau = inertial_type(D)
    tri = galois_type_trichotomy(D, tau, use_metadata=False)
    chars: dict = {}
    if isinstance(G, CyclicGroup):
        X = tau.matrices["g"]
        l1, l2 = root_log(F, X[0][0]), root_log(F, X[1][1])
        if l1 is None or l2 is None or not _is_diagonal(X):
            raise ClassifyError("cyclic inertia action is not diagonal in roots of unity")
        if D.has_monodromy():
            case = STEINBERG
            chars["c"] = int(l1 * G.d)
        elif phi.kind == IRREDUCIBLE:
            case = PS_IRREDUCIBLE
            chars["c"] = int(l1 * G.d)
        elif phi.kind == NONSPLIT:
            case = PS_NONSPLIT
            chars["c"] = int(l1 * G.d)
        else:
            case = PS_SPLIT
            chars["c1"], chars["c2"] = int(l1 * G.d), int(l2 * G.d)
    elif isinstance(G, SCUnramifiedGroup):
        case = SC_UNRAMIFIED
        chars.update(_sc_exponents(D, G))
    elif isinstance(G, SCRamifiedGroup):
        case = SC_RAMIFIED
        chars.update(_sc_exponents(D, G))
    else:
        raise ClassifyError(f"unsupported group {G.name}")
    return Classification(case, phi, tau, tri, chars)


def _sc_exponents(D: PhiNModule, G) -> dict:
    F = D.field
    c = 1 % D.n0

    def log(x):
        v = root_log(F, x)
        if v is None:
            raise ClassifyError("Galois matrix entry is not a root of unity")
        return v

    s = int(qz(log(D.galois["delta"][c][0][0])) * G.dmod)
    chi1 = tuple(int(log(D.galois[f"gamma1_{k}"][c][0][0]) * G.p) for k in range(G.r))
    chi2 = tuple(int(log(D.galois[f"gamma2_{k}"][c][0][0]) * G.p) for k in range(G.r))
    out = {"s": s, "chi1": chi1, "chi2": chi2}
    out["extends"] = check_extendability(G, sc_char(s, chi1, chi2))
    return out
