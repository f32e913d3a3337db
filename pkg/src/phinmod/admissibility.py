"""Admissibility: a general checker over stable lines and per-case closed forms."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .builder import CaseParams, build_module, character_data, sc_x_functions
from .coeff import ECoeff, format_coeff
from .module import (FilIndex, FiltrationData, PhiNModule, StableLine, stable_lines, t_H_module,
                     t_N_line, t_N_module)
from .tower import (PS_IRREDUCIBLE, PS_NONSPLIT, PS_SPLIT, SC_RAMIFIED, SC_UNRAMIFIED, STEINBERG,
                    build_tower, char_value, root_value)


class AdmissibilityError(ValueError):
    pass


@dataclass
class Condition:
    """One displayed (in)equality: ``lhs op rhs``."""

    label: str
    lhs: Fraction
    op: str
    rhs: Fraction
    informational: bool = False
    note: str = ""

    @property
    def passed(self) -> bool:
        if self.op == "=":
            return self.lhs == self.rhs
        return self.lhs <= self.rhs

    def record(self) -> str:
        verdict = "pass" if self.passed else "fail"
        if self.informational:
            verdict += " (info)"
        out = f"label={self.label} lhs={self.lhs} op={self.op} rhs={self.rhs} verdict={verdict}"
        return out + (f" note={self.note}" if self.note else "")


@dataclass
class LineResult:
    line: StableLine
    t_H: Fraction
    t_N: Fraction

    @property
    def passed(self) -> bool:
        return self.t_H <= self.t_N

    def record(self) -> str:
        return (f"label=line[{self.line.kind}] lhs={self.t_H} op=<= rhs={self.t_N} "
                f"verdict={'pass' if self.passed else 'fail'}")


@dataclass
class ClosedFormVerdict:
    case: str
    conditions: list[Condition] = field(default_factory=list)
    t_values: list[Fraction] = field(default_factory=list)

    @property
    def admissible(self) -> bool:
        return all(c.passed for c in self.conditions if not c.informational)


@dataclass
class AdmissReport:
    t_H: Fraction
    t_N: Fraction
    lines: list[LineResult] = field(default_factory=list)
    general: bool | None = None
    closed_form: ClosedFormVerdict | None = None
    conditional: bool = False
    tag: str = "finite"

    @property
    def oracle(self) -> bool | None:
        return self.general

    @property
    def agree(self) -> bool | None:
        if self.general is None or self.closed_form is None:
            return None
        return self.general == self.closed_form.admissible

    def records(self) -> list[str]:
        out = [f"label=t_H=t_N lhs={self.t_H} op== rhs={self.t_N} "
               f"verdict={'pass' if self.t_H == self.t_N else 'fail'}"]
        out += [r.record() for r in self.lines]
        if self.closed_form is not None:
            out += [c.record() for c in self.closed_form.conditions]
        return out


# --- general checker -------------------------------------------------------------


def check_general(D: PhiNModule, fil: FiltrationData) -> AdmissReport:
    """``t_H(D) = t_N(D)`` and ``t_H(L) <= t_N(L)`` for every enumerated stable line."""
    index = FilIndex(D, fil)
    sl = stable_lines(D, fil, index)
    rep = AdmissReport(t_H_module(D, fil), t_N_module(D), conditional=sl.conditional, tag=sl.tag)
    for ln in sl.lines:
        rep.lines.append(LineResult(ln, index.t_H(ln), t_N_line(D, ln)))
    rep.general = rep.t_H == rep.t_N and all(r.passed for r in rep.lines)
    return rep


# --- closed forms ------------------------------------------------------------------


def t_j_count(values, target) -> Fraction:
    """Fraction of the fiber whose comparison value equals ``target``.

    ``values`` lists one ratio per embedding of F over the given j.
    """
    values = list(values)
    if not values:
        raise AdmissibilityError("empty fiber")
    hits = sum(1 for v in values if v == target)
    return Fraction(hits, len(values))


def _v(x: ECoeff) -> Fraction:
    return x.valuation()


def _sums(params: CaseParams):
    w = params.weights
    eq = sum(k2 for k1, k2 in w.values() if k1 == k2)
    total = sum(k1 + k2 for k1, k2 in w.values())
    return w, eq, total


def _need(params: CaseParams, names) -> None:
    missing = [n for n in names if n not in params.scalars]
    if missing:
        raise AdmissibilityError(f"{params.case}: missing field(s) {', '.join(missing)}")


def _need_partition(params: CaseParams, labels) -> None:
    jumps = params.jumps()
    if set(params.partition) != set(jumps) or any(v not in labels for v in params.partition.values()):
        raise AdmissibilityError(f"{params.case}: partition must label each of {jumps} with one of {labels}")


def check_closed_form(params: CaseParams) -> ClosedFormVerdict:
    """Evaluate the case's displayed conditions over exact rationals."""
    case = params.case
    out = ClosedFormVerdict(case)
    w, eq, total = _sums(params)
    eK = params.e_K
    part = params.partition

    def ksum(labels, idx):
        return sum(w[j][idx] for j, lab in part.items() if lab in labels)

    if case == STEINBERG:
        _need(params, ["alpha"])
        _need_partition(params, ("I1", "I2"))
        va = sum((_v(a) for a in params.scalars["alpha"]), Fraction(0))
        out.conditions.append(Condition("(St-eq)", 2 * eK * va, "=", Fraction(total + len(w))))
        out.conditions.append(Condition("(St-line)", eK * va, "<=",
                                        Fraction(ksum({"I1"}, 0) + ksum({"I2"}, 1) + eq)))
    elif case == PS_IRREDUCIBLE:
        _need(params, ["a", "b", "c"])
        vbc = _v(params.scalars["b"] * params.scalars["c"])
        out.conditions.append(Condition("(Irr-eq)", -eK * vbc, "=", Fraction(total)))
    elif case == PS_NONSPLIT:
        _need(params, ["a", "b"])
        _need_partition(params, ("I1", "I2"))
        va = _v(params.scalars["a"])
        out.conditions.append(Condition("(NS-eq)", -2 * eK * va, "=", Fraction(total)))
        out.conditions.append(Condition("(NS-line)", -eK * va, "<=",
                                        Fraction(ksum({"I1"}, 0) + ksum({"I2"}, 1) + eq)))
    elif case == PS_SPLIT:
        _closed_ps_split(params, out, w, eq, total, ksum)
    elif case in (SC_UNRAMIFIED, SC_RAMIFIED):
        _closed_sc(params, out, w, eq, total)
    else:
        raise AdmissibilityError(f"unknown case {case!r}")
    return out


def _closed_ps_split(params, out, w, eq, total, ksum) -> None:
    _need(params, ["a", "b"])
    _need_partition(params, ("I1", "I2", "I3"))
    eK = params.e_K
    a, b = params.scalars["a"], params.scalars["b"]
    va, vb = _v(a), _v(b)
    out.conditions.append(Condition("(S)", eK * (va + vb), "=", Fraction(total)))
    out.conditions.append(Condition("(S-a)", eK * va, "<=",
                                    Fraction(ksum({"I1"}, 0) + ksum({"I2", "I3"}, 1) + eq)))
    out.conditions.append(Condition("(S-b)", eK * vb, "<=",
                                    Fraction(ksum({"I2"}, 0) + ksum({"I1", "I3"}, 1) + eq)))
    if a != b:
        return
    # every line is phi-stable: the L-condition over the finite set {L_j x}
    _, _, G = build_tower(params.case, params.p, params.m0, params.e_K, params.m1, params.n1,
                          params.d, verify=False)
    F = params.field()
    chars = character_data(params)
    x0 = [root_value(F, char_value(G, chars["chi1"], g) - char_value(G, chars["chi2"], g))
          for g in G.elements()]
    I3 = [j for j, lab in params.partition.items() if lab == "I3"]
    cands = []
    for j in I3:
        for x in x0:
            c = params.L[j] * x
            if c not in cands:
                cands.append(c)
    for Lc in cands:
        rhs = Fraction(eq)
        for j in params.jumps():
            k1, k2 = w[j]
            t = t_j_count([params.L[j] * x for x in x0], Lc) if j in I3 else Fraction(0)
            out.t_values.append(t)
            rhs += t * k1 + (1 - t) * k2
        out.conditions.append(Condition("(S-L)", eK * va, "<=", rhs, note=f"L={format_coeff(Lc)}"))


def _sc_transport_ratio(params: CaseParams, i: int, F) -> ECoeff:
    """``u_i / v_i`` for the diagonal transport ``D_0 -> D_i``."""
    if params.case == SC_RAMIFIED:
        return F.one()
    r = i % (2 * params.m0)
    if 1 <= r <= params.m0:
        return params.scalars["beta1"] / params.scalars["alpha1"]
    return F.one()


def _closed_sc(params, out, w, eq, total) -> None:
    unram = params.case == SC_UNRAMIFIED
    eK = params.e_K
    if unram:
        _need(params, ["alpha1", "beta1"])
        al, be = params.scalars["alpha1"], params.scalars["beta1"]
        vsum = _v(al) + _v(be)
        out.conditions.append(Condition("(U)", eK * vsum, "=", Fraction(total)))
        half = eK * vsum / 2
    else:
        _need(params, ["alpha1"])
        va = _v(params.scalars["alpha1"])
        out.conditions.append(Condition("(R)", 2 * eK * va, "=", Fraction(total)))
        half = eK * va
    tower, torsor, G = build_tower(params.case, params.p, params.m0, params.e_K, params.m1, params.n1,
                                   params.d, verify=False)
    F = params.field()
    xs, t = sc_x_functions(params, torsor, G, F)
    zero = F.zero()
    jumps = params.jumps()
    # per j: one comparison key per embedding of F (None = e1, "e2" = e2, slope otherwise)
    keys: dict = {}
    for j in jumps:
        x = xs[j]
        ks = []
        for jf in torsor.fiber(j):
            u, v = x.get(jf, zero), x.get(torsor.act(jf, t), zero)
            if v.is_zero():
                ks.append(("e1",))
            elif u.is_zero():
                ks.append(("e2",))
            else:
                ks.append(("slope", v / u * _sc_transport_ratio(params, torsor.component(jf), F)))
        keys[j] = ks

    def rhs_for(key):
        rhs = Fraction(eq)
        ts = []
        for j in jumps:
            k1, k2 = w[j]
            tj = t_j_count(keys[j], key)
            ts.append(tj)
            rhs += tj * k1 + (1 - tj) * k2
        return rhs, ts

    lab = "U" if unram else "R"
    for name, key in (("D'_1", ("e1",)), ("D'_2", ("e2",))):
        rhs, ts = rhs_for(key)
        out.t_values.extend(ts)
        out.conditions.append(Condition(f"({lab}-{name})", half, "<=", rhs))
    seen = []
    for j in jumps:
        for key in keys[j]:
            if key[0] == "slope" and key not in seen:
                seen.append(key)
    for key in seen:
        rhs, ts = rhs_for(key)
        out.t_values.extend(ts)
        out.conditions.append(Condition(f"({lab}_L)", half, "<=", rhs, note=f"L={format_coeff(key[1])}"))
    if unram:
        # the two-sided bound on v(alpha_1) as displayed; reported, not part of the verdict
        lo = Fraction(0)
        hi = Fraction(0)
        for j in jumps:
            k1, k2 = w[j]
            zero_pattern = params.proj[j][0].is_zero() or params.proj[j][1].is_zero()
            lo += k1 + (Fraction(k2 - k1, 2) if zero_pattern else 0)
            hi += k2 - (Fraction(k2 - k1, 2) if zero_pattern else 0)
        va = eK * _v(params.scalars["alpha1"])
        out.conditions.append(Condition("(U-bound-lo)", lo + eq, "<=", va, informational=True))
        out.conditions.append(Condition("(U-bound-hi)", va, "<=", hi + eq, informational=True))


# --- oracle comparison ------------------------------------------------------------


def oracle_compare(params: CaseParams) -> AdmissReport:
    """Build the module, run both checkers and record whether they agree."""
    D, fil = build_module(params)
    rep = check_general(D, fil)
    rep.closed_form = check_closed_form(params)
    return rep


@dataclass
class BatchSummary:
    case: str
    n: int
    agree: int = 0
    admissible: int = 0
    equality_held: int = 0
    t_max: Fraction = Fraction(0)
    disagreements: list[int] = field(default_factory=list)

    def line(self) -> str:
        return f"{self.case}: {self.agree}/{self.n} agree"


def run_batch(case: str, n: int, seed: int, on_instance=None) -> BatchSummary:
    """``n`` seeded random instances of ``oracle_compare``; deterministic in ``seed``."""
    from .builder import instance_params

    summary = BatchSummary(case, n)
    for k in range(n):
        params = instance_params(case, seed, k)
        rep = oracle_compare(params)
        if rep.agree:
            summary.agree += 1
        else:
            summary.disagreements.append(k)
        if rep.general:
            summary.admissible += 1
        if rep.t_H == rep.t_N:
            summary.equality_held += 1
        if rep.closed_form.t_values:
            summary.t_max = max(summary.t_max, max(rep.closed_form.t_values))
        if on_instance is not None:
            on_instance(k, params, rep)
    return summary
