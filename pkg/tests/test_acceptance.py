"""Acceptance criteria 1-8, one PASS/FAIL line each (printed in the terminal summary)."""

from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

import pytest

from phinmod.admissibility import check_closed_form, check_general, oracle_compare
from phinmod.builder import build_module, instance_params
from phinmod.classify import classify, galois_type_trichotomy, scalar_type_check
from phinmod.coeff import CoeffField
from phinmod.scenario import load, loads
from phinmod.tower import (CASES, SC_RAMIFIED, SC_UNRAMIFIED, build_tower, char_value,
                           character_order, combine, is_unit, lemma_basis, root_value, sc_char,
                           verify_group_relations)

N_PER_CASE = 500
SEED = 0
TIME_LIMIT = 300.0
EQUALITY_LABELS = {"(St-eq)", "(Irr-eq)", "(NS-eq)", "(S)", "(U)", "(R)"}

ACCEPTANCE_LINES: list[str] = []


def record(n: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


@dataclass
class CaseStats:
    n: int = 0
    agree: int = 0
    seconds: float = 0.0
    equality_met: int = 0
    equality_slopes_equal: int = 0
    t_values: list = field(default_factory=list)
    flips: int = 0
    round_trip: int = 0
    trichotomy_match: int = 0
    monodromy: int = 0
    scalar_ok: int = 0
    failures: list = field(default_factory=list)


@pytest.fixture(scope="module")
def batches() -> dict:
    out = {}
    for case in CASES:
        st = CaseStats()
        for k in range(N_PER_CASE):
            params = instance_params(case, SEED, k)
            t0 = time.perf_counter()
            D, fil = build_module(params)
            rep = check_general(D, fil)
            rep.closed_form = check_closed_form(params)
            st.seconds += time.perf_counter() - t0
            st.n += 1
            st.agree += bool(rep.agree)
            if not rep.agree:
                st.failures.append(("agree", k))
            eq = [c for c in rep.closed_form.conditions if c.label in EQUALITY_LABELS]
            assert len(eq) == 1
            if eq[0].passed:
                st.equality_met += 1
                st.equality_slopes_equal += rep.t_H == rep.t_N
            if case in (SC_UNRAMIFIED, SC_RAMIFIED):
                st.t_values.extend(rep.closed_form.t_values)
                base = [c for c in rep.closed_form.conditions
                        if not c.informational and not c.label.endswith("_L)")]
                lines = [c for c in rep.closed_form.conditions if c.label.endswith("_L)")]
                if all(c.passed for c in base) and not all(c.passed for c in lines):
                    st.flips += 1
            c = classify(D)
            if c.case == case and all(c.chars.get(key) == val for key, val in params.chars.items()):
                st.round_trip += 1
            else:
                st.failures.append(("round trip", k))
            if galois_type_trichotomy(D).form == c.trichotomy.form:
                st.trichotomy_match += 1
            else:
                st.failures.append(("trichotomy", k))
            if D.has_monodromy():
                st.monodromy += 1
                st.scalar_ok += scalar_type_check(D)
        out[case] = st
    return out


def test_criterion_1_oracle_agreement(batches):
    total = sum(st.seconds for st in batches.values())
    parts = " ".join(f"{case}={st.agree}/{st.n}" for case, st in batches.items())
    ok = all(st.agree == st.n >= 500 for st in batches.values()) and total < TIME_LIMIT
    record(1, ok, f"{parts} time={total:.1f}s")
    assert ok


def test_criterion_2_newton_hodge_equality(batches):
    met = sum(st.equality_met for st in batches.values())
    equal = sum(st.equality_slopes_equal for st in batches.values())
    ok = met == equal and all(st.equality_met > 0 for st in batches.values())
    record(2, ok, f"equality condition met in {met} instances, t_H = t_N in {equal}")
    assert ok


def test_criterion_3_t_j_bound(batches):
    ts = batches[SC_UNRAMIFIED].t_values + batches[SC_RAMIFIED].t_values
    flips = batches[SC_UNRAMIFIED].flips + batches[SC_RAMIFIED].flips
    t_max = max(ts, default=Fraction(0))
    ok = bool(ts) and t_max <= Fraction(1, 2) and flips == 0
    record(3, ok, f"{len(ts)} t_j values, max={t_max}, L-condition flips={flips}")
    assert ok


def test_criterion_4_group_structure():
    failing = []
    checked = 0
    for case, q, m1, n1 in itertools.product((SC_UNRAMIFIED, SC_RAMIFIED), (3, 5), (1, 2), (1, 2)):
        _, _, G = build_tower(case, q, 1, 1, m1, n1, verify=False)
        rep = verify_group_relations(G)
        checked += 1
        for c in rep.failures():
            failing.append(f"{case} q={q} m1={m1} n1={n1}: {c.label}")
    ok = not failing
    detail = f"{checked} groups checked"
    if failing:
        detail += "; failing: " + "; ".join(failing)
    record(4, ok, detail)
    assert ok, detail


def _residual_character(G, chi):
    values: dict = {}
    if G.name == SC_UNRAMIFIED:
        def chi_h(h):
            if h not in values:
                values[h] = char_value(G, chi, (h[0], 0))
            return values[h]
    else:
        def chi_h(h):
            if h not in values:
                values[h] = char_value(G, chi, (0, (0,) + h[1][1:]))
            return values[h]
    return chi_h


def _lemma_basis_exhaustive(torsor, G, H, reps, chi_h, F, res) -> bool:
    """Both lemma properties checked directly on the whole fiber."""
    fib = torsor.fiber(0)
    hset = set(H)
    # the action is free, so the eigenspace has one dimension per H-orbit
    if len(reps) * len(H) != len(fib) or len(res.vectors) != len(reps):
        return False
    covered = set()
    for vec in res.vectors:
        if covered & set(vec):
            return False
        covered |= set(vec)
        for jf, val in vec.items():
            if val.is_zero():
                return False
            for h in H:
                if vec.get(torsor.act(jf, h)) != val * root_value(F, -chi_h(h)):
                    return False
    if covered != set(fib) or not hset:
        return False
    # unit criterion over every zero pattern of the coefficients
    rng = random.Random(len(fib))
    for pattern in itertools.product((False, True), repeat=len(reps)):
        coeffs = [F.rational(rng.choice([1, 2, -3, Fraction(1, 2)])) * F.zeta(rng.randrange(F.m))
                  if nz else F.zero() for nz in pattern]
        if is_unit(combine(res.vectors, coeffs, F), fib) != all(pattern):
            return False
    return True


def test_criterion_5_lemma_basis():
    rng = random.Random(5)
    shapes = [(SC_UNRAMIFIED, 3, 1, 1), (SC_UNRAMIFIED, 3, 2, 1), (SC_UNRAMIFIED, 3, 1, 2),
              (SC_UNRAMIFIED, 5, 1, 1), (SC_RAMIFIED, 3, 1, 1), (SC_RAMIFIED, 3, 2, 1),
              (SC_RAMIFIED, 5, 1, 1)]
    towers = {}
    passed = tried = 0
    while tried < 120:
        case, q, m1, n1 = rng.choice(shapes)
        if (case, q, m1, n1) not in towers:
            towers[(case, q, m1, n1)] = build_tower(case, q, 1, 1, m1, n1, verify=False)
        _, torsor, G = towers[(case, q, m1, n1)]
        chi = sc_char(rng.randrange(G.dmod), tuple(rng.randrange(q) for _ in range(G.r)),
                      tuple(rng.randrange(q) for _ in range(G.r)))
        chi_h = _residual_character(G, chi)
        H = G.residual_subgroup()
        reps = G.coset_reps()
        F = CoeffField(q, character_order(G, chi), 1)
        res = lemma_basis(torsor, 0, H, reps, chi_h, F, verify=True)
        tried += 1
        passed += _lemma_basis_exhaustive(torsor, G, H, reps, chi_h, F, res)
    ok = passed == tried >= 100
    record(5, ok, f"{passed}/{tried} random characters")
    assert ok


def test_criterion_6_round_trip(batches):
    ok_count = sum(st.round_trip for st in batches.values())
    n = sum(st.n for st in batches.values())
    record(6, ok_count == n, f"{ok_count}/{n} recovered case and characters")
    assert ok_count == n


def test_criterion_7_trichotomy_and_scalar_type(batches):
    match = sum(st.trichotomy_match for st in batches.values())
    n = sum(st.n for st in batches.values())
    mono = sum(st.monodromy for st in batches.values())
    scalar = sum(st.scalar_ok for st in batches.values())
    ok = match == n and scalar == mono > 0
    record(7, ok, f"trichotomy {match}/{n} match metadata; scalar type {scalar}/{mono} with N != 0")
    assert ok


def test_criterion_8_steinberg_worked_instance():
    text = open("scenarios/steinberg.ini", encoding="utf-8").read()
    good = oracle_compare(load("scenarios/steinberg.ini").params)
    bad = oracle_compare(loads(text.replace("partition = 0:I2", "partition = 0:I1")).params)
    ok = (good.general is True and good.closed_form.admissible and good.t_H == good.t_N == -1
          and bad.general is False and not bad.closed_form.admissible)
    record(8, ok, f"I2: general={good.general} closed={good.closed_form.admissible}; "
                  f"I1: general={bad.general} closed={bad.closed_form.admissible}")
    assert ok
