from __future__ import annotations

import dataclasses
import random

import pytest

from phinmod.builder import build_module, instance_params, random_params
from phinmod.module import (FilIndex, FiltrationData, det, diag, is_null, line_key, mat, mvec, n_stable,
                            same_line, stable_lines, t_H_line, t_N_module, validate,
                            zero_mat)
from phinmod.scenario import load
from phinmod.tower import CASES, PS_SPLIT, SC_RAMIFIED, SC_UNRAMIFIED, STEINBERG

SCEN = "scenarios"


def _modules(case, n, seed=0):
    for k in range(n):
        yield instance_params(case, seed, k)


def _fresh(D, **changes):
    return dataclasses.replace(D, meta={k: v for k, v in D.meta.items() if not k.startswith("_")},
                               **changes)


@pytest.mark.parametrize("case", CASES)
def test_builder_output_validates(case):
    for params in _modules(case, 6):
        D, fil = build_module(params, check=False)
        rep = validate(D, fil)
        assert rep.passed, rep.lines()


def test_singular_phi_is_rejected():
    D, fil = build_module(load(f"{SCEN}/steinberg.ini").params)
    F = D.field
    bad = _fresh(D, A=[mat(F, [[1, 0], [0, 0]])] + D.A[1:])
    rep = validate(bad, fil)
    assert "phi bijective" in [c.label for c in rep.failures()]


def test_broken_monodromy_relation_is_rejected():
    D, fil = build_module(load(f"{SCEN}/steinberg.ini").params)
    F = D.field
    bad = _fresh(D, N=[mat(F, [[0, 1], [0, 0]])] * D.n0)
    labels = [c.label for c in validate(bad, fil).failures()]
    assert "N phi = p phi N" in labels


def test_non_commuting_galois_action_is_rejected():
    D, fil = build_module(load(f"{SCEN}/ps_irreducible.ini").params)
    F = D.field
    twisted = {name: [diag(F.one(), -F.one())] * D.n0 for name in D.galois}
    labels = [c.label for c in validate(_fresh(D, galois=twisted), fil).failures()]
    assert any("commutes with phi" in x for x in labels)


def test_nilpotence_is_checked():
    D, fil = build_module(load(f"{SCEN}/ps_split.ini").params)
    F = D.field
    labels = [c.label for c in validate(_fresh(D, N=[mat(F, [[1, 0], [0, 0]])] * D.n0)).failures()]
    assert "N nilpotent" in labels


def test_filtration_defects_are_rejected():
    D, fil = build_module(load(f"{SCEN}/sc_unramified.ini").params)
    F = D.field
    jf = next(iter(fil.lines))
    missing = FiltrationData(fil.weights, {k: v for k, v in fil.lines.items() if k != jf})
    assert not validate(D, missing).passed
    null = FiltrationData(fil.weights, {**fil.lines, jf: (F.zero(), F.zero())})
    assert "filtration lines nonzero" in [c.label for c in validate(D, null).failures()]
    u, v = fil.lines[jf]
    moved = (u + v * 7, v) if not v.is_zero() else (u, u * 7)
    assert not same_line(moved, (u, v))
    moved_fil = FiltrationData(fil.weights, {**fil.lines, jf: moved})
    assert "filtration Galois-stable" in [c.label for c in validate(D, moved_fil).failures()]
    bad_w = FiltrationData({j: (k2, k1) for j, (k1, k2) in fil.weights.items()}, fil.lines)
    assert not validate(D, bad_w).passed


@pytest.mark.parametrize("case", CASES)
def test_index_count_matches_definition(case):
    for params in _modules(case, 5, seed=3):
        D, fil = build_module(params)
        idx = FilIndex(D, fil)
        for line in stable_lines(D, fil, idx).lines:
            assert idx.t_H(line) == t_H_line(D, fil, line)


def test_t_N_is_mean_determinant_valuation():
    for case in CASES:
        D, _ = build_module(instance_params(case, 1, 0))
        expected = sum(det(X).valuation() for X in D.A) / D.n0
        assert t_N_module(D) == expected


def test_steinberg_has_one_stable_line_the_kernel_of_N():
    D, fil = build_module(load(f"{SCEN}/steinberg.ini").params)
    sl = stable_lines(D, fil)
    assert len(sl.lines) == 1
    (line,) = sl.lines
    assert line.vec0[0].is_zero() and not line.vec0[1].is_zero()
    assert is_null(mvec(D.N[0], line.vec0))


def test_split_with_distinct_scalars_has_exactly_the_coordinate_lines():
    rng = random.Random(5)
    found = 0
    for _ in range(40):
        params = random_params(PS_SPLIT, rng)
        if params.scalars["a"] == params.scalars["b"]:
            continue
        D, fil = build_module(params)
        keys = {ln.key for ln in stable_lines(D, fil).lines}
        F = D.field
        assert keys == {line_key((F.one(), F.zero())), line_key((F.zero(), F.one()))}
        found += 1
    assert found >= 10


def test_stable_lines_are_phi_and_N_stable():
    for case in (STEINBERG, SC_UNRAMIFIED, SC_RAMIFIED):
        for params in _modules(case, 3, seed=11):
            D, fil = build_module(params)
            R = D.return_map()
            for line in stable_lines(D, fil).lines:
                v = line.vec0
                img = (R[0][0] * v[0] + R[0][1] * v[1], R[1][0] * v[0] + R[1][1] * v[1])
                assert same_line(img, v)
                assert n_stable(D, line)


def test_zero_monodromy_helper():
    D, _ = build_module(load(f"{SCEN}/ps_nonsplit.ini").params)
    assert not D.has_monodromy()
    assert all(X == zero_mat(D.field) for X in D.N)
