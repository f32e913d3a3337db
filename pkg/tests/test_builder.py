from __future__ import annotations

import dataclasses
import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phinmod.admissibility import oracle_compare
from phinmod.builder import (BuildError, _with_partition, build_module,
                             enumerate_admissible_partitions, instance_params, random_params)
from phinmod.module import identity, mat, mvec, same_line, validate
from phinmod.scenario import load, loads
from phinmod.tower import CASES, SC_RAMIFIED, SC_UNRAMIFIED, STEINBERG

SCEN = "scenarios"

SPLIT_TWO = """
[tower]
case = ps-split
p = 5
e_K = 2

[characters]
c1 = 0
c2 = 0

[params]
weights = (0,1), (0,1)
a = w^2
b = 2*w^2
partition = 0:I1, 1:I1
"""


def _text(name, *pairs):
    text = open(f"{SCEN}/{name}.ini", encoding="utf-8").read()
    for old, new in pairs:
        assert old in text
        text = text.replace(old, new)
    return text


def test_steinberg_example_module():
    D, fil = build_module(load(f"{SCEN}/steinberg.ini").params)
    assert D.group.order() == 2 and D.n0 == 1
    assert validate(D, fil).passed
    assert D.has_monodromy()


def test_sc_unramified_sigma_swaps_with_shift_m0():
    params = load(f"{SCEN}/sc_unramified.ini").params
    D, fil = build_module(params)
    assert validate(D, fil).passed
    assert D.shift("sigma") == params.m0
    F = D.field
    e1, e2 = (F.one(), F.zero()), (F.zero(), F.one())
    S = D.galois["sigma"][0]
    assert same_line(mvec(S, e1), e2) and same_line(mvec(S, e2), e1)
    M, s = D.galois_word([("sigma", 2 * params.m1)], 0)
    assert s == 0 and M == identity(F)


def _delta_power(G, target):
    x, k = G.identity, 0
    while True:
        x, k = G.mul(x, G.generators["delta"]), k + 1
        if x == target:
            return k
        assert k <= G.order()


def test_sc_ramified_iota_square_and_sigma_sign():
    params = load(f"{SCEN}/sc_ramified.ini").params  # s = 1
    D, fil = build_module(params)
    assert validate(D, fil).passed
    F = D.field
    k = _delta_power(D.group, D.group.delta0)
    for i in range(D.n0):
        sq, s = D.galois_word([("iota", 2)], i)
        d0, s0 = D.galois_word([("delta", k)], i)
        assert s == s0 == 0 and sq == d0
    assert D.galois["sigma"][0] == mat(F, [[1, 0], [0, -1]])


def test_preconditions_are_rejected():
    with pytest.raises(BuildError, match="extends"):
        build_module(loads(_text("sc_unramified", ("s = 1", "s = 4"))).params)
    with pytest.raises(BuildError, match="irreducible"):
        build_module(loads(_text("ps_irreducible", ("c = 2/9", "c = 1"))).params)
    params = load(f"{SCEN}/steinberg.ini").params
    with pytest.raises(BuildError, match="weights"):
        build_module(_replace(params, weights={0: (0, 1), 1: (0, 1)}))
    with pytest.raises(BuildError, match="0 <= k1 <= k2"):
        build_module(_replace(params, weights={0: (2, 1)}))
    with pytest.raises(BuildError, match="roots of unity"):
        build_module(_replace(params, m=1))


def _replace(params, **kw):
    return dataclasses.replace(params, **kw)


# --- enumeration -----------------------------------------------------------------------


def test_enumerate_steinberg_single_embedding():
    params = load(f"{SCEN}/steinberg.ini").params
    assert enumerate_admissible_partitions(params) == [{0: "I2"}]


def test_enumerate_equal_weights_gives_the_empty_partition():
    params = loads(_text("ps_nonsplit", ("weights = (0,2)", "weights = (1,1)"),
                         ("partition = 0:I2", ""), ("L = 0:1", ""))).params
    assert enumerate_admissible_partitions(params) == [{}]
    rep = oracle_compare(_with_partition(params, {}, params.field()))
    assert rep.general and rep.t_H == rep.t_N
    # Steinberg never is: the kernel line of N has t_N = -(2k+1)/2 < -k = t_H
    params = loads(_text("steinberg", ("weights = (0,1)", "weights = (1,1)"), ("alpha = pi^2", "alpha = pi^3"),
                         ("partition = 0:I2", ""), ("L = 0:0", ""))).params
    assert enumerate_admissible_partitions(params) == []
    rep = oracle_compare(_with_partition(params, {}, params.field()))
    assert rep.agree and rep.t_H == rep.t_N and not rep.general


def test_enumerate_split_two_embeddings_matches_brute_force():
    params = loads(SPLIT_TWO).params
    parts = enumerate_admissible_partitions(params)
    F = params.field()
    brute = []
    for combo in itertools.product(("I1", "I2", "I3"), repeat=2):
        part = dict(zip((0, 1), combo))
        rep = oracle_compare(_with_partition(params, part, F))
        assert rep.agree
        if rep.general:
            brute.append(part)
    assert parts == brute
    assert len(parts) == 7
    # symmetric in the two embeddings
    assert {(p[1], p[0]) for p in parts} == {(p[0], p[1]) for p in parts}


@pytest.mark.parametrize("case", [SC_UNRAMIFIED, SC_RAMIFIED])
def test_enumerated_sc_zero_patterns_agree_with_oracle(case):
    for k in range(3):
        params = instance_params(case, 6, k)
        F = params.field()
        for part in enumerate_admissible_partitions(params):
            assert oracle_compare(_with_partition(params, part, F)).general


# --- random parameters -------------------------------------------------------------------


def test_instance_params_are_deterministic():
    for case in CASES:
        a, b = instance_params(case, 3, 4), instance_params(case, 3, 4)
        assert a == b


@settings(max_examples=30, deadline=None)
@given(case=st.sampled_from(CASES), seed=st.integers(0, 10**6))
def test_random_params_are_desk_scale_and_valid(case, seed):
    params = random_params(case, random.Random(seed))
    assert params.m0 <= 3 and params.e_K <= 2 and params.m1 <= 2 and params.n1 <= 2
    assert all(0 <= k1 <= k2 <= 5 for k1, k2 in params.weights.values())
    D, fil = build_module(params, check=False)
    assert validate(D, fil).passed


def test_satisfying_instances_have_equal_slopes():
    for case in CASES:
        for k in range(20):
            rep = oracle_compare(instance_params(case, 12, k))
            eq = rep.closed_form.conditions[0]
            if eq.passed:
                assert rep.t_H == rep.t_N
            if case == STEINBERG:
                assert eq.label == "(St-eq)"
