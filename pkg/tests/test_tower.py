from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phinmod.coeff import CoeffField
from phinmod.tower import (UNFORCED_CLAIMS, SC_RAMIFIED, SC_UNRAMIFIED, STEINBERG, TowerError,
                           build_tower, char_value, check_extendability, eigenspace_dimension,
                           extends_brute_force, full_group_splits, is_unit, lemma_basis, qz,
                           root_value, sc_char, verify_group_relations)

SC_PARAMS = [(case, q, m1, n1) for case in (SC_UNRAMIFIED, SC_RAMIFIED)
             for q in (3, 5) for m1 in (1, 2) for n1 in (1, 2)]


def small(case, q, m1, n1):
    return not (q == 5 and n1 == 2)


def sample_triples(G, n, seed=0):
    rng = random.Random(seed)
    els = G.elements()
    return [(rng.choice(els), rng.choice(els), rng.choice(els)) for _ in range(n)]


@pytest.mark.parametrize("case,q,m1,n1", [p for p in SC_PARAMS if small(*p)])
def test_group_axioms_sampled(case, q, m1, n1):
    _, _, G = build_tower(case, q, 1, 1, m1, n1)
    e = G.identity
    for a, b, c in sample_triples(G, 600):
        assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))
        assert G.mul(a, G.inv(a)) == e
        assert G.mul(e, a) == a
        assert G.shift(G.mul(a, b)) == (G.shift(a) + G.shift(b)) % G.n0


@pytest.mark.parametrize("case,q,m1,n1", [p for p in SC_PARAMS if small(*p)])
def test_orders(case, q, m1, n1):
    _, _, G = build_tower(case, q, 1, 1, m1, n1)
    k = q * q - 1 if case == SC_UNRAMIFIED else q - 1
    u = q ** (n1 - 1) if case == SC_UNRAMIFIED else q**n1
    factor = 2 * m1 if case == SC_UNRAMIFIED else 4 * m1
    assert G.order() == factor * k * u * u
    assert len(G.elements()) == G.order()
    assert G.element_order(G.sigma) == 2 * m1


def test_relations_pass_except_documented_claim():
    for case, q, m1, n1 in SC_PARAMS:
        if not small(case, q, m1, n1):
            continue
        _, _, G = build_tower(case, q, 1, 1, m1, n1)
        rep = verify_group_relations(G)
        bad = [c.label for c in rep.failures()]
        if case == SC_RAMIFIED and full_group_splits(q, m1):
            assert bad == ["(diamond)"]
        else:
            assert bad == []


def test_diamond_split_is_explicit_for_q3_m1_1():
    _, _, G = build_tower(SC_RAMIFIED, 3, 1, 1, 1, 1)
    x = G.mul(G.iota, G.sigma)
    assert x != G.identity and G.mul(x, x) == G.identity
    assert not G.is_inertia(x)
    assert "(diamond)" in UNFORCED_CLAIMS


@pytest.mark.parametrize("case,tamper,label", [(SC_UNRAMIFIED, "delta", "(*)"),
                                               (SC_UNRAMIFIED, "gamma2", "(*)"),
                                               (SC_RAMIFIED, "star", "(star)"),
                                               (SC_RAMIFIED, "gamma2", "iota")])
def test_injected_violations_are_caught(case, tamper, label):
    _, _, G = build_tower(case, 3, 1, 1, 1, 2, tamper=tamper)
    rep = verify_group_relations(G)
    assert not rep.passed
    assert any(label in c.label for c in rep.failures())


def test_p2_is_rejected():
    with pytest.raises(TowerError, match="odd prime"):
        build_tower(STEINBERG, 2, 1, 1, d=1)
    with pytest.raises(TowerError):
        build_tower(STEINBERG, 9, 1, 1, d=1)


def test_torsor_action_and_components():
    tower, T, G = build_tower(SC_UNRAMIFIED, 3, 2, 2, 1, 1)
    assert len(T.J) == 4
    for jf in itertools.islice(T.fiber(1), 20):
        for g in list(G.generators.values()):
            img = T.act(jf, g)
            assert img[0] == jf[0]
            assert T.component(img) == (T.component(jf) - G.shift(g)) % tower.n0
    # the fiber over j lands on the components congruent to j mod m0, evenly
    comps = [T.component(jf) for jf in T.fiber(0)]
    assert set(comps) == set(range(0, tower.n0, tower.m0))
    assert comps.count(0) == G.order() * tower.m0 // tower.n0


# --- characters -----------------------------------------------------------------------


@settings(max_examples=30, deadline=None)
@given(st.data())
def test_sc_character_is_multiplicative_on_its_domain(data):
    case = data.draw(st.sampled_from([SC_UNRAMIFIED, SC_RAMIFIED]))
    n1 = data.draw(st.integers(1, 2))
    _, _, G = build_tower(case, 3, 1, 1, 1, n1, verify=False)
    chi = sc_char(data.draw(st.integers(0, 20)),
                  tuple(data.draw(st.integers(0, 2)) for _ in range(G.r)),
                  tuple(data.draw(st.integers(0, 2)) for _ in range(G.r)))
    if case == SC_UNRAMIFIED:
        dom = G.inertia_elements()
    else:
        dom = [g for g in G.elements() if g[0] == 0 and g[1][0] == 0]
    rng = random.Random(data.draw(st.integers(0, 10**6)))
    for _ in range(60):
        a, b = rng.choice(dom), rng.choice(dom)
        assert char_value(G, chi, G.mul(a, b)) == qz(char_value(G, chi, a) + char_value(G, chi, b))


@pytest.mark.parametrize("case,q,m1,n1", [(SC_UNRAMIFIED, 3, 1, 1), (SC_UNRAMIFIED, 3, 2, 1),
                                          (SC_UNRAMIFIED, 3, 1, 2), (SC_RAMIFIED, 3, 1, 1),
                                          (SC_RAMIFIED, 3, 2, 1), (SC_RAMIFIED, 5, 1, 1)])
def test_extendability_closed_form_matches_brute_force(case, q, m1, n1):
    _, _, G = build_tower(case, q, 1, 1, m1, n1, verify=False)
    seen = set()
    for s in range(G.dmod):
        for c2 in itertools.product(range(G.p), repeat=G.r):
            chi = sc_char(s, (0,) * G.r, c2)
            closed = check_extendability(G, chi)
            seen.add(closed)
            assert closed == extends_brute_force(G, chi), chi.describe()
    assert seen == {True, False}


def test_root_value():
    F = CoeffField(3, 6, 1)
    assert root_value(F, Fraction(1, 2)) == F.rational(-1)
    assert root_value(F, Fraction(1, 3)) ** 3 == F.one()
    with pytest.raises(TowerError):
        root_value(F, Fraction(1, 4))


# --- lemma basis -------------------------------------------------------------------------


def _sc_residual_setup(case, n1, s, chi1, chi2):
    tower, T, G = build_tower(case, 3, 1, 1, 1, n1, verify=False)
    chi = sc_char(s, chi1, chi2)
    H = G.residual_subgroup()
    reps = G.coset_reps()
    if case == SC_UNRAMIFIED:
        def chi_h(h):
            return char_value(G, chi, (h[0], 0))
    else:
        def chi_h(h):
            return char_value(G, chi, (0, (0,) + h[1][1:]))
    return T, G, H, reps, chi_h


@pytest.mark.parametrize("case,n1", [(SC_UNRAMIFIED, 1), (SC_UNRAMIFIED, 2), (SC_RAMIFIED, 1)])
def test_lemma_basis_equivariance_and_units(case, n1):
    r = n1 - 1 if case == SC_UNRAMIFIED else n1
    T, G, H, reps, chi_h = _sc_residual_setup(case, n1, 1, (1,) * r, (1,) * r)
    F = CoeffField(3, 24 if case == SC_UNRAMIFIED else 6, 1)
    res = lemma_basis(T, 0, H, reps, chi_h, F)
    assert res.eigenspace_dim == len(reps) == 2
    fib = T.fiber(0)
    for vec in res.vectors:
        for jf, val in vec.items():
            for h in H[:30]:
                assert vec[T.act(jf, h)] == val * root_value(F, -chi_h(h))
    one, zero = F.one(), F.zero()
    for pattern in itertools.product([zero, one], repeat=2):
        x = {}
        for vec, a in zip(res.vectors, pattern):
            for k, v in vec.items():
                x[k] = x.get(k, zero) + a * v
        assert is_unit(x, fib) == all(not a.is_zero() for a in pattern)


def test_eigenspace_dimension_detects_non_characters():
    T, G, H, reps, chi_h = _sc_residual_setup(SC_UNRAMIFIED, 1, 1, (), ())
    gens = [G.mul(G.sigma, G.sigma), G.delta0]

    def bad(h):
        return Fraction(1, 7) if h == G.delta0 else chi_h(h)

    assert eigenspace_dimension(T, 0, gens, chi_h) == 2
    assert eigenspace_dimension(T, 0, gens, bad) == 0


def test_lemma_basis_on_a_cyclic_group_of_order_two():
    _, T, G = build_tower(STEINBERG, 5, 1, 1, d=2)
    F = CoeffField(5, 2, 1)
    H = G.elements()
    trivial = lemma_basis(T, 0, H, [G.identity], lambda h: Fraction(0), F)
    assert [set(v.values()) for v in trivial.vectors] == [{F.one()}]
    g = next(h for h in H if h != G.identity)
    sign = lemma_basis(T, 0, H, [G.identity], lambda h: Fraction(0) if h == G.identity else Fraction(1, 2), F)
    (vec,) = sign.vectors
    assert vec[(0, G.identity)] == F.one() and vec[(0, g)] == -F.one()
    with pytest.raises(TowerError):
        lemma_basis(T, 0, H, [G.identity], lambda h: Fraction(1, 3), F)
