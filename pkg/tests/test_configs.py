import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from glauber_corr.configs import (Basis, PairingWeights, SymFn, as_config, basis_for, k_inverse,
                                  k_inverse_table, k_transform, k_transform_table, lp_exponent,
                                  lp_integral, minlos_identity_check, norm_K_C, norm_L_C, pairing)
from glauber_corr.lattice import DomainError

from conftest import random_symfn


def test_as_config():
    assert as_config([3, 1, 2]) == (1, 2, 3)
    with pytest.raises(DomainError):
        as_config([1, 1])


def test_basis_layout():
    b = Basis(5, 2)
    assert len(b) == 1 + 5 + 10
    assert b.configs[b.order_slice(1)] == [(i,) for i in range(5)]
    assert all(b.index[c] == i for i, c in enumerate(b.configs))
    with pytest.raises(DomainError):
        Basis(3, 4)


def test_symfn_reads_zero_above_cap():
    f = SymFn.poisson(basis_for(6, 2), 0.3)
    assert f((0, 1, 2)) == 0.0
    assert f((1, 4)) == pytest.approx(0.09)
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_symfn_csv_roundtrip():
    f = random_symfn(np.random.default_rng(1), 7, 3)
    g = SymFn.from_csv(f.to_csv(), 7)
    assert g == f


def test_truncate_and_extend():
    f = SymFn.poisson(basis_for(6, 3), 0.5)
    g = f.truncate(1).truncate(3)
    assert g((0,)) == 0.5 and g((0, 1)) == 0.0


def test_lp_exponent():
    assert lp_exponent(lambda x: 7.0, ()) == 1
    assert lp_exponent(lambda x: 0.0, (1, 2)) == 0
    assert lp_exponent(lambda x: 2.0, (1, 2)) == 4


def test_lp_integral_product_oracle():
    M, h = 7, 0.3
    f = {x: 0.1 * x - 0.2 for x in range(M)}
    F = SymFn.from_function(basis_for(M, M), lambda eta: lp_exponent(f.get, eta))
    product = math.prod(1 + h * f[x] for x in range(M))
    assert lp_integral(F, PairingWeights(h)) == pytest.approx(product, abs=1e-14)
    assert lp_integral(SymFn.indicator_empty(basis_for(M, M)), PairingWeights(h)) == 1
    F = SymFn.from_function(basis_for(M, M), lambda eta: 1.7 ** len(eta))
    assert lp_integral(F, PairingWeights(h)) == pytest.approx((1 + h * 1.7) ** M, rel=1e-14)


def test_k_transform_examples():
    b = basis_for(6, 2)
    one = SymFn.indicator_empty(b)
    assert k_transform(one, (0, 3, 5)) == 1
    f = {x: x * 0.5 + 1 for x in range(6)}
    G = SymFn.from_mapping(b, {(x,): f[x] for x in range(6)})
    assert k_transform(G, (1, 2, 4)) == f[1] + f[2] + f[4]
    G = random_symfn(np.random.default_rng(2), 6, 2)
    assert k_transform(G, ()) == G(())


def test_k_inverse_examples():
    window = (0, 1, 2, 3)
    assert k_inverse(lambda xi: 1.0, ()) == 1
    assert all(k_inverse(lambda xi: 1.0, eta) == 0 for eta in itertools.combinations(window, 2))
    for n in range(5):
        for eta in itertools.combinations(window, n):
            assert k_inverse(lambda xi: 2.0 ** len(xi), eta) == 1
    with pytest.raises(DomainError):
        k_inverse(lambda xi: 1.0, (0, 5), window=window)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 7))
def test_moebius_roundtrip(seed, n):
    window = tuple(range(n))
    G = random_symfn(np.random.default_rng(seed), n, n)
    F = k_transform_table(G, window)
    back = k_inverse_table(F, window)
    for eta, v in back.items():
        assert abs(v - G(eta)) <= 1e-12


def test_minlos_examples():
    w = PairingWeights(1.0)
    lhs, rhs = minlos_identity_check(lambda xi, eta, full: 1.0, 3, 2, w)
    assert lhs == rhs
    h = 0.7
    H = lambda xi, eta, full: float(len(xi) == 1 and len(eta) == 1)  # noqa: E731
    lhs, rhs = minlos_identity_check(H, 5, 2, PairingWeights(h))
    assert lhs == pytest.approx(5 * 4 * h ** 2, abs=1e-14)
    assert rhs == pytest.approx(5 * 4 * h ** 2, abs=1e-14)


def test_norm_examples():
    b = basis_for(5, 3)
    w = PairingWeights(0.5)
    assert norm_L_C(SymFn.indicator_empty(b), 2.0, w) == 1
    G = SymFn.from_mapping(b, {(x,): 1.0 for x in range(5)})
    assert norm_L_C(G, 3.0, w) == pytest.approx(5 * 3.0 * 0.5)
    assert norm_L_C(G * -2.5, 3.0, w) == pytest.approx(2.5 * norm_L_C(G, 3.0, w))
    C = 1.7
    assert norm_K_C(SymFn.from_function(b, lambda eta: C ** len(eta)), C) == pytest.approx(1.0)
    assert norm_K_C(SymFn.zeros(b), C) == 0
    assert norm_K_C(SymFn.poisson(b, 0.9), C) == 1
    with pytest.raises(DomainError):
        norm_K_C(G, 1.0)


def test_pairing_examples():
    rng = np.random.default_rng(11)
    b = basis_for(6, 3)
    w = PairingWeights(0.5)
    k = random_symfn(rng, 6, 3)
    assert pairing(SymFn.indicator_empty(b), k, w) == k(())
    G = SymFn(b, np.abs(random_symfn(rng, 6, 3).values))
    Ck = SymFn.from_function(b, lambda eta: 2.0 ** len(eta))
    assert pairing(G, Ck, w) == pytest.approx(norm_L_C(G, 2.0, w))
    for _ in range(20):
        G, k = random_symfn(rng, 6, 3), random_symfn(rng, 6, 3, decay=2.0)
        assert abs(pairing(G, k, w)) <= norm_L_C(G, 2.0, w) * norm_K_C(k, 2.0) * (1 + 1e-12)


def test_pairing_mixed_caps():
    rng = np.random.default_rng(3)
    G, k = random_symfn(rng, 5, 2), random_symfn(rng, 5, 4)
    w = PairingWeights(0.5)
    assert pairing(G, k, w) == pytest.approx(pairing(G, k.truncate(2), w))
