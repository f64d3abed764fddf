import numpy as np
import pytest

from glauber_corr.configs import PairingWeights, SymFn, basis_for, norm_K_C, norm_L_C, pairing
from glauber_corr.lattice import DomainError, DomainSpec, Potential
from glauber_corr.operators import (OperatorParams, apply_L_hat, apply_L_hat_star, apply_P_delta,
                                    apply_P_delta_star, generator_residual, l_hat_star_matrix,
                                    truncation_tail_bound)
from glauber_corr.oracles import GibbsSpec, exact_gibbs_correlations

from conftest import random_symfn

FREE = Potential.zero()
MODES = ["exclude", "hard-core"]


def test_params_validation():
    with pytest.raises(DomainError):
        OperatorParams(0.0)
    with pytest.raises(DomainError):
        OperatorParams(0.3, delta=1.0)
    with pytest.raises(DomainError):
        OperatorParams(0.3, on_site="soft")
    assert OperatorParams(0.3).resolved_xi_cap(2) == 2
    assert OperatorParams(0.3).resolved_xi_cap(4) == 3
    with pytest.raises(DomainError):
        OperatorParams(0.3, xi_cap=4).resolved_xi_cap(3)


def test_input_on_wrong_box():
    k = SymFn.poisson(basis_for(5, 2), 0.2)
    with pytest.raises(DomainError):
        apply_L_hat_star(k, OperatorParams(0.2), FREE, DomainSpec(6, 0.5))


def test_L_hat_of_empty_indicator(scenario):
    dom, pot = scenario
    G = SymFn.indicator_empty(basis_for(dom.num_sites, 3))
    out = apply_L_hat(G, OperatorParams(0.3), pot, dom)
    assert np.all(out.values == 0)


def test_free_L_hat_closed_form():
    dom = DomainSpec(7, 0.5)
    z = 0.4
    G = random_symfn(np.random.default_rng(0), 7, 3)
    out = apply_L_hat(G, OperatorParams(z), FREE, dom)
    for eta, v in out.items():
        birth = sum(G(tuple(sorted(eta + (x,)))) for x in range(7) if x not in eta)
        assert v == pytest.approx(-len(eta) * G(eta) + z * 0.5 * birth, abs=1e-14)


def test_free_L_hat_star_closed_form():
    dom = DomainSpec(7, 0.5)
    z = 0.4
    k = random_symfn(np.random.default_rng(1), 7, 3)
    out = apply_L_hat_star(k, OperatorParams(z), FREE, dom)
    for eta, v in out.items():
        death = sum(k(tuple(y for y in eta if y != x)) for x in eta)
        assert v == pytest.approx(-len(eta) * k(eta) + z * death, abs=1e-14)


@pytest.mark.parametrize("mode", MODES)
def test_empty_configuration_is_conserved(scenario, mode):
    dom, pot = scenario
    k = random_symfn(np.random.default_rng(2), dom.num_sites, 3)
    params = OperatorParams(0.3, 0.05, on_site=mode)
    assert apply_L_hat_star(k, params, pot, dom)(()) == 0
    assert apply_P_delta_star(k, params, pot, dom)(()) == k(())


def test_free_P_delta_of_empty_indicator():
    dom = DomainSpec(6, 0.5)
    G = SymFn.indicator_empty(basis_for(6, 3))
    out = apply_P_delta(G, OperatorParams(0.5, 0.1), FREE, dom)
    assert out == G


@pytest.mark.parametrize("z", [0.2, 0.5])
@pytest.mark.parametrize("delta", [0.1, 0.01])
def test_free_poisson_fixed_point(z, delta):
    dom = DomainSpec(8, 0.5)
    k = SymFn.poisson(basis_for(8, 3), z)
    params = OperatorParams(z, delta)
    assert norm_K_C(apply_L_hat_star(k, params, FREE, dom), 2.0) <= 1e-12
    assert norm_K_C(apply_P_delta_star(k, params, FREE, dom) - k, 2.0) <= 1e-12
    assert generator_residual(k, params, FREE, dom, 2.0) <= 1e-10


@pytest.mark.parametrize("mode", MODES)
@pytest.mark.parametrize("xi_cap", [1, 2, 3])
def test_duality(scenario, mode, xi_cap):
    dom, pot = scenario
    rng = np.random.default_rng(10 + xi_cap)
    w = PairingWeights(dom.volume_element)
    params = OperatorParams(0.3, 0.05, xi_cap, mode)
    for _ in range(5):
        G, k = random_symfn(rng, 12, 3), random_symfn(rng, 12, 3)
        lhs = pairing(apply_L_hat(G, params, pot, dom), k, w)
        rhs = pairing(G, apply_L_hat_star(k, params, pot, dom), w)
        assert abs(lhs - rhs) <= 1e-10
        lhs = pairing(apply_P_delta(G, params, pot, dom), k, w)
        rhs = pairing(G, apply_P_delta_star(k, params, pot, dom), w)
        assert abs(lhs - rhs) <= 1e-10


def test_P_delta_generator_limit(scenario):
    dom, pot = scenario
    G = random_symfn(np.random.default_rng(4), 12, 3)
    w = PairingWeights(dom.volume_element)
    L = apply_L_hat(G, OperatorParams(0.3), pot, dom)
    errs = []
    for delta in (0.04, 0.02, 0.01):
        P = apply_P_delta(G, OperatorParams(0.3, delta), pot, dom)
        errs.append(norm_L_C((P - G) * (1 / delta) - L, 2.0, w))
    assert errs[1] < 0.6 * errs[0] and errs[2] < 0.6 * errs[1]


def test_generator_residual_zero_input(scenario):
    dom, pot = scenario
    k = SymFn.zeros(basis_for(12, 3))
    assert generator_residual(k, OperatorParams(0.3), pot, dom, 2.0) == 0


def test_hard_core_is_the_lattice_hierarchy():
    # low orders are exact once the basis leaves room for every kernel term
    dom, pot, z = DomainSpec(8, 0.5), Potential((0.0, 1.0)), 0.3
    k_mu = exact_gibbs_correlations(GibbsSpec(z, pot, dom), 5)
    out = apply_L_hat_star(k_mu, OperatorParams(z, xi_cap=3, on_site="hard-core"), pot, dom)
    assert np.max(np.abs(out.order(1))) < 1e-14
    assert np.max(np.abs(out.order(2))) < 1e-14


def test_free_hard_core_fixed_point():
    dom, z = DomainSpec(8, 0.5), 0.4
    k_mu = exact_gibbs_correlations(GibbsSpec(z, FREE, dom), 3)
    rho = z / (1 + z * 0.5)
    np.testing.assert_allclose(k_mu.values, rho ** k_mu.basis.orders, rtol=1e-12)
    out = apply_L_hat_star(k_mu, OperatorParams(z, on_site="hard-core"), FREE, dom)
    assert norm_K_C(out, 2.0) <= 1e-12


def test_matrix_cache_reuse(scenario):
    dom, pot = scenario
    a = l_hat_star_matrix(dom, pot, 0.3, 3, 3, False)
    assert l_hat_star_matrix(dom, pot, 0.3, 3, 3, False) is a


def test_tail_bound():
    assert truncation_tail_bound(2.0, 2.0, 0.0, 3) == 0
    x = 2.0 * 0.3
    assert truncation_tail_bound(1.0, 2.0, 0.3, 2) == pytest.approx(x ** 3 / 6 * np.exp(x))
