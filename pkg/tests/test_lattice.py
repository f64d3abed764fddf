import math

import numpy as np
import pytest

from glauber_corr.lattice import (DomainError, DomainSpec, Potential, boltzmann_factor, c_phi,
                                  pair_energy, relative_energy)


def test_domain_geometry():
    dom = DomainSpec(5, 0.25)
    np.testing.assert_allclose(dom.coordinates(), [0, 0.25, 0.5, 0.75, 1.0])
    assert dom.length == 1.0
    assert dom.volume_element == 0.25
    assert dom.center_sites(2) == (1, 2)


@pytest.mark.parametrize("kwargs", [dict(num_sites=1, spacing=1.0), dict(num_sites=4, spacing=0.0),
                                    dict(num_sites=4, spacing=1.0, dimension=2),
                                    dict(num_sites=4, spacing=1.0, boundary="periodic")])
def test_domain_rejects(kwargs):
    with pytest.raises(DomainError):
        DomainSpec(**kwargs)


def test_site_range():
    dom = DomainSpec(4, 1.0)
    with pytest.raises(DomainError):
        dom.check_site(4)
    with pytest.raises(DomainError):
        relative_energy(-1, (), Potential.zero(), dom)


def test_potential_validation():
    with pytest.raises(DomainError):
        Potential((0.0, -1.0))
    with pytest.raises(DomainError):
        Potential((0.0, math.inf))
    with pytest.raises(DomainError):
        Potential(())


def test_potential_table():
    pot = Potential.step(2.0, 2, origin=0.0)
    assert pot.values == (0.0, 2.0, 2.0)
    assert pot(-2) == 2.0 and pot(3) == 0.0
    table = pot.interaction_table(5)
    assert np.all(np.diag(table) == 0)
    assert table[0, 2] == 2.0 and table[0, 3] == 0.0
    np.testing.assert_array_equal(table, table.T)


def test_relative_energy_examples():
    pot = Potential.step(1.5, 1)
    assert relative_energy(3, (), pot) == 0
    assert relative_energy(3, (4,), pot) == 1.5
    a, b = (1, 2), (4, 7)
    assert relative_energy(3, a + b, pot) == relative_energy(3, a, pot) + relative_energy(3, b, pot)
    with pytest.raises(DomainError):
        relative_energy(3, (3,), pot)


def test_pair_energy_examples():
    pot = Potential((5.0, 0.7, 0.2))
    assert pair_energy((), pot) == 0
    assert pair_energy((3,), pot) == 0
    assert pair_energy((0, 1, 2), pot) == pytest.approx(2 * 0.7 + 0.2, abs=1e-15)


def test_c_phi_examples():
    dom = DomainSpec(10, 0.5)
    assert c_phi(Potential.zero(), dom) == 0
    a, R = 1.0, 2
    assert c_phi(Potential.step(a, R), dom) == pytest.approx(0.5 * 5 * (1 - math.exp(-1)), abs=1e-15)
    assert c_phi(Potential.step(a, R), dom) == pytest.approx(1.580301, abs=1e-6)


def test_boltzmann_examples():
    pot = Potential.step(1.0, 1)
    assert boltzmann_factor(2, (), pot) == 1
    assert boltzmann_factor(2, (0, 5), Potential.zero()) == 1
    assert boltzmann_factor(2, (3,), pot) == pytest.approx(0.367879, abs=1e-6)
