import pytest

from glauber_corr.configs import SymFn, basis_for
from glauber_corr.lattice import DomainSpec, Potential


@pytest.fixture
def scenario():
    """Interacting desk-scale box: 12 sites, h = 0.5, nearest-neighbour repulsion 1."""
    return DomainSpec(12, 0.5), Potential((0.0, 1.0))


def random_symfn(rng, num_sites, max_order, scale=1.0, decay=1.0):
    basis = basis_for(num_sites, max_order)
    vals = rng.uniform(-1, 1, len(basis)) * scale * decay ** basis.orders
    return SymFn(basis, vals)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one verdict line per acceptance criterion."""

    def record(number, title, passed, detail):
        ACCEPTANCE_LINES.append((number, f"criterion {number:2d} {title}: "
                                         f"{'PASS' if passed else 'FAIL'} ({detail})"))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
