import pytest

from skewmorph import enumeration as en
from skewmorph import structure_verify as sv


@pytest.fixture(scope="session")
def brute32():
    return en.brute_force_enum(3, 2)


@pytest.fixture(scope="session")
def struct32():
    return en.full_enum(3, 2, method="structured")


@pytest.fixture(scope="session")
def set33():
    return en.full_enum(3, 3, method="structured")


@pytest.fixture(scope="session")
def set52():
    return en.full_enum(5, 2, method="structured")


@pytest.fixture(scope="session")
def set72():
    return en.full_enum(7, 2, method="structured")


@pytest.fixture(scope="session")
def small_brutes():
    """Brute-force sets for every p**n <= 9 configuration."""
    return {(p, n): en.brute_force_enum(p, n)
            for p, n in ((2, 1), (2, 2), (2, 3), (3, 1), (5, 1), (7, 1), (3, 2))}


@pytest.fixture(scope="session")
def example_reports():
    return {tag: sv.build_and_verify_example(tag) for tag in ("e1", "e2", "e3")}
