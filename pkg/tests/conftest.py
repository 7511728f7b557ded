import pytest

from colorweyl import make_field, super_bicharacter, trivial_bicharacter
from colorweyl.theorems import (
    exceptional_instance,
    h2n_instance,
    rational_weyl_instance,
    tensor_counterexample_instance,
    truncated_witt_instance,
)


@pytest.fixture(scope="session")
def F3():
    return make_field("gf", 3)


@pytest.fixture(scope="session")
def QQ():
    return make_field("rational")


@pytest.fixture(scope="session")
def witt():
    return truncated_witt_instance()


@pytest.fixture(scope="session")
def h2():
    return h2n_instance(2)


@pytest.fixture(scope="session")
def h2_rational():
    return h2n_instance(2, make_field("rational"))


@pytest.fixture(scope="session")
def h3():
    return h2n_instance(3)


@pytest.fixture(scope="session")
def exceptional():
    return exceptional_instance()


@pytest.fixture(scope="session")
def tensor():
    return tensor_counterexample_instance()


@pytest.fixture(scope="session")
def rational_weyl():
    return rational_weyl_instance()


@pytest.fixture(scope="session")
def finite_corpus(witt, h2, exceptional, tensor):
    return {"truncated_witt": witt, "h2n_n2": h2, "exceptional": exceptional, "tensor": tensor}


@pytest.fixture(scope="session")
def super3(F3):
    return super_bicharacter(F3)


@pytest.fixture(scope="session")
def trivial3(F3):
    return trivial_bicharacter(F3)


@pytest.fixture(scope="session")
def mixed_ctx(F3, super3):
    """Super algebra F_3[t]/(t^3) (x) Lambda(x) with d/dt even and d/dx odd."""
    from colorweyl import WeylContext, coordinate_derivation, free_truncated_algebra, make_D

    A = free_truncated_algebra(F3, super3, [("t", (0,), 3), ("x", (1,), 2)])
    D = make_D(A, [coordinate_derivation(A, 0), coordinate_derivation(A, 1)])
    return WeylContext(A, D)


# acceptance criteria record one (criterion, part, ok, detail) tuple per part
ACCEPTANCE: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    parts: dict = {}
    for crit, part, ok, detail in ACCEPTANCE:
        parts.setdefault(crit, []).append((part, ok, detail))
    for crit in sorted(parts):
        ok = all(p[1] for p in parts[crit])
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}")
        for part, pok, detail in parts[crit]:
            terminalreporter.write_line(f"    {'ok  ' if pok else 'FAIL'} {part}: {detail}")
