import pytest

from fixlab import catalog
from fixlab.functionals import Operator
from fixlab.metric import UNIT_INTERVAL


def unit_op(source, eta=1):
    return Operator.from_source(source, eta, UNIT_INTERVAL)


@pytest.fixture(params=[(name, eta) for name in catalog.CATALOG for eta in (1, 3)],
                ids=lambda p: f"{p[0]}-eta{p[1]}")
def catalog_case(request):
    name, eta = request.param
    entry = catalog.get(name)
    return entry, entry.operator(eta)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, title, ok, detail=""):
    line = f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}" + (f" [{detail}]" if detail else "")
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
