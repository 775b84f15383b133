import pytest

from ffmt.gfpoly import field_from_q
from ffmt.sieve import build_spf

# degree caps for the shared tables, chosen to keep the session fast
TABLE_DEGREES = {2: 16, 3: 9, 4: 7, 5: 6, 7: 5, 8: 5, 9: 5}


@pytest.fixture(scope="session")
def tables():
    cache = {}

    def get(q, max_deg=None):
        d = TABLE_DEGREES[q] if max_deg is None else max_deg
        have = cache.get(q)
        if have is None or have.max_deg < d:
            cache[q] = build_spf(field_from_q(q), d)
        return cache[q]

    return get


@pytest.fixture(scope="session")
def F2():
    return field_from_q(2)


@pytest.fixture(scope="session")
def F3():
    return field_from_q(3)


@pytest.fixture(scope="session")
def T2(tables):
    return tables(2)


@pytest.fixture(scope="session")
def T3(tables):
    return tables(3)


# one PASS/FAIL line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    def record(number: int, title: str, body):
        try:
            body()
        except BaseException:
            line = f"criterion {number}: FAIL  {title}"
            print(line)
            ACCEPTANCE_LINES.append(line)
            raise
        line = f"criterion {number}: PASS  {title}"
        print(line)
        ACCEPTANCE_LINES.append(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
