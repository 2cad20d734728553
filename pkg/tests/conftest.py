import pytest

from sleeparch.simulator import builtin_spec, generate_corpus

SEED = 20240917


@pytest.fixture(scope="session")
def sim_corpora():
    """100 x 960-epoch corpora per cohort from the builtin specs."""
    pat = generate_corpus(builtin_spec("patient"), 100, 960, SEED, "patient")
    hea = generate_corpus(builtin_spec("healthy"), 100, 960, SEED + 1, "healthy")
    return pat, hea


@pytest.fixture(scope="session")
def sim_dataset(sim_corpora):
    pat, hea = sim_corpora
    return pat.merged(hea)


_ACCEPTANCE_LINES = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {name}" + (f" :: {detail}" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
