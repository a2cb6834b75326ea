import numpy as np
import pytest

_ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def criterion():
    """``criterion(k, ok, detail)`` records and prints one verdict line."""
    def record(k, ok, detail=""):
        ok = bool(ok)
        _ACCEPTANCE[k] = (ok, detail)
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return record


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def frozen():
    """Oracle values computed once by ``oracles.py`` and stored in ``data/``."""
    import json
    from pathlib import Path

    return json.loads((Path(__file__).parent / "data" / "frozen_oracles.json").read_text())
