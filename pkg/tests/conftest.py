import numpy as np
import pytest

from dnls_lab.spectral_core import SpectralField


def random_field(n, seed=0, decay=1.0, scale=1.0):
    rng = np.random.default_rng(seed)
    ks = np.arange(-n, n + 1)
    m = (rng.standard_normal(2 * n + 1) + 1j * rng.standard_normal(2 * n + 1)) * np.exp(-decay * np.abs(ks) / 4)
    return SpectralField(n, scale * m)


@pytest.fixture
def rfield():
    return random_field


# one verdict line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def record(n: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[n] = ("PASS" if ok else "FAIL", detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        verdict, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {verdict}  {detail}")
