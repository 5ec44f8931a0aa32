import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_unimodular(n: int, rng: np.random.Generator, steps: int = 12) -> np.ndarray:
    """Product of random elementary integer matrices."""
    U = np.eye(n, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(n, size=2, replace=False)
        U[:, i] += int(rng.choice([-1, 1])) * U[:, j]
    perm = rng.permutation(n)
    return U[:, perm]


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    """Unit tests never touch the user's genus cache."""
    monkeypatch.setenv("KNESER_CACHE_DIR", str(tmp_path / "cache"))


_ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture
def acceptance_record():
    """Callback (criterion, ok, detail) collected for the end-of-run summary."""
    def record(n: int, ok: bool | None, detail: str):
        _ACCEPTANCE[n] = ("SKIP" if ok is None else "PASS" if ok else "FAIL", detail)
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"{status:4} criterion {n:>2}: {detail}")
