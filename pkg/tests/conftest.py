import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def sparse_scene(rng, n, fill=0.05, blocks=3):
    """Nonnegative scene with a few rectangular patches and many empty regions."""
    scene = np.zeros((n, n))
    for _ in range(blocks):
        h, w = rng.integers(1, max(2, n // 6), size=2)
        y, x = rng.integers(0, n - h + 1), rng.integers(0, n - w + 1)
        scene[y : y + h, x : x + w] = rng.uniform(0.2, 1.0, size=(h, w))
    extra = rng.random((n, n)) < fill / 10
    scene[extra] = rng.random(extra.sum())
    return scene


_ACCEPTANCE = {}


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title, self.notes = number, title, []

    def note(self, text):
        self.notes.append(text)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        verdict = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.notes)
        if exc_type is not None:
            detail = f"{detail}; {exc_type.__name__}: {exc}".strip("; ")
        _ACCEPTANCE[self.number] = f"{verdict} criterion {self.number} ({self.title}): {detail}"
        return False


@pytest.fixture
def criterion():
    """``with criterion(k, title) as c:`` records a PASS/FAIL line for the summary."""
    return _Criterion


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])
