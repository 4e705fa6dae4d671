import pytest

from fungisynth.config import SimulationConfig

ACCEPTANCE_LINES: list[str] = []


class StubSource:
    """Deterministic stand-in for RandomSource.

    normal() returns its mean (unit noise), poisson() returns ``children``,
    uniform() returns ``a + frac * (b - a)``.
    """

    def __init__(self, children=1, frac=0.0, normal_value=None):
        self.children = children
        self.frac = frac
        self.normal_value = normal_value

    def random(self):
        return self.frac

    def uniform(self, a, b):
        return a + self.frac * (b - a)

    def normal(self, mu, sigma):
        return mu if self.normal_value is None else self.normal_value

    def poisson(self, lam):
        return self.children

    def permutation(self, n):
        return list(range(n))


@pytest.fixture
def stub():
    return StubSource


@pytest.fixture
def small_config(tmp_path):
    return SimulationConfig().with_overrides(**{
        "total_frames": 6,
        "lifecycle.initial_spores": 12,
        "render.width": 64,
        "render.height": 64,
        "output_dir": str(tmp_path / "out"),
    })


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
