import numpy as np
import pytest

from scobo.discrepancy import CandidatePool, PreSampleSet, a2_sites
from scobo.optimization import rescore
from scobo.sampling import CandidateBatch


class BumpAcquisition:
    """Analytic nonuniform acquisition on the unit square; counts evaluated points."""

    kind = "bump"

    def __init__(self, dim=2, center=0.3, width=0.25, floor=0.05):
        self.dim = dim
        self.center = center
        self.width = width
        self.floor = floor
        self.calls = 0

    def __call__(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        self.calls += x.shape[0]
        r2 = np.sum((x - self.center) ** 2, axis=1)
        return self.floor + np.exp(-r2 / (2 * self.width**2))

    @property
    def maximum(self):
        return self.floor + 1.0


@pytest.fixture
def bump():
    return BumpAcquisition()


def small_instance(seed, n=3, size=10, m=50, n_pre=2000):
    """Fixed pool of ``size`` sites (slot 0 is x*) with ``m`` random designs over it."""
    rng = np.random.default_rng(seed)
    acq = BumpAcquisition()
    u = rng.random((n_pre, 2))
    pre = PreSampleSet(u, acq(u))
    sites = u[rng.choice(n_pre, size, replace=False)]
    pool = CandidatePool(sites, a2_sites(sites, pre))
    designs = np.array([[0, *rng.choice(np.arange(1, size), n - 1, replace=False)] for _ in range(m)])
    scores = np.array([rescore(pool, r) for r in designs])
    return CandidateBatch(designs, scores, [0] * m, pool), pool


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
