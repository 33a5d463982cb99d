import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fdsecrecy.harness import derive_seed, gen_channels
from fdsecrecy.model import ChannelSet, SystemConfig, TransmitDesign, is_feasible

settings.register_profile(
    "repo", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


def cn(rng, var, *shape):
    return np.sqrt(var / 2) * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_psd(rng, n, scale=1.0, rank=None):
    k = n if rank is None else rank
    a = cn(rng, 1.0, n, k)
    return scale * (a @ a.conj().T)


def random_design(rng, n, p_max=1.0):
    s = random_psd(rng, n)
    v = random_psd(rng, n)
    f = rng.uniform(0.05, 1.0) * p_max / np.trace(s + v).real
    return TransmitDesign(s * f, v * f)


def scalar_channels(h_d=1.0, h_i=1.0, g_d=0.0, g_i=0.0, g_u=1.0, h_si=0.0):
    return ChannelSet([h_d], [h_i], g_d, g_i, [g_u], [[h_si]])


@pytest.fixture
def cfg():
    return SystemConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def feasible_channels(cfg):
    """The first few feasible default instances."""
    out = []
    k = 0
    while len(out) < 6:
        ch = gen_channels(cfg, derive_seed(7, k))
        k += 1
        if is_feasible(ch, cfg):
            out.append(ch)
    return out


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
