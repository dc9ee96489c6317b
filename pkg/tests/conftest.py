import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_psd(rng, n, c22_min=0.1, scale=4.0):
    """Random PSD tensors Q diag(mu) Q^T, mu uniform in [0, scale], with C22 >= c22_min."""
    from ucmbl.psd import SymTensor2

    out = []
    while sum(c.shape[1] for c in out) < n:
        mu1, mu2 = rng.uniform(0.0, scale, (2, n))
        th = rng.uniform(0.0, np.pi, n)
        c, s = np.cos(th), np.sin(th)
        c11 = mu1 * c * c + mu2 * s * s
        c12 = (mu1 - mu2) * c * s
        c22 = mu1 * s * s + mu2 * c * c
        keep = c22 >= c22_min
        out.append(np.stack([c11[keep], c12[keep], c22[keep]]))
    m = np.concatenate(out, axis=1)[:, :n]
    return SymTensor2(m[0], m[1], m[2])


def rank_one(rng, n, scale=2.0):
    """C = v v^T together with its exact square root v v^T / |v|."""
    from ucmbl.psd import SymTensor2

    v1 = rng.uniform(-scale, scale, n)
    v2 = rng.uniform(0.4, scale, n)
    r = np.hypot(v1, v2)
    return SymTensor2(v1 * v1, v1 * v2, v2 * v2), SymTensor2(v1 * v1 / r, v1 * v2 / r, v2 * v2 / r)


# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
