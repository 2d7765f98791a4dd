import numpy as np
import pytest

from pathcalc import Path


@pytest.fixture
def p1() -> Path:
    """4-event step path used throughout: jumps +0.6, -0.2, +0.9."""
    return Path(times=[0.0, 1.0, 2.0, 3.0], values=[0.0, 0.6, 0.4, 1.3], mode="step")


@pytest.fixture
def p2() -> Path:
    """Oscillator 0,1,0,1,0 on integer times."""
    return Path(times=[0.0, 1.0, 2.0, 3.0, 4.0], values=[0.0, 1.0, 0.0, 1.0, 0.0], mode="step")


def random_step_path(rng: np.random.Generator, n_events=12, dim=1, min_jump=0.05,
                     max_jump=0.6, horizon=None) -> Path:
    """Step path whose per-coordinate jumps all have magnitude >= min_jump."""
    times = np.concatenate([[0.0], np.sort(rng.uniform(0.05, 1.0, n_events - 1))])
    horizon = horizon if horizon is not None else float(times[-1])
    jumps = rng.uniform(min_jump, max_jump, (n_events, dim)) * rng.choice([-1.0, 1.0], (n_events, dim))
    values = np.cumsum(jumps, axis=0)
    values[0] = rng.uniform(-0.5, 0.5, dim)
    values[1:] = values[0] + np.cumsum(jumps[1:], axis=0)
    return Path(times=times, values=values, mode="step", horizon=horizon)
