import numpy as np

from .bundle import to_natural
from .entities import FullState, NaturalState


def uniform_box(*, rng: np.random.Generator, low: np.ndarray, high: np.ndarray, **kwargs):
    """Return a sampler of points drawn uniformly from the box [low, high]."""
    low, high = np.asarray(low, dtype=float), np.asarray(high, dtype=float)
    return lambda: rng.uniform(low, high)


def full_state(*, rng: np.random.Generator, scenario, **kwargs):
    """Return a sampler of FullState points inside the scenario's sample box."""
    low, high = scenario.sample_box
    draw = uniform_box(rng=rng, low=low, high=high)
    m, d = scenario.chart.base_dim, scenario.chart.fiber_dim
    return lambda: FullState.from_vector(draw(), base_dim=m, fiber_dim=d)


def natural_state(*, rng: np.random.Generator, scenario, **kwargs):
    """Return a sampler of natural-coordinate states, drawn in the invariant frame and converted."""
    draw = full_state(rng=rng, scenario=scenario)
    return lambda: to_natural(scenario.chart, draw())


def group_coords(*, rng: np.random.Generator, scenario, **kwargs):
    """Return a sampler of fibre coordinates from the scenario's sample box."""
    low, high = scenario.sample_box
    m, d = scenario.chart.base_dim, scenario.chart.fiber_dim
    return uniform_box(rng=rng, low=low[m : m + d], high=high[m : m + d])


def draw_states(*, rng: np.random.Generator, scenario, count: int) -> list[NaturalState]:
    sample = natural_state(rng=rng, scenario=scenario)
    return [sample() for _ in range(count)]
