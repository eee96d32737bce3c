from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np
import polars as pl

from .errors import DimensionMismatch


class Route(StrEnum):
    # Herglotz equations in natural coordinates (q, u, s)
    full = "full"

    # Lagrange-Poincaré-Herglotz equations on (q^i, v, w, s)
    reduced = "reduced"

    # Reduced route followed by horizontal lift and group reconstruction
    reconstruct = "reconstruct"

    # Reconstructed and full trajectories side by side, with a deviation column
    compare = "compare"


class OutputFormat(StrEnum):
    csv = "csv"
    json = "json"


class GroupStepper(StrEnum):
    # g_{n+1} = g_n exp(h ξ(t_n + h/2)), order 2
    midpoint = "midpoint"

    # Runge-Kutta-Munthe-Kaas, order 4
    rkmk4 = "rkmk4"


class ScenarioName(StrEnum):
    affine = "affine"
    kaluza_klein = "kaluza-klein"
    wong = "wong"
    damped_oscillator = "damped-oscillator"


class RecordField(StrEnum):
    # Trajectory columns shared by every route
    TIME = "t"
    ACTION = "s"

    # Per-knot diagnostics
    ENERGY = "E_L"
    DISSIPATION_RESIDUAL = "dissipation_residual"
    SDOT_RESIDUAL = "sdot_residual"
    DEVIATION = "deviation"

    # Prefix of the full-route columns in the compare output
    FULL_PREFIX = "full_"

    # Experiment-level metadata fields
    SCENARIO = "scenario"
    STEPPER = "stepper"
    STEP = "dt"
    ERROR = "error"
    RATIO = "ratio"
    ORDER = "order"


def natural_columns(n: int) -> tuple[str, ...]:
    return (
        *(f"q{k}" for k in range(n)),
        *(f"u{k}" for k in range(n)),
        RecordField.ACTION.value,
    )


def quasi_columns(n_q: int, base_dim: int, fiber_dim: int) -> tuple[str, ...]:
    """Columns of a quasi-velocity state: q0..q{n_q-1}, v.., w.., s."""
    return (
        *(f"q{k}" for k in range(n_q)),
        *(f"v{k}" for k in range(base_dim)),
        *(f"w{k}" for k in range(fiber_dim)),
        RecordField.ACTION.value,
    )


# ----------------------------
# States
# ----------------------------

@dataclass(frozen=True)
class NaturalState:
    q: np.ndarray
    u: np.ndarray
    s: float

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.q, self.u, [self.s]]).astype(float)

    @classmethod
    def from_vector(cls, y: np.ndarray) -> "NaturalState":
        n = (len(y) - 1) // 2
        return cls(q=np.asarray(y[:n]), u=np.asarray(y[n : 2 * n]), s=y[2 * n])


@dataclass(frozen=True)
class ReducedState:
    q_base: np.ndarray
    v: np.ndarray
    w: np.ndarray
    s: float

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.q_base, self.v, self.w, [self.s]]).astype(float)

    @classmethod
    def from_vector(cls, y: np.ndarray, *, base_dim: int, fiber_dim: int) -> "ReducedState":
        m, d = base_dim, fiber_dim
        return cls(
            q_base=np.asarray(y[:m]),
            v=np.asarray(y[m : 2 * m]),
            w=np.asarray(y[2 * m : 2 * m + d]),
            s=y[2 * m + d],
        )


@dataclass(frozen=True)
class FullState:
    """Point of TQ×ℝ in the invariant frame: (q^i, q^a, v^i, w^a, s)."""

    q_base: np.ndarray
    q_fiber: np.ndarray
    v: np.ndarray
    w: np.ndarray
    s: float

    @property
    def q(self) -> np.ndarray:
        return np.concatenate([self.q_base, self.q_fiber])

    def reduced(self) -> ReducedState:
        return ReducedState(q_base=self.q_base, v=self.v, w=self.w, s=self.s)

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.q_base, self.q_fiber, self.v, self.w, [self.s]]
        ).astype(float)

    @classmethod
    def from_vector(cls, y, *, base_dim: int, fiber_dim: int) -> "FullState":
        m, d = base_dim, fiber_dim
        y = np.asarray(y, dtype=float)
        expected = 2 * (m + d) + 1
        if len(y) != expected:
            raise DimensionMismatch(
                f"state vector has {len(y)} entries, expected {expected}"
            )
        return cls(
            q_base=y[:m],
            q_fiber=y[m : m + d],
            v=y[m + d : 2 * m + d],
            w=y[2 * m + d : 2 * m + 2 * d],
            s=float(y[-1]),
        )


# ----------------------------
# Trajectories
# ----------------------------

@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    values: np.ndarray
    columns: tuple[str, ...]
    diagnostics: dict[str, np.ndarray] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        if name in self.diagnostics:
            return self.diagnostics[name]
        return self.values[:, self.columns.index(name)]

    def to_frame(self) -> pl.DataFrame:
        data = {RecordField.TIME.value: self.times}
        data |= {name: self.values[:, k] for k, name in enumerate(self.columns)}
        data |= self.diagnostics
        return pl.DataFrame(data)
