"""Consensus state machines over the aggregate-only channel.

Two parallel linear iterations run under column-stochastic mixing: a
numerator carrying the initial values and a denominator started at all
ones. Their per-node ratio converges to the network average while the
individual iterations need not converge at all. Receivers never decode
individual neighbor values; every update consumes only the channel-weighted
sum of simultaneous transmissions plus the locally known self term.

Three variants live here: the time-invariant-channel update with the
normalization measured once at startup, the time-varying-channel update
with a per-block pilot slot, and a digital baseline that mixes with
explicit 1/(1+out-degree) weights instead of channel gains.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization
from .topology import Digraph, is_strongly_connected

# floor for any measured normalization sum; at or below it the node is
# treated as cut off and the run errors out rather than dividing
SIGMA_MIN = 1e-12

# sanity tolerance on constructed weight matrices
COLUMN_SUM_TOL = 1e-12


class IsolationError(RuntimeError):
    """A node's received pilot mass fell to (numerically) nothing."""


class DegenerateStateError(RuntimeError):
    """A denominator state that must stay positive did not."""


@dataclass(frozen=True)
class AgentState:
    """One node's protocol variables for one iteration.

    y_tilde and x_tilde are the raw received aggregates (numerator and
    denominator chains); y and x are their normalized, transmission-ready
    counterparts; sigma is the normalization sum in force. Before the first
    normalization (time-varying startup) sigma, y, x hold NaN on purpose:
    any accidental use fails loudly downstream.
    """

    y_tilde: float
    x_tilde: float
    y: float
    x: float
    sigma: float


@dataclass(frozen=True)
class InitialStates:
    """The values to be averaged, one per node."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 1:
            raise ValueError(f"initial values must be a nonempty 1-D sequence, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("initial values must be finite")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return int(self.values.size)

    def mean(self) -> float:
        """The consensus target: plain sum over count."""
        return float(np.sum(self.values)) / self.n


@dataclass(frozen=True)
class WeightMatrix:
    """Column-stochastic mixing weights supported on a digraph plus self-loops."""

    entries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.entries, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"weight matrix must be square, got shape {w.shape}")
        if np.any(w < 0):
            raise ValueError("weights must be nonnegative")
        col_err = np.max(np.abs(w.sum(axis=0) - 1.0))
        if col_err > COLUMN_SUM_TOL:
            raise ValueError(f"columns must sum to 1 within {COLUMN_SUM_TOL}, worst error {col_err}")
        w = w.copy()
        w.setflags(write=False)
        object.__setattr__(self, "entries", w)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])


def ota_aggregate(gains_row, signals, noise: float = 0.0) -> float:
    """What one receiver observes in one slot: sum of gain-weighted
    simultaneous transmissions plus its own noise draw.

    The diagonal entry of gains_row carries the digital self term. No
    individual summand is recoverable from the return value, which is the
    whole point of aggregating over the air.
    """
    gains_row = np.asarray(gains_row, dtype=float)
    signals = np.asarray(signals, dtype=float)
    if gains_row.shape != signals.shape:
        raise ValueError(f"gains row and signals differ in length: {gains_row.shape} vs {signals.shape}")
    return float(np.dot(gains_row, signals)) + noise


def prop1_weights(g: Digraph) -> WeightMatrix:
    """Classical digital ratio-consensus weights: node j assigns 1/(1+d_j_out)
    to itself and to each out-neighbor, so every column sums to 1 exactly."""
    if not is_strongly_connected(g):
        raise ValueError("baseline weights need a strongly connected digraph")
    w = np.zeros((g.n, g.n))
    for j in range(g.n):
        share = 1.0 / (1.0 + g.out_degree(j))
        w[j, j] = share
        for l in g.out_neighbors(j):
            w[l, j] = share
    return WeightMatrix(w)


def baseline_step(y: np.ndarray, x: np.ndarray, P: WeightMatrix) -> tuple[np.ndarray, np.ndarray]:
    """One synchronous digital round: both chains mix under the same weights."""
    y = np.asarray(y, dtype=float)
    x = np.asarray(x, dtype=float)
    if y.shape != (P.n,) or x.shape != (P.n,):
        raise ValueError(f"state vectors must have shape ({P.n},)")
    return P.entries @ y, P.entries @ x


def _pilot_sigma(h: ChannelRealization, noise, context: str) -> np.ndarray:
    """All nodes transmit 1 simultaneously; receiver j's aggregate is its
    normalization sum. Includes the diagonal self term."""
    ones = np.ones(h.n)
    sigma = np.empty(h.n)
    for j in range(h.n):
        sigma[j] = ota_aggregate(h.gains[j], ones, 0.0 if noise is None else noise[j])
        if sigma[j] <= SIGMA_MIN:
            raise IsolationError(
                f"node {j} is isolated {context}: pilot sum {sigma[j]!r} <= {SIGMA_MIN}"
            )
    return sigma


def tic_initialize(S: InitialStates, h: ChannelRealization, noise_w=None) -> list[AgentState]:
    """Startup for the time-invariant variant: measure sigma once from an
    all-ones pilot, then seed the two chains with (S_j, 1) and normalize."""
    if S.n != h.n:
        raise ValueError(f"got {S.n} initial values for {h.n} nodes")
    sigma = _pilot_sigma(h, noise_w, "at initialization")
    return [
        AgentState(
            y_tilde=float(S.values[j]),
            x_tilde=1.0,
            y=float(S.values[j]) / sigma[j],
            x=1.0 / sigma[j],
            sigma=float(sigma[j]),
        )
        for j in range(h.n)
    ]


def tic_step(states: list[AgentState], h: ChannelRealization, noise_y=None, noise_x=None) -> list[AgentState]:
    """One time-invariant iteration: two aggregation slots (numerator then
    denominator) over the same realization, then renormalize by the sigma
    fixed at startup. sigma is never remeasured here, even though with a
    constant channel remeasuring would be harmless."""
    n = h.n
    if len(states) != n:
        raise ValueError(f"got {len(states)} states for {n} nodes")
    ty = np.array([st.y for st in states])
    tx = np.array([st.x for st in states])
    out = []
    for j in range(n):
        y_tilde = ota_aggregate(h.gains[j], ty, 0.0 if noise_y is None else noise_y[j])
        x_tilde = ota_aggregate(h.gains[j], tx, 0.0 if noise_x is None else noise_x[j])
        s = states[j].sigma
        out.append(AgentState(y_tilde=y_tilde, x_tilde=x_tilde, y=y_tilde / s, x=x_tilde / s, sigma=s))
    return out


def tvc_initialize(S: InitialStates) -> list[AgentState]:
    """Startup for the time-varying variant: chains seeded with (S_j, 1);
    no sigma exists until the first block's pilot, so the normalized fields
    are NaN placeholders that the first tvc_step overwrites."""
    nan = float("nan")
    return [
        AgentState(y_tilde=float(v), x_tilde=1.0, y=nan, x=nan, sigma=nan) for v in S.values
    ]


def tvc_step(
    states: list[AgentState],
    h_k: ChannelRealization,
    noise_w=None,
    noise_y=None,
    noise_x=None,
) -> list[AgentState]:
    """One time-varying iteration, three slots within one coherence block:

    1. pilot: everyone transmits 1, receiver j measures sigma_j from this
       block's gains;
    2. numerator: everyone transmits y_tilde / own sigma, receivers aggregate;
    3. denominator: same with x_tilde.

    Normalizing with the block's own sigma is what makes the step's net
    effect a column-stochastic linear map. The stored y and x are the new
    aggregates over this block's sigma; the next step remeasures before
    transmitting, so they are provisional outputs, not next inputs.
    """
    n = h_k.n
    if len(states) != n:
        raise ValueError(f"got {len(states)} states for {n} nodes")
    sigma = _pilot_sigma(h_k, noise_w, "this step (deep fade)")
    ty = np.array([st.y_tilde for st in states]) / sigma
    tx = np.array([st.x_tilde for st in states]) / sigma
    out = []
    for j in range(n):
        y_tilde = ota_aggregate(h_k.gains[j], ty, 0.0 if noise_y is None else noise_y[j])
        x_tilde = ota_aggregate(h_k.gains[j], tx, 0.0 if noise_x is None else noise_x[j])
        out.append(
            AgentState(
                y_tilde=y_tilde,
                x_tilde=x_tilde,
                y=y_tilde / sigma[j],
                x=x_tilde / sigma[j],
                sigma=float(sigma[j]),
            )
        )
    return out


def ratio_output(states: list[AgentState]) -> np.ndarray:
    """Each node's running estimate of the average: y_tilde over x_tilde.

    Identical to y/x wherever both are defined, since numerator and
    denominator share a sigma.
    """
    for j, st in enumerate(states):
        if not st.x_tilde > 0:
            raise DegenerateStateError(
                f"node {j} has nonpositive denominator state x_tilde={st.x_tilde!r}"
            )
    return np.array([st.y_tilde / st.x_tilde for st in states])
