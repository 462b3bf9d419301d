"""End-to-end runs: topology and channel construction from one master seed,
per-step slot scheduling with optional receiver noise, trajectory recording,
spread-based convergence detection, and summary verdicts.

One master seed fans out into four independent substreams (topology,
channel, initial values, noise), so changing the noise level never reshuffles
the topology draw. Everything downstream is a pure function of the config.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .analysis import mass_audit
from .channel import ChannelProcess, FadingModel, NoiseModel
from .protocol import (
    DegenerateStateError,
    InitialStates,
    baseline_step,
    prop1_weights,
    ratio_output,
    tic_initialize,
    tic_step,
    tvc_initialize,
    tvc_step,
)
from .topology import (
    TopologySpec,
    check_epsilon_B_connectivity,
    generate_topology,
    is_strongly_connected,
)

ALGORITHMS = ("tic", "tvc", "baseline")

INITIAL_KINDS = ("explicit", "random_mean")


class NonFiniteStateError(RuntimeError):
    """A state or ratio left the reals; the run is aborted, never patched."""


@dataclass(frozen=True)
class InitialSpec:
    """How the to-be-averaged values come into being."""

    kind: str
    values: tuple[float, ...] | None = None
    target_mean: float | None = None
    half_width: float | None = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ValueError(f"unknown initial kind {self.kind!r}; expected one of {INITIAL_KINDS}")
        if self.kind == "explicit":
            if not self.values:
                raise ValueError("explicit initial values must be a nonempty sequence")
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        else:
            if self.target_mean is None or self.half_width is None:
                raise ValueError("random_mean needs target_mean and half_width")
            if self.half_width < 0:
                raise ValueError(f"half_width must be nonnegative, got {self.half_width}")

    @classmethod
    def explicit(cls, values) -> "InitialSpec":
        return cls("explicit", values=tuple(values))

    @classmethod
    def random_mean(cls, target_mean: float, half_width: float) -> "InitialSpec":
        return cls("random_mean", target_mean=float(target_mean), half_width=float(half_width))


@dataclass(frozen=True)
class SimulationConfig:
    """Complete description of one experiment; two equal configs give
    bitwise-identical runs."""

    n: int
    topology: TopologySpec
    algorithm: str
    fading: FadingModel
    initial: InitialSpec
    seed: int
    self_weight: float = 1.0
    noise: NoiseModel = NoiseModel(0.0)
    epsilon: float = 1e-3
    B: int = 1
    deep_fade: bool = False
    max_iters: int = 5000
    tol: float = 1e-9
    tol_window: int = 10
    pair_scales: tuple[tuple[tuple[int, int], float], ...] = ()

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.tol <= 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.tol_window < 1:
            raise ValueError(f"tol_window must be at least 1, got {self.tol_window}")
        if self.B < 1:
            raise ValueError(f"B must be at least 1, got {self.B}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.self_weight < 0:
            raise ValueError(f"self_weight must be nonnegative, got {self.self_weight}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        if self.deep_fade and self.algorithm != "tvc":
            raise ValueError("deep_fade is a time-varying channel feature; use algorithm=tvc")
        if self.initial.kind == "explicit" and len(self.initial.values) != self.n:
            raise ValueError(
                f"explicit initial values have length {len(self.initial.values)}, expected n={self.n}"
            )


@dataclass(frozen=True)
class TrajectoryRecord:
    """One node's raw chain states and ratio at one step."""

    step: int
    node: int
    y_tilde: float
    x_tilde: float
    mu: float


@dataclass(frozen=True)
class RunSummary:
    """End-of-run verdict. epsilon_B_satisfied is None for algorithms where
    the windowed-connectivity audit does not apply."""

    converged: bool
    iterations_used: int
    target_average: float
    final_max_error: float
    mass_drift_y: float
    mass_drift_x: float
    epsilon_B_satisfied: bool | None


def stream_seeds(seed: int) -> tuple[int, int, int, int]:
    """Four independent integer sub-seeds (topology, channel, initial values,
    noise) derived from one master seed."""
    children = np.random.SeedSequence(seed).spawn(4)
    return tuple(int(c.generate_state(1, dtype=np.uint64)[0]) for c in children)


def make_initial_values(spec: InitialSpec, n: int, seed: int) -> InitialStates:
    """Materialize initial values; random_mean recenters the sample so the
    realized average hits the target exactly (to rounding), which is what
    makes convergence-to-target assertions meaningful."""
    if spec.kind == "explicit":
        if len(spec.values) != n:
            raise ValueError(f"got {len(spec.values)} explicit values for n={n}")
        return InitialStates(np.array(spec.values))
    rng = np.random.default_rng(seed)
    vals = rng.uniform(spec.target_mean - spec.half_width, spec.target_mean + spec.half_width, size=n)
    vals = vals + (spec.target_mean - vals.mean())
    return InitialStates(vals)


def spread(mu) -> float:
    """Agent-computable convergence diagnostic: max minus min of the ratios."""
    mu = np.asarray(mu, dtype=float)
    if mu.size == 0:
        raise ValueError("spread of an empty vector")
    return float(np.max(mu) - np.min(mu))


def prepare(config: SimulationConfig):
    """Deterministic run setup: (digraph, channel process or None, initial values).

    Exposed separately so audits can rebuild exactly the channel sequence a
    run saw without replaying the run.
    """
    topo_seed, channel_seed, initial_seed, _ = stream_seeds(config.seed)
    g = generate_topology(config.topology, config.n, topo_seed)
    if config.algorithm in ("tic", "baseline") and not is_strongly_connected(g):
        raise ValueError(f"{config.algorithm} requires a strongly connected topology")
    channel = None
    if config.algorithm in ("tic", "tvc"):
        channel = ChannelProcess(
            model=config.fading,
            topology=g,
            self_weight=config.self_weight,
            time_varying=(config.algorithm == "tvc"),
            seed=channel_seed,
            deep_fade=config.deep_fade,
            epsilon=config.epsilon if config.deep_fade else None,
            pair_scales=config.pair_scales,
        )
    S = make_initial_values(config.initial, config.n, initial_seed)
    return g, channel, S


def run(config: SimulationConfig) -> tuple[list[TrajectoryRecord], RunSummary]:
    """Execute one experiment to convergence or max_iters.

    Convergence means the ratio spread stayed at or below tol for tol_window
    consecutive post-update steps. Non-convergence is a verdict, not an
    error; genuinely broken states (non-finite values, lost pilot mass,
    nonpositive denominators) raise instead.
    """
    g, channel, S = prepare(config)
    _, _, _, noise_seed = stream_seeds(config.seed)
    noise_rng = np.random.default_rng(noise_seed)
    std = config.noise.std

    def noise_draw():
        # one slot's worth of receiver noise; None keeps the exact-zero path
        if std == 0.0:
            return None
        return noise_rng.normal(0.0, std, size=config.n)

    records: list[TrajectoryRecord] = []
    ytilde_steps: list[np.ndarray] = []
    xtilde_steps: list[np.ndarray] = []

    def record(step: int, y_tilde: np.ndarray, x_tilde: np.ndarray, mu: np.ndarray):
        if not (np.all(np.isfinite(y_tilde)) and np.all(np.isfinite(x_tilde)) and np.all(np.isfinite(mu))):
            raise NonFiniteStateError(f"non-finite state at step {step}")
        ytilde_steps.append(y_tilde)
        xtilde_steps.append(x_tilde)
        for node in range(config.n):
            records.append(
                TrajectoryRecord(
                    step=step,
                    node=node,
                    y_tilde=float(y_tilde[node]),
                    x_tilde=float(x_tilde[node]),
                    mu=float(mu[node]),
                )
            )

    h_seq = []
    if config.algorithm == "baseline":
        P = prop1_weights(g)
        y, x = S.values.copy(), np.ones(config.n)

        def step_fn(k):
            nonlocal y, x
            y, x = baseline_step(y, x, P)
            if np.any(x <= 0):
                j = int(np.argmin(x))
                raise DegenerateStateError(f"node {j} has nonpositive denominator at step {k}")
            return y.copy(), x.copy(), y / x

        record(0, y.copy(), x.copy(), y / x)
    elif config.algorithm == "tic":
        h = channel.realization(0)
        h_seq.append(h)
        states = tic_initialize(S, h, noise_w=noise_draw())

        def step_fn(k):
            nonlocal states
            states = tic_step(states, h, noise_y=noise_draw(), noise_x=noise_draw())
            yt = np.array([st.y_tilde for st in states])
            xt = np.array([st.x_tilde for st in states])
            return yt, xt, ratio_output(states)

        record(0, S.values.copy(), np.ones(config.n), ratio_output(states))
    else:
        states = tvc_initialize(S)

        def step_fn(k):
            nonlocal states
            h_k = channel.realization(k - 1)
            h_seq.append(h_k)
            states = tvc_step(states, h_k, noise_w=noise_draw(), noise_y=noise_draw(), noise_x=noise_draw())
            yt = np.array([st.y_tilde for st in states])
            xt = np.array([st.x_tilde for st in states])
            return yt, xt, ratio_output(states)

        record(0, S.values.copy(), np.ones(config.n), ratio_output(states))

    converged = False
    streak = 0
    last_step = 0
    last_mu = np.array([r.mu for r in records[-config.n :]])
    for k in range(1, config.max_iters + 1):
        yt, xt, mu = step_fn(k)
        record(k, yt, xt, mu)
        last_step = k
        last_mu = mu
        if spread(mu) <= config.tol:
            streak += 1
        else:
            streak = 0
        if streak >= config.tol_window:
            converged = True
            break

    target = S.mean()
    final_max_error = float(np.max(np.abs(last_mu - target)))
    drift_y, drift_x = mass_audit((np.array(ytilde_steps), np.array(xtilde_steps)), S)
    eps_b = None
    if config.algorithm == "tvc":
        eps_b = check_epsilon_B_connectivity(h_seq, config.epsilon, config.B)
    summary = RunSummary(
        converged=converged,
        iterations_used=last_step,
        target_average=target,
        final_max_error=final_max_error,
        mass_drift_y=drift_y,
        mass_drift_x=drift_x,
        epsilon_B_satisfied=eps_b,
    )
    return records, summary
