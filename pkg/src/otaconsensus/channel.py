"""Reciprocal fading channels: per-coherence-block gain matrices plus a digital self-weight.

The gain matrix is indexed gains[receiver, transmitter]. Each undirected link
gets one sampled coefficient used in both directions, so sampled realizations
are exactly symmetric. The diagonal carries the locally-added self-weight, a
protocol constant rather than a physical channel.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .topology import Digraph

FADING_KINDS = ("constant", "half_normal", "uniform")


@dataclass(frozen=True)
class FadingModel:
    """Distribution of one link gain. Every draw is strictly positive.

    constant(gain) is degenerate at a fixed gain; half_normal(scale) draws
    |z| for z ~ N(0, scale^2), rejecting exact zeros; uniform(lo, hi) draws
    from [lo, hi) with 0 < lo <= hi.
    """

    kind: str
    gain: float | None = None
    scale: float | None = None
    lo: float | None = None
    hi: float | None = None

    def __post_init__(self):
        if self.kind not in FADING_KINDS:
            raise ValueError(f"unknown fading kind {self.kind!r}; expected one of {FADING_KINDS}")
        if self.kind == "constant":
            if self.gain is None or self.gain <= 0:
                raise ValueError(f"constant fading needs gain > 0, got {self.gain}")
        elif self.kind == "half_normal":
            if self.scale is None or self.scale <= 0:
                raise ValueError(f"half_normal fading needs scale > 0, got {self.scale}")
        else:
            if self.lo is None or self.hi is None or not (0 < self.lo <= self.hi):
                raise ValueError(f"uniform fading needs 0 < lo <= hi, got lo={self.lo}, hi={self.hi}")

    @classmethod
    def constant(cls, gain: float) -> "FadingModel":
        return cls("constant", gain=gain)

    @classmethod
    def half_normal(cls, scale: float) -> "FadingModel":
        return cls("half_normal", scale=scale)

    @classmethod
    def uniform(cls, lo: float, hi: float) -> "FadingModel":
        return cls("uniform", lo=lo, hi=hi)

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "constant":
            return float(self.gain)
        if self.kind == "half_normal":
            while True:
                g = abs(float(rng.normal(0.0, self.scale)))
                if g > 0.0:
                    return g
        return float(self.lo + (self.hi - self.lo) * rng.random())


@dataclass(frozen=True)
class NoiseModel:
    """Additive white Gaussian receiver noise; std=0 is the noiseless regime."""

    std: float = 0.0

    def __post_init__(self):
        if self.std < 0:
            raise ValueError(f"noise std must be nonnegative, got {self.std}")


def sample_noise(model: NoiseModel, rng: np.random.Generator) -> float:
    """One zero-mean Gaussian draw; exactly 0.0 when std is 0 (no stream consumed)."""
    if model.std == 0.0:
        return 0.0
    return float(rng.normal(0.0, model.std))


@dataclass(frozen=True)
class ChannelRealization:
    """Gain matrix for one coherence block.

    gains[i, j] is the coefficient from transmitter j to receiver i; the
    diagonal equals self_weight everywhere. Sampled realizations are
    symmetric; the constructor does not enforce symmetry so that
    deliberately corrupted (non-reciprocal) matrices can be built for
    negative-control audits.
    """

    n: int
    gains: np.ndarray
    self_weight: float

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=float)
        if gains.shape != (self.n, self.n):
            raise ValueError(f"gains must be {self.n}x{self.n}, got shape {gains.shape}")
        if not np.all(np.isfinite(gains)):
            raise ValueError("gains must be finite")
        if np.any(gains < 0):
            raise ValueError("gains must be nonnegative")
        if not np.all(np.diagonal(gains) == self.self_weight):
            raise ValueError(f"diagonal must equal self_weight={self.self_weight}")
        gains = gains.copy()
        gains.setflags(write=False)
        object.__setattr__(self, "gains", gains)


@dataclass(frozen=True)
class ChannelProcess:
    """Seedable source of channel realizations for a symmetric topology.

    time_varying=False freezes the block sampled at step 0 for all steps;
    time_varying=True resamples every step (gains are coherent within a
    step's slots). Each link at each step draws from its own substream keyed
    by (seed, step, min(i,j), max(i,j)), so realizations are independent of
    sampling order and may be generated concurrently.

    deep_fade additionally gives every off-topology pair a weak positive
    gain uniform in (0, epsilon/2], below the effective-graph threshold.

    pair_scales multiplies individual links' draws by a per-pair factor,
    keyed by the undirected pair (min, max). All three fading families are
    scale families, so this is exactly a per-pair variance (or gain) knob;
    unlisted pairs keep factor 1.
    """

    model: FadingModel
    topology: Digraph
    self_weight: float = 1.0
    time_varying: bool = False
    seed: int = 0
    deep_fade: bool = False
    epsilon: float | None = None
    pair_scales: tuple[tuple[tuple[int, int], float], ...] = ()

    def __post_init__(self):
        if not self.topology.is_symmetric():
            raise ValueError("channel reciprocity needs a symmetric topology")
        if self.self_weight < 0:
            raise ValueError(f"self_weight must be nonnegative, got {self.self_weight}")
        if self.seed < 0:
            raise ValueError(f"seed must be nonnegative, got {self.seed}")
        norm = []
        items = self.pair_scales.items() if isinstance(self.pair_scales, dict) else self.pair_scales
        for (a, b), s in items:
            if s <= 0:
                raise ValueError(f"pair scale for ({a},{b}) must be positive, got {s}")
            if not (0 <= a < self.topology.n and 0 <= b < self.topology.n) or a == b:
                raise ValueError(f"pair ({a},{b}) is not a valid link")
            norm.append(((min(a, b), max(a, b)), float(s)))
        object.__setattr__(self, "pair_scales", tuple(sorted(norm)))
        if self.deep_fade:
            if not self.time_varying:
                raise ValueError("deep_fade applies to time-varying channels only")
            if self.epsilon is None or self.epsilon <= 0:
                raise ValueError(f"deep_fade needs epsilon > 0, got {self.epsilon}")

    def _link_rng(self, k: int, i: int, j: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, k, i, j])

    def realization(self, k: int) -> ChannelRealization:
        """Gain matrix for step k; a pure function of (process fields, k)."""
        if k < 0:
            raise ValueError(f"step index must be nonnegative, got {k}")
        k_eff = k if self.time_varying else 0
        n = self.topology.n
        gains = np.zeros((n, n))
        np.fill_diagonal(gains, self.self_weight)
        scales = dict(self.pair_scales)
        links = sorted({(min(a, b), max(a, b)) for a, b in self.topology.edges})
        for i, j in links:
            g = self.model.sample(self._link_rng(k_eff, i, j)) * scales.get((i, j), 1.0)
            gains[i, j] = g
            gains[j, i] = g
        if self.deep_fade:
            linkset = set(links)
            for i in range(n):
                for j in range(i + 1, n):
                    if (i, j) in linkset:
                        continue
                    u = self._link_rng(k_eff, i, j).random()
                    weak = (1.0 - u) * 0.5 * self.epsilon  # in (0, epsilon/2]
                    gains[i, j] = weak
                    gains[j, i] = weak
        return ChannelRealization(n, gains, self.self_weight)


def effective_graph(h: ChannelRealization, epsilon: float) -> Digraph:
    """Threshold a realization's off-diagonal gains at epsilon.

    Edge (j, i) is present iff gains[i, j] > epsilon with i != j, i.e. the
    link is strong enough for i to usefully receive from j. Symmetric
    whenever the realization is reciprocal.
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    edges = {
        (j, i)
        for i in range(h.n)
        for j in range(h.n)
        if i != j and h.gains[i, j] > epsilon
    }
    return Digraph(h.n, frozenset(edges))
