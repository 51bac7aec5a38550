"""Heralded Hanbury-Brown-Twiss measurement: Monte Carlo and closed form.

Per trigger window a source emits k photon pairs. The idler arm feeds the
trigger detector T; the signal arm passes the chip (``signal_transmission``)
and a splitter onto detectors 1 and 2. All detectors are threshold
(click / no click) detectors with an independent dark-click probability.
The anti-correlation parameter is

    alpha = p_T * p_T12 / (p_T1 * p_T2),

0 for a perfect single photon and 1 for coherent light.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError, UndefinedEstimateError

SHARD_WINDOWS = 1 << 18


class PairStatistics(str, enum.Enum):
    POISSON = "poisson"
    THERMAL = "thermal"
    # debug source: exactly one pair every window, pair_mean ignored
    SINGLE = "single"


@dataclass(frozen=True)
class SourceModel:
    pair_mean: float
    pair_statistics: PairStatistics = PairStatistics.POISSON
    herald_efficiency: float = 1.0
    signal_transmission: float = 1.0
    splitter_ratio: float = 0.5
    dark_prob_1: float = 0.0
    dark_prob_2: float = 0.0
    dark_prob_trigger: float = 0.0
    # debug: trigger driven by an independent copy of the source, so the
    # signal arm sees unheralded light
    unheralded: bool = False

    def __post_init__(self):
        object.__setattr__(self, "pair_statistics", PairStatistics(self.pair_statistics))
        if not (math.isfinite(self.pair_mean) and self.pair_mean >= 0):
            raise ParameterError(f"pair_mean must be >= 0, got {self.pair_mean}")
        for name in (
            "herald_efficiency",
            "signal_transmission",
            "dark_prob_1",
            "dark_prob_2",
            "dark_prob_trigger",
        ):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"{name} must be in [0, 1], got {value}")
        if not 0.0 < self.splitter_ratio < 1.0:
            raise ParameterError(f"splitter_ratio must be in (0, 1), got {self.splitter_ratio}")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["pair_statistics"] = self.pair_statistics.value
        return out

    @classmethod
    def from_dict(cls, block) -> "SourceModel":
        known = set(cls.__dataclass_fields__)
        unknown = set(block) - known
        if unknown:
            raise ParameterError(f"unknown source keys: {sorted(unknown)}")
        return cls(**block)


@dataclass(frozen=True)
class HbtCounts:
    n_windows: int
    c_t: int
    c_t1: int
    c_t2: int
    c_t12: int

    def __post_init__(self):
        if not (0 <= self.c_t12 <= min(self.c_t1, self.c_t2)
                and max(self.c_t1, self.c_t2) <= self.c_t <= self.n_windows):
            raise ParameterError(f"inconsistent HBT tallies: {self}")

    def __add__(self, other: "HbtCounts") -> "HbtCounts":
        return HbtCounts(
            self.n_windows + other.n_windows,
            self.c_t + other.c_t,
            self.c_t1 + other.c_t1,
            self.c_t2 + other.c_t2,
            self.c_t12 + other.c_t12,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class AlphaEstimate:
    """``upper_bound`` is set when no triple coincidence was seen: alpha is
    then reported as 0 and ``std_error`` holds the one-count bound."""

    alpha: float
    std_error: float
    upper_bound: bool = False

    def format(self, digits: int = 4) -> str:
        text = f"{self.alpha:.{digits}f} ({self.std_error:.{digits}f})"
        return text + " [upper bound]" if self.upper_bound else text

    def to_dict(self) -> dict:
        return asdict(self)


def _draw_pairs(rng, model: SourceModel, size: int) -> np.ndarray:
    stats = model.pair_statistics
    if stats is PairStatistics.SINGLE:
        return np.ones(size, dtype=np.int64)
    if model.pair_mean == 0:
        return np.zeros(size, dtype=np.int64)
    if stats is PairStatistics.POISSON:
        return rng.poisson(model.pair_mean, size)
    # Bose-Einstein: P(k) = p (1 - p)^k with p = 1 / (1 + mean)
    return rng.geometric(1.0 / (1.0 + model.pair_mean), size) - 1


def _simulate_shard(model: SourceModel, n: int, seed: int, shard: int) -> HbtCounts:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, shard])))
    k = _draw_pairs(rng, model, n)
    k_trigger = _draw_pairs(rng, model, n) if model.unheralded else k
    heralded = rng.binomial(k_trigger, model.herald_efficiency) > 0
    trigger = heralded | (rng.random(n) < model.dark_prob_trigger)
    survived = rng.binomial(k, model.signal_transmission)
    arm1 = rng.binomial(survived, model.splitter_ratio)
    arm2 = survived - arm1
    click1 = (arm1 > 0) | (rng.random(n) < model.dark_prob_1)
    click2 = (arm2 > 0) | (rng.random(n) < model.dark_prob_2)
    t1 = trigger & click1
    t2 = trigger & click2
    return HbtCounts(
        n,
        int(trigger.sum()),
        int(t1.sum()),
        int(t2.sum()),
        int((t1 & click2).sum()),
    )


def simulate_hbt(model: SourceModel, n_windows: int, seed: int, workers: int = 1) -> HbtCounts:
    """Tally trigger, double and triple coincidences over ``n_windows``.

    Windows are cut into fixed shards of SHARD_WINDOWS, shard ``i`` drawing
    from a Philox stream keyed by ``(seed, i)``; the result therefore does
    not depend on ``workers``.
    """
    if n_windows < 1:
        raise ParameterError(f"n_windows must be >= 1, got {n_windows}")
    sizes = [SHARD_WINDOWS] * (n_windows // SHARD_WINDOWS)
    if n_windows % SHARD_WINDOWS:
        sizes.append(n_windows % SHARD_WINDOWS)
    jobs = [(model, size, seed, i) for i, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda job: _simulate_shard(*job), jobs))
    else:
        parts = [_simulate_shard(*job) for job in jobs]
    total = parts[0]
    for part in parts[1:]:
        total = total + part
    return total


def alpha_estimate(counts: HbtCounts) -> AlphaEstimate:
    if counts.c_t1 == 0 or counts.c_t2 == 0:
        raise UndefinedEstimateError(
            f"alpha undefined: trigger-arm coincidences c_t1={counts.c_t1}, c_t2={counts.c_t2}"
        )
    scale = counts.c_t / (counts.c_t1 * counts.c_t2)
    if counts.c_t12 == 0:
        return AlphaEstimate(0.0, scale, upper_bound=True)
    alpha = scale * counts.c_t12
    rel = math.sqrt(1 / counts.c_t + 1 / counts.c_t12 + 1 / counts.c_t1 + 1 / counts.c_t2)
    return AlphaEstimate(alpha, alpha * rel)


def _generating_function(stats: PairStatistics, mean: float):
    """E[x^k] for the pair-number distribution."""
    if stats is PairStatistics.SINGLE:
        return lambda x: x
    if stats is PairStatistics.POISSON:
        return lambda x: math.exp(-mean * (1.0 - x))
    return lambda x: 1.0 / (1.0 + mean * (1.0 - x))


def window_probabilities(model: SourceModel) -> dict[str, float]:
    """Exact per-window probabilities p_T, p_T1, p_T2, p_T12."""
    gen = _generating_function(model.pair_statistics, model.pair_mean)
    eta, tr, r = model.herald_efficiency, model.signal_transmission, model.splitter_ratio
    herald_miss = 1.0 - eta
    q1 = 1.0 - tr * r  # a signal photon does not reach detector 1
    q2 = 1.0 - tr * (1.0 - r)
    q0 = 1.0 - tr  # reaches neither
    dt = 1.0 - model.dark_prob_trigger
    d1 = 1.0 - model.dark_prob_1
    d2 = 1.0 - model.dark_prob_2

    # P(no T), P(no 1), ... as expectations of products over k
    no_t = dt * gen(herald_miss)
    no_1 = d1 * gen(q1)
    no_2 = d2 * gen(q2)
    no_12 = d1 * d2 * gen(q0)
    p_t = 1.0 - no_t
    p_1 = 1.0 - no_1
    p_2 = 1.0 - no_2
    p_12 = 1.0 - no_1 - no_2 + no_12
    if model.unheralded:
        return {"p_t": p_t, "p_t1": p_t * p_1, "p_t2": p_t * p_2, "p_t12": p_t * p_12}

    no_t_no_1 = dt * d1 * gen(herald_miss * q1)
    no_t_no_2 = dt * d2 * gen(herald_miss * q2)
    no_t_no_12 = dt * d1 * d2 * gen(herald_miss * q0)
    # P(T and A) = P(A) - P(no T and A)
    p_t1 = p_1 - (no_t - no_t_no_1)
    p_t2 = p_2 - (no_t - no_t_no_2)
    p_t12 = p_12 - (no_t - no_t_no_1 - no_t_no_2 + no_t_no_12)
    return {"p_t": p_t, "p_t1": p_t1, "p_t2": p_t2, "p_t12": p_t12}


def alpha_ideal(
    pair_statistics: PairStatistics | str,
    pair_mean: float,
    herald_efficiency: float = 1.0,
    transmission: float = 1.0,
    splitter_ratio: float = 0.5,
    unheralded: bool = False,
) -> float:
    """Closed-form alpha under the ``simulate_hbt`` detector model, no dark counts."""
    model = SourceModel(
        pair_mean=pair_mean,
        pair_statistics=pair_statistics,
        herald_efficiency=herald_efficiency,
        signal_transmission=transmission,
        splitter_ratio=splitter_ratio,
        unheralded=unheralded,
    )
    return alpha_from_model(model)


def alpha_from_model(model: SourceModel) -> float:
    """Closed-form alpha for any model, dark counts included."""
    p = window_probabilities(model)
    if p["p_t1"] <= 0 or p["p_t2"] <= 0:
        raise UndefinedEstimateError("alpha undefined: a trigger-arm coincidence probability is 0")
    return p["p_t"] * p["p_t12"] / (p["p_t1"] * p["p_t2"])
