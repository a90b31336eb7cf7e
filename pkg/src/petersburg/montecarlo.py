"""Monte Carlo checks of time-average versus ensemble-average behaviour.

Repeated play uses fixed wealth-fraction staking: every round multiplies
wealth by the same i.i.d. factor ``(W - P + D(n))/W``, so the time-average
log growth converges to criterion II.  The ensemble mean of one-round
payouts, by contrast, has no limit for these games.

Randomness comes from :class:`SeededStream`, which derives independent
substreams from a seed via :class:`numpy.random.SeedSequence` spawn keys.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError
from .model import N_CAP, Game, check_price, check_wealth, is_ruinous

CHUNK = 1 << 20
INSTABILITY_Z = 5.0
# Block-mean spread scales like M**(1/alpha - 1); the CLT gives -1/2.
# Exponents above -1/4 (tail index below 4/3) mean the sample mean does
# not settle at any usable rate.
SPREAD_EXPONENT_LIMIT = -0.25
MIN_BLOCKS = 256
MIN_BLOCK_LOG2 = 4
# The spread test needs several block sizes with MIN_BLOCKS blocks each.
MIN_DETECTOR_SAMPLES = 1 << 16


class RuinError(DomainError):
    """The worst outcome leaves no wealth, so log growth is undefined."""


@dataclass(frozen=True)
class SeededStream:
    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def substream(self, *keys: int) -> SeededStream:
        return SeededStream(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),) + self.path)
        return np.random.Generator(np.random.PCG64(seq))


def waiting_times_from_bits(bits: np.ndarray) -> np.ndarray:
    """Inverse CDF of the waiting time applied to 64-bit uniforms.

    With ``u = (k + 1) / 2**64`` the value ``1 + floor(-log2 u)`` equals
    ``65 - bit_length(k)``, computed exactly in integer arithmetic.
    """
    k = bits.astype(np.uint64, copy=True)
    for shift in (1, 2, 4, 8, 16, 32):
        k |= k >> np.uint64(shift)
    return 65 - np.bitwise_count(k).astype(np.int64)


def draw_waiting_times(rng: np.random.Generator, size: int, n_cap: int = N_CAP) -> tuple[np.ndarray, int]:
    """``size`` waiting times capped at ``n_cap``, plus the number of capped draws."""
    n = waiting_times_from_bits(rng.bit_generator.random_raw(size))
    over = n > n_cap
    hits = int(np.count_nonzero(over))
    if hits:
        n[over] = n_cap
    return n, hits


def sample_waiting_time(stream: SeededStream, n_cap: int = N_CAP) -> int:
    """First waiting time of ``stream``."""
    n, _ = draw_waiting_times(stream.generator(), 1, n_cap)
    return int(n[0])


# -- stabilization detector -------------------------------------------------

@dataclass(frozen=True)
class Stabilization:
    sizes: list[int]
    means: list[float]
    stderrs: list[float]
    doubling_ok: bool
    spread_exponent: float | None
    stable: bool

    @property
    def tail_index(self) -> float | None:
        if self.spread_exponent is None or self.spread_exponent <= -1:
            return None
        return 1.0 / (1.0 + self.spread_exponent)


def _doubling_sizes(n: int) -> list[int]:
    sizes = []
    while n >= 2 and len(sizes) < 64:
        sizes.append(n)
        n //= 2
    return sorted(sizes)


def _spread_exponent(x: np.ndarray) -> float | None:
    js, spreads = [], []
    j = MIN_BLOCK_LOG2
    while (len(x) >> j) >= MIN_BLOCKS:
        blocks = len(x) >> j
        means = x[: blocks << j].reshape(blocks, 1 << j).mean(axis=1)
        q75, q25 = np.percentile(means, [75, 25])
        js.append(j)
        spreads.append(q75 - q25)
        j += 1
    if len(js) < 2:
        return None
    spreads = np.asarray(spreads)
    if spreads[-1] == 0:
        return -math.inf
    keep = spreads > 0
    if keep.sum() < 2:
        return -math.inf
    return float(np.polyfit(np.asarray(js)[keep], np.log2(spreads[keep]), 1)[0])


def assess_stabilization(x: np.ndarray) -> Stabilization:
    """Does the running sample mean of ``x`` settle down?

    Two checks over the doubling schedule ``N, N/2, N/4, ...``; failing
    either marks the estimator unstable:

    * the last three doublings move the prefix mean by at most five pooled
      standard errors;
    * the interquartile spread of block means shrinks with block size at a
      rate consistent with a finite-mean law (see ``SPREAD_EXPONENT_LIMIT``).
      Heavy tails inflate the sample standard error along with the mean,
      so the first check alone cannot see a divergent mean.
    """
    x = np.asarray(x, dtype=float)
    sizes = _doubling_sizes(len(x))
    means, stderrs = [], []
    for n in sizes:
        prefix = x[:n]
        means.append(float(prefix.mean()))
        stderrs.append(float(prefix.std(ddof=1) / math.sqrt(n)))
    doubling_ok = True
    for k in range(max(1, len(sizes) - 3), len(sizes)):
        pooled = math.hypot(stderrs[k], stderrs[k - 1])
        if abs(means[k] - means[k - 1]) > INSTABILITY_Z * pooled:
            doubling_ok = False
    exponent = _spread_exponent(x)
    spread_ok = exponent is None or exponent < SPREAD_EXPONENT_LIMIT
    return Stabilization(sizes, means, stderrs, doubling_ok, exponent, doubling_ok and spread_ok)


# -- results ----------------------------------------------------------------

def _clean(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    return value


@dataclass(frozen=True)
class TrajectoryStats:
    rounds: int
    mean_log_growth: float
    stderr: float
    n_cap_hits: int
    stable: bool
    spread_exponent: float | None = None

    def to_dict(self) -> dict[str, Any]:
        return _clean(asdict(self))


@dataclass(frozen=True)
class EnsembleStats:
    sizes: list[int]
    mean_net_change: list[float | None]
    log_mean_payout: list[float]
    stderrs: list[float | None]
    unstable: bool
    doubling_ok: bool | None
    spread_exponent: float | None
    representable: bool
    n_cap_hits: int

    def to_dict(self) -> dict[str, Any]:
        return _clean(asdict(self))


@dataclass(frozen=True)
class LimitGrid:
    N_list: list[int]
    T_list: list[int]
    log_growth: list[list[float]]
    log_growth_stderr: list[list[float | None]]
    ensemble_log_wealth_growth: list[list[float]]
    wealth_mean_unstable: bool
    n_cap_hits: int
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return _clean(asdict(self))


# -- simulations ------------------------------------------------------------

def _growth_table(game, W: float, P: float) -> np.ndarray:
    check_wealth(W)
    check_price(P)
    if isinstance(game, Game) and is_ruinous(game, W, P):
        raise RuinError("undefined growth rate: worst case is ruin")
    table = game.net_log_ratio_table(W, P, N_CAP)
    if not np.all(np.isfinite(table)):
        raise RuinError("undefined growth rate: worst case is ruin")
    return table


def _check_count(name: str, value: int, minimum: int) -> int:
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def simulate_time_average(game: Game, W: float, P: float, T: int, stream: SeededStream) -> TrajectoryStats:
    """Mean per-round log growth over one trajectory of ``T`` rounds."""
    T = _check_count("T", T, 1)
    table = _growth_table(game, W, P)
    rng = stream.generator()
    parts, hits = [], 0
    for start in range(0, T, CHUNK):
        n, h = draw_waiting_times(rng, min(CHUNK, T - start))
        parts.append(table[n - 1])
        hits += h
    g = np.concatenate(parts)
    stderr = float(g.std(ddof=1) / math.sqrt(T)) if T > 1 else math.nan
    stab = assess_stabilization(g) if T >= 8 else None
    return TrajectoryStats(
        rounds=T,
        mean_log_growth=float(g.mean()),
        stderr=stderr,
        n_cap_hits=hits,
        stable=bool(stab.stable) if stab else False,
        spread_exponent=stab.spread_exponent if stab else None,
    )


def simulate_ensemble_growth(game, W: float, P: float, N_max: int, stream: SeededStream) -> EnsembleStats:
    """Sample means of the one-round net change ``D(n) - P`` over a doubling schedule.

    ``game`` is a :class:`Game` or any object with a ``log_table(W, n_cap)``
    method giving ``log D(n)``.  Means that do not fit in a double are
    reported as ``None`` and the estimator is flagged unstable.
    """
    N_max = _check_count("N_max", N_max, 8)
    check_wealth(W)
    check_price(P)
    logs = np.asarray(game.log_table(W, N_CAP), dtype=float)
    n, hits = draw_waiting_times(stream.generator(), N_max)
    log_payout = logs[n - 1]
    sizes = _doubling_sizes(N_max)
    log_means = [float(logsumexp(log_payout[:k]) - math.log(k)) for k in sizes]
    representable = bool(log_payout.max() < 700.0)
    if representable:
        stab = assess_stabilization(np.exp(log_payout) - P)
        return EnsembleStats(
            sizes=sizes,
            mean_net_change=stab.means,
            log_mean_payout=log_means,
            stderrs=stab.stderrs,
            unstable=not stab.stable,
            doubling_ok=stab.doubling_ok,
            spread_exponent=stab.spread_exponent,
            representable=True,
            n_cap_hits=hits,
        )
    return EnsembleStats(
        sizes=sizes,
        mean_net_change=[None] * len(sizes),
        log_mean_payout=log_means,
        stderrs=[None] * len(sizes),
        unstable=True,
        doubling_ok=None,
        spread_exponent=None,
        representable=False,
        n_cap_hits=hits,
    )


def _trajectory_sums(table: np.ndarray, N: int, T: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Total log growth of each of ``N`` trajectories of ``T`` rounds."""
    totals = np.zeros(N)
    hits = 0
    if T <= CHUNK:
        rows = max(1, CHUNK // T)
        for start in range(0, N, rows):
            m = min(rows, N - start)
            n, h = draw_waiting_times(rng, m * T)
            totals[start : start + m] = table[n - 1].reshape(m, T).sum(axis=1)
            hits += h
        return totals, hits
    for i in range(N):
        acc = 0.0
        for start in range(0, T, CHUNK):
            n, h = draw_waiting_times(rng, min(CHUNK, T - start))
            acc += float(table[n - 1].sum())
            hits += h
        totals[i] = acc
    return totals, hits


def limit_order_grid(game: Game, W: float, P: float, N_list, T_list, stream: SeededStream) -> LimitGrid:
    """Estimators on an (ensemble size N) x (rounds T) grid.

    For each cell: the ensemble average of the T-round mean log growth, and
    the per-round log growth of the ensemble-mean wealth,
    ``ln(mean_N(W_T/W)) / T``.  The first settles as T grows for every N;
    the second keeps rising with N.  Each cell draws from its own substream.
    ``wealth_mean_unstable`` judges one-round wealth means over at least
    ``MIN_DETECTOR_SAMPLES`` draws.
    """
    N_list = [_check_count("N", N, 1) for N in N_list]
    T_list = [_check_count("T", T, 1) for T in T_list]
    table = _growth_table(game, W, P)
    log_growth, stderr, ens, hits = [], [], [], 0
    for i, N in enumerate(N_list):
        row_g, row_se, row_e = [], [], []
        for j, T in enumerate(T_list):
            totals, h = _trajectory_sums(table, N, T, stream.substream(i, j).generator())
            hits += h
            per_round = totals / T
            row_g.append(float(per_round.mean()))
            row_se.append(float(per_round.std(ddof=1) / math.sqrt(N)) if N > 1 else None)
            row_e.append(float((logsumexp(totals) - math.log(N)) / T))
        log_growth.append(row_g)
        stderr.append(row_se)
        ens.append(row_e)
    # one-round wealth means at a sample size the detector can judge
    n_check = max(max(N_list), MIN_DETECTOR_SAMPLES)
    totals, _ = _trajectory_sums(table, n_check, 1, stream.substream(len(N_list), 0).generator())
    if totals.max() < 700.0:
        unstable = not assess_stabilization(np.exp(totals)).stable
    else:
        unstable = True
    return LimitGrid(N_list, T_list, log_growth, stderr, ens, unstable, hits)
