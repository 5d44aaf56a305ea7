"""Monte Carlo simulation of sequential-search contests.

Contests are simulated in quantile space: draws are uniforms, a player with
threshold quantile q accepts the first draw at or above q, and values only
matter through their ordering, so payoffs (prize minus cost per draw) are
exact for any continuous distribution. Replications are processed in fixed
chunks of 65536; every player/chunk pair gets its own counter-based RNG
stream keyed by (seed, purpose, player, chunk), and partial sums are reduced
in chunk order. Reports are therefore byte-identical for a given seed no
matter how many worker threads run the chunks.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .distributions import Distribution
from .equilibrium import ContestParams, PrizeSchedule, solve_symmetric
from .errors import InvalidParameterError
from .finite_horizon import FiniteHorizonParams
from .hierarchy import DesignerParams, solve_designer

_CHUNK = 1 << 16
# stream purposes: keeps every consumer of randomness on a disjoint substream
_TAG_DRAW = 0
_TAG_TIE = 1
_TAG_SELF = 2
_TAG_OPP = 3
_TAG_DIST = 4
_TAG_RECALL = 5


@dataclass(frozen=True)
class InfiniteThresholdStrategy:
    """Accept the first draw at or above a fixed threshold, any horizon."""
    threshold: float


@dataclass(frozen=True)
class FiniteThresholdStrategy:
    """Per-round thresholds for the first k-1 draws; draw k is kept."""
    thresholds: tuple[float, ...]

    def __post_init__(self):
        if len(self.thresholds) < 1:
            raise InvalidParameterError("need at least one round threshold")


Strategy = Union[InfiniteThresholdStrategy, FiniteThresholdStrategy]


@dataclass(frozen=True)
class StrategyProfile:
    strategies: tuple[Strategy, ...]

    def __post_init__(self):
        if len(self.strategies) < 2:
            raise InvalidParameterError("a contest needs at least two players")

    @property
    def n_players(self) -> int:
        return len(self.strategies)


@dataclass(frozen=True)
class SimulationConfig:
    replications: int
    seed: int
    max_draws_cap: int | None = None  # default: ceil(40 / min acceptance prob)
    n_threads: int = 1

    def __post_init__(self):
        if self.replications < 1:
            raise InvalidParameterError("replications must be >= 1")
        if self.max_draws_cap is not None and self.max_draws_cap < 1:
            raise InvalidParameterError("max_draws_cap must be >= 1")
        if self.n_threads < 1:
            raise InvalidParameterError("n_threads must be >= 1")


@dataclass(frozen=True)
class SimulationReport:
    n_players: int
    replications: int
    seed: int
    max_draws_cap: int
    capped_replications: int
    mean_payoff: tuple[float, ...]
    se_payoff: tuple[float, ...]
    mean_cost: tuple[float, ...]
    se_cost: tuple[float, ...]
    mean_draws: tuple[float, ...]
    se_draws: tuple[float, ...]
    win_frequency: tuple[float, ...]
    se_win: tuple[float, ...]
    dissipation_ratio: float
    se_dissipation: float
    total_prize: float


@dataclass(frozen=True)
class DeviationRow:
    strategy: Strategy
    mean_gain: float
    se_gain: float
    flagged: bool


@dataclass(frozen=True)
class DeviationScanReport:
    player_index: int
    equilibrium_payoff: float
    se_equilibrium_payoff: float
    rows: tuple[DeviationRow, ...]

    @property
    def any_flagged(self) -> bool:
        return any(r.flagged for r in self.rows)


@dataclass(frozen=True)
class DistributionRow:
    name: str
    acceptance_rate: float
    se_acceptance_rate: float
    mean_draws: float
    se_draws: float
    mean_cost: float
    se_cost: float
    dissipation_ratio: float
    se_dissipation: float
    theoretical_draws: float


@dataclass(frozen=True)
class DistributionFreeReport:
    rows: tuple[DistributionRow, ...]
    max_pairwise_sigma: float  # largest pairwise gap in units of combined SE
    passed: bool


@dataclass(frozen=True)
class RecallReport:
    ks_statistic: float
    critical_value: float  # two-sample KS at the 1 percent level
    replications: int
    passed: bool


def _stream(seed: int, *tags: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed,) + tags)))


def _threshold_quantiles(strategy: Strategy, d: Distribution) -> np.ndarray:
    if isinstance(strategy, InfiniteThresholdStrategy):
        qs = np.array([float(d.cdf(strategy.threshold))])
        if qs[0] >= 1.0:
            raise InvalidParameterError(
                f"threshold {strategy.threshold} leaves no acceptance probability"
            )
        return qs
    return np.asarray([float(d.cdf(t)) for t in strategy.thresholds], dtype=float)


def _default_cap(quantiles: list[np.ndarray], kinds: list[bool]) -> int:
    cap = 1
    for qs, infinite in zip(quantiles, kinds):
        if infinite:
            cap = max(cap, math.ceil(40.0 / (1.0 - qs[0])))
        else:
            cap = max(cap, qs.size + 1)
    return cap


def _play_rounds(
    rng: np.random.Generator, size: int, qs: np.ndarray, infinite: bool, cap: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Simulate one player's search for a block of replications.

    Returns accepted quantile, number of draws, and a forced-stop flag. A
    full block of uniforms is drawn every round regardless of how many
    replications are still searching, so stream consumption is reproducible.
    """
    final = np.zeros(size)
    draws = np.zeros(size, dtype=np.int64)
    alive = np.ones(size, dtype=bool)
    n_rounds = cap if infinite else qs.size + 1
    x = None
    for r in range(n_rounds):
        x = rng.random(size)
        draws += alive
        if infinite:
            accept = alive & (x >= qs[0])
        elif r < qs.size:
            accept = alive & (x >= qs[r])
        else:
            accept = alive  # final round keeps whatever arrives
        final = np.where(accept, x, final)
        alive &= ~accept
        if not alive.any():
            break
    forced = alive.copy()
    if forced.any():
        final = np.where(forced, x, final)  # cap reached: keep the last draw
    return final, draws, forced


def _simulate_chunk(
    chunk_idx: int,
    size: int,
    seed: int,
    quantiles: list[np.ndarray],
    kinds: list[bool],
    cap: int,
    cost: float,
    prize_arr: np.ndarray,
) -> dict:
    n = len(quantiles)
    finals = np.empty((n, size))
    draws = np.empty((n, size), dtype=np.int64)
    forced_any = np.zeros(size, dtype=bool)
    for i in range(n):
        rng = _stream(seed, _TAG_DRAW, i, chunk_idx)
        f, dr, forced = _play_rounds(rng, size, quantiles[i], kinds[i], cap)
        finals[i] = f
        draws[i] = dr
        forced_any |= forced
    tie = _stream(seed, _TAG_TIE, chunk_idx).random((n, size))
    order = np.lexsort((tie, finals), axis=0)  # ascending accepted value
    asc_pos = np.empty((n, size), dtype=np.int64)
    np.put_along_axis(asc_pos, order, np.arange(n, dtype=np.int64)[:, None], axis=0)
    rank = n - 1 - asc_pos  # 0 = winner
    prize = prize_arr[rank]
    costs = cost * draws
    payoff = prize - costs
    diss = costs.sum(axis=0) / prize_arr.sum()
    return {
        "payoff1": payoff.sum(axis=1),
        "payoff2": (payoff**2).sum(axis=1),
        "cost1": costs.sum(axis=1),
        "cost2": (costs**2).sum(axis=1),
        "draws1": draws.sum(axis=1, dtype=np.float64),
        "draws2": (draws.astype(np.float64) ** 2).sum(axis=1),
        "win1": (rank == 0).sum(axis=1, dtype=np.float64),
        "diss1": diss.sum(),
        "diss2": (diss**2).sum(),
        "capped": int(forced_any.sum()),
    }


def _mean_se(s1: np.ndarray, s2: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    mean = s1 / n
    if n < 2:
        return mean, np.full_like(mean, np.nan)
    var = np.maximum(s2 - n * mean**2, 0.0) / (n - 1)
    return mean, np.sqrt(var / n)


def _resolve_contest(
    params: Union[ContestParams, FiniteHorizonParams],
    prizes: PrizeSchedule | None,
    n_players: int,
) -> tuple[float, np.ndarray]:
    """Per-draw cost and the rank-ordered prize vector implied by params."""
    if params.n_players != n_players:
        raise InvalidParameterError(
            f"profile has {n_players} players but params expect {params.n_players}"
        )
    if isinstance(params, FiniteHorizonParams):
        top = 1.0 if prizes is None else prizes.prizes[0]
        cost = params.cost_ratio * top
    else:
        cost = params.cost
        if prizes is None:
            prizes = PrizeSchedule((params.prize,) + (0.0,) * (n_players - 1))
    if prizes is None:
        prizes = PrizeSchedule((1.0,) + (0.0,) * (n_players - 1))
    if len(prizes.prizes) != n_players:
        raise InvalidParameterError("prize schedule length must equal player count")
    return cost, np.asarray(prizes.prizes, dtype=float)


def simulate_contest(
    profile: StrategyProfile,
    params: Union[ContestParams, FiniteHorizonParams],
    d: Distribution,
    config: SimulationConfig,
    prizes: PrizeSchedule | None = None,
) -> SimulationReport:
    """Replicate the contest and report per-player payoff, cost, draw and win
    statistics with standard errors, plus the cost/prize dissipation ratio."""
    n = profile.n_players
    cost, prize_arr = _resolve_contest(params, prizes, n)
    quantiles = [_threshold_quantiles(s, d) for s in profile.strategies]
    kinds = [isinstance(s, InfiniteThresholdStrategy) for s in profile.strategies]
    cap = config.max_draws_cap or _default_cap(quantiles, kinds)

    reps = config.replications
    n_chunks = (reps + _CHUNK - 1) // _CHUNK
    sizes = [min(_CHUNK, reps - c * _CHUNK) for c in range(n_chunks)]

    def work(c: int) -> dict:
        return _simulate_chunk(c, sizes[c], config.seed, quantiles, kinds, cap, cost, prize_arr)

    if config.n_threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=config.n_threads) as pool:
            partials = list(pool.map(work, range(n_chunks)))
    else:
        partials = [work(c) for c in range(n_chunks)]

    acc = {k: 0.0 if np.isscalar(v) else np.zeros_like(v) for k, v in partials[0].items()}
    for p in partials:  # fixed chunk order keeps float sums deterministic
        for k, v in p.items():
            acc[k] = acc[k] + v

    mean_pay, se_pay = _mean_se(acc["payoff1"], acc["payoff2"], reps)
    mean_cost, se_cost = _mean_se(acc["cost1"], acc["cost2"], reps)
    mean_draws, se_draws = _mean_se(acc["draws1"], acc["draws2"], reps)
    mean_win, se_win = _mean_se(acc["win1"], acc["win1"], reps)  # Bernoulli: s2 == s1
    mean_diss, se_diss = _mean_se(np.array([acc["diss1"]]), np.array([acc["diss2"]]), reps)
    return SimulationReport(
        n_players=n,
        replications=reps,
        seed=config.seed,
        max_draws_cap=cap,
        capped_replications=int(acc["capped"]),
        mean_payoff=tuple(mean_pay),
        se_payoff=tuple(se_pay),
        mean_cost=tuple(mean_cost),
        se_cost=tuple(se_cost),
        mean_draws=tuple(mean_draws),
        se_draws=tuple(se_draws),
        win_frequency=tuple(mean_win),
        se_win=tuple(se_win),
        dissipation_ratio=float(mean_diss[0]),
        se_dissipation=float(se_diss[0]),
        total_prize=float(prize_arr.sum()),
    )


def _inverse_play(
    v: np.ndarray, qs: np.ndarray, infinite: bool, cap: int
) -> tuple[np.ndarray, np.ndarray]:
    """Accepted quantile and draw count from pre-drawn uniforms.

    Infinite horizon uses two uniforms per replication: one through the
    geometric draw-count inverse CDF, one for the accepted value above the
    threshold. Finite horizon reads the uniforms as the draws themselves.
    Sharing v across strategies yields common-random-number comparisons.
    """
    size = v.shape[0]
    if infinite:
        q = qs[0]
        if q <= 0.0:
            draws = np.ones(size, dtype=np.int64)
            final = v[:, 1].copy()
        else:
            draws = np.maximum(1, np.ceil(np.log1p(-v[:, 0]) / math.log(q))).astype(np.int64)
            np.minimum(draws, cap, out=draws)
            final = q + v[:, 1] * (1.0 - q)
        return final, draws
    k = qs.size + 1
    acc = v[:, : k - 1] >= qs[None, :]
    any_acc = acc.any(axis=1)
    first = np.where(any_acc, acc.argmax(axis=1), k - 1)
    draws = first.astype(np.int64) + 1
    final = v[np.arange(size), first]
    return final, draws


def deviation_scan(
    profile: StrategyProfile,
    player_index: int,
    candidates: Sequence[Strategy],
    params: Union[ContestParams, FiniteHorizonParams],
    d: Distribution,
    config: SimulationConfig,
    prizes: PrizeSchedule | None = None,
) -> DeviationScanReport:
    """Estimate the payoff gain from unilateral deviations.

    Opponents are simulated once per chunk; each candidate strategy reuses
    the deviator's own uniforms, so gains are paired differences against the
    profile strategy and their standard errors shrink with the common noise.
    A candidate is flagged when its mean gain exceeds three standard errors.
    """
    n = profile.n_players
    if not 0 <= player_index < n:
        raise InvalidParameterError(f"player_index {player_index} out of range")
    cost, prize_arr = _resolve_contest(params, prizes, n)
    opp_idx = [j for j in range(n) if j != player_index]
    opp_q = [_threshold_quantiles(profile.strategies[j], d) for j in opp_idx]
    opp_kind = [isinstance(profile.strategies[j], InfiniteThresholdStrategy) for j in opp_idx]
    all_strats = [profile.strategies[player_index]] + list(candidates)
    self_q = [_threshold_quantiles(s, d) for s in all_strats]
    self_kind = [isinstance(s, InfiniteThresholdStrategy) for s in all_strats]
    cap = config.max_draws_cap or _default_cap(
        self_q + opp_q, self_kind + opp_kind
    )
    v_cols = max([2] + [q.size + 1 for q, inf in zip(self_q, self_kind) if not inf])

    reps = config.replications
    n_chunks = (reps + _CHUNK - 1) // _CHUNK
    sizes = [min(_CHUNK, reps - c * _CHUNK) for c in range(n_chunks)]
    n_cand = len(candidates)

    def work(c: int) -> dict:
        size = sizes[c]
        opp_final = np.empty((n - 1, size))
        opp_cost_total = np.zeros(size)
        for slot, j in enumerate(opp_idx):
            rng = _stream(config.seed, _TAG_OPP, j, c)
            cols = 2 if opp_kind[slot] else opp_q[slot].size + 1
            f, dr = _inverse_play(rng.random((size, cols)), opp_q[slot], opp_kind[slot], cap)
            opp_final[slot] = f
            opp_cost_total += cost * dr
        v_self = _stream(config.seed, _TAG_SELF, player_index, c).random((size, v_cols))

        payoffs = []
        for qs, infinite in zip(self_q, self_kind):
            f, dr = _inverse_play(v_self, qs, infinite, cap)
            rank = (opp_final > f[None, :]).sum(axis=0)  # exact ties have measure zero
            payoffs.append(prize_arr[rank] - cost * dr)
        base = payoffs[0]
        out = {
            "eq1": base.sum(),
            "eq2": (base**2).sum(),
            "gain1": np.array([(p - base).sum() for p in payoffs[1:]]),
            "gain2": np.array([((p - base) ** 2).sum() for p in payoffs[1:]]),
        }
        return out

    if config.n_threads > 1 and n_chunks > 1:
        with ThreadPoolExecutor(max_workers=config.n_threads) as pool:
            partials = list(pool.map(work, range(n_chunks)))
    else:
        partials = [work(c) for c in range(n_chunks)]
    eq1 = sum(p["eq1"] for p in partials)
    eq2 = sum(p["eq2"] for p in partials)
    g1 = np.zeros(n_cand)
    g2 = np.zeros(n_cand)
    for p in partials:
        g1 += p["gain1"]
        g2 += p["gain2"]

    eq_mean, eq_se = _mean_se(np.array([eq1]), np.array([eq2]), reps)
    gain_mean, gain_se = _mean_se(g1, g2, reps)
    rows = tuple(
        DeviationRow(
            strategy=s,
            mean_gain=float(m),
            se_gain=float(se),
            flagged=bool(m > 3.0 * se),
        )
        for s, m, se in zip(candidates, gain_mean, gain_se)
    )
    return DeviationScanReport(
        player_index=player_index,
        equilibrium_payoff=float(eq_mean[0]),
        se_equilibrium_payoff=float(eq_se[0]),
        rows=rows,
    )


def distribution_free_check(
    params: ContestParams,
    distributions: Sequence[Distribution],
    config: SimulationConfig,
) -> DistributionFreeReport:
    """Simulate the symmetric equilibrium under several distributions on
    independent substreams; draw counts, costs and dissipation must agree
    pairwise within three combined standard errors."""
    if len(distributions) < 2:
        raise InvalidParameterError("need at least two distributions to compare")
    rows = []
    for idx, d in enumerate(distributions):
        eq = solve_symmetric(params, d)
        child_seed = int(
            np.random.SeedSequence((config.seed, _TAG_DIST, idx)).generate_state(1, np.uint64)[0]
        )
        profile = StrategyProfile((InfiniteThresholdStrategy(eq.threshold),) * params.n_players)
        rep = simulate_contest(
            profile, params, d,
            SimulationConfig(config.replications, child_seed,
                             config.max_draws_cap, config.n_threads),
        )
        n = params.n_players
        draws = sum(rep.mean_draws) / n
        se_draws = math.sqrt(sum(se**2 for se in rep.se_draws)) / n
        cost = sum(rep.mean_cost) / n
        se_cost = math.sqrt(sum(se**2 for se in rep.se_cost)) / n
        rows.append(
            DistributionRow(
                name=d.name,
                acceptance_rate=1.0 / draws,
                se_acceptance_rate=se_draws / draws**2,
                mean_draws=draws,
                se_draws=se_draws,
                mean_cost=cost,
                se_cost=se_cost,
                dissipation_ratio=rep.dissipation_ratio,
                se_dissipation=rep.se_dissipation,
                theoretical_draws=1.0 / eq.acceptance_prob,
            )
        )
    worst = 0.0
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            a, b = rows[i], rows[j]
            for ma, sa, mb, sb in (
                (a.mean_draws, a.se_draws, b.mean_draws, b.se_draws),
                (a.mean_cost, a.se_cost, b.mean_cost, b.se_cost),
                (a.dissipation_ratio, a.se_dissipation, b.dissipation_ratio, b.se_dissipation),
            ):
                sigma = abs(ma - mb) / max(math.hypot(sa, sb), 1e-300)
                worst = max(worst, sigma)
    return DistributionFreeReport(rows=tuple(rows), max_pairwise_sigma=worst, passed=worst <= 3.0)


def recall_irrelevance_check(
    params: ContestParams, d: Distribution, config: SimulationConfig
) -> RecallReport:
    """Sample one player's accepted value twice, with and without recall of
    earlier draws, on independent substreams. With a constant threshold the
    first draw above it is also the running maximum at stopping time, so the
    two samples must agree; a two-sample KS test at the 1 percent level makes
    that a falsifiable check of the simulator."""
    q = 1.0 - solve_symmetric(params, d).acceptance_prob
    cap = config.max_draws_cap or max(1, math.ceil(40.0 / max(1.0 - q, 1e-12)))
    reps = config.replications
    n_chunks = (reps + _CHUNK - 1) // _CHUNK
    sizes = [min(_CHUNK, reps - c * _CHUNK) for c in range(n_chunks)]

    def no_recall(c: int) -> np.ndarray:
        rng = _stream(config.seed, _TAG_RECALL, 0, c)
        final, _, _ = _play_rounds(rng, sizes[c], np.array([q]), True, cap)
        return final

    def with_recall(c: int) -> np.ndarray:
        rng = _stream(config.seed, _TAG_RECALL, 1, c)
        size = sizes[c]
        best = np.zeros(size)
        alive = np.ones(size, dtype=bool)
        final = np.zeros(size)
        for _ in range(cap):
            x = rng.random(size)
            best = np.where(alive, np.maximum(best, x), best)
            stop = alive & (best >= q)
            final = np.where(stop, best, final)
            alive &= ~stop
            if not alive.any():
                break
        return np.where(alive, best, final)

    a = np.concatenate([no_recall(c) for c in range(n_chunks)])
    b = np.concatenate([with_recall(c) for c in range(n_chunks)])
    a_sorted, b_sorted = np.sort(a), np.sort(b)
    pooled = np.concatenate([a_sorted, b_sorted])
    cdf_a = np.searchsorted(a_sorted, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b_sorted, pooled, side="right") / b.size
    stat = float(np.abs(cdf_a - cdf_b).max())
    crit = 1.628 * math.sqrt((a.size + b.size) / (a.size * b.size))
    return RecallReport(
        ks_statistic=stat, critical_value=crit, replications=reps, passed=stat < crit
    )


def simulate_designer_dissipation(
    params: DesignerParams, d: Distribution, config: SimulationConfig
) -> tuple[float, float]:
    """Total worker search cost over the meta prize, with standard error.

    Workers in every team stop at the designer-equilibrium threshold, so the
    cost side does not depend on how prizes flow through teams; the worker
    pool is simulated as one contest whose prize pool is the meta prize.
    """
    eq = solve_designer(params, d)
    n_workers = params.n_designers * params.team_size
    profile = StrategyProfile((InfiniteThresholdStrategy(eq.threshold),) * n_workers)
    cparams = ContestParams(n_players=n_workers, cost=params.cost, prize=params.meta_prize)
    rep = simulate_contest(profile, cparams, d, config)
    return rep.dissipation_ratio, rep.se_dissipation
