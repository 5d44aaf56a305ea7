"""Finite-horizon contests: each player gets at most k draws and must accept
the last one. Equilibria are vectors of per-round acceptance quantiles; they
depend only on (N, c/W, k), never on the distribution itself.

Numerical core: the opponent's final-value CDF is piecewise linear in quantile
space, so every integral has an exact segment closed form. Round values follow
by backward induction. High (c/W)*N cells are near a participation frontier
where the raw indifference residuals fall below float64 cancellation noise;
the Newton fallback therefore solves an algebraically equivalent system in
which the cost term cancels exactly (adjacent-round ratio equations), keeping
every equation O(1)-scaled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidParameterError, NumericFailureError

_BR_TOL = 1e-12
_BR_MAX_ITER = 10_000
_DAMPING = 0.5


@dataclass(frozen=True)
class FiniteHorizonParams:
    n_players: int
    cost_ratio: float  # c/W
    n_draws: int  # k

    def __post_init__(self):
        if int(self.n_players) != self.n_players or self.n_players < 2:
            raise InvalidParameterError(f"n_players must be an integer >= 2, got {self.n_players}")
        if self.cost_ratio < 0:
            raise InvalidParameterError(f"cost_ratio must be nonnegative, got {self.cost_ratio}")
        if int(self.n_draws) != self.n_draws or self.n_draws < 2:
            raise InvalidParameterError(f"n_draws must be an integer >= 2, got {self.n_draws}")


@dataclass(frozen=True)
class FiniteHorizonEquilibrium:
    round_quantiles: tuple[float, ...]
    exists: bool
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)


class OpponentFinalCdf:
    """Quantile-space CDF of one opponent's final accepted value.

    For acceptance quantiles (a_1, ..., a_{k-1}) and forced acceptance at
    draw k, the final value lands at or below quantile u with probability

        h(u) = sum_j (prod_{i<j} a_i) * max(u - a_j, 0) + (prod_i a_i) * u.

    h is piecewise linear, convex, nondecreasing, h(0)=0 and h(1)=1, so
    integrals of h^p have exact per-segment closed forms.
    """

    def __init__(self, round_quantiles: Sequence[float]):
        a = tuple(float(v) for v in round_quantiles)
        if any(v < 0 or v >= 1 for v in a):
            raise InvalidParameterError(f"round quantiles must lie in [0, 1), got {a}")
        self.round_quantiles = a
        reach = np.cumprod(np.concatenate(([1.0], a)))  # prob of surviving to round j
        nodes = np.unique(np.concatenate(([0.0, 1.0], a)))
        slopes_at = lambda u: reach[-1] + sum(
            reach[j] for j, aj in enumerate(a) if aj <= u
        )
        ys = [0.0]
        for x0, x1 in zip(nodes[:-1], nodes[1:]):
            ys.append(ys[-1] + slopes_at(x0) * (x1 - x0))
        self._xs = nodes
        self._ys = np.array(ys)
        self._ys[-1] = 1.0  # exact by construction; pin against rounding

    def __call__(self, u):
        return np.interp(u, self._xs, self._ys)

    def inverse(self, y):
        return np.interp(y, self._ys, self._xs)

    def integral_power(self, p: float, lo: float = 0.0, hi: float = 1.0) -> float:
        """Exact integral of h(u)^p over [lo, hi]."""
        if hi <= lo:
            return 0.0
        cuts = np.unique(np.clip(np.concatenate((self._xs, [lo, hi])), lo, hi))
        total = 0.0
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            y0 = float(self(x0))
            y1 = float(self(x1))
            if y1 == y0:
                total += y0**p * (x1 - x0)
            else:
                total += (y1 ** (p + 1) - y0 ** (p + 1)) / (y1 - y0) * (x1 - x0) / (p + 1)
        return total

    def integral_power_scaled(self, p: float, hi: float, ref: float) -> float:
        """Integral of (h(u)/ref)^p over [0, hi]; stable when h is tiny."""
        if hi <= 0.0 or ref <= 0.0:
            return 0.0
        cuts = np.unique(np.clip(np.concatenate((self._xs, [0.0, hi])), 0.0, hi))
        total = 0.0
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            y0 = float(self(x0)) / ref
            y1 = float(self(x1)) / ref
            if y1 == y0:
                total += y0**p * (x1 - x0)
            else:
                total += (y1 ** (p + 1) - y0 ** (p + 1)) / (y1 - y0) * (x1 - x0) / (p + 1)
        return total


# ---------------------------------------------------------------------------
# two-draw closed form


def _two_draw_residual(a: float, n: int, cost_ratio: float) -> float:
    """Round-1 indifference in closed form; zero at a symmetric equilibrium."""
    return (1.0 + a ** (2 * n - 1)) / (n * (1.0 + a)) - a ** (2 * n - 2) - cost_ratio


def _two_draw_value_integral(a: float, p: int) -> float:
    """Integral of h_a(u)^p for the single-threshold h: exact closed form."""
    return a ** (2 * p + 1) / (p + 1) + (1.0 - a ** (2 * p + 2)) / ((p + 1) * (1.0 + a))


def _two_draw_best_response(a: float, n: int, cost_ratio: float) -> float:
    """Optimal round-1 quantile against opponents using quantile a."""
    v2 = -cost_ratio + _two_draw_value_integral(a, n - 1)
    if v2 <= 0.0:
        return 0.0
    x = v2 ** (1.0 / (n - 1))
    # invert h_a: below the kink h=a*u, above it h=(1+a)*u-a
    return x / a if x <= a * a else (x + a) / (1.0 + a)


def _two_draw_stable(a: float, n: int, cost_ratio: float) -> tuple[bool, float]:
    """Damped best-response stability at a root: factor |(1+T')/2| < 1."""
    eps = 1e-7
    tp = (
        _two_draw_best_response(a + eps, n, cost_ratio)
        - _two_draw_best_response(a - eps, n, cost_ratio)
    ) / (2 * eps)
    factor = abs(0.5 * (1.0 + tp))
    return factor < 1.0, factor


def solve_two_draw(n_players: int, cost_ratio: float) -> FiniteHorizonEquilibrium:
    """Symmetric two-draw equilibrium by 1-D root finding on the closed form.

    All interior roots are located on a dense grid; a root only counts as an
    equilibrium when it is stable under damped best-response dynamics. (Near
    the participation frontier the indifference condition keeps an interior
    root that no adjustment process can hold; those cells report exists=False.)
    """
    params = FiniteHorizonParams(n_players, cost_ratio, 2)
    n, r = params.n_players, params.cost_ratio

    grid = np.linspace(1e-9, 1.0 - 1e-9, 4001)
    vals = _two_draw_residual(grid, n, r)
    roots = []
    for x0, x1, v0, v1 in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if v0 == 0.0:
            roots.append(float(x0))
        elif v0 * v1 < 0:
            roots.append(float(brentq(_two_draw_residual, x0, x1, args=(n, r), xtol=1e-15)))

    stable = [(a, f) for a in roots for ok, f in [_two_draw_stable(a, n, r)] if ok]
    diagnostics = {
        "roots": roots,
        "stability_factors": [_two_draw_stable(a, n, r)[1] for a in roots],
    }
    if not stable:
        return FiniteHorizonEquilibrium((), False, diagnostics)
    a_star, factor = stable[0]
    diagnostics["stability_factor"] = factor
    return FiniteHorizonEquilibrium((a_star,), True, diagnostics)


# ---------------------------------------------------------------------------
# general k: backward induction + damped best response, Newton fallback


def _continuation_values(a: np.ndarray, n: int, r: float) -> tuple[np.ndarray, OpponentFinalCdf]:
    """V[j] = value of entering round j (1-indexed; V[k] is the forced draw)."""
    k = len(a) + 1
    p = n - 1
    h = OpponentFinalCdf(a)
    v = np.zeros(k + 1)
    v[k] = -r + h.integral_power(p)
    for j in range(k - 1, 0, -1):
        aj = a[j - 1]
        v[j] = -r + aj * v[j + 1] + h.integral_power(p, aj, 1.0)
    return v, h


def _best_response_sweep(a: np.ndarray, n: int, r: float) -> tuple[np.ndarray, float]:
    """One damped Gauss-Seidel sweep over rounds k-1..1; returns sup residual."""
    k = len(a) + 1
    p = n - 1
    a = a.copy()
    resid = 0.0
    for j in range(k - 1, 0, -1):
        v, h = _continuation_values(a, n, r)
        target = max(v[j + 1], 0.0) ** (1.0 / p)
        b = float(h.inverse(target))
        resid = max(resid, abs(b - a[j - 1]))
        a[j - 1] = min(max(a[j - 1] + _DAMPING * (b - a[j - 1]), 0.0), 1.0 - 1e-12)
    return a, resid


def _run_best_response(
    a0: np.ndarray, n: int, r: float
) -> tuple[np.ndarray | None, int, float]:
    a = a0.copy()
    resid = math.inf
    best = math.inf
    stall = 0
    for it in range(_BR_MAX_ITER):
        a, resid = _best_response_sweep(a, n, r)
        if resid < _BR_TOL:
            return a, it + 1, resid
        # bail out early when the iteration stops contracting (unstable cell)
        if resid < 0.999 * best:
            best, stall = resid, 0
        else:
            stall += 1
            if stall > 200:
                return None, it + 1, resid
    return None, _BR_MAX_ITER, resid


def _scaled_residuals(a: np.ndarray, n: int, r: float) -> np.ndarray:
    """Cancellation-free equilibrium system, every component O(1)-scaled.

    Substituting the level equation into the indifference cascade removes the
    per-draw cost from every remaining equation:
        (h(a_j)/h(a_{j+1}))^p - a_{j+1} - (h(a_{k-1})/h(a_{j+1}))^p
            + int_0^{a_{j+1}} (h/h(a_{j+1}))^p du = 0,   j = 1..k-2,
    plus one level equation pinning the forced-acceptance value:
        h(a_{k-1})^p + r - int_0^1 h^p du = 0.
    For j = k-2 the h(a_{k-1}) ratio collapses to 1.
    """
    k = len(a) + 1
    p = n - 1
    h = OpponentFinalCdf(a)
    out = np.zeros(k - 1)
    h_last = float(h(a[k - 2]))
    for j in range(k - 2):
        hj = float(h(a[j]))
        hj1 = float(h(a[j + 1]))
        if hj <= 0.0 or hj1 <= 0.0 or h_last <= 0.0:
            out[j] = 1e3  # outside the solvable region; push back
            continue
        ratio = math.exp(p * (math.log(hj) - math.log(hj1)))
        tail = math.exp(p * (math.log(h_last) - math.log(hj1)))
        out[j] = ratio - a[j + 1] - tail + h.integral_power_scaled(p, a[j + 1], hj1)
    out[k - 2] = h_last ** p + r - h.integral_power(p)
    return out


def _newton_polish(
    a0: np.ndarray, n: int, r: float
) -> tuple[np.ndarray | None, int, float]:
    """Damped Newton with backtracking on the scaled system."""
    a = np.clip(a0, 1e-9, 1.0 - 1e-9)
    f = _scaled_residuals(a, n, r)
    norm = float(np.max(np.abs(f)))
    m = len(a)
    for it in range(200):
        if norm < 1e-12:
            return a, it, norm
        jac = np.zeros((m, m))
        for i in range(m):
            eps = 1e-7 * max(abs(a[i]), 1e-3)
            ap, am = a.copy(), a.copy()
            ap[i] = min(a[i] + eps, 1.0 - 1e-12)
            am[i] = max(a[i] - eps, 1e-12)
            jac[:, i] = (_scaled_residuals(ap, n, r) - _scaled_residuals(am, n, r)) / (
                ap[i] - am[i]
            )
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            return None, it, norm
        improved = False
        for halving in range(40):
            cand = np.clip(a + step * 0.5**halving, 1e-9, 1.0 - 1e-9)
            fc = _scaled_residuals(cand, n, r)
            nc = float(np.max(np.abs(fc)))
            if nc < norm:
                a, f, norm = cand, fc, nc
                improved = True
                break
        if not improved:
            return (a, it, norm) if norm < 1e-9 else (None, it, norm)
    return (a, 200, norm) if norm < 1e-9 else (None, 200, norm)


def solve_k_draw(
    params: FiniteHorizonParams, init: Sequence[float] | None = None
) -> FiniteHorizonEquilibrium:
    """Symmetric k-draw equilibrium by backward induction.

    Stage 1 iterates damped sequential best response from the two-draw root;
    stage 2 retries from a 5-point grid; stage 3 runs damped Newton on the
    cancellation-free system (needed near the participation frontier, where
    best response is unstable and the raw residuals are below float noise).
    For k=2 the result matches solve_two_draw's closed-form root, and the
    same stability rule decides existence. For k>=3 any interior root found
    is reported as an equilibrium.
    """
    n, r, k = params.n_players, params.cost_ratio, params.n_draws
    p = n - 1

    # h(u) <= u pointwise (convex, pinned at 0 and 1), so the forced-draw
    # value is at most 1/N - c/W: beyond that frontier nothing can exist
    if n * r > 1.0:
        return FiniteHorizonEquilibrium((), False, {"reason": "participation frontier"})
    if n * r == 1.0:
        return FiniteHorizonEquilibrium(
            (0.0,) * (k - 1), True, {"reason": "degenerate frontier equilibrium"}
        )

    two = solve_two_draw(n, r)
    seed = two.round_quantiles[0] if two.exists else (
        two.diagnostics["roots"][0] if two.diagnostics.get("roots") else 0.5
    )

    inits: list[np.ndarray] = []
    if init is not None:
        inits.append(np.clip(np.asarray(init, dtype=float), 1e-9, 1 - 1e-9))
    inits.append(np.full(k - 1, seed))

    attempts = []
    solution = None
    for a0 in inits:
        a_fix, iters, resid = _run_best_response(a0, n, r)
        attempts.append({"method": "best_response", "iterations": iters, "residual": resid})
        if a_fix is not None:
            solution = a_fix
            break

    if solution is None:
        # stage 2: spread-out restarts
        found = []
        for s in (0.15, 0.35, 0.55, 0.75, 0.9):
            a_fix, iters, resid = _run_best_response(np.full(k - 1, s), n, r)
            attempts.append({"method": "multistart", "start": s, "iterations": iters, "residual": resid})
            if a_fix is not None:
                found.append(a_fix)
        if found:
            solution = found[0]
            spread = max(
                float(np.max(np.abs(x - y))) for x in found for y in found
            )
            attempts.append({"multistart_spread": spread})

    if solution is None:
        # stage 3: Newton on the well-conditioned system
        newton_inits = list(inits) + [
            np.full(k - 1, x) for x in (seed, 0.9 * seed, min(0.95, 1.2 * seed))
        ]
        if r > 0:
            frontier = max(1e-6, min(1.0 / (n * r) - 1.0, 1 - 1e-6))
            newton_inits.append(np.full(k - 1, frontier))
            newton_inits.append(np.full(k - 1, 0.5 * (frontier + seed)))
        newton_inits += [np.full(k - 1, x) for x in (0.1, 0.3, 0.5, 0.7, 0.9)]
        for a0 in newton_inits:
            a_fix, iters, resid = _newton_polish(np.asarray(a0, dtype=float), n, r)
            attempts.append({"method": "newton", "iterations": iters, "residual": resid})
            if a_fix is not None:
                solution = a_fix
                break

    if solution is None:
        if k == 2:
            # exhaustive 1-D scan already ruled everything out
            return FiniteHorizonEquilibrium((), False, {"attempts": attempts})
        raise NumericFailureError(
            f"no k={k} equilibrium found for N={n}, c/W={r}",
            diagnostics={"attempts": attempts},
        )

    # polish whatever stage produced the root so both routes agree tightly
    polished, _, norm = _newton_polish(solution, n, r)
    if polished is not None:
        solution = polished

    diagnostics = {"attempts": attempts, "scaled_residual": float(
        np.max(np.abs(_scaled_residuals(solution, n, r)))
    )}
    if k == 2:
        ok, factor = _two_draw_stable(float(solution[0]), n, r)
        diagnostics["stability_factor"] = factor
        if not ok:
            diagnostics["unstable_root"] = float(solution[0])
            return FiniteHorizonEquilibrium((), False, diagnostics)
    return FiniteHorizonEquilibrium(tuple(float(v) for v in solution), True, diagnostics)


@dataclass(frozen=True)
class ProfileRow:
    n_players: int
    round_quantiles: tuple[float, ...]
    exists: bool


@dataclass(frozen=True)
class ThresholdProfile:
    n_draws: int
    cost_ratio: float
    rows: tuple[ProfileRow, ...]
    peak_n: int | None  # argmax of the round-1 quantile among existing rows
    frontier_n: int | None  # first N at which no equilibrium exists

    def row(self, n_players: int) -> ProfileRow:
        for r in self.rows:
            if r.n_players == n_players:
                return r
        raise KeyError(n_players)


def threshold_profile(
    k: int, cost_ratio: float, n_range: Sequence[int]
) -> ThresholdProfile:
    """Sweep N, reusing each solution as the next N's starting point."""
    rows = []
    prev: tuple[float, ...] | None = None
    for n in n_range:
        eq = solve_k_draw(FiniteHorizonParams(n, cost_ratio, k), init=prev)
        rows.append(ProfileRow(n, eq.round_quantiles, eq.exists))
        prev = eq.round_quantiles if eq.exists else prev
    existing = [r for r in rows if r.exists]
    peak_n = max(existing, key=lambda r: r.round_quantiles[0]).n_players if existing else None
    frontier_n = next((r.n_players for r in rows if not r.exists), None)
    return ThresholdProfile(k, cost_ratio, tuple(rows), peak_n, frontier_n)
