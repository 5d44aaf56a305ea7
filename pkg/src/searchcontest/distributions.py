"""Continuous value distributions: CDF, density, quantile, hazard, sampling.

Every solver in the package works in quantile space u = F(x); distributions
enter only at the boundary of an operation (mapping quantiles back to values,
evaluating densities and hazards along a quantile path). All callables are
vectorized over numpy arrays and scalars. Objects are immutable and safe to
share across threads; samplers take an explicit Generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateTruncationError, InvalidParameterError


def _vectorized(fn: Callable[[np.ndarray], np.ndarray]) -> Callable:
    """Wrap an array function so scalars come back as Python floats."""

    def wrapped(x):
        arr = np.asarray(x, dtype=float)
        out = fn(arr)
        if np.ndim(x) == 0:
            return float(out)
        return out

    return wrapped


@dataclass(frozen=True)
class Distribution:
    """A continuous distribution with strictly positive density on its support."""

    name: str
    params: tuple[float, ...]
    support_lower: float
    support_upper: float  # math.inf when unbounded above
    cdf: Callable
    density: Callable
    quantile: Callable
    hazard: Callable

    def sample(self, rng: np.random.Generator, size=None):
        """Inverse-transform sampling; deterministic given the generator state."""
        return self.quantile(rng.random(size))

    def spec(self) -> dict:
        """JSON-serializable description (round-trips through from_spec)."""
        return {"family": self.name, "params": list(self.params)}


@dataclass(frozen=True)
class TruncatedDistribution(Distribution):
    """Base distribution conditioned on exceeding a lower point."""

    base: Distribution = None
    lower: float = float("nan")

    def cdf_trunc(self, x):
        return self.cdf(x)


def make_uniform(lo: float, hi: float) -> Distribution:
    if not lo < hi:
        raise InvalidParameterError(f"uniform needs lo < hi, got [{lo}, {hi}]")
    width = hi - lo

    cdf = _vectorized(lambda x: np.clip((x - lo) / width, 0.0, 1.0))
    density = _vectorized(
        lambda x: np.where((x >= lo) & (x <= hi), 1.0 / width, 0.0)
    )
    quantile = _vectorized(lambda u: lo + u * width)

    def _hazard(x):
        with np.errstate(divide="ignore"):
            h = np.where((x >= lo) & (x < hi), 1.0 / (hi - x), 0.0)
        return h

    return Distribution(
        name="uniform",
        params=(float(lo), float(hi)),
        support_lower=float(lo),
        support_upper=float(hi),
        cdf=cdf,
        density=density,
        quantile=quantile,
        hazard=_vectorized(_hazard),
    )


def make_exponential(rate: float) -> Distribution:
    if rate <= 0:
        raise InvalidParameterError(f"exponential rate must be positive, got {rate}")

    cdf = _vectorized(lambda x: np.where(x > 0, -np.expm1(-rate * np.maximum(x, 0.0)), 0.0))
    density = _vectorized(lambda x: np.where(x >= 0, rate * np.exp(-rate * np.maximum(x, 0.0)), 0.0))
    quantile = _vectorized(lambda u: -np.log1p(-u) / rate)
    hazard = _vectorized(lambda x: np.where(x >= 0, rate, 0.0))

    return Distribution(
        name="exponential",
        params=(float(rate),),
        support_lower=0.0,
        support_upper=math.inf,
        cdf=cdf,
        density=density,
        quantile=quantile,
        hazard=hazard,
    )


def make_pareto(shape: float, scale: float) -> Distribution:
    if shape <= 0 or scale <= 0:
        raise InvalidParameterError(
            f"pareto needs positive shape and scale, got ({shape}, {scale})"
        )

    cdf = _vectorized(
        lambda x: np.where(x > scale, 1.0 - (scale / np.maximum(x, scale)) ** shape, 0.0)
    )
    density = _vectorized(
        lambda x: np.where(
            x >= scale, shape * scale**shape * np.maximum(x, scale) ** (-shape - 1.0), 0.0
        )
    )
    quantile = _vectorized(lambda u: scale * (1.0 - u) ** (-1.0 / shape))
    hazard = _vectorized(lambda x: np.where(x >= scale, shape / np.maximum(x, scale), 0.0))

    return Distribution(
        name="pareto",
        params=(float(shape), float(scale)),
        support_lower=float(scale),
        support_upper=math.inf,
        cdf=cdf,
        density=density,
        quantile=quantile,
        hazard=hazard,
    )


def make_custom(
    quantile: Callable,
    density: Callable,
    support_lower: float,
    support_upper: float,
    name: str = "custom",
) -> Distribution:
    """Build a distribution from its quantile function and density.

    The CDF is recovered by bisection on u (64 halvings, resolution < 1e-12):
    the quantile is the primitive the solvers need most, so it is the input.
    """
    qfn = quantile

    def _cdf(x: np.ndarray) -> np.ndarray:
        lo = np.zeros_like(x)
        hi = np.ones_like(x)
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            below = qfn(mid) <= x
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        u = 0.5 * (lo + hi)
        u[x <= support_lower] = 0.0
        if math.isfinite(support_upper):
            u[x >= support_upper] = 1.0
        return u

    def _cdf_any(x):
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        out = _cdf(arr)
        return float(out[0]) if np.ndim(x) == 0 else out

    dens = _vectorized(lambda x: np.asarray(density(x), dtype=float))

    def _hazard(x):
        f = dens(x)
        tail = 1.0 - _cdf_any(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            h = np.where(tail > 0, f / np.where(tail > 0, tail, 1.0), 0.0)
        return h

    return Distribution(
        name=name,
        params=(),
        support_lower=float(support_lower),
        support_upper=float(support_upper),
        cdf=_cdf_any,
        density=dens,
        quantile=_vectorized(lambda u: np.asarray(qfn(u), dtype=float)),
        hazard=_vectorized(lambda x: np.asarray(_hazard(x), dtype=float)),
    )


def from_quantile_grid(grid: Sequence[Sequence[float]]) -> Distribution:
    """Piecewise-linear quantile function from [[u, x], ...] pairs."""
    pts = sorted((float(u), float(x)) for u, x in grid)
    us = np.array([p[0] for p in pts])
    xs = np.array([p[1] for p in pts])
    if len(pts) < 2 or us[0] != 0.0 or us[-1] != 1.0:
        raise InvalidParameterError("quantile grid must span u=0..1 with >= 2 points")
    if np.any(np.diff(us) <= 0) or np.any(np.diff(xs) <= 0):
        raise InvalidParameterError("quantile grid must be strictly increasing in u and x")

    slopes = np.diff(us) / np.diff(xs)  # du/dx per segment

    def density(x):
        arr = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(xs, arr, side="right") - 1, 0, len(slopes) - 1)
        out = np.where((arr >= xs[0]) & (arr <= xs[-1]), slopes[idx], 0.0)
        return float(out) if np.ndim(x) == 0 else out

    return make_custom(
        quantile=lambda u: np.interp(u, us, xs),
        density=density,
        support_lower=float(xs[0]),
        support_upper=float(xs[-1]),
        name="custom",
    )


def truncate_below(d: Distribution, b: float) -> TruncatedDistribution:
    """Condition d on exceeding b; requires mass above b."""
    qb = d.cdf(b)
    if qb >= 1.0 - 1e-12:
        raise DegenerateTruncationError(f"no mass above truncation point {b}")
    tail = 1.0 - qb

    cdf = _vectorized(lambda x: np.clip((d.cdf(x) - qb) / tail, 0.0, 1.0))
    density = _vectorized(lambda x: np.where(x >= b, d.density(x) / tail, 0.0))
    quantile = _vectorized(lambda u: d.quantile(qb + u * tail))
    # conditioning on the tail leaves the hazard above b unchanged
    hazard = _vectorized(lambda x: np.where(x >= b, d.hazard(x), 0.0))

    return TruncatedDistribution(
        name=f"{d.name}|>{b:g}",
        params=d.params,
        support_lower=float(b),
        support_upper=d.support_upper,
        cdf=cdf,
        density=density,
        quantile=quantile,
        hazard=hazard,
        base=d,
        lower=float(b),
    )


_FAMILIES = {
    "uniform": (make_uniform, ("lo", "hi")),
    "exponential": (make_exponential, ("rate",)),
    "pareto": (make_pareto, ("shape", "scale")),
}


def distribution_from_spec(spec: dict) -> Distribution:
    """Parse `{"family": ..., "params": {...}}` or a custom quantile grid."""
    family = spec.get("family")
    if family == "custom":
        grid = spec.get("quantile_grid")
        if not grid:
            raise InvalidParameterError("custom spec needs a quantile_grid")
        return from_quantile_grid(grid)
    if family not in _FAMILIES:
        raise InvalidParameterError(f"unknown distribution family: {family!r}")
    maker, keys = _FAMILIES[family]
    params = spec.get("params", {})
    if isinstance(params, dict):
        try:
            args = [float(params[k]) for k in keys]
        except KeyError as missing:
            raise InvalidParameterError(
                f"{family} spec needs params {keys}, missing {missing}"
            ) from None
    else:
        args = [float(v) for v in params]
        if len(args) != len(keys):
            raise InvalidParameterError(f"{family} takes {len(keys)} params, got {len(args)}")
    return maker(*args)
