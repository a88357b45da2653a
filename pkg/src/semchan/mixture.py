"""Mixture recovery by alternating channel construction, a weight fixed
point, and information-maximizing parameter updates.

The loop differs from plain expectation maximization in its left step: after
building the responsibility channel, the component weights are iterated to
their own fixed point (remarginalizing the data through the channel) before
the parameters move. Convergence is monitored by the divergence between
the data distribution and the predicted mixture, and the run stops once that
divergence falls below a threshold rather than when the likelihood stalls.

With the responsibility channel built from the current model, the three
monitored quantities obey an exact identity

    R - G = KL(data || predicted mixture)

where R is the channel's mutual information taken against the model weights
and G the semantic mutual information of the component densities. The
identity holds for every parameter setting, so driving the divergence to
zero is the same as closing the gap between R and G.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import (
    DegenerateComponent,
    InnerNoConvergence,
    NoConvergence,
    ZeroMixtureDensity,
)
from .prob import Distribution, ShannonChannel, Support, discretized_gaussian, kl_divergence

WEIGHT_TOL = 1e-9
D_MIN = 0.5  # variance floor, in grid units, against component collapse
INNER_TOL = 1e-6
INNER_MAX = 500


@dataclass(frozen=True)
class MixtureParams:
    """Component weights plus (center, stddev) per Gaussian component."""

    weights: np.ndarray
    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        comps = tuple((float(c), float(d)) for c, d in self.components)
        if w.shape != (len(comps),):
            raise ValueError("need one weight per component")
        if np.any(w < 0) or abs(w.sum() - 1.0) > WEIGHT_TOL:
            raise ValueError("weights must form a distribution")
        if any(d <= 0 for _, d in comps):
            raise ValueError("component stddevs must be positive")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "components", comps)

    @property
    def n_components(self) -> int:
        return len(self.components)

    def with_weights(self, weights) -> "MixtureParams":
        return MixtureParams(weights, self.components)

    def centers(self) -> np.ndarray:
        return np.array([c for c, _ in self.components])

    def stddevs(self) -> np.ndarray:
        return np.array([d for _, d in self.components])


def _component_table(params: MixtureParams, support: Support) -> np.ndarray:
    """Rows = components, columns = grid points: P(x | component)."""
    return np.vstack([discretized_gaussian(support, c, d).p for c, d in params.components])


def predicted_mixture(params: MixtureParams, support: Support) -> Distribution:
    """The mixture distribution the model predicts on the grid."""
    return Distribution(support, params.weights @ _component_table(params, support))


def e_channel(params: MixtureParams, support: Support) -> ShannonChannel:
    """Responsibility channel P(component | x) across the grid.

    Raises:
        ZeroMixtureDensity: the predicted mixture vanishes at a grid point.
    """
    table = _component_table(params, support)
    q = params.weights @ table
    if np.any(q <= 0.0):
        bad = support.points[q <= 0.0]
        raise ZeroMixtureDensity(f"mixture density is zero at {bad.tolist()}")
    resp = (params.weights[:, None] * table / q[None, :]).T
    return ShannonChannel(support, tuple(range(params.n_components)), resp)


class WeightUpdate(NamedTuple):
    weights: np.ndarray
    iterations: int


def update_weights(
    params: MixtureParams,
    data: Distribution,
    inner_tol: float = INNER_TOL,
    inner_max: int = INNER_MAX,
) -> WeightUpdate:
    """Iterate the weight map w_j <- sum_i data_i * resp_ij(w) to its fixed
    point, holding the component densities fixed.

    Each iterate remarginalizes the data through the responsibility channel,
    so it sums to one by construction (renormalized defensively anyway).

    Raises:
        InnerNoConvergence: the cap was hit first; the exception carries the
            last iterate and the count.
    """
    table = _component_table(params, data.support)
    w = params.weights.copy()
    for it in range(1, inner_max + 1):
        q = w @ table
        if np.any(q <= 0.0):
            raise ZeroMixtureDensity("mixture density vanished during weight iteration")
        w_new = (w[:, None] * table / q[None, :]) @ data.p
        w_new = w_new / w_new.sum()
        delta = np.max(np.abs(w_new - w))
        w = w_new
        if delta < inner_tol:
            return WeightUpdate(w, it)
    raise InnerNoConvergence(
        f"weight iteration did not settle in {inner_max} steps",
        weights=w,
        iterations=inner_max,
    )


def m_step(
    params: MixtureParams, data: Distribution, responsibilities: ShannonChannel
) -> MixtureParams:
    """Move each component to the weighted moments of the data under its
    responsibilities; weights are left untouched (they belong to the weight
    fixed point, not this step).

    Raises:
        DegenerateComponent: a component has no responsibility mass or its
            updated width falls below the variance floor.
    """
    x = data.support.points
    r = responsibilities.matrix  # (n_x, k)
    mass = data.p @ r
    if np.any(mass < 1e-12):
        raise DegenerateComponent("a component has no responsibility mass")
    centers = (data.p[:, None] * r * x[:, None]).sum(axis=0) / mass
    var = ((data.p[:, None] * r) * (x[:, None] - centers[None, :]) ** 2).sum(axis=0) / mass
    stddevs = np.sqrt(var)
    if np.any(stddevs < D_MIN):
        raise DegenerateComponent(
            f"component width fell below the floor {D_MIN}: {stddevs.tolist()}"
        )
    return MixtureParams(params.weights, tuple(zip(centers.tolist(), stddevs.tolist())))


def _responsibility_parts(params: MixtureParams, data: Distribution):
    """Component table, responsibilities, and the mask of cells that carry
    weight (positive data mass and positive responsibility)."""
    table = _component_table(params, data.support)
    q = params.weights @ table
    if np.any((q <= 0.0) & (data.p > 0.0)):
        raise ZeroMixtureDensity("mixture density is zero on a data point")
    resp = np.zeros_like(table)
    ok = q > 0
    resp[:, ok] = params.weights[:, None] * table[:, ok] / q[ok][None, :]
    mask = (resp > 0) & (data.p > 0)[None, :]
    return table, resp, mask


def semantic_bits(params: MixtureParams, data: Distribution) -> float:
    """Semantic mutual information of the components against the data, using
    the model's own responsibility channel."""
    table, resp, mask = _responsibility_parts(params, data)
    weighted = np.broadcast_to(data.p, table.shape)
    return float(
        (weighted[mask] * resp[mask] * (np.log2(table[mask]) - np.log2(weighted[mask]))).sum()
    )


def shannon_bits(params: MixtureParams, data: Distribution) -> float:
    """Mutual information of the responsibility channel against the data,
    with the label marginal taken from the model weights (the channel's own
    defining prior; it coincides with the remarginalized joint once the
    weight fixed point is reached)."""
    table, resp, mask = _responsibility_parts(params, data)
    weighted = np.broadcast_to(data.p, table.shape)
    logw = np.broadcast_to(np.log2(np.maximum(params.weights, 1e-300))[:, None], table.shape)
    return float((weighted[mask] * resp[mask] * (np.log2(resp[mask]) - logw[mask])).sum())


def r_g_identity(params: MixtureParams, data: Distribution) -> tuple[float, float, float]:
    """The triple (R, G, divergence) whose identity R - G = divergence is
    exact for every parameter setting."""
    R = shannon_bits(params, data)
    G = semantic_bits(params, data)
    divergence = kl_divergence(data, predicted_mixture(params, data.support))
    return R, G, divergence


def complete_data_cross_entropy(
    params: MixtureParams, data: Distribution, responsibilities: ShannonChannel
) -> float:
    """Expected complete-data coding cost -sum_ij data_i r_ij
    log2[P(x_i | component_j) w_j], in bits per datum.

    The responsibilities may come from an earlier model state, which is how
    the post-update cost of a parameter step is scored against the channel
    that produced it.
    """
    table = _component_table(params, data.support)
    r = responsibilities.matrix.T  # (k, n_x)
    mask = (r > 0) & (data.p > 0)[None, :]
    weighted = np.broadcast_to(data.p, table.shape)
    logw = np.broadcast_to(np.log2(np.maximum(params.weights, 1e-300))[:, None], table.shape)
    return float(
        -(weighted[mask] * r[mask] * (np.log2(np.maximum(table[mask], 1e-300)) + logw[mask])).sum()
    )


@dataclass
class CmEmRecord:
    """State after one full iteration (or the stopping left half-step)."""

    iteration: int
    params: MixtureParams
    predicted: Distribution
    shannon_bits: float
    semantic_bits: float
    divergence_bits: float
    inner_iterations: int


@dataclass
class CmEmTrace:
    records: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)

    def divergence_history(self) -> list[float]:
        return [r.divergence_bits for r in self.records]


def cm_em_run(
    start: MixtureParams,
    data: Distribution,
    stop_divergence: float = 0.001,
    max_iters: int = 50,
    inner_tol: float = INNER_TOL,
    inner_max: int = INNER_MAX,
) -> tuple[MixtureParams, CmEmTrace]:
    """Run the full loop: responsibilities, weight fixed point, divergence
    check, parameter update; stop once KL(data || predicted) drops below
    ``stop_divergence`` (checked after the weight step, before parameters
    move).

    Returns:
        (final params, trace). Each trace record carries the post-iteration
        params, predicted mixture, the (R, G, divergence) triple, and the
        inner-loop iteration count.

    Raises:
        NoConvergence: the divergence never reached the threshold; the trace
            rides on the exception.
    """
    params = start
    trace = CmEmTrace()

    def record(it: int, inner: int) -> CmEmRecord:
        R, G, div = r_g_identity(params, data)
        rec = CmEmRecord(
            iteration=it,
            params=params,
            predicted=predicted_mixture(params, data.support),
            shannon_bits=R,
            semantic_bits=G,
            divergence_bits=div,
            inner_iterations=inner,
        )
        trace.records.append(rec)
        return rec

    for it in range(1, max_iters + 1):
        try:
            update = update_weights(params, data, inner_tol, inner_max)
            inner = update.iterations
            params = params.with_weights(update.weights)
        except InnerNoConvergence as exc:
            trace.diagnostics.append(f"inner loop hit its cap at iteration {it}")
            inner = exc.iterations
            params = params.with_weights(exc.weights)

        divergence = kl_divergence(data, predicted_mixture(params, data.support))
        if divergence < stop_divergence:
            record(it, inner)
            return params, trace

        responsibilities = e_channel(params, data.support)
        params = m_step(params, data, responsibilities)
        rec = record(it, inner)
        if len(trace.records) > 1:
            prev = trace.records[-2].divergence_bits
            if rec.divergence_bits > prev + 1e-6:
                trace.diagnostics.append(
                    f"divergence rose at iteration {it}: {prev:.9f} -> "
                    f"{rec.divergence_bits:.9f}"
                )
    raise NoConvergence(
        f"divergence stayed above {stop_divergence} after {max_iters} iterations",
        trace=trace,
    )
