"""Both matching directions between channel kinds, and their fixed point.

Learning (one direction): derive truth functions from a transition channel or
from labeled samples, either directly (divide a channel column by its peak)
or by searching a parametric membership family for the member with maximal
average semantic information.

Classification (the other direction): given truth functions, pick the label
with the most semantic information for a seen instance, or the most expected
semantic information for a noisy observation; applied to every observation
point this induces an interval partition of the observation axis.

Alternating the two directions from a start partition is a fixed-point
iteration over partitions: build the label channel from the current regions,
re-derive the truth functions, reassign every observation point to its best
label, repeat until the regions stop changing. Because the objective is flat
near its peak on unit grids, grid-level iteration can park one cell away
from the true boundary, so for Gaussian observation models a final
refinement stage re-runs the same two steps with real-valued region
boundaries (exact interval masses, boundary placed at the information-curve
crossing) until the boundaries settle; reported grid dividing points are the
largest grid value inside each lower region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import (
    DeadLabel,
    EmptyFamily,
    EmptySample,
    NoConvergence,
    NonContiguousAssignment,
    ZeroLogicalProbability,
    ZeroMarginal,
)
from .info import _log2_truth
from .prob import (
    Distribution,
    ShannonChannel,
    Support,
    _check_same_support,
    discretized_gaussian,
    joint_from_channel,
    shannon_mutual_information,
)
from .truth import (
    GaussianTruth,
    LogisticTruth,
    ParametricTruth,
    SemanticChannel,
    TruthFunction,
    evaluate_parametric,
)

OBJECTIVE_TOL = 1e-9


# --------------------------------------------------------------------------
# partitions of the observation axis
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    """Ordered boundaries splitting an observation grid into labeled regions.

    Region j is the half-open interval (b_{j-1}, b_j]; boundaries may be
    real-valued. ``labels`` maps each region to its label value (defaults to
    0..k). Every region must contain at least one grid point.
    """

    observation_support: Support
    boundaries: tuple[float, ...]
    labels: tuple = None

    def __post_init__(self):
        bounds = tuple(float(b) for b in self.boundaries)
        if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
            raise ValueError("boundaries must be strictly increasing")
        labels = self.labels
        if labels is None:
            labels = tuple(range(len(bounds) + 1))
        labels = tuple(labels)
        if len(labels) != len(bounds) + 1:
            raise ValueError("need one label per region")
        object.__setattr__(self, "boundaries", bounds)
        object.__setattr__(self, "labels", labels)
        counts = np.bincount(self.region_indices(), minlength=len(labels))
        if np.any(counts == 0):
            raise ValueError("every region must contain at least one grid point")

    @property
    def n_regions(self) -> int:
        return len(self.boundaries) + 1

    def region_indices(self) -> np.ndarray:
        """Region index of every grid point."""
        return np.searchsorted(
            np.asarray(self.boundaries), self.observation_support.points, side="left"
        )

    def label_per_point(self) -> np.ndarray:
        return np.asarray(self.labels, dtype=object)[self.region_indices()]

    def grid_dividing_points(self) -> tuple[float, ...]:
        """Largest grid value inside each lower region (the grid-snapped
        form of the boundaries)."""
        pts = self.observation_support.points
        out = []
        for b in self.boundaries:
            idx = int(np.searchsorted(pts, b, side="right")) - 1
            out.append(float(pts[idx]))
        return tuple(out)

    def same_regions(self, other: "Partition") -> bool:
        """True when both partitions assign every grid point the same label."""
        if not self.observation_support.same_as(other.observation_support):
            return False
        return np.array_equal(self.label_per_point(), other.label_per_point())

    @classmethod
    def from_label_map(cls, support: Support, label_map) -> "Partition":
        """Build a partition from a per-grid-point label assignment.

        Raises:
            NonContiguousAssignment: some label's point set is not an
                interval; the exception carries the raw label map.
        """
        lab = list(label_map)
        if len(lab) != len(support):
            raise ValueError("label map does not match support size")
        run_labels = [lab[0]]
        bounds = []
        for k in range(1, len(lab)):
            if lab[k] != lab[k - 1]:
                run_labels.append(lab[k])
                bounds.append(float(support.points[k - 1]))
        if len(set(run_labels)) != len(run_labels):
            raise NonContiguousAssignment(
                "argmax labeling is not interval-shaped", label_map=lab
            )
        return cls(support, tuple(bounds), tuple(run_labels))


# --------------------------------------------------------------------------
# labeled samples
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LabeledSample:
    """Per-label sampling distributions with marginals, and optional
    negative-example distributions (one per label, each may be None)."""

    conditionals: tuple[Distribution, ...]
    weights: np.ndarray = None
    negatives: tuple = None

    def __post_init__(self):
        conds = tuple(self.conditionals)
        if not conds:
            raise ValueError("need at least one labeled conditional")
        for c in conds[1:]:
            _check_same_support(conds[0].support, c.support, "sample conditionals")
        w = self.weights
        if w is None:
            w = np.full(len(conds), 1.0 / len(conds))
        w = np.asarray(w, dtype=float)
        if w.shape != (len(conds),) or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("label weights must be a distribution over labels")
        w.flags.writeable = False
        negs = self.negatives
        if negs is not None:
            negs = tuple(negs)
            if len(negs) != len(conds):
                raise ValueError("need one (possibly None) negative entry per label")
            for n in negs:
                if n is not None:
                    _check_same_support(conds[0].support, n.support, "negatives")
        object.__setattr__(self, "conditionals", conds)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "negatives", negs)

    @property
    def support(self) -> Support:
        return self.conditionals[0].support

    @classmethod
    def from_counts(cls, support: Support, counts, negative_counts=None) -> "LabeledSample":
        """Build from a (labels x points) count matrix.

        Raises:
            EmptySample: some label has zero total count.
        """
        n = np.asarray(counts, dtype=float)
        totals = n.sum(axis=1)
        if np.any(totals <= 0):
            raise EmptySample("a label has zero total count")
        conds = tuple(Distribution(support, row / tot) for row, tot in zip(n, totals))
        negs = None
        if negative_counts is not None:
            negs = []
            for row in negative_counts:
                if row is None:
                    negs.append(None)
                else:
                    r = np.asarray(row, dtype=float)
                    if r.sum() <= 0:
                        raise EmptySample("a negative label has zero total count")
                    negs.append(Distribution(support, r / r.sum()))
            negs = tuple(negs)
        return cls(conds, totals / totals.sum(), negs)


# --------------------------------------------------------------------------
# learning: truth functions from channels and samples
# --------------------------------------------------------------------------


def match_truth_direct(channel: ShannonChannel, label_index: int) -> TruthFunction:
    """Truth function of one label read directly off a transition channel:
    the label's column divided by its peak value.

    The result does not depend on any input prior and has peak exactly 1.

    Raises:
        DeadLabel: the column is identically zero.
    """
    col = channel.column(label_index)
    peak = col.max()
    if peak <= 0.0:
        raise DeadLabel(f"label {channel.labels[label_index]!r} never occurs")
    return TruthFunction(channel.support, col / peak)


@dataclass(frozen=True)
class GaussianTruthFamily:
    """Search box over bell-shaped memberships: center and width ranges."""

    center: tuple[float, float]
    stddev: tuple[float, float]

    def __post_init__(self):
        if self.stddev[0] <= 0:
            raise ValueError("stddev range must be positive")
        if self.center[0] > self.center[1] or self.stddev[0] > self.stddev[1]:
            raise EmptyFamily("family parameter box is empty")

    def axes(self):
        return (self.center, self.stddev)

    def tabulate(self, params: np.ndarray, x: np.ndarray) -> np.ndarray:
        c, d = params[:, 0:1], params[:, 1:2]
        return np.exp(-((x[None, :] - c) ** 2) / (2.0 * d**2))

    def make(self, params) -> GaussianTruth:
        return GaussianTruth(float(params[0]), float(params[1]))


@dataclass(frozen=True)
class LogisticTruthFamily:
    """Search box over sigmoid memberships: rate and midpoint ranges."""

    rate: tuple[float, float]
    midpoint: tuple[float, float]
    sign: int = 1

    def __post_init__(self):
        if self.rate[0] <= 0:
            raise ValueError("rate range must be positive")
        if self.rate[0] > self.rate[1] or self.midpoint[0] > self.midpoint[1]:
            raise EmptyFamily("family parameter box is empty")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")

    def axes(self):
        return (self.rate, self.midpoint)

    def tabulate(self, params: np.ndarray, x: np.ndarray) -> np.ndarray:
        k, m = params[:, 0:1], params[:, 1:2]
        return 1.0 / (1.0 + np.exp(-self.sign * k * (x[None, :] - m)))

    def make(self, params) -> LogisticTruth:
        return LogisticTruth(float(params[0]), float(params[1]), self.sign)


GRID_SEARCH_LEVELS = 3
GRID_SEARCH_POINTS = 64


def _family_search(family, prior: Distribution, objective) -> ParametricTruth:
    """Coarse-to-fine grid search over a family's parameter box.

    ``objective`` maps a (candidates x points) truth table to a score vector.
    A plain sequence of parametric truths is treated as a discrete family.
    """
    x = prior.support.points
    if not hasattr(family, "axes"):
        candidates = list(family)
        if not candidates:
            raise EmptyFamily("no candidate truth functions")
        table = np.vstack([evaluate_parametric(pt, prior.support).t for pt in candidates])
        return candidates[int(np.argmax(objective(table)))]

    (a_lo, a_hi), (b_lo, b_hi) = family.axes()
    best = None
    for _ in range(GRID_SEARCH_LEVELS):
        a = np.linspace(a_lo, a_hi, GRID_SEARCH_POINTS)
        b = np.linspace(b_lo, b_hi, GRID_SEARCH_POINTS)
        aa, bb = np.meshgrid(a, b, indexing="ij")
        params = np.column_stack([aa.ravel(), bb.ravel()])
        scores = objective(family.tabulate(params, x))
        best = params[int(np.argmax(scores))]
        # shrink the box around the winner, staying inside the original axes
        step_a = a[1] - a[0] if len(a) > 1 else 0.0
        step_b = b[1] - b[0] if len(b) > 1 else 0.0
        a_lo, a_hi = max(family.axes()[0][0], best[0] - 1.5 * step_a), min(
            family.axes()[0][1], best[0] + 1.5 * step_a
        )
        b_lo, b_hi = max(family.axes()[1][0], best[1] - 1.5 * step_b), min(
            family.axes()[1][1], best[1] + 1.5 * step_b
        )
    return family.make(best)


def match_truth_parametric(
    sample: LabeledSample, prior: Distribution, label_index: int, family
) -> ParametricTruth:
    """Truth function learned from one label's sampling distribution: the
    family member maximizing the average semantic information of the label.

    On samples actually generated by a family member the search recovers that
    member; on very large samples it agrees with the direct channel match.
    """
    _check_same_support(sample.support, prior.support, "sample and prior")
    cond = sample.conditionals[label_index].p

    def objective(table: np.ndarray) -> np.ndarray:
        T = table @ prior.p
        return _log2_truth(table) @ cond - np.log2(np.maximum(T, 1e-300))

    return _family_search(family, prior, objective)


def match_truth_with_negatives(
    sample: LabeledSample, prior: Distribution, label_index: int, family
) -> ParametricTruth:
    """Like match_truth_parametric but also scoring the complement membership
    1 - t against the label's negative examples, when present.

    With no negative examples the objective's second term vanishes and the
    result is identical to match_truth_parametric.
    """
    _check_same_support(sample.support, prior.support, "sample and prior")
    cond = sample.conditionals[label_index].p
    neg = None
    if sample.negatives is not None and sample.negatives[label_index] is not None:
        neg = sample.negatives[label_index].p

    def objective(table: np.ndarray) -> np.ndarray:
        T = table @ prior.p
        score = _log2_truth(table) @ cond - np.log2(np.maximum(T, 1e-300))
        if neg is not None:
            Tc = np.maximum(1.0 - T, 1e-300)
            score = score + _log2_truth(1.0 - table) @ neg - np.log2(Tc)
        return score

    return _family_search(family, prior, objective)


# --------------------------------------------------------------------------
# classification: labels from truth functions
# --------------------------------------------------------------------------


def _label_scores(channel: SemanticChannel, prior: Distribution) -> tuple[np.ndarray, np.ndarray]:
    """Per-point, per-label information log2(t / T); also returns T."""
    tmat = channel.truth_matrix()
    T = prior.p @ tmat
    if np.any(T <= 0.0):
        raise ZeroLogicalProbability("a label has zero logical probability")
    return _log2_truth(tmat) - np.log2(T)[None, :], T


def classify_semantic(channel: SemanticChannel, prior: Distribution, x_index: int) -> int:
    """Label index with maximal information for a seen instance.

    The logical-probability denominator corrects for label frequency, so
    rare, specific labels win over easy ones; ties go to the lowest index.
    """
    _check_same_support(channel.support, prior.support, "channel and prior")
    scores, _ = _label_scores(channel, prior)
    return int(np.argmax(scores[x_index]))


def classify_observed(
    channel: SemanticChannel, prior: Distribution, cond: Distribution
) -> int:
    """Label index with maximal expected information when only a posterior
    over the true class is available; ties go to the lowest index."""
    _check_same_support(channel.support, prior.support, "channel and prior")
    _check_same_support(channel.support, cond.support, "channel and posterior")
    scores, _ = _label_scores(channel, prior)
    return int(np.argmax(cond.p @ scores))


def positive_information_boundary(truth: TruthFunction, logical_prob: float) -> float:
    """Largest grid point where the label's information log2(t/T) is still
    non-positive; the label is worth asserting only above this point.

    ``logical_prob`` is passed explicitly so callers can supply expectations
    taken under measures other than a normalized grid prior.
    """
    if logical_prob <= 0:
        raise ZeroLogicalProbability("logical probability must be positive")
    info = _log2_truth(truth.t) - np.log2(logical_prob)
    idx = np.flatnonzero(info <= 0.0)
    if idx.size == 0:
        raise ValueError("information is positive over the whole grid")
    return float(truth.support.points[idx.max()])


# --------------------------------------------------------------------------
# observation models and the partition loop
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianObservation:
    """Class-conditional Gaussian observation model P(Z | class).

    Holds one (center, stddev) pair per class. ``channel()`` tabulates the
    grid-renormalized rows; the continuous forms are used by the boundary
    refinement stage.
    """

    class_support: Support
    z_support: Support
    components: tuple[tuple[float, float], ...]

    def __post_init__(self):
        comps = tuple((float(c), float(d)) for c, d in self.components)
        if len(comps) != len(self.class_support):
            raise ValueError("need one (center, stddev) pair per class")
        if any(d <= 0 for _, d in comps):
            raise ValueError("observation stddevs must be positive")
        object.__setattr__(self, "components", comps)

    def channel(self) -> ShannonChannel:
        """Discretized observation channel; columns are labeled by the grid
        values themselves."""
        rows = [discretized_gaussian(self.z_support, c, d).p for c, d in self.components]
        return ShannonChannel(
            self.class_support, tuple(self.z_support.points.tolist()), np.array(rows)
        )

    def interval_mass(self, lo: float, hi: float) -> np.ndarray:
        """Per-class probability of the real interval (lo, hi]."""
        out = np.empty(len(self.components))
        for i, (c, d) in enumerate(self.components):
            hi_v = ndtr((hi - c) / d) if np.isfinite(hi) else 1.0
            lo_v = ndtr((lo - c) / d) if np.isfinite(lo) else 0.0
            out[i] = hi_v - lo_v
        return out

    def density(self, z: float) -> np.ndarray:
        """Per-class density values at a real observation point."""
        c = np.array([c for c, _ in self.components])
        d = np.array([d for _, d in self.components])
        return np.exp(-((z - c) ** 2) / (2.0 * d * d)) / d


@dataclass
class CmRecord:
    """One matching pass: the reassigned partition and its scores."""

    iteration: int
    boundaries: tuple[float, ...]
    dividing_points: tuple[float, ...]
    channel: SemanticChannel
    objective_bits: float
    shannon_bits: float
    changed: bool


@dataclass
class CmTrace:
    """Full record of a partition-matching run."""

    records: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    refined_boundaries: tuple = None

    @property
    def iterations(self) -> int:
        """Number of passes that moved the partition (the final confirming
        pass is convergence detection, not an iteration)."""
        return sum(1 for r in self.records if r.changed)

    def dividing_history(self) -> list:
        return [r.dividing_points for r in self.records]


def shannon_channel_from_partition(
    cond_channel: ShannonChannel, partition: Partition
) -> ShannonChannel:
    """Aggregate an observation channel's columns over partition regions:
    P(label_j | class_i) = sum of P(z | class_i) over z in region j."""
    if cond_channel.n_labels() != len(partition.observation_support):
        raise ValueError("observation channel columns do not match the partition grid")
    regions = partition.region_indices()
    out = np.zeros((len(cond_channel.support), partition.n_regions))
    for j in range(partition.n_regions):
        out[:, j] = cond_channel.matrix[:, regions == j].sum(axis=1)
    return ShannonChannel(cond_channel.support, partition.labels, out)


def _observation_scores(
    channel: SemanticChannel, cond_channel: ShannonChannel, prior: Distribution
) -> tuple[np.ndarray, np.ndarray]:
    """Per-observation label scores and observation marginal.

    Returns (scores, pz) with scores[j, k] the expected information of label
    j at observation k.
    """
    pz = prior.p @ cond_channel.matrix
    if np.any(pz <= 0.0):
        raise ZeroMarginal("an observation point has zero probability")
    post = prior.p[:, None] * cond_channel.matrix / pz[None, :]
    log_t, T = _label_scores(channel, prior)
    return log_t.T @ post, pz


def reassign_partition(
    channel: SemanticChannel,
    cond_channel: ShannonChannel,
    prior: Distribution,
    z_support: Support = None,
) -> Partition:
    """Assign every observation point to its best label and convert the
    contiguous runs into an interval partition.

    ``z_support`` defaults to the observation channel's column labels (which
    the Gaussian observation model sets to the grid values).

    Raises:
        NonContiguousAssignment: the winner labeling is not interval-shaped;
            the exception carries the raw per-point label map.
    """
    if z_support is None:
        try:
            z_support = Support(np.array(cond_channel.labels, dtype=float))
        except (TypeError, ValueError) as exc:
            raise ValueError(
                "observation channel labels are not grid values; pass z_support"
            ) from exc
    scores, _ = _observation_scores(channel, cond_channel, prior)
    winners = np.argmax(scores, axis=0)
    label_map = [channel.labels[w] for w in winners]
    return Partition.from_label_map(z_support, label_map)


def _matched_channel(cond_channel: ShannonChannel, partition: Partition) -> SemanticChannel:
    """Matching step: label channel from the partition, truths off its columns."""
    label_channel = shannon_channel_from_partition(cond_channel, partition)
    truths = tuple(
        match_truth_direct(label_channel, j) for j in range(label_channel.n_labels())
    )
    return SemanticChannel(label_channel.labels, truths)


def _refine_boundaries(
    obs: GaussianObservation,
    prior: Distribution,
    start: Partition,
    tol: float = 1e-9,
    max_passes: int = 500,
) -> tuple[np.ndarray, int]:
    """Continue the matching loop with real-valued region boundaries.

    Each pass rebuilds the label channel from exact interval masses, rederives
    the truth functions, and moves every boundary to the crossing point of
    the two adjacent labels' information curves. Returns the settled
    boundaries and the number of passes used.
    """
    bounds = np.array(start.boundaries, dtype=float)
    labels = start.labels
    z_lo, z_hi = obs.z_support.points[0], obs.z_support.points[-1]
    k = len(labels)

    def info_gap(truths, T, a, b, z):
        post = prior.p * obs.density(z)
        post = post / post.sum()
        diff = _log2_truth(truths[:, a]) - _log2_truth(truths[:, b])
        return float(post @ diff - (np.log2(T[a]) - np.log2(T[b])))

    for n_pass in range(1, max_passes + 1):
        edges = np.concatenate(([-np.inf], bounds, [np.inf]))
        ch = np.column_stack(
            [obs.interval_mass(edges[j], edges[j + 1]) for j in range(k)]
        )
        peaks = ch.max(axis=0)
        if np.any(peaks <= 0.0):
            raise DeadLabel("a region lost all observation mass during refinement")
        truths = ch / peaks
        T = prior.p @ truths
        new = np.empty_like(bounds)
        for j, b in enumerate(bounds):
            lo = bounds[j - 1] if j > 0 else z_lo
            hi = bounds[j + 1] if j + 1 < len(bounds) else z_hi
            f_lo, f_hi = info_gap(truths, T, j, j + 1, lo), info_gap(truths, T, j, j + 1, hi)
            if f_lo <= 0.0 or f_hi >= 0.0:
                new[j] = b  # no crossing in range; keep the boundary
                continue
            a, c = lo, hi
            for _ in range(200):
                mid = 0.5 * (a + c)
                if info_gap(truths, T, j, j + 1, mid) > 0.0:
                    a = mid
                else:
                    c = mid
            new[j] = 0.5 * (a + c)
        if np.max(np.abs(new - bounds)) < tol:
            return new, n_pass
        bounds = new
    return bounds, max_passes


def cm_iterate(
    obs,
    prior: Distribution,
    start: Partition,
    max_iters: int = 50,
    refine: bool = None,
) -> tuple[Partition, CmTrace]:
    """Alternate channel matching and point reassignment until the partition
    repeats, then (for Gaussian observation models) polish the boundaries at
    sub-grid resolution.

    Args:
        obs: a GaussianObservation model, or a plain observation channel
            (rows = classes, columns = grid points).
        prior: class prior.
        start: initial partition of the observation grid.
        max_iters: cap on grid-level passes.
        refine: force the sub-grid refinement stage on or off; by default it
            runs exactly when ``obs`` carries a continuous model.

    Returns:
        (final partition, trace). The trace holds one record per pass with
        the reassigned dividing points, the matched semantic channel, the
        partition objective, and the Shannon mutual information of the
        induced label channel.

    Raises:
        NoConvergence: the grid-level loop exhausted ``max_iters``; the
            partial trace rides on the exception.
    """
    if isinstance(obs, GaussianObservation):
        cond_channel = obs.channel()
        do_refine = True if refine is None else refine
    else:
        cond_channel = obs
        if refine:
            raise ValueError("boundary refinement needs a continuous observation model")
        do_refine = False
    z_support = start.observation_support
    if cond_channel.n_labels() != len(z_support):
        raise ValueError("observation channel does not match the partition grid")

    trace = CmTrace()
    current = start
    converged = False
    for it in range(1, max_iters + 1):
        sem = _matched_channel(cond_channel, current)
        scores, pz = _observation_scores(sem, cond_channel, prior)
        winners = np.argmax(scores, axis=0)
        new = Partition.from_label_map(z_support, [sem.labels[w] for w in winners])
        objective = float(pz @ scores[winners, np.arange(len(pz))])
        shannon = shannon_mutual_information(
            joint_from_channel(prior, shannon_channel_from_partition(cond_channel, new))
        )
        changed = not new.same_regions(current)
        trace.records.append(
            CmRecord(
                iteration=it,
                boundaries=new.boundaries,
                dividing_points=new.grid_dividing_points(),
                channel=sem,
                objective_bits=objective,
                shannon_bits=shannon,
                changed=changed,
            )
        )
        if len(trace.records) > 1:
            prev = trace.records[-2].objective_bits
            if objective < prev - OBJECTIVE_TOL:
                trace.diagnostics.append(
                    f"objective decreased at pass {it}: {prev:.12f} -> {objective:.12f}"
                )
        if not changed:
            converged = True
            current = new
            break
        current = new
    if not converged:
        raise NoConvergence(f"partition did not settle in {max_iters} passes", trace=trace)

    if do_refine and current.boundaries:
        refined, _ = _refine_boundaries(obs, prior, current)
        trace.refined_boundaries = tuple(float(b) for b in refined)
        current = Partition(z_support, trace.refined_boundaries, current.labels)
    return current, trace
