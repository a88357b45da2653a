"""Scenario configs, runners, and the built-in reproduction catalog.

A scenario is a single JSON document with a ``kind`` field; running one
yields a result dict plus optional trace rows for file export. The built-in
catalog pins the reference values each reproduction scenario must hit (with
their tolerances) so a run can be scored pass/fail. Outputs contain no
timestamps, so repeated runs of the same config are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile

import numpy as np

from .confirm import (
    TestChannel,
    confirmation_from_counts,
    likelihood_ratios,
    optimal_disbelief,
    predict_with_belief,
)
from .errors import ConfigError, SemchanError, ScenarioError
from .matching import GaussianObservation, Partition, cm_iterate, positive_information_boundary
from .mixture import MixtureParams, cm_em_run
from .prob import Distribution, Support, bayes2_posterior, discretized_gaussian
from .truth import LogisticTruth, TruthFunction, bayes3_forward, bayes3_inverse, evaluate_parametric

KINDS = ("bayes3-demo", "gps-demo", "old-age", "cm-test", "cm-estimate", "cm-em", "confirm")


# --------------------------------------------------------------------------
# config handling
# --------------------------------------------------------------------------


def _need(config: dict, key: str, kind: str):
    if key not in config:
        raise ConfigError(f"{kind} config missing field {key!r}")
    return config[key]


def _support_from(config: dict, key: str, kind: str) -> Support:
    spec = _need(config, key, kind)
    if isinstance(spec, dict):
        for k in ("start", "stop"):
            if k not in spec:
                raise ConfigError(f"{kind} config field {key!r} missing {k!r}")
        return Support.integers(int(spec["start"]), int(spec["stop"]))
    return Support(np.asarray(spec, dtype=float))


def validate_config(config: dict) -> dict:
    """Check the schema of a scenario config; returns it unchanged.

    Raises:
        ConfigError: a required field is missing or malformed.
    """
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    kind = config.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"config field 'kind' must be one of {KINDS}, got {kind!r}")
    required = {
        "bayes3-demo": ["support", "prior", "posterior"],
        "gps-demo": ["support", "road_segments", "road_weight", "off_road_weight",
                     "circle_center", "stddev"],
        "old-age": ["support", "truth_rate", "truth_midpoint", "prior_rate",
                    "prior_midpoints"],
        "cm-test": ["z_support", "class_prior", "centers", "stddevs", "start_dividing"],
        "cm-estimate": ["z_support", "class_prior", "centers", "stddevs", "start_dividing"],
        "cm-em": ["support", "data_weights", "data_components", "start_weights",
                  "start_components"],
        "confirm": [],
    }[kind]
    for key in required:
        _need(config, key, kind)
    if kind == "confirm":
        by_channel = "sensitivity" in config and "specificity" in config
        by_counts = "positive_count" in config and "counter_count" in config
        if not (by_channel or by_counts):
            raise ConfigError(
                "confirm config needs either sensitivity+specificity or "
                "positive_count+counter_count"
            )
    if kind in ("cm-test", "cm-estimate"):
        if len(config["centers"]) != len(config["stddevs"]):
            raise ConfigError(f"{kind} config: centers and stddevs lengths differ")
        if len(config["class_prior"]) != len(config["centers"]):
            raise ConfigError(f"{kind} config: class_prior and centers lengths differ")
    if kind == "cm-em":
        if len(config["data_weights"]) != len(config["data_components"]):
            raise ConfigError("cm-em config: data_weights and data_components lengths differ")
        if len(config["start_weights"]) != len(config["start_components"]):
            raise ConfigError("cm-em config: start_weights and start_components lengths differ")
    return config


# --------------------------------------------------------------------------
# runners (one per kind); each returns (results, trace_rows)
# --------------------------------------------------------------------------


def _run_bayes3_demo(config: dict):
    sup = _support_from(config, "support", "bayes3-demo")
    prior_spec = config["prior"]
    prior = (
        Distribution.uniform(sup)
        if prior_spec == "uniform"
        else Distribution(sup, np.asarray(prior_spec, dtype=float))
    )
    posterior = Distribution(sup, np.asarray(config["posterior"], dtype=float))
    truth, T = bayes3_inverse(posterior, prior)
    back = bayes3_forward(truth, prior)
    results = {
        "truth_values": truth.t.tolist(),
        "logical_probability": T,
        "round_trip_error": float(np.abs(back.p - posterior.p).max()),
    }
    return results, None


def _run_gps_demo(config: dict):
    sup = _support_from(config, "support", "gps-demo")
    w = np.full(len(sup), float(config["off_road_weight"]))
    on_road = np.zeros(len(sup), dtype=bool)
    for lo, hi in config["road_segments"]:
        seg = (sup.points >= lo) & (sup.points <= hi)
        on_road |= seg
        w[seg] = float(config["road_weight"])
    prior = Distribution.from_weights(sup, w)
    center = float(config["circle_center"])
    truth = TruthFunction(
        sup, np.exp(-((sup.points - center) ** 2) / (2.0 * float(config["stddev"]) ** 2))
    )
    predicted = bayes3_forward(truth, prior)
    star = float(sup.points[int(np.argmax(predicted.p))])
    results = {
        "circle_center": center,
        "most_possible_position": star,
        "position_on_road": bool(on_road[int(np.argmax(predicted.p))]),
        "posterior": predicted.p.tolist(),
    }
    return results, None


def _run_old_age(config: dict):
    """Boundary for asserting an age label under shifting population densities.

    The density formula is a membership weight over a uniform age measure (a
    subprobability: the remaining mass belongs to nobody), so the label's
    logical probability is the grid mean of weight times truth.
    """
    sup = _support_from(config, "support", "old-age")
    truth = evaluate_parametric(
        LogisticTruth(float(config["truth_rate"]), float(config["truth_midpoint"])), sup
    )
    rate = float(config["prior_rate"])
    rows = []
    for c in config["prior_midpoints"]:
        w = 1.0 - 1.0 / (1.0 + np.exp(-rate * (sup.points - float(c))))
        coverage_T = float(np.mean(w * truth.t))
        boundary = positive_information_boundary(truth, coverage_T)
        rows.append(
            {
                "prior_midpoint": float(c),
                "logical_probability": coverage_T,
                "dividing_point": boundary,
            }
        )
    results = {"dividing_points": [r["dividing_point"] for r in rows]}
    return results, rows


def _run_cm(config: dict, kind: str):
    z_sup = _support_from(config, "z_support", kind)
    k = len(config["class_prior"])
    cls_sup = Support(np.arange(k, dtype=float))
    prior = Distribution(cls_sup, np.asarray(config["class_prior"], dtype=float))
    obs = GaussianObservation(
        cls_sup, z_sup, tuple(zip(config["centers"], config["stddevs"]))
    )
    start = Partition(z_sup, tuple(float(b) for b in config["start_dividing"]))
    part, trace = cm_iterate(obs, prior, start, max_iters=int(config.get("max_iters", 50)))
    rows = [
        {
            "iter": r.iteration,
            **{f"z{i+1}": dp for i, dp in enumerate(r.dividing_points)},
            "G_bits": r.objective_bits,
            "R_bits": r.shannon_bits,
        }
        for r in trace.records
    ]
    if trace.refined_boundaries:
        rows.append(
            {
                "iter": len(trace.records) + 1,
                **{f"z{i+1}": b for i, b in enumerate(trace.refined_boundaries)},
                "G_bits": trace.records[-1].objective_bits,
                "R_bits": trace.records[-1].shannon_bits,
            }
        )
    results = {
        "dividing_points": [float(v) for v in part.grid_dividing_points()],
        "boundaries": [float(b) for b in part.boundaries],
        "iterations": trace.iterations,
        "dividing_history": [list(dp) for dp in trace.dividing_history()],
        "diagnostics": list(trace.diagnostics),
    }
    return results, rows


def _run_cm_em(config: dict):
    sup = _support_from(config, "support", "cm-em")
    data_w = np.asarray(config["data_weights"], dtype=float)
    comps = [discretized_gaussian(sup, c, d).p for c, d in config["data_components"]]
    data = Distribution(sup, data_w @ np.vstack(comps))
    start = MixtureParams(
        np.asarray(config["start_weights"], dtype=float),
        tuple((float(c), float(d)) for c, d in config["start_components"]),
    )
    params, trace = cm_em_run(
        start,
        data,
        stop_divergence=float(config.get("stop_divergence", 0.001)),
        max_iters=int(config.get("max_iters", 50)),
    )
    k = params.n_components
    rows = []
    for r in trace.records:
        row = {"iter": r.iteration}
        row.update({f"c{j+1}": r.params.components[j][0] for j in range(k)})
        row.update({f"d{j+1}": r.params.components[j][1] for j in range(k)})
        row.update({f"w{j+1}": float(r.params.weights[j]) for j in range(k)})
        row.update(
            {
                "R_bits": r.shannon_bits,
                "G_bits": r.semantic_bits,
                "KL_bits": r.divergence_bits,
                "inner_iters": r.inner_iterations,
            }
        )
        rows.append(row)
    results = {
        "centers": params.centers().tolist(),
        "stddevs": params.stddevs().tolist(),
        "weights": params.weights.tolist(),
        "iterations": len(trace.records),
        "final_divergence_bits": trace.records[-1].divergence_bits,
        "diagnostics": list(trace.diagnostics),
    }
    return results, rows


def _run_confirm(config: dict):
    results = {}
    if "sensitivity" in config:
        tc = TestChannel(float(config["sensitivity"]), float(config["specificity"]))
        b1, b0 = optimal_disbelief(tc)
        lr_plus, lr_minus = likelihood_ratios(tc)
        results.update(
            {
                "b1_prime": b1,
                "b0_prime": b0,
                "lr_plus": lr_plus,
                "lr_minus": lr_minus,
            }
        )
        if "prevalence" in config:
            prev = float(config["prevalence"])
            prior = Distribution(Support(np.array([0.0, 1.0])), np.array([1 - prev, prev]))
            post_pos = predict_with_belief(b1, b0, prior, 1)
            post_neg = predict_with_belief(b1, b0, prior, 0)
            check_pos, _ = bayes2_posterior(tc.channel(), prior, 1)
            results.update(
                {
                    "prevalence": prev,
                    "post_test_positive": post_pos.p.tolist(),
                    "post_test_negative": post_neg.p.tolist(),
                    "bayes_check_error": float(np.abs(post_pos.p - check_pos.p).max()),
                }
            )
    if "positive_count" in config:
        res = confirmation_from_counts(
            int(config["positive_count"]), int(config["counter_count"])
        )
        results.update(res.to_dict())
    return results, None


def run_config(config: dict):
    """Dispatch a validated config to its runner.

    Returns:
        (results, trace_rows); trace_rows is None for scenarios without an
        iteration trace.

    Raises:
        ConfigError: schema violation.
        ScenarioError: the underlying algorithm failed; the cause chains.
    """
    validate_config(config)
    kind = config["kind"]
    try:
        if kind == "bayes3-demo":
            return _run_bayes3_demo(config)
        if kind == "gps-demo":
            return _run_gps_demo(config)
        if kind == "old-age":
            return _run_old_age(config)
        if kind in ("cm-test", "cm-estimate"):
            return _run_cm(config, kind)
        if kind == "cm-em":
            return _run_cm_em(config)
        return _run_confirm(config)
    except ConfigError:
        raise
    except SemchanError as exc:
        raise ScenarioError(f"{kind} scenario failed: {exc}") from exc


# --------------------------------------------------------------------------
# built-in reproduction catalog
# --------------------------------------------------------------------------


def _approx(name, value, target, tol):
    if abs(value - target) > tol:
        return [f"{name}: got {value!r}, want {target} +/- {tol}"]
    return []


def _exact(name, value, target):
    if value != target:
        return [f"{name}: got {value!r}, want exactly {target!r}"]
    return []


def _check_example1(res: dict) -> list:
    fails = _exact("dividing_points", res["dividing_points"], [54.0])
    fails += _exact("dividing_history[0]", res["dividing_history"][0], [53.0])
    fails += _exact("dividing_history[1]", res["dividing_history"][1], [54.0])
    if res["iterations"] > 3:
        fails.append(f"iterations: got {res['iterations']}, want <= 3")
    return fails


def _check_example2(limit):
    def check(res: dict) -> list:
        fails = _exact("dividing_points", res["dividing_points"], [35.0, 66.0])
        if res["iterations"] > limit:
            fails.append(f"iterations: got {res['iterations']}, want <= {limit}")
        return fails

    return check


def _check_old_age(res: dict) -> list:
    fails = []
    for got, want in zip(res["dividing_points"], (48.0, 54.0, 57.0)):
        fails += _approx("dividing_point", got, want, 2.0)
    return fails


def _check_mixture(res: dict) -> list:
    fails = []
    fails += _approx("center_1", res["centers"][0], 38.0, 1.0)
    fails += _approx("center_2", res["centers"][1], 65.8, 1.0)
    fails += _approx("stddev_1", res["stddevs"][0], 9.3, 1.0)
    fails += _approx("stddev_2", res["stddevs"][1], 11.5, 1.0)
    fails += _approx("weight_1", res["weights"][0], 0.134, 0.02)
    if res["iterations"] > 30:
        fails.append(f"iterations: got {res['iterations']}, want <= 30")
    if res["final_divergence_bits"] >= 0.001:
        fails.append(f"final divergence {res['final_divergence_bits']} not < 0.001")
    return fails


def _check_confirm_counts(res: dict) -> list:
    return _exact("b_star", res["b_star"], -0.5) + _exact(
        "confidence_level", res["confidence_level"], 1.0 / 3.0
    )


def _check_confirm_equal(res: dict) -> list:
    return _exact("b_star", res["b_star"], 0.0) + _exact(
        "confidence_level", res["confidence_level"], 0.5
    )


# Expected values tagged by provenance: "reported" values are quoted from the
# worked examples this toolkit reproduces; "derived" values follow from the
# definitions and were computed independently.
REPRODUCTIONS: dict[str, dict] = {
    "example1": {
        "title": "Two-class test: boundary settles at 54 via 53",
        "source": "reported",
        "config": {
            "kind": "cm-test",
            "z_support": {"start": 1, "stop": 100},
            "class_prior": [0.8, 0.2],
            "centers": [30, 70],
            "stddevs": [15, 10],
            "start_dividing": [50],
        },
        "check": _check_example1,
    },
    "example2-good": {
        "title": "Three-class estimation from a good start: (35, 66) in <= 4",
        "source": "reported",
        "config": {
            "kind": "cm-estimate",
            "z_support": {"start": 1, "stop": 100},
            "class_prior": [0.5, 0.35, 0.15],
            "centers": [20, 50, 80],
            "stddevs": [15, 10, 10],
            "start_dividing": [50, 60],
        },
        "check": _check_example2(4),
    },
    "example2-bad": {
        "title": "Three-class estimation from a bad start: same point in <= 11",
        "source": "reported",
        "config": {
            "kind": "cm-estimate",
            "z_support": {"start": 1, "stop": 100},
            "class_prior": [0.5, 0.35, 0.15],
            "centers": [20, 50, 80],
            "stddevs": [15, 10, 10],
            "start_dividing": [9, 20],
        },
        "check": _check_example2(11),
    },
    "old-age-table1": {
        "title": "Age-label boundary shifts with the population density",
        "source": "reported",
        "config": {
            "kind": "old-age",
            "support": {"start": 0, "stop": 100},
            "truth_rate": 0.2,
            "truth_midpoint": 75,
            "prior_rate": 0.15,
            "prior_midpoints": [50, 60, 70],
        },
        "check": _check_old_age,
    },
    "mixture-table2": {
        "title": "Two-component mixture recovery from a symmetric start",
        "source": "reported",
        "config": {
            "kind": "cm-em",
            "support": {"start": 1, "stop": 100},
            "data_weights": [0.1, 0.9],
            "data_components": [[35, 8], [65, 12]],
            "start_weights": [0.5, 0.5],
            "start_components": [[30, 8], [70, 8]],
            "stop_divergence": 0.001,
            "max_iters": 30,
        },
        "check": _check_mixture,
    },
    "confirm-counts": {
        "title": "Twice as many counterexamples: belief -0.5",
        "source": "reported",
        "config": {"kind": "confirm", "positive_count": 50, "counter_count": 100},
        "check": _check_confirm_counts,
    },
    "confirm-equal": {
        "title": "Equal counts: belief 0, confidence 0.5",
        "source": "reported",
        "config": {"kind": "confirm", "positive_count": 75, "counter_count": 75},
        "check": _check_confirm_equal,
    },
}


def list_reproductions() -> list[dict]:
    """The embedded reproduction catalog (id, title, provenance, kind)."""
    return [
        {"id": rid, "title": r["title"], "source": r["source"], "kind": r["config"]["kind"]}
        for rid, r in REPRODUCTIONS.items()
    ]


# --------------------------------------------------------------------------
# deterministic file output
# --------------------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".9g")
    return str(value)


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_trace_csv(path: str, rows: list[dict]) -> None:
    """Trace rows as CSV: header row, '.' decimals, LF endings, 9 significant
    digits on floats; written via temp-file rename."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(rows[0].keys())
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(k, "")) for k in header])
    _atomic_write(path, buf.getvalue())


def _round_floats(obj):
    if isinstance(obj, float):
        return float(format(obj, ".9g"))
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def write_json(path: str, payload) -> None:
    """JSON data file with floats at 9 significant digits, LF endings."""
    _atomic_write(path, json.dumps(_round_floats(payload), indent=2) + "\n")
