"""Lossless JSON forms and deterministic CSV writers.

Every domain object round-trips through plain JSON-compatible dicts
(sufficient statistics only, never sample paths) so models can live in
files and travel over HTTP. CSV output uses '.' as the decimal mark
regardless of locale and prints 12 significant digits; rerunning the
same configuration reproduces the bytes exactly, apart from an optional
timestamp header line.
"""

from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .belief import (
    Belief,
    Bernoulli,
    BetaBernoulli,
    DiscretePosterior,
    ExponentialMean,
    FiniteTable,
    InvGammaExp,
    OfferFamily,
)
from .house_selling import HouseModel, ReservationTable
from .stopping_core import PartiallyObservableModel, PolicyTree, ValueReport
from .utility import DiscreteDist, UtilitySpec

SIG_DIGITS = 12


def format_number(x) -> str:
    """Fixed-locale numeric text: 12 significant digits, '.' decimal."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.{SIG_DIGITS}g}"


def canonical_json(obj) -> str:
    """Key-sorted, whitespace-free JSON used for hashing and on-disk
    canonical forms."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def model_hash(obj) -> str:
    """Stable sha256 of a JSON-compatible object for report provenance."""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# Utilities and discrete distributions
# ---------------------------------------------------------------------------

def utility_to_json(u: UtilitySpec) -> dict:
    out = {"family": u.family}
    if u.family == "exponential":
        out["gamma"] = u.gamma
    elif u.family == "power":
        out["exponent"] = u.exponent
        out["shift"] = u.shift
    elif u.family == "log":
        out["shift"] = u.shift
    return out


def utility_from_json(data: dict) -> UtilitySpec:
    family = data.get("family")
    if family == "exponential":
        return UtilitySpec("exponential", gamma=float(data["gamma"]))
    if family == "power":
        return UtilitySpec(
            "power",
            exponent=float(data["exponent"]),
            shift=float(data.get("shift", 0.0)),
        )
    if family == "log":
        return UtilitySpec("log", shift=float(data.get("shift", 0.0)))
    if family == "linear":
        return UtilitySpec("linear")
    raise ValueError(f"unknown utility family {family!r}")


def discrete_dist_to_json(dist: DiscreteDist) -> dict:
    return {"atoms": list(dist.atoms), "weights": list(dist.weights)}


def discrete_dist_from_json(data: dict) -> DiscreteDist:
    return DiscreteDist(
        atoms=tuple(float(a) for a in data["atoms"]),
        weights=tuple(float(w) for w in data["weights"]),
    )


# ---------------------------------------------------------------------------
# Offer families and beliefs
# ---------------------------------------------------------------------------

def offers_to_json(offers: OfferFamily) -> dict:
    if isinstance(offers, Bernoulli):
        return {"kind": "bernoulli"}
    if isinstance(offers, ExponentialMean):
        return {"kind": "exponential_mean"}
    if isinstance(offers, FiniteTable):
        return {
            "kind": "finite_table",
            "offer_atoms": list(offers.offer_atoms),
            "probs_per_theta": [list(row) for row in offers.probs_per_theta],
        }
    raise TypeError(f"unknown offer family {type(offers).__name__}")


def offers_from_json(data: dict) -> OfferFamily:
    kind = data.get("kind")
    if kind == "bernoulli":
        return Bernoulli()
    if kind == "exponential_mean":
        return ExponentialMean()
    if kind == "finite_table":
        return FiniteTable(
            offer_atoms=tuple(float(a) for a in data["offer_atoms"]),
            probs_per_theta=tuple(
                tuple(float(p) for p in row) for row in data["probs_per_theta"]
            ),
        )
    raise ValueError(f"unknown offer family kind {kind!r}")


def belief_to_json(mu: Belief) -> dict:
    if isinstance(mu, BetaBernoulli):
        return {"kind": "beta_bernoulli", "alpha": mu.alpha, "beta": mu.beta}
    if isinstance(mu, InvGammaExp):
        return {"kind": "inv_gamma_exp", "a": mu.a, "b": mu.b, "s": mu.s, "n": mu.n}
    if isinstance(mu, DiscretePosterior):
        return {
            "kind": "grid",
            "theta_grid": list(mu.theta_grid),
            "weights": list(mu.weights),
            "likelihood": offers_to_json(mu.likelihood),
        }
    raise TypeError(f"unknown belief type {type(mu).__name__}")


def belief_from_json(data: dict) -> Belief:
    kind = data.get("kind")
    if kind == "beta_bernoulli":
        return BetaBernoulli(float(data["alpha"]), float(data["beta"]))
    if kind == "inv_gamma_exp":
        return InvGammaExp(
            float(data["a"]),
            float(data["b"]),
            float(data.get("s", 0.0)),
            int(data.get("n", 0)),
        )
    if kind == "grid":
        return DiscretePosterior(
            theta_grid=tuple(float(t) for t in data["theta_grid"]),
            weights=tuple(float(w) for w in data["weights"]),
            likelihood=offers_from_json(data["likelihood"]),
        )
    raise ValueError(f"unknown belief kind {kind!r}")


# ---------------------------------------------------------------------------
# House models and general partially observable models
# ---------------------------------------------------------------------------

def house_model_to_json(model: HouseModel) -> dict:
    return {
        "offers": offers_to_json(model.offers),
        "prior": belief_to_json(model.prior),
        "cost": model.cost,
        "utility": utility_to_json(model.utility),
        "horizon": model.horizon,
    }


def house_model_from_json(data: dict) -> HouseModel:
    horizon = data.get("horizon")
    if horizon is not None:
        horizon = int(horizon)
    return HouseModel(
        offers=offers_from_json(data["offers"]),
        prior=belief_from_json(data["prior"]),
        cost=float(data["cost"]),
        utility=utility_from_json(data["utility"]),
        horizon=horizon,
    )


def _label_to_json(label):
    return label if isinstance(label, (str, int, float)) else str(label)


def po_model_to_json(model: PartiallyObservableModel) -> dict:
    return {
        "observable_states": [_label_to_json(s) for s in model.observable_states],
        "hidden_states": [_label_to_json(s) for s in model.hidden_states],
        "kernel": np.asarray(model.kernel_array).tolist(),
        "run_reward": list(model.run_reward),
        "stop_reward": list(model.stop_reward),
        "prior_weights": list(model.prior_weights),
        "start_state": _label_to_json(model.start_state),
    }


def po_model_from_json(data: dict) -> PartiallyObservableModel:
    return PartiallyObservableModel(
        observable_states=tuple(data["observable_states"]),
        hidden_states=tuple(data["hidden_states"]),
        kernel=data["kernel"],
        run_reward=tuple(float(r) for r in data["run_reward"]),
        stop_reward=tuple(float(r) for r in data["stop_reward"]),
        prior_weights=tuple(float(w) for w in data["prior_weights"]),
        start_state=data["start_state"],
    )


# ---------------------------------------------------------------------------
# Reports, trees, and tables
# ---------------------------------------------------------------------------

def value_report_to_json(report: ValueReport) -> dict:
    stage_values = [
        {
            "stage": stage,
            "state": _label_to_json(state),
            "belief": list(belief),
            "accrued": accrued,
            "value": value,
        }
        for (stage, state, belief, accrued), value in sorted(
            report.stage_values.items(), key=repr
        )
    ]
    return {
        "value": report.value,
        "integrability_bound": report.integrability_bound,
        "node_count": report.node_count,
        "stage_values": stage_values,
    }


def stage_values_to_csv(report: ValueReport, timestamp: str | None = None) -> str:
    lines = []
    if timestamp is not None:
        lines.append(f"# generated {timestamp}")
    lines.append("stage,state,belief,accrued,value")
    for (stage, state, belief, accrued), value in sorted(
        report.stage_values.items(), key=repr
    ):
        belief_txt = "|".join(format_number(w) for w in belief)
        lines.append(
            f"{stage},{_label_to_json(state)},{belief_txt},"
            f"{format_number(accrued)},{format_number(value)}"
        )
    return "\n".join(lines) + "\n"


def policy_tree_to_json(tree: PolicyTree) -> dict:
    def node_to_json(node):
        return {
            "stage": node.stage,
            "state": _label_to_json(node.state),
            "stop_value": node.stop_value,
            "continue_value": node.continue_value,
            "decision": node.decision,
            "value": node.value,
            "children": {
                str(_label_to_json(label)): node_to_json(child)
                for label, child in node.children.items()
            },
        }

    return {"horizon": tree.horizon, "root": node_to_json(tree.root)}


def _key_to_text(key) -> str:
    if isinstance(key, tuple):
        return ":".join(_key_to_text(k) for k in key)
    if isinstance(key, float):
        return format_number(key)
    return str(key)


def reservation_table_to_json(table: ReservationTable) -> dict:
    return {
        "kind": table.kind,
        "horizon": table.horizon,
        "cost": table.model.cost,
        "utility": utility_to_json(table.model.utility),
        "rows": [
            {"stage": stage, "key": _key_to_text(key), "level": level}
            for stage, key, level in table.rows()
        ],
    }


def reservation_table_to_csv(
    table: ReservationTable, timestamp: str | None = None
) -> str:
    lines = []
    if timestamp is not None:
        lines.append(f"# generated {timestamp}")
    lines.append("stage,belief_key,level")
    for stage, key, level in table.rows():
        lines.append(f"{stage},{_key_to_text(key)},{format_number(level)}")
    return "\n".join(lines) + "\n"


def bands_to_csv(bands, timestamp: str | None = None) -> str:
    """Rejection-count band table as CSV rows
    (band lower gamma, band upper gamma, count)."""
    lines = []
    if timestamp is not None:
        lines.append(f"# generated {timestamp}")
    lines.append("band_lo_gamma,band_hi_gamma,rejection_count")
    for lo, hi, count in bands:
        lines.append(f"{format_number(lo)},{format_number(hi)},{count}")
    return "\n".join(lines) + "\n"


def bands_to_json(bands) -> dict:
    return {
        "bands": [
            {"gamma_lo": lo, "gamma_hi": hi, "rejection_count": count}
            for lo, hi, count in bands
        ]
    }


def mc_report_to_json(estimate, model_json: dict) -> dict:
    """Monte Carlo estimate with seed and model hash for provenance."""
    return {
        "mean": estimate.mean,
        "stderr": estimate.stderr,
        "samples": estimate.samples,
        "seed": estimate.seed,
        "model_hash": model_hash(model_json),
    }


def brute_force_report_to_json(report, model_json: dict) -> dict:
    return {
        "value": report.value,
        "rules_examined": report.rules_examined,
        "enumerated": report.enumerated,
        "path_count": report.path_count,
        "model_hash": model_hash(model_json),
    }
