"""Experiment configuration files: parsing, static validation, dispatch.

Configs are JSON objects. Every violation is reported with the offending
field name; validation is complete before any computation starts, and
unknown keys are rejected so typos cannot silently change an experiment.
A noiseless run is requested through the explicit ``include_noiseless`` /
``noiseless`` flags, never by smuggling a sentinel into the dB list.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from . import harness, scenario
from .alignment import _SEARCH_SPACE_GUARD, default_probe_triple
from .errors import ConfigError
from .estimation import probe_triple_determinant

EXPERIMENTS = ("convergence", "snr_sweep", "discrete", "rmse", "harvest")

_COMMON_KEYS = {
    "experiment": str,
    "trials": int,
    "seed": int,
    "output_dir": str,
    "format": str,
}

# Per-experiment keys on top of the common ones: name -> expected kind.
_EXPERIMENT_KEYS = {
    "convergence": {
        "n_elements": int,
        "probes": int,
        "sweeps": int,
        "snr_db": list,
        "include_noiseless": bool,
        "methods": list,
        "random_sweeps": int,
        "grid_step": int,
    },
    "snr_sweep": {
        "n_elements": int,
        "probes_list": list,
        "snr_db": list,
        "sweeps": int,
        "random_sweeps": int,
    },
    "discrete": {
        "n_elements": int,
        "omega": list,
        "sweeps": int,
        "random_sweeps": int,
        "probe_triple": list,
        "snr_db": list,
        "noiseless": bool,
        "grid_step": int,
    },
    "rmse": {
        "thetas": list,
        "z_mags": list,
        "snr_db": list,
        "phi": list,
        "include_ml": bool,
    },
    "harvest": {
        "element_counts": list,
        "snr_db": list,
        "geometry": dict,
        "harvester": dict,
        "probes": int,
        "sweeps": int,
        "random_sweeps": int,
    },
}

_GEOMETRY_KEYS = {
    "wavelength": (int, float),
    "tx_position": list,
    "rx_position": list,
    "transmit_power": (int, float),
}

_HARVESTER_KEYS = {
    "steepness": (int, float),
    "turn_on": (int, float),
    "p_sat": (int, float),
}

_REQUIRED = {
    "convergence": ("n_elements", "probes", "sweeps"),
    "snr_sweep": ("n_elements", "probes_list", "snr_db"),
    "discrete": ("omega",),
    "rmse": ("thetas", "snr_db"),
    "harvest": ("element_counts", "snr_db"),
}


def load_config(path) -> dict:
    """Parse a JSON config file; raises ConfigError with line diagnostics."""
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    return data


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _check_block(block, allowed, prefix, problems):
    for key, value in block.items():
        if key not in allowed:
            problems.append(f"{prefix}{key}: unknown key")
            continue
        expected = allowed[key]
        if expected is int:
            if not isinstance(value, int) or isinstance(value, bool):
                problems.append(f"{prefix}{key}: expected an integer")
        elif expected is bool:
            if not isinstance(value, bool):
                problems.append(f"{prefix}{key}: expected a boolean")
        elif expected is str:
            if not isinstance(value, str):
                problems.append(f"{prefix}{key}: expected a string")
        elif expected is list:
            if not isinstance(value, list):
                problems.append(f"{prefix}{key}: expected a list")
        elif expected is dict:
            if not isinstance(value, dict):
                problems.append(f"{prefix}{key}: expected an object")
        else:  # tuple of numeric types
            if not _is_number(value):
                problems.append(f"{prefix}{key}: expected a number")


def validate_config(data: dict) -> list[str]:
    """Full static validation; returns every violation as 'field: message'."""
    problems: list[str] = []
    experiment = data.get("experiment")
    if experiment is None:
        problems.append("experiment: required")
        return problems
    if experiment not in EXPERIMENTS:
        problems.append(
            f"experiment: must be one of {', '.join(EXPERIMENTS)} (got {experiment!r})"
        )
        return problems

    allowed = dict(_COMMON_KEYS)
    allowed.update(_EXPERIMENT_KEYS[experiment])
    _check_block(data, allowed, "", problems)

    for key in ("trials", "seed") + _REQUIRED[experiment]:
        if key not in data:
            problems.append(f"{key}: required")
    if problems:
        return problems

    if data["trials"] < 1:
        problems.append("trials: must be >= 1")
    if data.get("format", "csv") not in ("csv", "json"):
        problems.append("format: must be 'csv' or 'json'")

    def check_snr_list(values, field="snr_db"):
        for entry in values:
            if not _is_number(entry):
                problems.append(f"{field}: entries must be numbers (dB); use the "
                                "noiseless flag for the noiseless run")
                return

    if experiment == "convergence":
        if data["n_elements"] < 1:
            problems.append("n_elements: must be >= 1")
        if data["probes"] < 3:
            problems.append("probes: L >= 3 is required by the estimator")
        if data["sweeps"] < 1:
            problems.append("sweeps: must be >= 1")
        check_snr_list(data.get("snr_db", []))
        if not data.get("snr_db") and not data.get("include_noiseless", False):
            problems.append("snr_db: need at least one SNR or include_noiseless")
        for method in data.get("methods", ["dft", "random"]):
            if method not in ("closed_form", "linear", "dft", "random"):
                problems.append(f"methods: unknown method {method!r}")

    elif experiment == "snr_sweep":
        if data["n_elements"] < 1:
            problems.append("n_elements: must be >= 1")
        for probes in data["probes_list"]:
            if not isinstance(probes, int) or probes < 3:
                problems.append("probes_list: every L must be an integer >= 3")
                break
        check_snr_list(data["snr_db"])
        if not data["snr_db"]:
            problems.append("snr_db: must not be empty")

    elif experiment == "discrete":
        n_elements = data.get("n_elements", 10)
        if n_elements < 1:
            problems.append("n_elements: must be >= 1")
        omega = data["omega"]
        if not all(_is_number(v) for v in omega):
            problems.append("omega: entries must be numbers")
        else:
            if len(omega) < 3:
                problems.append("omega: needs at least 3 phase values")
            if any(v < 0 or v >= 2 * math.pi for v in omega):
                problems.append("omega: values must lie in [0, 2pi)")
            if len(set(omega)) != len(omega):
                problems.append("omega: values must be pairwise distinct")
            if len(omega) >= 3 and float(len(omega)) ** n_elements > _SEARCH_SPACE_GUARD:
                problems.append(
                    "omega: |omega|^n_elements exceeds the exhaustive-oracle guard"
                )
            triple = data.get("probe_triple")
            if triple is not None:
                if len(triple) != 3 or not all(_is_number(v) for v in triple):
                    problems.append("probe_triple: expected three numbers")
                else:
                    if not all(
                        any(math.isclose(v, w, abs_tol=1e-12) for w in omega)
                        for v in triple
                    ):
                        problems.append("probe_triple: members must belong to omega")
                    elif abs(probe_triple_determinant(*triple)) <= 1e-9:
                        problems.append(
                            "probe_triple: inadmissible (sin(p1-p3) + sin(p2-p1) "
                            "+ sin(p3-p2) = 0 gives a singular design)"
                        )
            elif len(omega) >= 3 and not problems:
                try:
                    default_probe_triple(np.asarray(omega, dtype=float))
                except ConfigError:
                    problems.append("omega: contains no admissible probe triple")
        if data.get("snr_db") is not None:
            check_snr_list(data["snr_db"])
            if len(data["snr_db"]) > 1:
                problems.append("snr_db: the discrete experiment takes one SNR")

    elif experiment == "rmse":
        if not data["thetas"]:
            problems.append("thetas: must not be empty")
        elif not all(_is_number(v) for v in data["thetas"]):
            problems.append("thetas: entries must be numbers")
        check_snr_list(data["snr_db"])
        if not data["snr_db"]:
            problems.append("snr_db: must not be empty")
        z_mags = data.get("z_mags")
        if z_mags is not None and not all(_is_number(v) and v > 0 for v in z_mags):
            problems.append("z_mags: entries must be positive numbers")
        phi = data.get("phi")
        if phi is not None:
            if len(phi) < 3:
                problems.append("phi: L >= 3 measurement phases required")
            elif not all(_is_number(v) for v in phi):
                problems.append("phi: entries must be numbers")

    elif experiment == "harvest":
        counts = data["element_counts"]
        for count in counts:
            if not isinstance(count, int) or count < 1:
                problems.append("element_counts: entries must be positive integers")
                break
            side = math.isqrt(count)
            if side * side != count:
                problems.append(
                    f"element_counts: {count} is not a perfect square grid"
                )
        check_snr_list(data["snr_db"])
        if not data["snr_db"]:
            problems.append("snr_db: must not be empty")
        if data.get("probes", 3) < 3:
            problems.append("probes: L >= 3 is required by the estimator")
        geometry = data.get("geometry", {})
        _check_block(geometry, _GEOMETRY_KEYS, "geometry.", problems)
        for key in ("tx_position", "rx_position"):
            pos = geometry.get(key)
            if pos is not None and (
                len(pos) != 3 or not all(_is_number(v) for v in pos)
            ):
                problems.append(f"geometry.{key}: expected a 3-vector of numbers")
        if geometry.get("wavelength", 1.0) <= 0:
            problems.append("geometry.wavelength: must be positive")
        if geometry.get("transmit_power", 1.0) <= 0:
            problems.append("geometry.transmit_power: must be positive")
        harvester = data.get("harvester", {})
        _check_block(harvester, _HARVESTER_KEYS, "harvester.", problems)
        for key, value in harvester.items():
            if _is_number(value) and value <= 0:
                problems.append(f"harvester.{key}: must be positive")

    return problems


def run_experiment(data: dict) -> harness.ExperimentResult:
    """Dispatch a validated config to the harness."""
    experiment = data["experiment"]
    trials = data["trials"]
    seed = data["seed"]

    if experiment == "convergence":
        snr_list = list(data.get("snr_db", []))
        if data.get("include_noiseless", False):
            snr_list.append(None)
        return harness.convergence_experiment(
            methods=data.get("methods", ["dft", "random"]),
            n_elements=data["n_elements"],
            probes=data["probes"],
            sweeps=data["sweeps"],
            snr_db_list=snr_list,
            trials=trials,
            seed=seed,
            random_sweeps=data.get("random_sweeps"),
            grid_step=data.get("grid_step", 10),
        )
    if experiment == "snr_sweep":
        return harness.snr_sweep(
            n_elements=data["n_elements"],
            probes_list=data["probes_list"],
            snr_db_list=data["snr_db"],
            trials=trials,
            seed=seed,
            sweeps=data.get("sweeps", 10),
            random_sweeps=data.get("random_sweeps", 30),
        )
    if experiment == "discrete":
        noiseless = data.get("noiseless", data.get("snr_db") is None)
        snr_db = None if noiseless else data["snr_db"][0]
        return harness.discrete_experiment(
            omega=np.asarray(data["omega"], dtype=float),
            trials=trials,
            seed=seed,
            n_elements=data.get("n_elements", 10),
            sweeps=data.get("sweeps", 20),
            random_sweeps=data.get("random_sweeps"),
            snr_db=snr_db,
            grid_step=data.get("grid_step", 5),
        )
    if experiment == "rmse":
        kwargs = {}
        if data.get("z_mags") is not None:
            kwargs["z_mags"] = tuple(data["z_mags"])
        if data.get("phi") is not None:
            kwargs["phi"] = np.asarray(data["phi"], dtype=float)
        return harness.rmse_study(
            thetas=data["thetas"],
            snr_db_list=data["snr_db"],
            trials=trials,
            seed=seed,
            include_ml=data.get("include_ml", True),
            **kwargs,
        )
    if experiment == "harvest":
        geometry = data.get("geometry", {})
        harvester_block = data.get("harvester")
        harvester = (
            scenario.HarvesterModel(**harvester_block) if harvester_block else None
        )
        return harness.harvest_experiment(
            element_counts=data["element_counts"],
            snr_db_list=data["snr_db"],
            trials=trials,
            seed=seed,
            wavelength=geometry.get("wavelength", 0.125),
            tx_position=geometry.get("tx_position", (0.0, -3.0, 4.0)),
            rx_position=geometry.get("rx_position", (0.0, 1.0, 2.0)),
            transmit_power=geometry.get("transmit_power", 1.0),
            probes=data.get("probes", 3),
            sweeps=data.get("sweeps", 10),
            random_sweeps=data.get("random_sweeps", 30),
            harvester=harvester,
        )
    raise ConfigError(f"experiment: unknown experiment {experiment!r}")
