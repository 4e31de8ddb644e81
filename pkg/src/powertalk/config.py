"""Plain-text configuration files: one dotted key per line, unknown keys error.

Format::

    # comment
    feedback.n_bits = 8
    sweep.values    = 10, 20, 30, 40, 50

Values are parsed per key (int, float, bool, string token, or comma list).
CLI flags override config values, which override built-in defaults.
"""

from __future__ import annotations

import os

from .errors import ConfigError
from .experiments import FAMILY_SWEEP_VARS, ExperimentConfig

_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _to_bool(s: str) -> bool:
    try:
        return _BOOL[s.strip().lower()]
    except KeyError:
        raise ConfigError(f"expected a boolean, got '{s}'") from None


def _to_float_list(s: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in s.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated number list, got '{s}'") from None


def _to_variants(s: str) -> tuple[tuple[int, float], ...]:
    out = []
    for tok in s.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            bits, eps = tok.split(":")
            out.append((int(bits), float(eps)))
        except ValueError:
            raise ConfigError(f"expected N:epsilon pairs, got '{tok}'") from None
    return tuple(out)


def _choice(*options):
    def parse(s: str) -> str:
        if s not in options:
            raise ConfigError(f"expected one of {options}, got '{s}'")
        return s
    return parse


# key -> (ExperimentConfig field, parser)
KEY_REGISTRY = {
    "scenario.kind": ("scenario_kind", _choice("sir", "grid")),
    "scenario.s": ("S", int),
    "scenario.snr_db": ("snr_db", float),
    "scenario.sir_db": ("sir_db", float),
    "feedback.n_bits": ("n_bits", int),
    "feedback.epsilon": ("epsilon", float),
    "feedback.range_db_lo": ("range_db_lo", float),
    "feedback.range_db_hi": ("range_db_hi", float),
    "feedback.variants": ("variants", _to_variants),
    "phase1.estimator": ("estimator", _choice("lspd", "mmsepd")),
    "phase1.training": ("training", _choice("diagonal",)),
    "phase1.mc_samples": ("mc_samples", int),
    "phase1.perfect": ("phase1_perfect", _to_bool),
    "phase2.quantizer": ("quantizer", _choice("meq", "alma", "lma")),
    "phase2.n_bits": ("n_bits_ii", int),
    "phase2.levels": ("levels", int),
    "phase2.mode": ("mode", _choice("simultaneous", "solo")),
    "phase2.alma.max_iter": ("alma_max_iter", int),
    "phase2.alma.delta": ("alma_delta", float),
    "phase2.pi_trials": ("pi_trials", int),
    "phase2.perfect": ("phase2_perfect", _to_bool),
    "phase3.utility": ("utility", _choice("sum_rate", "sum_ee")),
    "phase3.ee_c": ("ee_c", float),
    "phase3.n_grid": ("n_grid", int),
    "phase3.max_rounds": ("max_rounds", int),
    "phase3.brd_mode": ("brd_mode", _choice("per_transmitter", "centralized")),
    "experiment.trials": ("n_trials", int),
    "experiment.seed": ("seed", int),
    "experiment.sir_points": ("sir_points", _to_float_list),
    "sweep.variable": ("sweep_variable", str),
    "sweep.values": ("sweep_values", _to_float_list),
    "quantizer.prior_mean": ("prior_mean", float),  # design-quantizer only
    "experiment.threads": ("threads", int),  # CLI worker cap
}

FAMILY_DEFAULT_SWEEPS = {
    "phase1-esnr": (0.0, 2.0, 4.0, 6.0, 8.0, 10.0),
    "phase1-loss": (0.0, 2.0, 4.0, 6.0, 8.0, 10.0),
    "phase2-esnr": (0.0, 2.0, 4.0, 6.0, 8.0, 10.0),
    "phase2-loss": (0.0, 2.0, 4.0, 6.0, 8.0, 10.0),
    "phase2-sweep-bits": (1.0, 2.0, 3.0, 4.0, 5.0, 6.0),
    "phase2-sweep-slots": (2.0, 4.0, 6.0, 8.0, 10.0, 12.0),
    "global-sumrate": (10.0, 20.0, 30.0, 40.0, 50.0),
}


def read_key_values(path: str) -> dict[str, str]:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    out: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in KEY_REGISTRY:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
            out[key] = value
    return out


def build_experiment_config(
    family: str, path: str | None = None, overrides: dict | None = None
) -> tuple[ExperimentConfig, dict]:
    """Parse the file (if any), apply overrides, and fill family defaults.

    Returns (config, extras) where extras holds keys that are not
    ExperimentConfig fields (prior_mean, threads).
    """
    if family not in FAMILY_SWEEP_VARS and family != "design-quantizer":
        raise ConfigError(f"unknown experiment family '{family}'")
    values: dict[str, object] = {}
    extras: dict[str, object] = {}
    if path is not None:
        for key, raw in read_key_values(path).items():
            field, parser = KEY_REGISTRY[key]
            try:
                parsed = parser(raw)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"{path}: key '{key}': {exc}") from None
            if field in ("prior_mean", "threads"):
                extras[field] = parsed
            else:
                values[field] = parsed
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    if family != "design-quantizer":
        values.setdefault("sweep_variable", FAMILY_SWEEP_VARS[family])
        values.setdefault("sweep_values", FAMILY_DEFAULT_SWEEPS[family])
        if values["sweep_variable"] != FAMILY_SWEEP_VARS[family]:
            raise ConfigError(
                f"family '{family}' sweeps '{FAMILY_SWEEP_VARS[family]}', "
                f"not '{values['sweep_variable']}'"
            )
        if values.get("scenario_kind") is None:
            values["scenario_kind"] = "grid" if family == "global-sumrate" else "sir"
        if not values.get("sweep_values"):
            raise ConfigError("sweep.values must be non-empty")
        trials = values.get("n_trials", ExperimentConfig.n_trials)
        if int(trials) < 1:
            raise ConfigError("experiment.trials must be >= 1")
    try:
        cfg = ExperimentConfig(family=family, **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg, extras
