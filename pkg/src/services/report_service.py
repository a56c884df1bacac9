"""
Experiment config loading and report writers.

Config grammar (flat YAML mapping, one `key: value` per line):

    signals: [wave, peak]          # required; names from the testbed
    rsnr_levels: [3, 5, 7]
    n: 1024                        # power of two
    replications: 100
    filter: coif3
    j0: 4
    estimators: [map-levelwise, map-global, universal-hard]
    seed: 0
    workers: 4                     # optional

Omitted keys take the user defaults from the ConfigManager. Unknown keys and
invalid values are reported per field.

Reports are CSV with a header and a schema_version column, floats written
with a fixed format so identical runs produce identical bytes.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
import yaml

from src.config.constants import CSV_FLOAT_FORMAT, REPORT_SCHEMA_VERSION, SUPPORTED_FILTERS
from src.schemas.estimation import DenoiseResult
from src.schemas.experiment import ExperimentConfig, ExperimentReport, RateRow
from src.services.errors import ConfigValidationError, InvalidInputError
from src.services.estimators import ESTIMATORS
from src.services.testbed import SIGNALS
from src.utils.logger import get_logger

log = get_logger(__name__)

PathLike = Union[str, Path]

_CONFIG_KEYS = {f for f in ExperimentConfig.__dataclass_fields__}


def _is_power_of_two(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool) and value >= 2 and not value & (value - 1)


def _as_list(value: Any) -> List[Any]:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def build_experiment_config(raw: Dict[str, Any], defaults: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Validate a raw mapping (plus defaults) into an ExperimentConfig."""
    errors: Dict[str, str] = {}
    if not isinstance(raw, dict):
        raise ConfigValidationError({"<root>": "config must be a key-value mapping"})

    for key in sorted(set(raw) - _CONFIG_KEYS):
        errors[key] = "unknown key"

    merged = {k: v for k, v in (defaults or {}).items() if k in _CONFIG_KEYS}
    merged.update({k: v for k, v in raw.items() if k in _CONFIG_KEYS})

    signals = [str(s).lower() for s in _as_list(merged.get("signals", []))]
    if not signals:
        errors["signals"] = "at least one signal is required"
    elif any(s not in SIGNALS for s in signals):
        errors["signals"] = f"unknown signal(s); choose from {sorted(SIGNALS)}"

    estimators = [str(e) for e in _as_list(merged.get("estimators", []))]
    if not estimators:
        errors["estimators"] = "at least one estimator is required"
    elif any(e not in ESTIMATORS for e in estimators):
        errors["estimators"] = f"unknown estimator(s); choose from {sorted(ESTIMATORS)}"

    try:
        rsnr_levels = [float(r) for r in _as_list(merged.get("rsnr_levels", []))]
        if not rsnr_levels or any(not (r > 0 and math.isfinite(r)) for r in rsnr_levels):
            errors["rsnr_levels"] = "must be a non-empty list of positive numbers"
    except (TypeError, ValueError):
        rsnr_levels = []
        errors["rsnr_levels"] = "must be numbers"

    n = merged.get("n", 1024)
    if not _is_power_of_two(n):
        errors["n"] = "must be a power of two >= 2"

    replications = merged.get("replications")
    if not isinstance(replications, int) or isinstance(replications, bool) or replications < 1:
        errors["replications"] = "must be an integer >= 1"

    filt = str(merged.get("filter", "")).lower()
    if filt not in SUPPORTED_FILTERS:
        errors["filter"] = f"unsupported filter; choose from {SUPPORTED_FILTERS}"

    j0 = merged.get("j0")
    if not isinstance(j0, int) or isinstance(j0, bool) or j0 < 1:
        errors["j0"] = "must be an integer >= 1"
    elif _is_power_of_two(n) and 2 ** j0 >= n:
        errors["j0"] = f"must satisfy 2^j0 < n (n={n})"

    seed = merged.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        errors["seed"] = "must be a non-negative integer"

    workers = merged.get("workers")
    if workers is not None and (not isinstance(workers, int) or workers < 1):
        errors["workers"] = "must be a positive integer"

    if errors:
        raise ConfigValidationError(errors)

    return ExperimentConfig(
        signals=signals,
        rsnr_levels=rsnr_levels,
        n=n,
        replications=replications,
        filter=filt,
        j0=j0,
        estimators=estimators,
        seed=seed,
        workers=workers,
    )


def load_experiment_config(path: PathLike, defaults: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """Read a YAML experiment config. OSError propagates for unreadable files."""
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigValidationError({"<root>": f"not valid YAML: {e}"})
    return build_experiment_config(raw, defaults)


# =============================================================================
# Writers
# =============================================================================

def report_frame(report: ExperimentReport) -> pd.DataFrame:
    return pd.DataFrame(report.records(), columns=list(ExperimentReport.COLUMNS))


def write_report_csv(report: ExperimentReport, path: PathLike) -> Path:
    path = Path(path)
    report_frame(report).to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    log.info(f"Wrote simulation report ({len(report.rows)} rows) to {path}")
    return path


def rate_frame(rows: Iterable[RateRow]) -> pd.DataFrame:
    records = [
        {"schema_version": REPORT_SCHEMA_VERSION, **row.__dict__}
        for row in rows
    ]
    columns = ["schema_version", "mode", "series", "m", "n", "risk",
               "reference_rate", "slope", "replications", "seed"]
    return pd.DataFrame(records, columns=columns)


def write_rate_csv(rows: Iterable[RateRow], path: PathLike) -> Path:
    path = Path(path)
    frame = rate_frame(rows)
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    log.info(f"Wrote rate report ({len(frame)} rows) to {path}")
    return path


def denoise_sidecar(result: DenoiseResult, filter_name: str, j0: int, mode: str, sigma_supplied: bool) -> Dict[str, Any]:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "estimator": result.estimator,
        "mode": mode,
        "filter": filter_name,
        "j0": j0,
        "n": int(result.f_hat.size),
        "sigma_hat": result.sigma_hat,
        "sigma_supplied": sigma_supplied,
        "degenerate_noise": result.sigma_hat == 0.0,
        "surviving_fraction": result.surviving_fraction,
        "levels": [fit.as_dict() for fit in result.level_fits],
    }


def write_json(payload: Dict[str, Any], path: PathLike) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    return path


def write_samples_csv(samples, path: PathLike, t: Optional[np.ndarray] = None) -> Path:
    path = Path(path)
    columns = {"y": np.asarray(samples, dtype=float)}
    if t is not None:
        columns = {"t": np.asarray(t, dtype=float), **columns}
    pd.DataFrame(columns).to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return path


def read_samples_csv(path: PathLike):
    """
    Read a one-column (y) or two-column (t, y) CSV, with or without a header.

    Returns (t or None, y). OSError propagates; malformed content raises InvalidInputError.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Input file not found: {path}")
    try:
        frame = pd.read_csv(path, header=None, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise InvalidInputError(f"{path} is empty")
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise InvalidInputError(f"{path} is not a readable CSV", str(e))
    # a non-numeric first row is a header
    if frame.shape[0] and not pd.to_numeric(frame.iloc[0], errors="coerce").notna().all():
        frame = frame.iloc[1:]
    frame = frame.apply(pd.to_numeric, errors="coerce")
    if frame.shape[1] not in (1, 2) or frame.empty or frame.isna().any().any():
        raise InvalidInputError(f"{path} must hold one (y) or two (t, y) numeric columns")
    values = frame.to_numpy(dtype=float)
    if values.shape[1] == 1:
        return None, values[:, 0]
    return values[:, 0], values[:, 1]
