# core/services/reporting.py: CSV files and aligned text tables
import logging
from pathlib import Path

import pandas as pd
from django.conf import settings

from ..exceptions import ExportError
from .randgen import generator_description

logger = logging.getLogger(__name__)

# enough significant digits for an exact float round trip
CSV_FLOAT_FORMAT = "%.17g"


def run_metadata(master_seed: int, config: dict) -> dict:
    """Header block for every CSV. Worker counts must never be part of `config`."""
    meta = {
        "tool_version": settings.NSNR_TOOL_VERSION,
        "generator": generator_description(),
        "master_seed": master_seed,
    }
    for key in sorted(config):
        meta[f"config.{key}"] = config[key]
    return meta


def write_csv(frame: pd.DataFrame, path, meta: dict | None = None, index: bool = False) -> Path:
    path = Path(path)
    try:
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as handle:
            for key, value in (meta or {}).items():
                handle.write(f"# {key}={value}\n")
            frame.to_csv(handle, index=index, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    except OSError as exc:
        raise ExportError(f"could not write {path}: {exc}") from exc
    logger.info("wrote %d rows to %s", len(frame), path)
    return path


def read_csv(path, **kwargs) -> pd.DataFrame:
    """Reads a file written by write_csv, skipping the metadata comments."""
    try:
        kwargs.setdefault("float_precision", "round_trip")
        return pd.read_csv(path, comment="#", **kwargs)
    except OSError as exc:
        raise ExportError(f"could not read {path}: {exc}") from exc


def format_table(frame: pd.DataFrame, decimals: int = 2) -> str:
    """Rounded text rendering for the terminal."""
    return frame.round(decimals).to_string(float_format=lambda v: f"{v:.{decimals}f}")
