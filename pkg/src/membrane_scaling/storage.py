"""
File persistence for reports, sweep tables and sampled fields.
"""
import json
import logging
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd

from .errors import ReportError
from .grid import SampledField

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


def _ensure_parent(path: Path) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error("Cannot create directory %s: %s", path.parent, e)
        raise ReportError(f"cannot create directory {path.parent}: {e}") from e


def save_json(path: Path, data: Any) -> Path:
    """
    Write data as JSON with sorted keys.

    Args:
        path: Destination file
        data: JSON-serializable object

    Returns:
        The path written
    """
    path = Path(path)
    _ensure_parent(path)
    try:
        path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        logger.error("Error writing %s: %s", path, e)
        raise ReportError(f"cannot write {path}: {e}") from e
    return path


def load_json(path: Path) -> Optional[Any]:
    """
    Read a JSON file.

    Returns:
        The decoded object, or None if the file does not exist
    """
    path = Path(path)
    if not path.exists():
        return None
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        logger.error("Error reading %s: %s", path, e)
        raise ReportError(f"cannot read {path}: {e}") from e


def save_frame(path: Path, frame: pd.DataFrame) -> Path:
    """Write a table as CSV (minimal quoting, 12 significant digits, \\n line endings)."""
    path = Path(path)
    _ensure_parent(path)
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    except OSError as e:
        logger.error("Error writing %s: %s", path, e)
        raise ReportError(f"cannot write {path}: {e}") from e
    return path


def save_field(path: Path, u: SampledField, h: SampledField) -> Path:
    """Write a sampled pair as an x,u,h CSV."""
    if u.grid != h.grid:
        raise ReportError("u and h must share a grid")
    frame = pd.DataFrame({"x": u.grid.points, "u": u.values, "h": h.values})
    return save_frame(path, frame)


def load_field(path: Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Read an x,u,h CSV.

    Returns:
        (x, u, h) arrays
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path)
    except (OSError, pd.errors.ParserError) as e:
        logger.error("Error reading %s: %s", path, e)
        raise ReportError(f"cannot read {path}: {e}") from e
    missing = {"x", "u", "h"} - set(frame.columns)
    if missing:
        raise ReportError(f"{path}: missing columns {sorted(missing)}")
    return frame["x"].to_numpy(), frame["u"].to_numpy(), frame["h"].to_numpy()
