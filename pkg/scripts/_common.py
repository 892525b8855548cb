"""Shared helpers for the experiment scripts."""
import json
import os
from dataclasses import asdict
from pathlib import Path

import numpy as np

from derivsamp import __version__


def output_dir(override=None) -> Path:
    out = Path(override or os.environ.get("DERIVSAMP_OUTPUT_DIR", "results"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(type(obj).__name__)


def write_json(path: Path, config, payload: dict) -> None:
    doc = {"config": asdict(config) | {"version": __version__}, **payload}
    path.write_text(json.dumps(doc, sort_keys=True, indent=1, default=_default) + "\n")
    print(f"wrote {path}")
