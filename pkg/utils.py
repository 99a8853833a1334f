"""Shared helpers: logging, JSON files, seed derivation"""
import hashlib
import json
import logging
from typing import Any, Optional

import numpy as np


def derive_seed(seed: int, *labels: Any) -> int:
    """Derives a child seed from a root seed and a sequence of labels (suite, index, ...)"""
    sha256_hash = hashlib.sha256()
    sha256_hash.update(str(seed).encode('utf-8'))
    for label in labels:
        sha256_hash.update(b"/")
        sha256_hash.update(str(label).encode('utf-8'))
    return int(sha256_hash.hexdigest()[:16], 16)  # 64 bits is plenty for default_rng


def setup_logging(log_level: str = "INFO", log_file: Optional[str] = None):
    """Setup logging configuration"""
    log_format = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format=log_format,
        handlers=handlers,
        force=True,
    )


def _json_default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


def dump_json(data: Any) -> str:
    """Serializes data deterministically (sorted keys, fixed indentation)"""
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n"


def load_json(filepath: str) -> Any:
    """Load data from JSON file"""
    with open(filepath, 'r') as f:
        return json.load(f)


def format_execution_time(seconds: float) -> str:
    """Format execution time in human readable format"""
    if seconds < 1:
        return f"{seconds*1000:.2f}ms"
    elif seconds < 60:
        return f"{seconds:.2f}s"
    else:
        minutes = int(seconds // 60)
        remaining_seconds = seconds % 60
        return f"{minutes}m {remaining_seconds:.2f}s"
