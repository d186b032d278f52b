import hashlib
import json
from typing import Any


def canonical_json(data: Any) -> str:
    """Serialises data with sorted keys and fixed separators so equal inputs give equal text."""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def config_hash(data: dict[str, Any]) -> str:
    """SHA-256 hex digest of the canonical JSON form of a configuration mapping."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()
