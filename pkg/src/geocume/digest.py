import hashlib
import json
from typing import Any

SHORT = 16


def canonical_json(obj: Any) -> str:
    """Каноническая сериализация: сортированные ключи, без пробелов"""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest_of(obj: Any) -> str:
    """SHA-256 канонической сериализации"""
    return hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()


def short(digest: str) -> str:
    return digest[:SHORT]
