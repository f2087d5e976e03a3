"""
JSON conversion helpers and command-line value parsing
"""
import dataclasses
import math
from enum import Enum
from typing import Any, Dict, List, Tuple

import numpy as np
from pydantic import BaseModel


def to_jsonable(value: Any) -> Any:
    """Convert reports, numpy values and models into plain JSON types.

    Complex numbers become {"re": ..., "im": ...}; infinities become the
    strings "inf"/"-inf" so the output stays strict JSON.
    """
    if isinstance(value, BaseModel):
        return to_jsonable(value.model_dump())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        if hasattr(value, "to_dict"):
            return value.to_dict()
        return {f.name: to_jsonable(getattr(value, f.name)) for f in dataclasses.fields(value)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": to_jsonable(float(value.real)), "im": to_jsonable(float(value.imag))}
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        number = float(value)
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        if math.isnan(number):
            return None
        return number
    return value


def parse_assignment(text: str) -> Tuple[str, str]:
    """Split 'name=value'."""
    if "=" not in text:
        raise ValueError(f"expected name=value, got '{text}'")
    name, raw = text.split("=", 1)
    name = name.strip()
    if not name:
        raise ValueError(f"missing name in '{text}'")
    return name, raw.strip()


def parse_overrides(items: List[str]) -> Dict[str, float]:
    overrides: Dict[str, float] = {}
    for item in items or []:
        name, raw = parse_assignment(item)
        try:
            overrides[name] = float(raw)
        except ValueError:
            raise ValueError(f"value for '{name}' is not a number: '{raw}'") from None
    return overrides


def parse_sweep(text: str) -> Tuple[str, List[float]]:
    """Parse 'name=v1,v2,...' into (name, values)."""
    name, raw = parse_assignment(text)
    values = []
    for chunk in raw.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            values.append(float(chunk))
        except ValueError:
            raise ValueError(f"sweep value for '{name}' is not a number: '{chunk}'") from None
    return name, values


def format_value(value: float) -> str:
    """Compact, file-name-safe rendering of a sweep value."""
    return f"{value:.10g}".replace("+", "")
