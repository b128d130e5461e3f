import dataclasses
import datetime
from enum import Enum
from pathlib import PurePath
from typing import Any

import numpy as np


def make_json_serializable(obj: Any) -> Any:
    """
    Recursively converts objects to JSON-serializable formats.
    Handles dataclasses, enums, paths, numpy scalars/arrays and tuples (as lists).
    Non-finite floats become strings so the JSON stays strict.
    """
    if obj is None or isinstance(obj, (str, bool, int)):
        return obj

    if isinstance(obj, Enum):
        return obj.value

    if isinstance(obj, float):
        return obj if np.isfinite(obj) else str(obj)

    if isinstance(obj, np.generic):
        return make_json_serializable(obj.item())

    if isinstance(obj, np.ndarray):
        if obj.size > 64:
            return {'shape': list(obj.shape), 'dtype': str(obj.dtype)}
        return make_json_serializable(obj.tolist())

    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return make_json_serializable({f.name: getattr(obj, f.name) for f in dataclasses.fields(obj)})

    if isinstance(obj, (list, tuple, set)):
        return [make_json_serializable(item) for item in obj]

    if isinstance(obj, dict):
        return {str(k): make_json_serializable(v) for k, v in obj.items()}

    if isinstance(obj, (datetime.datetime, datetime.date, datetime.time)):
        return obj.isoformat()

    if isinstance(obj, PurePath):
        return str(obj)

    if hasattr(obj, 'a_pares') and callable(obj.a_pares):
        return make_json_serializable(obj.a_pares())

    return str(obj)
