from dataclasses import asdict, is_dataclass
from enum import Enum
from json import JSONEncoder

import numpy as np


class ComplexEncoder(JSONEncoder):
    def default(self, obj):
        if hasattr(obj, "_serialize"):
            return obj._serialize()
        if isinstance(obj, Enum):
            return obj.value
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if is_dataclass(obj) and not isinstance(obj, type):
            return asdict(obj)
        return JSONEncoder.default(self, obj)
