from __future__ import annotations

import zlib
from collections import Counter, OrderedDict
from collections.abc import Mapping
from typing import Dict, Iterator, List, Tuple

import numpy as np

from ..autodiff import DiffValue, default_dtype

# Roles whose parameters start at zero; attention vectors and constant edge
# rows are drawn like weights with the vector length as fan-in.
ZERO_ROLES = {"gate_W", "gate_b"}
ROLE_FAMILIES = {
    "project": "projection",
    "edge": "projection",
    "message": "message",
    "attn": "attention",
    "gate": "gate",
    "agg": "aggregate",
    "hidden": "head",
    "out": "head",
}


def param_path(owner: str, stage: str, role: str, name: str) -> str:
    """Builds a parameter path, e.g. `task0/layer2/attn_W/cites`."""
    return f"{owner}/{stage}/{role}/{name}"


def split_path(path: str) -> Tuple[str, str, str, str]:
    owner, stage, role, name = path.split("/", 3)
    return owner, stage, role, name


def role_family(role: str) -> str:
    return ROLE_FAMILIES.get(role.split("_", 1)[0].rstrip("0123456789"), "other")


def initial_value(path: str, shape: Tuple[int, int], seed: int) -> np.ndarray:
    """Deterministic initial value of a parameter.

    The generator is seeded by `seed` and the CRC32 of the path, so a path
    receives the same value in every model built with the same seed. Weight
    matrices and attention vectors are drawn from `U(-1/sqrt(fan_in), 1/sqrt(fan_in))`,
    biases and gate parameters start at zero.
    """
    _, _, role, _ = split_path(path)
    if role in ZERO_ROLES or (role.endswith("_b") and role != "agg_b"):
        return np.zeros(shape, dtype=np.float64)
    rng = np.random.default_rng([seed, zlib.crc32(path.encode("utf-8"))])
    fan_in = shape[0] if shape[0] > 1 else shape[1]
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class ParameterStore(Mapping):
    """Ordered mapping from parameter path to a differentiable parameter.

    Paths follow `{owner}/{stage}/{role}/{name}`: the owner is a backbone
    (`task1`, `expert0`, `selector`), the stage a layer (`layer0` holds the
    input projection) or `head`/`final`/`moe`, the role the parameter's part
    in the layer (`attn_W`, `gate_b`, ...), and the name the node type,
    relation or task it belongs to.

    Example:
        >>> store = ParameterStore(seed=7)
        >>> W = store.create("task0/layer1/message_W/cites", (64, 64))
        >>> store.count()
        4096
    """

    class MissingParameter(Exception):
        def __init__(self, path: str, message=None):
            self.path = path
            if message is None:
                message = f"No parameter registered at '{path}'."
            super().__init__(message)

    def __init__(self, seed: int = 0, dtype=None):
        self.seed = seed
        self.dtype = np.dtype(dtype or default_dtype())
        self._params: "OrderedDict[str, DiffValue]" = OrderedDict()

    def __getitem__(self, path: str) -> DiffValue:
        try:
            return self._params[path]
        except KeyError:
            raise ParameterStore.MissingParameter(path)

    def __contains__(self, path) -> bool:
        return path in self._params

    def get(self, path: str, default=None):
        return self._params.get(path, default)

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def __repr__(self):
        return f"ParameterStore({len(self)} parameters, {self.count()} scalars)"

    def create(self, path: str, shape: Tuple[int, int]) -> DiffValue:
        """Registers a freshly initialized parameter (see `initial_value`)."""
        if path in self._params:
            raise ValueError(f"Parameter '{path}' is already registered.")
        data = initial_value(path, tuple(shape), self.seed).astype(self.dtype)
        value = DiffValue(data, requires_grad=True, name=path, dtype=self.dtype)
        self._params[path] = value
        return value

    def put(self, path: str, data: np.ndarray) -> DiffValue:
        """Registers (or overwrites) a parameter with the given value."""
        value = DiffValue(
            np.array(data, dtype=self.dtype), requires_grad=True, name=path, dtype=self.dtype
        )
        self._params[path] = value
        return value

    def count(self) -> int:
        """Total number of scalars."""
        return int(sum(p.data.size for p in self._params.values()))

    def zero_grad(self):
        for p in self._params.values():
            p.zero_grad()

    def owners(self) -> List[str]:
        return list(OrderedDict.fromkeys(split_path(p)[0] for p in self._params))

    def owned_by(self, owner: str) -> List[str]:
        return [p for p in self._params if p.startswith(owner + "/")]

    def census(self) -> Dict[str, int]:
        """Number of parameter groups per role family.

        A group is one (owner, stage, role family, name) combination, e.g. the
        weight and bias of one gate count as a single gate group.
        """
        groups = set()
        for path in self._params:
            owner, stage, role, name = split_path(path)
            groups.add((owner, stage, role_family(role), name))
        return dict(Counter(family for _, _, family, _ in groups))

    def snapshot(self) -> Dict[str, np.ndarray]:
        return {path: p.data.copy() for path, p in self._params.items()}

    def restore(self, snapshot: Dict[str, np.ndarray]):
        missing = [p for p in self._params if p not in snapshot]
        if missing:
            raise ParameterStore.MissingParameter(missing[0])
        for path, p in self._params.items():
            p.data = np.array(snapshot[path], dtype=self.dtype)

    def clone_owner(self, source: str, target: str):
        """Copies every parameter of `source` onto the same path under `target`."""
        for path in self.owned_by(source):
            twin = target + path[len(source):]
            if twin not in self._params:
                raise ParameterStore.MissingParameter(twin)
            self._params[twin].data = self._params[path].data.copy()

    def astype(self, dtype) -> ParameterStore:
        """A detached copy of the store at another precision."""
        store = ParameterStore(self.seed, dtype)
        for path, p in self._params.items():
            store.put(path, p.data)
        return store
