import numpy as np

from ssmdp_core.errors import InconsistencyError


class ParamStore:
    """
    Flat, ordered collection of named float64 arrays: every learned or counted quantity of an
    agent (networks, targets, optimizer moments, estimators, buffers, counters).
    """

    def __init__(self, arrays: dict[str, np.ndarray] | None = None):
        self.arrays: dict[str, np.ndarray] = {}
        for name, value in (arrays or {}).items():
            self[name] = value

    def __setitem__(self, name: str, value) -> None:
        self.arrays[name] = np.asarray(value, dtype=np.float64)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def __contains__(self, name: str) -> bool:
        return name in self.arrays

    def __len__(self) -> int:
        return len(self.arrays)

    def items(self):
        return self.arrays.items()

    def add(self, prefix: str, arrays: dict[str, np.ndarray]) -> "ParamStore":
        for name, value in arrays.items():
            self[f"{prefix}.{name}"] = value
        return self

    def section(self, prefix: str) -> dict[str, np.ndarray]:
        """Arrays under `prefix.`, with the prefix stripped."""
        head = f"{prefix}."
        return {name[len(head):]: value for name, value in self.arrays.items() if name.startswith(head)}

    def copy(self) -> "ParamStore":
        return ParamStore({name: value.copy() for name, value in self.arrays.items()})

    def equals(self, other: "ParamStore") -> bool:
        return self.arrays.keys() == other.arrays.keys() and all(
            np.array_equal(value, other.arrays[name]) for name, value in self.arrays.items()
        )


def load_in_place(targets: dict[str, np.ndarray], source: dict[str, np.ndarray], where: str = "") -> None:
    """Copy `source` arrays into the same-named, same-shaped `targets` arrays."""
    missing = targets.keys() - source.keys()
    extra = source.keys() - targets.keys()
    if missing or extra:
        raise InconsistencyError(f"{where or 'parameters'}: missing {sorted(missing)}, unexpected {sorted(extra)}")
    for name, target in targets.items():
        value = np.asarray(source[name])
        if value.shape != target.shape:
            raise InconsistencyError(f"{where}.{name}: shape {value.shape} does not match {target.shape}")
        target[...] = value
