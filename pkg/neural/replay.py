import numpy as np

from ssmdp_core.errors import InvalidArgumentError, SsmdpError

FIELDS = ("states", "actions", "rewards", "next_states", "terminals")


class EmptyBufferError(SsmdpError):
    """Sampling was requested from a buffer holding no transitions."""


class ReplayBuffer:
    """
    Ring buffer of encoded transitions (s, a, r, s', terminal). Storage grows on demand up
    to `capacity`; once full, each push overwrites the oldest entry.
    """

    def __init__(self, capacity: int, state_dim: int, action_dim: int):
        if capacity < 1:
            raise InvalidArgumentError("capacity must be at least 1")
        self.capacity = capacity
        self.state_dim = state_dim
        self.action_dim = action_dim
        self.size = 0
        self.head = 0
        self._allocate(min(capacity, 1024))

    def _allocate(self, rows: int):
        if hasattr(self, "states"):
            rows = max(rows, self.states.shape[0])
        fresh = {
            "states": np.zeros((rows, self.state_dim)),
            "actions": np.zeros((rows, self.action_dim)),
            "rewards": np.zeros(rows),
            "next_states": np.zeros((rows, self.state_dim)),
            "terminals": np.zeros(rows),
        }
        for name, array in fresh.items():
            old = getattr(self, name, None)
            if old is not None:
                array[:old.shape[0]] = old
            setattr(self, name, array)

    def __len__(self) -> int:
        return self.size

    def push(self, state: np.ndarray, action: np.ndarray, reward: float, next_state: np.ndarray, terminal: bool):
        if self.head >= self.states.shape[0]:
            self._allocate(min(self.capacity, 2 * self.states.shape[0]))
        row = self.head
        self.states[row] = state
        self.actions[row] = action
        self.rewards[row] = reward
        self.next_states[row] = next_state
        self.terminals[row] = float(terminal)
        self.head = (self.head + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        """Uniform draw with replacement."""
        if self.size == 0:
            raise EmptyBufferError("cannot sample from an empty replay buffer")
        rows = rng.integers(0, self.size, size=batch_size)
        return {name: getattr(self, name)[rows] for name in FIELDS}

    def state_arrays(self) -> dict[str, np.ndarray]:
        arrays = {name: getattr(self, name)[:self.size] for name in FIELDS}
        arrays["cursor"] = np.array([self.size, self.head], dtype=np.float64)
        return arrays

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        self.size, self.head = (int(value) for value in arrays["cursor"])
        self._allocate(max(min(self.capacity, 1024), self.size))
        for name in FIELDS:
            getattr(self, name)[:self.size] = arrays[name]


def buffer_push(buffer: ReplayBuffer, state, action, reward, next_state, terminal) -> ReplayBuffer:
    """Store one encoded transition, overwriting the oldest once the buffer is full."""
    buffer.push(state, action, reward, next_state, terminal)
    return buffer


def buffer_sample(buffer: ReplayBuffer, batch_size: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    return buffer.sample(batch_size, rng)
