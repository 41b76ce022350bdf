"""
Versioned binary checkpoint container.

Byte layout (little-endian):

    8 bytes   magic b"SSMDPCKP"
    u32       format version
    32 bytes  SHA-256 config hash
    u32       config JSON length, then the canonical config JSON (UTF-8)
    u32       number of arrays, then per array:
                u16 name length, name (UTF-8), u8 ndim, ndim x u64 shape, float64 data (C order)
    32 bytes  SHA-256 of every preceding byte
"""

import hashlib
import struct
from pathlib import Path

import logfire
import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from neural.params import ParamStore
from ssmdp_core.errors import SsmdpError

MAGIC = b"SSMDPCKP"
FORMAT_VERSION = 1
DIGEST_SIZE = 32


class CheckpointError(SsmdpError):
    """A checkpoint that cannot be used to continue a run."""


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointConfigMismatchError(CheckpointError):
    pass


class CheckpointCorruptError(CheckpointError):
    pass


class Checkpoint(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    version: int = Field(default=FORMAT_VERSION, description="Container format version.")
    config_hash: bytes = Field(min_length=DIGEST_SIZE, max_length=DIGEST_SIZE)
    config_json: str = Field(description="Canonical JSON of the experiment config.")
    arrays: ParamStore = Field(description="Every learned, counted and random-stream state of the run.")

    def __eq__(self, other) -> bool:
        if not isinstance(other, Checkpoint):
            return NotImplemented
        return (
            self.version == other.version
            and self.config_hash == other.config_hash
            and self.config_json == other.config_json
            and self.arrays.equals(other.arrays)
        )


# ==========================================================
# --- Random stream state ---
# ==========================================================

_MASK64 = (1 << 64) - 1


def rng_state_array(rng: np.random.Generator) -> np.ndarray:
    """PCG64 state as six uint64 words, bit-viewed as float64."""
    state = rng.bit_generator.state
    if state["bit_generator"] != "PCG64":
        raise CheckpointError(f"cannot checkpoint a {state['bit_generator']} stream")
    inner = state["state"]
    words = [
        inner["state"] >> 64, inner["state"] & _MASK64,
        inner["inc"] >> 64, inner["inc"] & _MASK64,
        state["has_uint32"], state["uinteger"],
    ]
    return np.array(words, dtype=np.uint64).view(np.float64)


def restore_rng(rng: np.random.Generator, array: np.ndarray) -> None:
    words = [int(word) for word in np.ascontiguousarray(array, dtype=np.float64).view(np.uint64)]
    if len(words) != 6:
        raise CheckpointCorruptError("random stream state must hold six words")
    rng.bit_generator.state = {
        "bit_generator": "PCG64",
        "state": {"state": (words[0] << 64) | words[1], "inc": (words[2] << 64) | words[3]},
        "has_uint32": words[4],
        "uinteger": words[5],
    }


# ==========================================================
# --- Encoding ---
# ==========================================================

def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    parts = [MAGIC, struct.pack("<I", checkpoint.version), checkpoint.config_hash]
    config_bytes = checkpoint.config_json.encode("utf-8")
    parts += [struct.pack("<I", len(config_bytes)), config_bytes, struct.pack("<I", len(checkpoint.arrays))]
    for name, array in checkpoint.arrays.items():
        encoded = name.encode("utf-8")
        parts += [struct.pack("<H", len(encoded)), encoded, struct.pack("<B", array.ndim)]
        parts += [struct.pack(f"<{array.ndim}Q", *array.shape)]
        parts.append(np.ascontiguousarray(array, dtype="<f8").tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise CheckpointCorruptError("checkpoint ends unexpectedly")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def decode_checkpoint(data: bytes, expected_hash: bytes | None = None) -> Checkpoint:
    """
    Checks run in order: magic, version, digest, expected config hash. Each failure raises its
    own CheckpointError subclass.
    """
    if len(data) < len(MAGIC) + 4 + DIGEST_SIZE * 2 or data[:len(MAGIC)] != MAGIC:
        raise CheckpointCorruptError("not a checkpoint file")
    (version,) = struct.unpack("<I", data[len(MAGIC):len(MAGIC) + 4])
    if version != FORMAT_VERSION:
        raise CheckpointVersionError(f"checkpoint format version {version}, this build reads {FORMAT_VERSION}")
    body, digest = data[:-DIGEST_SIZE], data[-DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise CheckpointCorruptError("checkpoint digest does not match its contents")

    reader = _Reader(body)
    reader.take(len(MAGIC) + 4)
    config_hash = reader.take(DIGEST_SIZE)
    if expected_hash is not None and config_hash != expected_hash:
        raise CheckpointConfigMismatchError("checkpoint was written for a different experiment config")
    (config_size,) = reader.unpack("<I")
    try:
        config_json = reader.take(config_size).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise CheckpointCorruptError("config section is not UTF-8") from exc
    (count,) = reader.unpack("<I")
    arrays = ParamStore()
    for _ in range(count):
        (name_size,) = reader.unpack("<H")
        name = reader.take(name_size).decode("utf-8")
        (ndim,) = reader.unpack("<B")
        shape = reader.unpack(f"<{ndim}Q")
        size = int(np.prod(shape, dtype=np.int64))
        arrays[name] = np.frombuffer(reader.take(8 * size), dtype="<f8").reshape(shape).copy()
    if reader.offset != len(body):
        raise CheckpointCorruptError("trailing bytes after the last array")
    return Checkpoint(version=version, config_hash=config_hash, config_json=config_json, arrays=arrays)


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = encode_checkpoint(checkpoint)
    with logfire.span("save checkpoint {path}", path=str(path), size=len(data)):
        staging = path.with_name(path.name + ".tmp")
        staging.write_bytes(data)
        staging.replace(path)
    return path


def load_checkpoint(path: str | Path, expected_hash: bytes | None = None) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise CheckpointCorruptError(f"checkpoint {path} does not exist")
    data = path.read_bytes()
    with logfire.span("load checkpoint {path}", path=str(path), size=len(data)):
        return decode_checkpoint(data, expected_hash)
