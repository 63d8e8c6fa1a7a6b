"""
GGCK checkpoints.

Layout (little-endian):

    header       magic "GGCK", u32 version, 32-byte GlueNetConfig digest
    text block   u64 length + YAML: configs, step, optimizer counters
    tensors      per tensor: u32 name length, name, u32 rank, rank x u32
                 extents, float32 values
    rng block    u64 length + YAML: batch schedule state

Tensor names are namespaced: ``encoder/``, ``decoder/``, ``discriminator/``,
``opt_gen/m/...``, ``opt_gen/v/...``, ``opt_disc/m/...``, ``opt_disc/v/...``
and ``token_weights``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, BinaryIO, Optional

import numpy as np
import yaml

from gluenet.common.errors import (
    BadMagicError,
    DigestMismatchError,
    FormatError,
    TruncatedPayloadError,
    VersionMismatchError,
)
from gluenet.common.schema import (
    EXTENT_DTYPE,
    GGCK_MAGIC,
    GGCK_VERSION,
    LENGTH_DTYPE,
    NAME_LENGTH_DTYPE,
    RANK_DTYPE,
    TENSOR_VALUE_DTYPE,
    get_schema,
)
from gluenet.data.corpus import BatchSchedule
from gluenet.model.config import GlueNetConfig
from gluenet.model.discriminator import build_discriminator
from gluenet.model.gluenet import build_decoder, build_encoder
from gluenet.train.config import TrainConfig
from gluenet.train.loop import TrainingState
from gluenet.train.optim import AdamWState

log = logging.getLogger(__name__)

HEADER = get_schema("ggck_header")


# ---------------------------------------------------------------------
# Writing
# ---------------------------------------------------------------------
def _write_block(f: BinaryIO, payload: bytes) -> None:
    f.write(np.array([len(payload)], dtype=LENGTH_DTYPE).tobytes())
    f.write(payload)


def _write_tensor(f: BinaryIO, name: str, value: np.ndarray) -> None:
    encoded = name.encode("utf-8")
    f.write(np.array([len(encoded)], dtype=NAME_LENGTH_DTYPE).tobytes())
    f.write(encoded)
    f.write(np.array([value.ndim], dtype=RANK_DTYPE).tobytes())
    f.write(np.array(value.shape, dtype=EXTENT_DTYPE).tobytes())
    f.write(np.ascontiguousarray(value, dtype=TENSOR_VALUE_DTYPE).tobytes())


def state_tensors(state: TrainingState) -> dict[str, np.ndarray]:
    """All tensors of a training state under their checkpoint names, in file order."""
    tensors: dict[str, np.ndarray] = {}
    for store in (state.generator_params(), state.discriminator_params()):
        for name in store:
            tensors[name] = store[name].data
    for label, opt in (("opt_gen", state.opt_gen), ("opt_disc", state.opt_disc)):
        for moment in ("m", "v"):
            buffers = getattr(opt, moment)
            for name in sorted(buffers):
                tensors[f"{label}/{moment}/{name}"] = buffers[name]
    if state.token_weights is not None:
        tensors["token_weights"] = state.token_weights
    return tensors


def save_checkpoint(path: Path, state: TrainingState) -> None:
    path = Path(path)
    tensors = state_tensors(state)
    meta = {
        "gluenet": state.gcfg.to_dict(),
        "train": state.tcfg.to_dict(),
        "step": state.step,
        "opt_gen_t": state.opt_gen.t,
        "opt_disc_t": state.opt_disc.t,
        "tensors": len(tensors),
    }

    header = np.zeros(1, dtype=HEADER)
    header["magic"] = GGCK_MAGIC
    header["version"] = GGCK_VERSION
    header["digest"] = np.frombuffer(state.gcfg.digest(), dtype=np.uint8)

    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header.tobytes())
        _write_block(f, yaml.safe_dump(meta, sort_keys=False).encode("utf-8"))
        for name, value in tensors.items():
            _write_tensor(f, name, value)
        _write_block(f, yaml.safe_dump(state.schedule.state(), sort_keys=False).encode("utf-8"))
    log.info(f"Saved checkpoint {path} at step {state.step} ({len(tensors)} tensors)")


# ---------------------------------------------------------------------
# Reading
# ---------------------------------------------------------------------
class _Reader:
    def __init__(self, raw: bytes, path: Path):
        self.raw = raw
        self.path = path
        self.pos = 0

    def take(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.raw):
            raise TruncatedPayloadError(self.path, end, len(self.raw))
        chunk = self.raw[self.pos:end]
        self.pos = end
        return chunk

    def scalar(self, dtype: np.dtype) -> int:
        return int(np.frombuffer(self.take(dtype.itemsize), dtype=dtype)[0])

    def block(self) -> Any:
        text = self.take(self.scalar(LENGTH_DTYPE)).decode("utf-8")
        try:
            return yaml.safe_load(text)
        except yaml.YAMLError as e:
            raise FormatError(f"{self.path}: unreadable text block: {e}") from e

    def tensor(self) -> tuple[str, np.ndarray]:
        name = self.take(self.scalar(NAME_LENGTH_DTYPE)).decode("utf-8")
        rank = self.scalar(RANK_DTYPE)
        shape = tuple(int(x) for x in np.frombuffer(self.take(rank * EXTENT_DTYPE.itemsize), dtype=EXTENT_DTYPE))
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        values = np.frombuffer(self.take(count * TENSOR_VALUE_DTYPE.itemsize), dtype=TENSOR_VALUE_DTYPE)
        return name, values.astype(np.float32).reshape(shape)


@dataclass
class CheckpointFile:
    """Decoded contents of a GGCK file."""
    version: int
    digest: bytes
    gcfg: GlueNetConfig
    tcfg: TrainConfig
    step: int
    opt_gen_t: int
    opt_disc_t: int
    tensors: dict[str, np.ndarray]
    schedule_state: dict[str, Any]

    def section(self, prefix: str) -> dict[str, np.ndarray]:
        """Tensors under ``prefix/`` with the prefix removed."""
        start = len(prefix) + 1
        return {name[start:]: value for name, value in self.tensors.items() if name.startswith(prefix + "/")}

    def summary(self) -> dict[str, Any]:
        return {
            "format": "GGCK",
            "version": self.version,
            "digest": self.digest.hex(),
            "step": self.step,
            "tensors": len(self.tensors),
            "gluenet": self.gcfg.to_dict(),
            "train": self.tcfg.to_dict(),
        }


def _read_header(reader: _Reader) -> tuple[int, bytes]:
    h = np.frombuffer(reader.take(HEADER.itemsize), dtype=HEADER)[0]
    if bytes(h["magic"]) != GGCK_MAGIC:
        raise BadMagicError(f"{reader.path}: bad magic {bytes(h['magic'])!r}, expected {GGCK_MAGIC!r}")
    if int(h["version"]) != GGCK_VERSION:
        raise VersionMismatchError(
            f"{reader.path}: GGCK version {int(h['version'])} is not supported (expected {GGCK_VERSION})"
        )
    return int(h["version"]), h["digest"].tobytes()


def read_checkpoint(path: Path) -> CheckpointFile:
    path = Path(path)
    reader = _Reader(path.read_bytes(), path)
    version, digest = _read_header(reader)

    meta = reader.block()
    if not isinstance(meta, dict) or not {"gluenet", "train", "step", "tensors"} <= set(meta):
        raise FormatError(f"{path}: config block is missing required entries")
    gcfg = GlueNetConfig.from_mapping(meta["gluenet"])
    if gcfg.digest() != digest:
        raise FormatError(f"{path}: header digest does not match the stored GlueNet config")

    tensors = dict(reader.tensor() for _ in range(int(meta["tensors"])))
    schedule_state = reader.block()
    if reader.pos != len(reader.raw):
        raise FormatError(f"{path}: {len(reader.raw) - reader.pos} trailing bytes")

    return CheckpointFile(
        version=version,
        digest=digest,
        gcfg=gcfg,
        tcfg=TrainConfig.from_mapping(meta["train"]),
        step=int(meta["step"]),
        opt_gen_t=int(meta.get("opt_gen_t", 0)),
        opt_disc_t=int(meta.get("opt_disc_t", 0)),
        tensors=tensors,
        schedule_state=schedule_state,
    )


def _restore_optimizer(ckpt: CheckpointFile, label: str, t: int) -> AdamWState:
    return AdamWState(
        m={name: value.copy() for name, value in ckpt.section(f"{label}/m").items()},
        v={name: value.copy() for name, value in ckpt.section(f"{label}/v").items()},
        t=t,
    )


def load_checkpoint(path: Path, gcfg: Optional[GlueNetConfig] = None, tcfg: Optional[TrainConfig] = None) -> TrainingState:
    """
    Rebuild the training state stored at ``path``.

    When ``gcfg`` is given it must be the configuration the checkpoint was
    written for. ``tcfg`` replaces the stored training configuration (for
    example to extend the step budget).
    """
    ckpt = read_checkpoint(path)
    if gcfg is not None and gcfg.digest() != ckpt.digest:
        raise DigestMismatchError(
            f"{path} was written for a different GlueNet config "
            f"(checkpoint {ckpt.digest.hex()[:12]}, requested {gcfg.digest().hex()[:12]})"
        )

    rng = np.random.default_rng(0)
    encoder = build_encoder(ckpt.gcfg, rng)
    decoder = build_decoder(ckpt.gcfg, rng)
    discriminator = build_discriminator(ckpt.gcfg, rng)
    encoder.params.load_arrays(ckpt.section("encoder"))
    decoder.params.load_arrays(ckpt.section("decoder"))
    discriminator.params.load_arrays(ckpt.section("discriminator"))

    state = TrainingState(
        gcfg=ckpt.gcfg,
        tcfg=tcfg or ckpt.tcfg,
        encoder=encoder,
        decoder=decoder,
        discriminator=discriminator,
        opt_gen=_restore_optimizer(ckpt, "opt_gen", ckpt.opt_gen_t),
        opt_disc=_restore_optimizer(ckpt, "opt_disc", ckpt.opt_disc_t),
        schedule=BatchSchedule.from_state(ckpt.schedule_state),
        step=ckpt.step,
        token_weights=ckpt.tensors.get("token_weights"),
    )
    state.opt_gen.check(state.generator_params())
    state.opt_disc.check(state.discriminator_params())
    log.info(f"Loaded checkpoint {path} at step {state.step}")
    return state
