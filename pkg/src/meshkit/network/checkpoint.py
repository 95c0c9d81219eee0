"""Versioned .npz checkpoints: config echo plus one array per parameter and buffer."""
import dataclasses
import json
import logging
import os
import tempfile

import numpy as np

from meshkit.errors import ParseError
from meshkit.network.config import NetworkConfig
from meshkit.network.model import build_model

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
PARAM_PREFIX = "param:"
BUFFER_PREFIX = "buffer:"


def save_checkpoint(path, model, epoch=None):
    """Write to a temporary file in the target folder, then rename over path."""
    arrays = {
        "__format__": np.asarray(FORMAT_VERSION),
        "__config__": np.asarray(json.dumps(dataclasses.asdict(model.config))),
        "__epoch__": np.asarray(-1 if epoch is None else epoch),
    }
    arrays.update({PARAM_PREFIX + name: p.value for name, p in model.params.items()})
    arrays.update({BUFFER_PREFIX + name: b for name, b in model.buffers.items()})
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(suffix=".npz", dir=folder)
    try:
        with os.fdopen(fd, "wb") as f:
            np.savez(f, **arrays)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise
    logger.debug("checkpoint written to %s", path)
    return path


def read_config(archive, path):
    version = int(archive["__format__"])
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported checkpoint format {version}", path)
    return NetworkConfig(**json.loads(str(archive["__config__"])))


def load_checkpoint(path):
    """Rebuild the model stored at path; returns (model, epoch)."""
    try:
        archive = np.load(path, allow_pickle=False)
    except (OSError, ValueError) as exc:
        raise ParseError(f"cannot read checkpoint: {exc}", path)
    with archive:
        if "__format__" not in archive.files or "__config__" not in archive.files:
            raise ParseError("not a meshkit checkpoint", path)
        model = build_model(read_config(archive, path))
        for name, p in model.params.items():
            key = PARAM_PREFIX + name
            if key not in archive.files or archive[key].shape != p.value.shape:
                raise ParseError(f"parameter {name!r} missing or misshapen", path)
            p.value = archive[key].astype(np.float64)
        for name, buf in model.buffers.items():
            key = BUFFER_PREFIX + name
            if key in archive.files:
                buf[...] = archive[key]
        epoch = int(archive["__epoch__"])
    return model, (None if epoch < 0 else epoch)
