"""Loader for the IDX image/label file format."""

from __future__ import annotations

import logging
import struct
from pathlib import Path

import numpy as np

from reduce_sim.dataio.dataset import Dataset, Split
from reduce_sim.errors import IdxCountMismatchError, IdxMagicError, IdxTruncatedError

logger = logging.getLogger(__name__)

# Big-endian magic: two zero bytes, type code 0x08 (unsigned byte), dimension count
IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


def _read_header(payload: bytes, expected_magic: int, path: Path) -> tuple[int, ...]:
    if len(payload) < 4:
        raise IdxTruncatedError(f"{path}: file shorter than the magic number")
    (magic,) = struct.unpack(">I", payload[:4])
    if magic != expected_magic:
        raise IdxMagicError(
            f"{path}: magic 0x{magic:08x}, expected 0x{expected_magic:08x}"
        )
    num_dims = magic & 0xFF
    header_size = 4 + 4 * num_dims
    if len(payload) < header_size:
        raise IdxTruncatedError(f"{path}: header needs {header_size} bytes")
    return struct.unpack(f">{num_dims}I", payload[4:header_size])


def _read_body(payload: bytes, dims: tuple[int, ...], path: Path) -> np.ndarray:
    header_size = 4 + 4 * len(dims)
    expected = int(np.prod(dims, dtype=np.int64))
    body = payload[header_size:]
    if len(body) < expected:
        raise IdxTruncatedError(
            f"{path}: payload has {len(body)} bytes, header promises {expected}"
        )
    return np.frombuffer(body, dtype=np.uint8, count=expected).reshape(dims)


def load_idx(
    images_path: Path | str,
    labels_path: Path | str,
    normalize: bool = True,
    split: Split = Split.TRAIN,
) -> Dataset:
    """Read an IDX image file and its label file into a Dataset.

    Images are flattened row-major; with ``normalize`` bytes are divided
    by 255 so the features lie in [0, 1].
    """
    images_path = Path(images_path)
    labels_path = Path(labels_path)

    image_bytes = images_path.read_bytes()
    image_dims = _read_header(image_bytes, IMAGES_MAGIC, images_path)
    images = _read_body(image_bytes, image_dims, images_path)

    label_bytes = labels_path.read_bytes()
    label_dims = _read_header(label_bytes, LABELS_MAGIC, labels_path)
    labels = _read_body(label_bytes, label_dims, labels_path)

    if image_dims[0] != label_dims[0]:
        raise IdxCountMismatchError(
            f"{images_path} holds {image_dims[0]} images but "
            f"{labels_path} holds {label_dims[0]} labels"
        )

    inputs = images.reshape(image_dims[0], -1).astype(np.float64)
    if normalize:
        inputs /= 255.0
    labels = labels.astype(np.int64)
    num_classes = int(labels.max()) + 1 if labels.size else 1
    logger.info(
        "Loaded %d IDX samples (%d features, %d classes) from %s",
        inputs.shape[0], inputs.shape[1], num_classes, images_path,
    )
    return Dataset(inputs, labels, num_classes, split)
