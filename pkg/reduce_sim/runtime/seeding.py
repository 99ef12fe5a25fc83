"""Stable seed derivation so every job owns its random stream."""

from __future__ import annotations

import hashlib

SEED_BITS = 64


def derive_seed(base: int | str, *parts: int | str) -> int:
    """Hash ``base`` and ``parts`` into a 64-bit unsigned seed.

    Independent of process, platform and ``PYTHONHASHSEED``.
    """
    text = "/".join(str(p) for p in (base, *parts))
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[: SEED_BITS // 8], "big")
