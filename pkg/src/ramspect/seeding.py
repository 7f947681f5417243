"""Deterministic sub-seed derivation.

Every randomized stage draws its seed as sha256(master:tag:index) so that
runs are reproducible from one master seed, stages are decoupled (changing
the retry count of one never shifts another's stream), and retry attempts
can be evaluated speculatively in any order with identical outcomes.
"""

from __future__ import annotations

import hashlib


def derive_seed(master: int, tag: str, index: int = 0) -> int:
    digest = hashlib.sha256(f"{master}:{tag}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")
