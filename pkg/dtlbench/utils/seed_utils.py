"""
Hash-based seed derivation
"""

import hashlib


def derive_seed(base_seed: int, label: str) -> int:
    """Seed for one component, independent of the order components run in"""
    base = str(base_seed).encode("utf-8")
    return int(hashlib.md5(base + label.encode("utf-8")).hexdigest()[:8], 16) % (2**31)
