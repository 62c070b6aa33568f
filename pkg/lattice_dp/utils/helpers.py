import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterator, List, Sequence, TypeVar

import numpy as np

T = TypeVar('T')
R = TypeVar('R')


def inputs_digest(payload) -> str:
    """SHA-256 of the canonical JSON form of the inputs."""
    blob = json.dumps(payload, sort_keys=True, separators=(',', ':'), default=_json_default)
    return hashlib.sha256(blob.encode('utf-8')).hexdigest()


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def spawn_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators derived from one seed; stable regardless of thread scheduling."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.default_rng(child) for child in children]


def thread_count() -> int:
    from .. import current_config
    return max(1, int(current_config().THREADS))


def parallel_map(fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
    """Map over items with a thread pool; results come back in input order."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def chunked(start: int, stop: int, size: int) -> Iterator[range]:
    for lo in range(start, stop, size):
        yield range(lo, min(lo + size, stop))


def bit_matrix(masks: np.ndarray, n: int) -> np.ndarray:
    """Row r holds the n low bits of masks[r] (bit i in column i)."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(float)


def to_gray_code(x: int) -> int:
    return (x >> 1) ^ x


def gray_code_flips(num_bits: int) -> Iterator[int]:
    """Index of the bit flipped at each step of the reflected Gray code, 2^num_bits - 1 steps."""
    previous = 0
    for i in range(1, 2 ** num_bits):
        current = to_gray_code(i)
        yield (current ^ previous).bit_length() - 1
        previous = current


def set_partitions(n: int) -> Iterator[List[int]]:
    """
    All partitions of range(n) as restricted growth strings: block label per element,
    a[0] = 0 and a[i] <= 1 + max(a[:i]).
    """
    if n == 0:
        return
    a = [0] * n
    b = [1] * n  # b[i] = 1 + max(a[:i])
    while True:
        yield list(a)
        i = n - 1
        while i > 0 and a[i] == b[i]:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0
            b[j] = max(b[j - 1], a[j - 1] + 1)


def mixed_radix_digits(indices: np.ndarray, base: int, width: int) -> np.ndarray:
    """Most-significant-first base-`base` digits of each index, shape (len, width)."""
    indices = np.asarray(indices, dtype=np.int64)
    powers = base ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return (indices[:, None] // powers[None, :]) % base

