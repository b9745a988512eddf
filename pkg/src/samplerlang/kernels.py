"""Hot numeric kernels: the linear-congruential state sequence and weighted
prefix statistics.

Each kernel has a numba-jitted fast path and a pure-numpy fallback; the
fallback is forced by setting SAMPLERLANG_PURE_NUMPY=1 in the environment.
Both paths are bit-identical: the fallback generates LCG states by doubling
affine blocks instead of looping.
"""
from __future__ import annotations

import os

import numpy as np

LCG_MULT = 6364136223846793005
LCG_INC = 1442695040888963407
DEFAULT_SEED = 0x9E3779B97F4A7C15
_MASK = (1 << 64) - 1

PURE_NUMPY = os.environ.get("SAMPLERLANG_PURE_NUMPY", "") == "1"

try:  # pragma: no cover - exercised indirectly
    if PURE_NUMPY:
        raise ImportError("numpy fallback forced")
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def splitmix64(x: int) -> int:
    """One splitmix64 step; used to derive per-extern seeds."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def fnv1a64(data: str) -> int:
    h = 0xCBF29CE484222325
    for byte in data.encode("utf-8"):
        h ^= byte
        h = (h * 0x100000001B3) & _MASK
    return h


def derive_seed(global_seed: int, name: str) -> int:
    return splitmix64((global_seed ^ fnv1a64(name)) & _MASK)


@njit(cache=True)
def _lcg_states_numba(seed: np.uint64, n: np.int64) -> np.ndarray:  # pragma: no cover
    out = np.empty(n, dtype=np.uint64)
    state = seed
    a = np.uint64(LCG_MULT)
    c = np.uint64(LCG_INC)
    for i in range(n):
        state = a * state + c
        out[i] = state
    return out


def _lcg_states_numpy(seed: int, n: int) -> np.ndarray:
    """States s_1..s_n of s_{i+1} = a*s_i + c mod 2^64, without a Python loop.

    Blocks double in size: given states[0:m] and the affine map (A, C) with
    s_{i+m} = A*s_i + C, the next block is A*states[0:m] + C elementwise.
    """
    if n <= 0:
        return np.empty(0, dtype=np.uint64)
    out = np.empty(n, dtype=np.uint64)
    a = np.uint64(LCG_MULT)
    c = np.uint64(LCG_INC)
    out[0] = (LCG_MULT * seed + LCG_INC) & _MASK
    m = 1
    block_a, block_c = a, c
    with np.errstate(over="ignore"):
        while m < n:
            take = min(m, n - m)
            out[m : m + take] = block_a * out[:take] + block_c
            block_c = block_a * block_c + block_c
            block_a = block_a * block_a
            m += take
    return out


def lcg_states(seed: int, n: int) -> np.ndarray:
    if HAS_NUMBA and not PURE_NUMPY:
        return _lcg_states_numba(np.uint64(seed & _MASK), np.int64(n))
    return _lcg_states_numpy(seed & _MASK, n)


def lcg_uniforms(seed: int, n: int) -> np.ndarray:
    """The first n uniforms in [0, 1): top 53 bits of each 64-bit state."""
    states = lcg_states(seed, n)
    return (states >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)


@njit(cache=True)
def _weighted_sums_numba(values, weights):  # pragma: no cover
    n = values.shape[0]
    sw = np.empty(n, dtype=np.float64)
    swx = np.empty(n, dtype=np.float64)
    tw = 0.0
    tx = 0.0
    for i in range(n):
        tw += weights[i]
        tx += weights[i] * values[i]
        sw[i] = tw
        swx[i] = tx
    return sw, swx


def _weighted_sums_numpy(values, weights):
    return np.cumsum(weights), np.cumsum(weights * values)


def weighted_prefix_sums(values: np.ndarray, weights: np.ndarray):
    """Running total weight and running weighted sum, for ladder statistics."""
    values = np.asarray(values, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if HAS_NUMBA and not PURE_NUMPY:
        return _weighted_sums_numba(values, weights)
    return _weighted_sums_numpy(values, weights)
