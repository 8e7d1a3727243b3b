"""Preamble construction and received-signal synthesis.

Each device's preamble is the vectorization of a rank-1 tensor built from
per-mode unit-norm Gaussian vectors, so the length-L sequence equals the
Kronecker product of its factors and the noisy superposition of all active
devices is a CP-structured tensor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tensors import ComplexTensor, FactorMatrices, khatri_rao, kruskal


@dataclass(frozen=True)
class PreambleSet:
    """Known preamble factors for all K devices."""

    factors: FactorMatrices

    def __post_init__(self):
        if any(l < 2 for l in self.factors.mode_dims):
            raise ValueError("every mode dimension must be >= 2")

    @property
    def L(self) -> int:
        return self.factors.L

    @property
    def K(self) -> int:
        return self.factors.K

    @property
    def dims(self) -> tuple[int, ...]:
        return self.factors.mode_dims


def gen_preambles(dims: Sequence[int], K: int, rng: np.random.Generator) -> PreambleSet:
    """Draw i.i.d. circular complex Gaussian factors, normalized column-wise."""
    dims = [int(l) for l in dims]
    if len(dims) < 2 or any(l < 2 for l in dims):
        raise ValueError(f"need d >= 2 factor dims, all >= 2, got {dims}")
    if K < 1:
        raise ValueError("K must be >= 1")
    mats = []
    for l in dims:
        a = rng.standard_normal((l, K)) + 1j * rng.standard_normal((l, K))
        a /= np.linalg.norm(a, axis=0, keepdims=True)
        mats.append(a)
    return PreambleSet(FactorMatrices(tuple(mats)))


def assemble_preamble_matrix(p: PreambleSet) -> np.ndarray:
    """L x K matrix whose column k is the Kronecker fold of device k's
    factor columns (equals the Khatri-Rao product of the factors)."""
    return khatri_rao(list(p.factors))


def synthesize_received(p: PreambleSet, X: np.ndarray, sigma_n2: float,
                        rng: np.random.Generator) -> ComplexTensor:
    """Noisy received tensor: kruskal(factors, X) + CN(0, sigma_n2) noise."""
    if sigma_n2 < 0:
        raise ValueError("noise variance must be >= 0")
    signal = kruskal(p.factors, X)
    if sigma_n2 == 0.0:
        return signal
    shape = signal.dims
    noise = math.sqrt(sigma_n2 / 2.0) * (
        rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    return ComplexTensor(signal.array + noise)


def snr_to_noise_variance(snr_db: float, xi: float) -> float:
    """SNR is defined as 10 log10(xi / sigma_n^2)."""
    return xi * 10.0 ** (-snr_db / 10.0)


# Factorizations used by the experiments for common preamble lengths.
DEFAULT_FACTORIZATIONS: dict[int, tuple[int, ...]] = {
    400: (20, 20),
    225: (15, 15),
    200: (20, 10),
    100: (10, 10),
    50: (10, 5),
}

# Tensor-order study: same L = 225 split into d = 2, 3, 4 modes.
ORDER_FACTORIZATIONS_225: dict[int, tuple[int, ...]] = {
    2: (15, 15),
    3: (9, 5, 5),
    4: (5, 5, 3, 3),
}
