"""Shared numerics: special functions, reproducible RNG streams, disk quadrature.

The special functions are thin domain-checked wrappers over scipy.special;
independent series/quadrature oracles live in the test suite and pin these
wrappers to the contract tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from numpy.random import Generator, Philox
from scipy import special as _sp

from .errors import ConvergenceError, DomainError

_UINT64_MAX = 2**64


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream keyed by (seed, stream_id).

    Two streams with identical keys replay bitwise-identical sequences; distinct
    stream_ids give statistically independent substreams (Philox), so parallel
    sweeps can hand one stream to each task with no coordination.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value < _UINT64_MAX:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def generator(self) -> Generator:
        key = np.array([self.seed, self.stream_id], dtype=np.uint64)
        return Generator(Philox(key=key))


def as_generator(rng: "RngStream | Generator") -> Generator:
    """Accept either a stream key or a live generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, Generator):
        return rng
    raise DomainError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance contract for the adaptive disk quadrature."""

    relative_tolerance: float = 1e-9
    absolute_tolerance: float = 1e-12
    max_subdivisions: int = 8

    def __post_init__(self):
        if self.relative_tolerance <= 0 or self.absolute_tolerance <= 0:
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be at least 1")


def gamma_fn(a: float) -> float:
    """Gamma function for a > 0."""
    if not a > 0:
        raise DomainError(f"gamma_fn requires a > 0, got {a}")
    return float(_sp.gamma(a))


def gamma_upper_incomplete(a: float, x: float) -> float:
    """Upper incomplete gamma function Gamma(a, x) for a > 0, x >= 0."""
    if not a > 0:
        raise DomainError(f"gamma_upper_incomplete requires a > 0, got {a}")
    if x < 0:
        raise DomainError(f"gamma_upper_incomplete requires x >= 0, got {x}")
    return float(_sp.gammaincc(a, x) * _sp.gamma(a))


def bessel_k(order: float, x: float) -> float:
    """Modified Bessel function of the second kind, K_order(x), x > 0."""
    if not x > 0:
        raise DomainError(f"bessel_k requires x > 0, got {x}")
    return float(_sp.kv(order, x))


def erf(x):
    """Error function; accepts scalars or arrays."""
    out = _sp.erf(x)
    return float(out) if np.isscalar(x) else out


def sample_gamma(shape: float, scale: float, rng: RngStream | Generator, size=None):
    """Draw gamma variates with the given shape and scale.

    With size=None a single float is returned. Passing an RngStream restarts
    the stream at its origin; pass a Generator to continue an existing one.
    """
    if not shape > 0 or not scale > 0:
        raise DomainError(f"gamma sampler requires shape, scale > 0, got {shape}, {scale}")
    gen = as_generator(rng)
    draws = gen.gamma(shape, scale, size=size)
    return float(draws) if size is None else draws


@lru_cache(maxsize=32)
def _gauss_unit(order: int):
    """Gauss-Legendre nodes/weights mapped from [-1, 1] to [0, 1]."""
    nodes, weights = leggauss(order)
    return (nodes + 1.0) / 2.0, weights / 2.0


_BASE_ORDER = 8


def integrate_disk(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    center,
    radius: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Integrate a scalar field over a disk in the plane.

    The field ``f`` must accept equal-shaped numpy arrays (x, y) and return an
    array of values. The disk is mapped area-preservingly onto the unit square
    (r = R*sqrt(u), theta = 2*pi*v) and integrated with tensor Gauss-Legendre
    rules whose order doubles until two refinements agree within the spec
    tolerances. Raises ConvergenceError (carrying the best estimate) if the
    subdivision budget is exhausted first.
    """
    if spec is None:
        spec = QuadratureSpec()
    if not radius > 0:
        raise DomainError(f"disk radius must be positive, got {radius}")
    cx, cy = float(center[0]), float(center[1])
    area = math.pi * radius * radius

    def estimate(order: int) -> float:
        u, wu = _gauss_unit(order)
        v, wv = _gauss_unit(order)
        r = radius * np.sqrt(u)
        theta = 2.0 * math.pi * v
        x = cx + np.outer(r, np.cos(theta))
        y = cy + np.outer(r, np.sin(theta))
        values = np.asarray(f(x, y), dtype=float)
        return area * float(wu @ values @ wv)

    order = _BASE_ORDER
    previous = estimate(order)
    for _ in range(spec.max_subdivisions):
        order *= 2
        current = estimate(order)
        if abs(current - previous) <= spec.absolute_tolerance + spec.relative_tolerance * abs(current):
            return current
        previous = current
    raise ConvergenceError(
        f"disk quadrature did not converge within {spec.max_subdivisions} refinements",
        best_estimate=previous,
    )
