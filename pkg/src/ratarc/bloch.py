"""Area of exceptional sets: the Bloch-Cartan product bound and small-norm regions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ratarc.disk import count_zeros

Holo = Callable[[np.ndarray], np.ndarray]

# Samples are drawn in fixed-size blocks, each from its own (seed, block) stream,
# so results do not depend on how blocks are grouped into batches.
BLOCK = 1 << 16
SUP_POINTS = 1 << 14


@dataclass(frozen=True)
class RootConfig:
    roots: tuple[complex, ...]
    H: float

    def __post_init__(self) -> None:
        if not self.roots:
            raise ValueError("root list must be nonempty")
        if self.H <= 0:
            raise ValueError("H must be positive")


@dataclass(frozen=True)
class AreaEstimate:
    value: float
    stderr: float
    method: str
    seed: int
    samples: int
    bound: float

    @property
    def within_bound(self) -> bool:
        """value <= bound + 3 standard errors."""
        return self.value <= self.bound + 3 * self.stderr


def uniform_block(seed: int, block: int, size: int) -> np.ndarray:
    """(size, 2) uniforms in [0, 1) for one counter block."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, block])))
    return rng.random((size, 2))


def _blocks(seed: int, samples: int):
    for b, start in enumerate(range(0, samples, BLOCK)):
        yield uniform_block(seed, b, min(BLOCK, samples - start))


def _estimate(indicator: Callable[[np.ndarray], np.ndarray], sampler: Callable,
              area: float, samples: int, seed: int, bound: float) -> AreaEstimate:
    hits = 0
    for u in _blocks(seed, samples):
        hits += int(np.count_nonzero(indicator(sampler(u))))
    p = hits / samples
    return AreaEstimate(float(area * p), float(area * math.sqrt(p * (1 - p) / samples)), "monte-carlo",
                        seed, samples, bound)


def exceptional_area(cfg: RootConfig, bbox: tuple[float, float, float, float],
                     samples: int = 100_000, seed: int = 0) -> AreaEstimate:
    """Area of {z : prod |z - a_i| <= (H/2e)^n}, Monte Carlo over bbox = (x0, x1, y0, y1)."""
    if samples < 10_000:
        raise ValueError("samples must be >= 1e4")
    x0, x1, y0, y1 = bbox
    roots = np.asarray(cfg.roots, dtype=complex)
    if (roots.real.min() - cfg.H < x0 or roots.real.max() + cfg.H > x1
            or roots.imag.min() - cfg.H < y0 or roots.imag.max() + cfg.H > y1):
        raise ValueError("bbox too small: must contain every root inflated by H")
    n = len(roots)
    level = n * math.log(cfg.H / (2 * math.e))

    def sampler(u):
        return (x0 + (x1 - x0) * u[:, 0]) + 1j * (y0 + (y1 - y0) * u[:, 1])

    def indicator(z):
        return np.sum(np.log(np.abs(z[:, None] - roots[None, :])), axis=1) <= level

    return _estimate(indicator, sampler, (x1 - x0) * (y1 - y0), samples, seed,
                     math.pi * cfg.H ** 2)


def default_bbox(cfg: RootConfig) -> tuple[float, float, float, float]:
    roots = np.asarray(cfg.roots, dtype=complex)
    return (roots.real.min() - cfg.H, roots.real.max() + cfg.H,
            roots.imag.min() - cfg.H, roots.imag.max() + cfg.H)


def _disk_sampler(r: float):
    def sampler(u):
        return r * np.sqrt(u[:, 0]) * np.exp(2j * np.pi * u[:, 1])
    return sampler


def _sup_log(f: Holo, radius: float) -> float:
    # maximum principle: sup over the disk sits on the boundary circle
    z = radius * np.exp(2j * np.pi * np.arange(SUP_POINTS) / SUP_POINTS)
    return float(np.max(np.log(np.abs(f(z)))))


def small_norm_threshold(sup_log: float, eta: float, offset: float) -> float:
    return -(2 + math.log(1 / eta) / math.log(1.5)) * sup_log + 3 * offset


def _small_norm(f: Holo, r: float, eta: float, samples: int, seed: int, offset: float) -> AreaEstimate:
    level = small_norm_threshold(_sup_log(f, 3 * r), eta, offset)

    def indicator(z):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(f(z))) < level

    return _estimate(indicator, _disk_sampler(r), math.pi * r * r, samples, seed,
                     4 * math.pi * math.e ** 2 * eta ** 2)


def _check_params(r: float, eta: float) -> None:
    if not 0 < r < 1 / 3:
        raise ValueError("need 0 < r < 1/3")
    if not 0 < eta <= 1:
        raise ValueError("need 0 < eta <= 1")


def small_norm_area(f: Holo, r: float, eta: float, samples: int = 100_000,
                    seed: int = 0) -> AreaEstimate:
    """Area of {z in Delta_r : ln|f| < -(2 + ln(1/eta)/ln(3/2)) sup_{Delta_3r} ln|f| + 3 ln|f(0)|}.

    The expected bound is 4 pi e^2 eta^2 (``AreaEstimate.bound``).
    """
    _check_params(r, eta)
    f0 = abs(complex(np.asarray(f(np.array([0j])))[0]))
    if f0 == 0:
        raise ValueError("f(0) = 0: use small_norm_area_vanishing")
    return _small_norm(f, r, eta, samples, seed, math.log(f0))


def vanishing_order(f: Holo, r: float, coeffs: Sequence[complex] | None = None,
                    max_order: int = 64) -> tuple[int, complex]:
    """(i, h(0)) for f = z^i h; read off coefficients when given, else numerically."""
    if coeffs is not None:
        for i, c in enumerate(coeffs):
            if c != 0:
                return i, complex(c)
        raise ValueError("all series coefficients vanish")
    i = count_zeros(f, r / 10).count
    if i > max_order:
        raise ValueError(f"order {i} exceeds the truncation {max_order}")
    rho = r / 40
    m = 64
    omega = np.exp(2j * np.pi * np.arange(m) / m)
    h0 = complex(np.mean(f(rho * omega) * omega ** (-i)) / rho ** i)
    return i, h0


def small_norm_area_vanishing(f: Holo, r: float, eta: float, samples: int = 100_000,
                              seed: int = 0, coeffs: Sequence[complex] | None = None,
                              max_order: int = 64) -> AreaEstimate:
    """Variant for f = z^i h, h(0) != 0: offset 3 (ln|h(0)| + i ln(3r))."""
    _check_params(r, eta)
    i, h0 = vanishing_order(f, r, coeffs, max_order)
    if i > max_order:
        raise ValueError(f"order {i} exceeds the truncation {max_order}")
    offset = math.log(abs(h0)) + i * math.log(3 * r)
    return _small_norm(f, r, eta, samples, seed, offset)
