"""
halton module
deterministic low-dispersion sample sequences and the dispersion based suboptimality bound
"""
import math
from dataclasses import dataclass
import numpy as np
from scipy.spatial import cKDTree


class DispersionError(ValueError):
    """
    raised when the suboptimality bound is requested inside the edge-starvation regime
    """


def first_primes(count):
    """
    returns the first `count` primes in increasing order
    """
    primes = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def nth_prime(d):
    return first_primes(d)[-1]


@dataclass(frozen=True)
class HaltonSpec:
    d: int

    def __post_init__(self):
        if self.d < 1:
            raise ValueError(f"dimension must be at least 1, got {self.d}")

    @property
    def bases(self):
        return tuple(first_primes(self.d))


def _radical_inverse(indices, base):
    indices = np.array(indices, dtype=np.int64)
    result = np.zeros(indices.shape, dtype=np.float64)
    scale = 1.0 / base
    while np.any(indices > 0):
        indices, digits = np.divmod(indices, base)
        result += digits * scale
        scale /= base
    return result


def halton_point(index, spec):
    """
    returns the `index`-th element (1-based) of the Halton sequence described by `spec`
    """
    if index < 1:
        raise ValueError(f"Halton indices start at 1, got {index}")
    return np.array([_radical_inverse(index, b) for b in spec.bases], dtype=np.float64)


def halton_prefix(n, spec, offset_seed=None):
    """
    returns the first `n` Halton points as an (n, d) array

    with `offset_seed` every coordinate axis is shifted by a seeded random amount (mod 1)
    """
    if n < 1:
        raise ValueError(f"prefix length must be at least 1, got {n}")
    indices = np.arange(1, n + 1)
    points = np.stack([_radical_inverse(indices, b) for b in spec.bases], axis=1)
    if offset_seed is not None:
        offsets = np.random.default_rng(offset_seed).uniform(0.0, 1.0, spec.d)
        points = np.mod(points + offsets[None, :], 1.0)
    return points


def dispersion_bound(n, d):
    """
    upper bound p_d * n^(-1/d) on the dispersion of the first n Halton points
    """
    if n < 1 or d < 1:
        raise ValueError(f"n and d must be positive, got n={n}, d={d}")
    return nth_prime(d) * n ** (-1.0 / d)


def measure_dispersion(points, grid_resolution):
    """
    estimates the radius of the largest empty ball among `points` by sweeping a regular grid
    over the unit hypercube; the estimate is low by at most the grid cell diameter
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] == 0:
        raise ValueError("cannot measure dispersion of an empty point set")
    if grid_resolution <= 0:
        raise ValueError(f"grid resolution must be positive, got {grid_resolution}")
    d = points.shape[1]
    if d > 3:
        raise ValueError(f"grid sweep is only practical for d <= 3, got d={d}")

    steps = int(math.ceil(1.0 / grid_resolution)) + 1
    axis = np.linspace(0.0, 1.0, steps)
    grid = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1).reshape(-1, d)
    distances, _ = cKDTree(points).query(grid, k=1)
    return float(distances.max())


def suboptimality_factor(dispersion, radius):
    """
    bound 1 + 2D / (r - 2D) on the ratio between the r-disk roadmap path and the optimum
    """
    if dispersion <= 0:
        raise ValueError(f"dispersion must be positive, got {dispersion}")
    if radius <= 2 * dispersion:
        raise DispersionError(
            f"radius {radius} <= 2 * dispersion {2 * dispersion}: edge starvation, bound undefined"
        )
    return 1.0 + 2 * dispersion / (radius - 2 * dispersion)
