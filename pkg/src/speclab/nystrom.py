"""Quadrature discretization of kernel operators on L2[0, 1].

A kernel k(x, y) >= 0 acting by ``(Kf)(x) = integral of k(x, y) f(y) dy``
is replaced by the Nystrom matrix ``A_ij = k(x_i, x_j) w_j`` carrying the
grid weights.  Row action then equals quadrature of the integral, so
vectors stay point samples of functions, and the weighted adjoint of
:mod:`speclab.linops` matches the transposed kernel k(y, x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DomainError
from .linops import PositiveOperator, spectral_radius

MIDPOINT = "midpoint"
GAUSS_LEGENDRE = "gauss-legendre"
SCHEMES = (MIDPOINT, GAUSS_LEGENDRE)

NAMED_KERNELS = ("constant", "product", "gauss", "exp-decay")

_DEFAULT_PARAMS = {
    "constant": (1.0,),
    "product": (1.0,),
    "gauss": (0.25,),
    "exp-decay": (1.0,),
}


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and positive weights for integration over [0, 1].

    Nodes are strictly increasing and interior; weights are positive and
    sum to 1 (the length of the interval) within 1e-14.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 1 or weights.ndim != 1 or nodes.shape != weights.shape:
            raise DomainError("nodes and weights must be vectors of equal length")
        if nodes.size < 1:
            raise DomainError("grid must contain at least one node")
        if np.any(nodes <= 0) or np.any(nodes >= 1):
            raise DomainError("nodes must lie strictly inside (0, 1)")
        if np.any(np.diff(nodes) <= 0):
            raise DomainError("nodes must be strictly increasing")
        if np.any(weights <= 0) or not np.all(np.isfinite(weights)):
            raise DomainError("weights must be strictly positive and finite")
        if abs(weights.sum() - 1.0) > 1e-14:
            raise DomainError(f"weights must sum to 1, got {weights.sum()!r}")
        nodes.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return self.nodes.shape[0]


def build_grid(n: int, scheme: str = MIDPOINT) -> QuadratureGrid:
    """Quadrature grid of the named scheme on [0, 1]."""
    if n < 1:
        raise DomainError(f"grid size must be at least 1, got {n}")
    if scheme == MIDPOINT:
        nodes = (np.arange(n) + 0.5) / n
        weights = np.full(n, 1.0 / n)
    elif scheme == GAUSS_LEGENDRE:
        x, w = np.polynomial.legendre.leggauss(n)
        nodes = 0.5 * (x + 1.0)
        weights = 0.5 * w
    else:
        raise DomainError(f"unknown quadrature scheme {scheme!r}, expected one of {SCHEMES}")
    return QuadratureGrid(nodes, weights)


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """Kernel on [0, 1]^2: a named catalog entry or a separable sum.

    Separable factors are polynomial coefficient lists, constant term
    first, defining ``k(x, y) = sum_m u_m(x) v_m(y)``.  Non-negativity is
    checked on the grid at discretization time, not symbolically.
    """

    name: str | None = None
    params: tuple = ()
    factors: tuple | None = None

    def __post_init__(self):
        if (self.name is None) == (self.factors is None):
            raise DomainError("kernel must be either named or a separable sum")
        if self.name is not None:
            if self.name not in NAMED_KERNELS:
                raise DomainError(f"unknown kernel {self.name!r}, expected one of {NAMED_KERNELS}")
            params = tuple(float(p) for p in self.params)
            if not params:
                params = _DEFAULT_PARAMS[self.name]
            if len(params) != 1:
                raise DomainError(f"kernel {self.name!r} takes one parameter, got {len(params)}")
            if not np.isfinite(params[0]):
                raise DomainError("kernel parameters must be finite")
            if self.name == "gauss" and params[0] <= 0:
                raise DomainError("gauss kernel needs a positive length scale")
            if self.name == "exp-decay" and params[0] < 0:
                raise DomainError("exp-decay kernel needs a non-negative rate")
            object.__setattr__(self, "params", params)
        else:
            factors = []
            for m, pair in enumerate(self.factors):
                if len(pair) != 2:
                    raise DomainError(f"factor {m} must be a (u, v) coefficient pair")
                u, v = (tuple(float(c) for c in side) for side in pair)
                if not u or not v:
                    raise DomainError(f"factor {m} coefficients must be non-empty")
                if not all(np.isfinite(c) for c in u + v):
                    raise DomainError(f"factor {m} coefficients must be finite")
                factors.append((u, v))
            if not factors:
                raise DomainError("separable kernel needs at least one factor pair")
            object.__setattr__(self, "factors", tuple(factors))
            object.__setattr__(self, "params", ())

    @classmethod
    def named(cls, name: str, *params: float) -> "KernelSpec":
        return cls(name=name, params=tuple(params))

    @classmethod
    def separable(cls, factors) -> "KernelSpec":
        return cls(factors=tuple(factors))

    @property
    def rank(self) -> int | None:
        """Number of separable factors, None for named kernels."""
        return None if self.factors is None else len(self.factors)

    def evaluate(self, x, y) -> np.ndarray:
        """Kernel values on broadcastable node arrays."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.name == "constant":
            return np.broadcast_to(self.params[0], np.broadcast_shapes(x.shape, y.shape)).copy()
        if self.name == "product":
            return self.params[0] * x * y
        if self.name == "gauss":
            ell = self.params[0]
            return np.exp(-((x - y) ** 2) / (2.0 * ell * ell))
        if self.name == "exp-decay":
            return np.exp(-self.params[0] * np.abs(x - y))
        total = np.zeros(np.broadcast_shapes(x.shape, y.shape))
        for u, v in self.factors:
            total = total + npoly.polyval(x, np.asarray(u)) * npoly.polyval(y, np.asarray(v))
        return total


def discretize_kernel(spec: KernelSpec, grid: QuadratureGrid) -> PositiveOperator:
    """Nystrom matrix ``A_ij = k(x_i, x_j) w_j`` with the grid weights."""
    nodes = grid.nodes
    values = spec.evaluate(nodes[:, np.newaxis], nodes[np.newaxis, :])
    if np.any(values < 0):
        i, j = np.unravel_index(int(np.argmin(values)), values.shape)
        raise DomainError(
            f"kernel is negative at node pair (x_{i}, x_{j}) = "
            f"({nodes[i]!r}, {nodes[j]!r}): value {values[i, j]!r}"
        )
    entries = values * grid.weights[np.newaxis, :]
    return PositiveOperator(entries, weights=grid.weights)


def integrate(grid: QuadratureGrid, values) -> float:
    """Quadrature sum ``sum_i w_i values_i``."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.shape[0] != grid.n:
        raise DomainError(f"values must be a vector of length {grid.n}, got shape {values.shape}")
    return float(grid.weights @ values)


def convergence_study(spec: KernelSpec, scheme: str, sizes) -> list[tuple[int, float]]:
    """Spectral radius of the discretization at each grid size.

    Successive differences of the returned radii certify grid adequacy
    for the smooth shipped kernels.
    """
    sizes = [int(n) for n in sizes]
    if not sizes:
        raise DomainError("sizes must be non-empty")
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise DomainError(f"sizes must be strictly ascending, got {sizes}")
    return [(n, spectral_radius(discretize_kernel(spec, build_grid(n, scheme)))) for n in sizes]
