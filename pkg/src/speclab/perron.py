"""Irreducibility, Perron eigenpairs, and shared-density operator families.

An irreducible non-negative matrix has a simple Perron root with strictly
positive right and left eigenvectors f and g.  Normalized to
``<f, g> = 1``, the product density ``h = f * g`` integrates to 1, and
families of operators sharing one h are the inputs of the weighted-sum
spectral radius bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    DomainError,
    EigensolverError,
    FamilyToleranceError,
    ReducibleOperatorError,
)
from .linops import (
    EIG_TOL,
    PositiveOperator,
    _power_perron,
    adjoint,
    effective_weights,
    inner_product,
    power_series_apply,
    same_space,
    similarity_scale,
    spectral_radius,
    weighted_norm,
)

#: Allowed drift of each member's f*g density from the shared h,
#: relative to max|h|.  Two eigenpair computations accumulate here.
FAMILY_TOL = 1e-9

SIMILARITY = "similarity"
ADJOINT_PAIR = "adjoint-pair"
SERIES = "series"
EXPLICIT = "explicit"
FAMILY_KINDS = (SIMILARITY, ADJOINT_PAIR, SERIES)


def _support_labels(op: PositiveOperator):
    support = csr_matrix(op.entries > 0)
    return connected_components(support, directed=True, connection="strong")


def is_irreducible(op: PositiveOperator) -> bool:
    """True iff the support digraph (edge i -> j when K_ij > 0) is strongly
    connected; for dim 1, true iff the single entry is positive."""
    if op.dim == 1:
        return op.entries[0, 0] > 0
    ncomp, _ = _support_labels(op)
    return ncomp == 1


def _witness_block(op: PositiveOperator) -> list[int]:
    """An index set A with no support edge from A to its complement."""
    if op.dim == 1:
        return [0]
    support = op.entries > 0
    ncomp, labels = _support_labels(op)
    for comp in range(ncomp):
        mask = labels == comp
        if not support[np.ix_(mask, ~mask)].any():
            return [int(i) for i in np.flatnonzero(mask)]
    raise AssertionError("reducible operator must have a terminal component")


def rank_one_regularizer(dim: int, weights=None) -> PositiveOperator:
    """Strictly positive rank-one operator u (x) u with ||u|| = 1.

    u is the constant vector of unit weighted norm, so the spectral
    radius is exactly <u, u> = 1 regardless of dimension or weights.
    """
    if dim < 1:
        raise DomainError("dim must be at least 1")
    if weights is not None:
        weights = np.asarray(weights, dtype=float)
        total = float(weights.sum())
        w = weights
    else:
        total = float(dim)
        w = np.ones(dim)
    u = np.full(dim, 1.0 / math.sqrt(total))
    entries = np.outer(u, u) * w[np.newaxis, :]
    return PositiveOperator(entries, weights=weights)


def regularize(op: PositiveOperator, epsilon: float) -> PositiveOperator:
    """op + epsilon * K0 with K0 the rank-one regularizer; irreducible for
    any epsilon > 0."""
    if not epsilon > 0:
        raise DomainError(f"regularization must be positive, got {epsilon}")
    k0 = rank_one_regularizer(op.dim, op.weights)
    return PositiveOperator(op.entries + epsilon * k0.entries, weights=op.weights)


@dataclass(frozen=True, eq=False)
class PerronPair:
    """Perron eigendata (r, f, g) normalized to <f, g> = 1, with h = f * g.

    f and g are strictly positive; f carries unit weighted 2-norm and g
    is then determined, which fixes the pair across runs and platforms.
    """

    r: float
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        for name in ("f", "g", "h"):
            vec = np.array(getattr(self, name), dtype=float)
            if vec.ndim != 1 or not np.all(np.isfinite(vec)):
                raise DomainError(f"{name} must be a finite vector")
            if np.any(vec <= 0):
                raise DomainError(f"{name} must be strictly positive, min is {vec.min()}")
            vec.flags.writeable = False
            object.__setattr__(self, name, vec)
        if not (np.isfinite(self.r) and self.r >= 0):
            raise DomainError(f"r must be finite and non-negative, got {self.r}")


def _perron_vector(entries: np.ndarray, r: float) -> np.ndarray:
    """Strictly positive eigenvector of a non-negative matrix at its
    Perron root r; dense fallback when the power iteration stalls."""
    value, vector, residual, converged = _power_perron(entries)
    scale = max(1.0, r)
    if converged and abs(value - r) <= 1e-9 * scale and vector.min() > 0:
        return vector
    try:
        eigenvalues, eigenvectors = np.linalg.eig(entries)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(
            f"eigenvector computation failed: {exc}", iterate=vector, residual=residual
        ) from exc
    # The Perron root is the eigenvalue of maximal real part.
    index = int(np.argmax(eigenvalues.real))
    vec = eigenvectors[:, index].real
    if vec.sum() < 0:
        vec = -vec
    if vec.min() <= 0:
        raise EigensolverError(
            f"Perron vector is not strictly positive (min component {vec.min()})",
            iterate=vec,
            residual=residual,
        )
    return vec / float(np.linalg.norm(vec))


def _check_residual(entries: np.ndarray, value: float, vector: np.ndarray, what: str):
    residual = float(np.linalg.norm(entries @ vector - value * vector))
    limit = EIG_TOL * max(1.0, abs(value)) * float(np.linalg.norm(vector))
    if residual > limit:
        raise EigensolverError(
            f"{what} residual {residual:.3e} exceeds {limit:.3e}",
            iterate=vector,
            residual=residual,
        )


def _normalized_pair(op: PositiveOperator, r: float, f_raw: np.ndarray, g_raw: np.ndarray) -> PerronPair:
    w = op.weights
    f = f_raw / weighted_norm(f_raw, w)
    g = g_raw / inner_product(f, g_raw, w)
    _check_residual(op.entries, r, f, "right eigenvector")
    _check_residual(adjoint(op).entries, r, g, "left eigenvector")
    return PerronPair(r=r, f=f, g=g, h=f * g)


def perron_pair(op: PositiveOperator, regularization: float | None = None) -> PerronPair:
    """Perron eigenpair of an irreducible operator.

    With ``regularization`` = epsilon > 0 the pair is computed for
    ``op + epsilon * K0`` instead, which is irreducible for any input;
    without it, reducible operators are rejected with a witnessing block.
    """
    if regularization is not None:
        op = regularize(op, regularization)
    elif not is_irreducible(op):
        block = _witness_block(op)
        raise ReducibleOperatorError(
            f"operator is reducible: no support edges leave index block {block}; "
            "pass a regularization epsilon to proceed",
            block=block,
        )
    r = spectral_radius(op)
    if r <= 0:
        raise DomainError("Perron pair requires a positive spectral radius")
    f_raw = _perron_vector(op.entries, r)
    g_raw = _perron_vector(adjoint(op).entries, r)
    return _normalized_pair(op, r, f_raw, g_raw)


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """Operators sharing one Perron product density h.

    The shared-h invariant max_i ||pairs[i].h - h||_inf <= FAMILY_TOL
    (relative to max|h|) is verified at construction.
    """

    members: tuple
    pairs: tuple
    h: np.ndarray
    provenance: str

    def __post_init__(self):
        members = tuple(self.members)
        pairs = tuple(self.pairs)
        if not members or len(members) != len(pairs):
            raise DomainError("family needs matching non-empty members and pairs")
        if any(not same_space(members[0], m) for m in members[1:]):
            raise DomainError("family members must share dimension and weights")
        h = np.array(self.h, dtype=float)
        h.flags.writeable = False
        scale = float(np.abs(h).max())
        worst = max(float(np.abs(p.h - h).max()) for p in pairs)
        if worst > FAMILY_TOL * scale:
            raise FamilyToleranceError(
                f"member density drifts {worst:.3e} from shared h (limit {FAMILY_TOL * scale:.3e})"
            )
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "h", h)

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def weights(self):
        return self.members[0].weights


def make_family(
    base: PositiveOperator,
    kind: str,
    scales=None,
    polys=None,
    regularization: float | None = None,
) -> OperatorFamily:
    """Construct an operator family provably sharing the base density h.

    similarity:    members C_i K C_i^-1 for strictly positive diagonals
                   c_i (``scales``); f and g rescale inversely, leaving
                   f * g invariant.
    adjoint-pair:  members {K, K*}; f and g swap roles.
    series:        members p_i(K) for non-negative coefficient sequences
                   (``polys``); eigenvectors are preserved and spectral
                   radii map to p_i(r).
    """
    if regularization is not None:
        base = regularize(base, regularization)
    base_pair = perron_pair(base)
    if kind == SIMILARITY:
        if not scales:
            raise DomainError("similarity family needs a non-empty list of scale vectors")
        members, pairs = [], []
        for c in scales:
            c = np.asarray(c, dtype=float)
            member = similarity_scale(base, c)
            members.append(member)
            pairs.append(_normalized_pair(member, base_pair.r, c * base_pair.f, base_pair.g / c))
    elif kind == ADJOINT_PAIR:
        dual = adjoint(base)
        members = [base, dual]
        pairs = [base_pair, _normalized_pair(dual, base_pair.r, base_pair.g, base_pair.f)]
    elif kind == SERIES:
        if not polys:
            raise DomainError("series family needs a non-empty list of coefficient sequences")
        members, pairs = [], []
        for coeffs in polys:
            coeffs = np.asarray(coeffs, dtype=float)
            if not np.any(coeffs > 0):
                raise DomainError("series coefficients must not be identically zero")
            member = power_series_apply(base, coeffs)
            r_member = float(np.polynomial.polynomial.polyval(base_pair.r, coeffs))
            members.append(member)
            pairs.append(_normalized_pair(member, r_member, base_pair.f, base_pair.g))
    else:
        raise DomainError(f"unknown family kind {kind!r}, expected one of {FAMILY_KINDS}")
    return OperatorFamily(tuple(members), tuple(pairs), base_pair.h, kind)


def explicit_family(members, regularization: float | None = None) -> OperatorFamily:
    """Validate that explicitly given operators share a Perron density.

    There is no constructive recipe here: each member's pair is computed
    independently and the shared-h invariant is checked.
    """
    members = tuple(members)
    if not members:
        raise DomainError("explicit family needs at least one member")
    pairs = tuple(perron_pair(m, regularization) for m in members)
    return OperatorFamily(members, pairs, pairs[0].h, EXPLICIT)


def shared_density(family: OperatorFamily) -> np.ndarray:
    """The family's shared density h; integrates to 1 against the weights."""
    return family.h
