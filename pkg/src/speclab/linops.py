"""Dense non-negative operators and their spectral primitives.

A :class:`PositiveOperator` is a dense square matrix with non-negative
entries, optionally carrying strictly positive quadrature weights.  The
weights define the inner product ``<u, v> = sum_i w_i u_i v_i`` and
therefore the adjoint; absent weights mean the counting measure.

Spectral radii are computed by shifted power iteration.  The shift
``sigma = 1 + max diagonal entry`` makes the Perron root the strictly
dominant eigenvalue modulus (peripheral eigenvalues such as the exchange
matrix's -1 lose the tie after shifting), and a dense QR eigensolver
serves as fallback whenever the Rayleigh quotient fails to settle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, EigensolverError

#: Residual tolerance ||Kv - rv|| / ||v|| accepted from the eigensolver.
EIG_TOL = 1e-10

_POWER_MAX_ITER = 10_000
#: Fallback trigger: relative Rayleigh-quotient stagnation required to
#: trust the power iteration at all.
_POWER_REL_TOL = 1e-12
#: Early-stop target, tighter than the trigger so accepted values carry
#: headroom over the 1e-12 contract.
_POWER_STOP_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class PositiveOperator:
    """Dense non-negative square matrix, optionally with quadrature weights.

    Invariants enforced at construction: entries are finite and >= 0;
    weights (when present) are finite, strictly positive and match the
    dimension.  Instances are immutable and safe to share across threads.
    """

    entries: np.ndarray
    weights: np.ndarray | None = None

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DomainError(f"entries must be a square matrix, got shape {entries.shape}")
        if entries.shape[0] < 1:
            raise DomainError("operator dimension must be at least 1")
        if not np.all(np.isfinite(entries)):
            raise DomainError("entries must be finite (no NaN or infinity)")
        if np.any(entries < 0):
            raise DomainError(f"entries must be non-negative, min entry is {entries.min()}")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        if self.weights is not None:
            w = np.array(self.weights, dtype=float)
            if w.ndim != 1 or w.shape[0] != entries.shape[0]:
                raise DomainError(
                    f"weights must be a vector of length {entries.shape[0]}, got shape {w.shape}"
                )
            if not np.all(np.isfinite(w)) or np.any(w <= 0):
                raise DomainError("weights must be finite and strictly positive")
            w.flags.writeable = False
            object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


def effective_weights(op: PositiveOperator) -> np.ndarray:
    """Weight vector of ``op``, all-ones for the counting measure."""
    if op.weights is None:
        return np.ones(op.dim)
    return op.weights


def inner_product(u, v, weights=None) -> float:
    """Weighted inner product ``sum_i w_i u_i v_i``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if weights is None:
        return float(u @ v)
    return float(np.asarray(weights, dtype=float) @ (u * v))


def weighted_norm(u, weights=None) -> float:
    """Norm induced by :func:`inner_product`."""
    return math.sqrt(inner_product(u, u, weights))


def same_space(a: PositiveOperator, b: PositiveOperator) -> bool:
    """True when two operators act on the same weighted space."""
    if a.dim != b.dim:
        return False
    if (a.weights is None) != (b.weights is None):
        return False
    return a.weights is None or np.array_equal(a.weights, b.weights)


def _require_same_space(a: PositiveOperator, b: PositiveOperator, what: str):
    if not same_space(a, b):
        raise DomainError(f"{what} requires operators on the same weighted space "
                          f"(dims {a.dim} and {b.dim})")


def _power_perron(a: np.ndarray):
    """Shifted power iteration for the Perron root of a non-negative matrix.

    Returns ``(value, vector, residual, converged)`` where ``value`` is the
    unshifted eigenvalue estimate.  ``converged`` requires both Rayleigh
    stagnation at ``_POWER_REL_TOL`` and an eigenresidual within
    :data:`EIG_TOL` (scaled by ``max(1, |rho|)``), so defective dominant
    eigenvalues and non-normal stagnation fall through to the caller's
    dense fallback.
    """
    n = a.shape[0]
    sigma = 1.0 + float(a.diagonal().max())
    b = a + sigma * np.eye(n)
    v = np.full(n, 1.0 / math.sqrt(n))
    rho = math.inf
    diff = math.inf
    w = b @ v
    for _ in range(_POWER_MAX_ITER):
        rho_new = float(v @ w)
        diff = abs(rho_new - rho)
        rho = rho_new
        if diff <= _POWER_STOP_TOL * max(1.0, abs(rho)):
            break
        v = w / float(np.linalg.norm(w))
        w = b @ v
    else:
        rho_new = float(v @ w)
        diff = abs(rho_new - rho)
        rho = rho_new
    residual = float(np.linalg.norm(w - rho * v))
    converged = (diff <= _POWER_REL_TOL * max(1.0, abs(rho))
                 and residual <= EIG_TOL * max(1.0, abs(rho)))
    return rho - sigma, v, residual, converged


def spectral_radius(op: PositiveOperator) -> float:
    """Spectral radius of ``op``: for non-negative matrices, the Perron root.

    Shifted power iteration with a dense QR fallback; the returned value
    is always the maximum eigenvalue modulus.
    """
    value, vector, residual, converged = _power_perron(op.entries)
    if converged:
        return max(value, 0.0)
    try:
        eigenvalues = np.linalg.eigvals(op.entries)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(
            f"eigenvalue computation did not converge: {exc}",
            iterate=vector, residual=residual,
        ) from exc
    return float(np.max(np.abs(eigenvalues)))


def _euclidean_conjugate(op: PositiveOperator) -> np.ndarray:
    """Similarity W^(1/2) K W^(-1/2) mapping the weighted space to l2.

    Weighted singular values and self-adjointness questions about K
    become plain Euclidean ones about the returned matrix.
    """
    if op.weights is None:
        return op.entries
    s = np.sqrt(op.weights)
    return op.entries * (s[:, np.newaxis] / s[np.newaxis, :])


def operator_norm(op: PositiveOperator) -> float:
    """Largest singular value with respect to the weighted inner product.

    Equals ``sqrt(spectral_radius(adjoint(op) . op))``.
    """
    try:
        singular = np.linalg.svd(_euclidean_conjugate(op), compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"singular value computation failed: {exc}") from exc
    return float(singular[0])


def numerical_radius(op: PositiveOperator) -> float:
    """Numerical radius of an entrywise non-negative operator.

    For such operators the defining supremum is attained on the positive
    cone and equals the top eigenvalue of the symmetric part
    ``(op + adjoint(op)) / 2``.
    """
    m = _euclidean_conjugate(op)
    sym = 0.5 * (m + m.T)
    try:
        eigenvalues = np.linalg.eigvalsh(sym)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"symmetric eigensolve failed: {exc}") from exc
    return float(eigenvalues[-1])


def adjoint(op: PositiveOperator) -> PositiveOperator:
    """Adjoint with respect to the weighted inner product.

    With unit weights this is the transpose; with weights w the entries
    are ``(w_j / w_i) K_ji`` so that ``<Ku, v> == <u, K*v>`` holds.
    """
    if op.weights is None:
        return PositiveOperator(op.entries.T.copy())
    w = op.weights
    entries = op.entries.T * (w[np.newaxis, :] / w[:, np.newaxis])
    return PositiveOperator(entries, weights=w)


def _validated_vector(d, dim, name, strict=False):
    d = np.asarray(d, dtype=float)
    if d.ndim != 1 or d.shape[0] != dim:
        raise DomainError(f"{name} must be a vector of length {dim}, got shape {d.shape}")
    if not np.all(np.isfinite(d)):
        raise DomainError(f"{name} must be finite")
    if strict:
        if np.any(d <= 0):
            raise DomainError(f"{name} must be strictly positive, min is {d.min()}")
    elif np.any(d < 0):
        raise DomainError(f"{name} must be non-negative, min is {d.min()}")
    return d


def similarity_scale(op: PositiveOperator, d) -> PositiveOperator:
    """Diagonal similarity D K D^(-1); preserves the spectral radius."""
    d = _validated_vector(d, op.dim, "d", strict=True)
    entries = op.entries * (d[:, np.newaxis] / d[np.newaxis, :])
    return PositiveOperator(entries, weights=op.weights)


def weighted_conjugate(op: PositiveOperator, d, e) -> PositiveOperator:
    """Two-sided diagonal multiplication D K E.

    Zeros in d or e are allowed; they annihilate rows or columns.
    """
    d = _validated_vector(d, op.dim, "d")
    e = _validated_vector(e, op.dim, "e")
    entries = d[:, np.newaxis] * op.entries * e[np.newaxis, :]
    return PositiveOperator(entries, weights=op.weights)


def resolvent(op: PositiveOperator, s: float) -> PositiveOperator:
    """Resolvent (s I - K)^(-1) for s strictly above the spectral radius.

    Solved directly with partial pivoting; the result is entrywise
    non-negative with spectral radius 1 / (s - r(K)).
    """
    r = spectral_radius(op)
    if not s > r:
        raise DomainError(f"resolvent requires s > r(K): s = {s}, r(K) = {r}")
    n = op.dim
    try:
        inv = np.linalg.solve(s * np.eye(n) - op.entries, np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(f"resolvent solve failed at s = {s}: {exc}") from exc
    # The exact inverse is non-negative (Neumann series); only rounding
    # can leave tiny negatives, which are clamped.
    floor = -1e-10 * max(1.0, float(np.abs(inv).max()))
    if inv.min() < floor:
        raise EigensolverError(
            f"resolvent lost positivity at s = {s} (min entry {inv.min()})",
            residual=float(inv.min()),
        )
    np.clip(inv, 0.0, None, out=inv)
    return PositiveOperator(inv, weights=op.weights)


def power_series_apply(op: PositiveOperator, coeffs, truncation: int | None = None) -> PositiveOperator:
    """Evaluate ``sum_k a_k K^k`` for non-negative coefficients.

    ``truncation`` keeps the first ``truncation + 1`` coefficients.  The
    shipped series are polynomials, evaluated exactly by Horner's scheme;
    callers truncating an infinite series are responsible for the tail
    bound.  The spectral radius of the result is ``p(r(K))``.
    """
    c = np.asarray(coeffs, dtype=float)
    if c.ndim != 1 or c.size == 0:
        raise DomainError("coeffs must be a non-empty coefficient sequence")
    if not np.all(np.isfinite(c)):
        raise DomainError("coeffs must be finite")
    if np.any(c < 0):
        raise DomainError(f"coeffs must be non-negative, min is {c.min()}")
    if truncation is not None:
        if truncation < 0:
            raise DomainError("truncation must be non-negative")
        c = c[: truncation + 1]
    n = op.dim
    eye = np.eye(n)
    result = c[-1] * eye
    for a in c[-2::-1]:
        result = result @ op.entries + a * eye
    return PositiveOperator(result, weights=op.weights)


def block_pair(a: PositiveOperator, b: PositiveOperator) -> PositiveOperator:
    """Off-diagonal block operator T = [[0, A], [B, 0]] on the doubled space.

    Satisfies ``r(T)^2 = r(A B)`` and ``||T + T*|| = ||A + B*||``.
    """
    _require_same_space(a, b, "block_pair")
    n = a.dim
    zeros = np.zeros((n, n))
    entries = np.block([[zeros, a.entries], [b.entries, zeros]])
    weights = None if a.weights is None else np.concatenate([a.weights, a.weights])
    return PositiveOperator(entries, weights=weights)
