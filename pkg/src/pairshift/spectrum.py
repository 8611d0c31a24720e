"""Bound-state branches of the two-particle k-blocks."""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .model import KBlockMatrix, KBlockMode, ModelParams, build_k_block


class BranchType(enum.Enum):
    ONSITE = "onsite"
    NEAREST_NEIGHBOR = "nn"
    BONDING = "bonding"
    ANTIBONDING = "antibonding"


class BranchNotFoundError(LookupError):
    pass


RESIDUAL_TOL = 1e-10
OVERLAP_THRESHOLD = 0.5


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # largest-magnitude component positive, first one on ties
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def solve_k_block(block: KBlockMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Full spectrum of a k-block.

    Returns ``(energies, vectors)`` with ascending energies and orthonormal
    eigenvectors in the columns of ``vectors``. A block with no hopping is
    returned as coordinate vectors, degenerate levels ordered by site.
    """
    h = block.matrix
    if not np.all(np.isfinite(h)):
        raise ValueError("k-block has non-finite entries")
    d, e = np.diag(h).copy(), np.diag(h, 1).copy()
    if not np.any(e):
        order = np.argsort(d, kind="stable")
        return d[order], np.eye(len(d))[:, order]
    w, v = eigh_tridiagonal(d, e)
    v = _fix_signs(v)
    residual = np.linalg.norm(h @ v - v * w, axis=0).max()
    if residual > RESIDUAL_TOL * max(1.0, np.abs(w).max()):
        raise ArithmeticError(f"eigensolver residual {residual:.3e} above tolerance")
    return w, v


@dataclass(frozen=True)
class BoundStateBranch:
    branch_type: BranchType
    k_grid: np.ndarray
    energies: np.ndarray
    profiles: np.ndarray  # (len(k_grid), n0 + 1)
    weight_r0: np.ndarray
    weight_r1: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["k", "energy", "weight_r0", "weight_r1"])
            for row in zip(self.k_grid, self.energies, self.weight_r0, self.weight_r1):
                writer.writerow([f"{x:.15g}" for x in row])


def _localization(branch_type: BranchType, vectors: np.ndarray) -> np.ndarray:
    w0, w1 = vectors[0] ** 2, vectors[1] ** 2
    if branch_type is BranchType.ONSITE:
        return w0
    if branch_type is BranchType.NEAREST_NEIGHBOR:
        return w1
    return w0 + w1


def _pick(branch_type, energies, vectors, threshold):
    weight = _localization(branch_type, vectors)
    candidates = np.nonzero(weight >= threshold)[0]
    if len(candidates) == 0:
        return None
    if branch_type is BranchType.BONDING:
        return candidates[np.argmin(energies[candidates])]
    if branch_type is BranchType.ANTIBONDING:
        return candidates[np.argmax(energies[candidates])]
    return candidates[np.argmax(weight[candidates])]


def extract_branch(
    params: ModelParams,
    branch_type: BranchType,
    k_grid,
    n0: int = 200,
    threshold: float = 0.5,
) -> BoundStateBranch:
    """Follow one bound branch across ``k_grid``.

    The starting state at the smallest momentum is the most localized one
    (weight on r=0, r=1 or both at least ``threshold``). Each next momentum
    takes the eigenvector of maximal overlap with the previous profile, and
    falls back to the localization criterion when no single overlap reaches
    0.5 (or more than one does). Results are returned in the order of ``k_grid``.
    """
    k_grid = np.asarray(k_grid, dtype=float)
    order = np.argsort(k_grid, kind="stable")
    n = len(k_grid)
    energies = np.empty(n)
    profiles = np.empty((n, n0 + 1))
    prev = None
    for idx in order:
        block = build_k_block(params, k_grid[idx], n0, KBlockMode.TRUNCATED)
        w, v = solve_k_block(block)
        pick = None
        if prev is not None:
            overlaps = np.abs(prev @ v)
            # a second candidate above threshold means a near-degeneracy: ambiguous
            if np.count_nonzero(overlaps >= OVERLAP_THRESHOLD) == 1:
                pick = int(np.argmax(overlaps))
        if pick is None:
            pick = _pick(branch_type, w, v, threshold)
        if pick is None:
            raise BranchNotFoundError(
                f"no {branch_type.value} bound state with weight >= {threshold} at k={k_grid[idx]:.6g}"
            )
        energies[idx] = w[pick]
        profiles[idx] = v[:, pick]
        prev = v[:, pick]
    return BoundStateBranch(
        branch_type, k_grid, energies, profiles, profiles[:, 0] ** 2, profiles[:, 1] ** 2
    )


def onsite_dispersion(kappa: float, u: float, k) -> np.ndarray:
    """Second-order on-site pair band ``U + 4 kappa^2/U (cos k + 1)``."""
    return u + 4.0 * kappa**2 / u * (np.cos(k) + 1.0)


def fit_cosine_band(k, energies) -> tuple[float, float]:
    """Least-squares ``(c0, c1)`` of ``energy ~ c0 + 2 c1 cos k``."""
    k = np.asarray(k, dtype=float)
    design = np.column_stack([np.ones_like(k), 2.0 * np.cos(k)])
    (c0, c1), *_ = np.linalg.lstsq(design, np.asarray(energies, dtype=float), rcond=None)
    return float(c0), float(c1)


def bandwidth(branch: BoundStateBranch) -> float:
    return float(branch.energies.max() - branch.energies.min())


def perturbative_error(kappa: float, u: float, k_grid, n0: int = 200, v: float = 0.0) -> float:
    """Max deviation of the exact on-site branch from the second-order band."""
    params = ModelParams(kappa, u, v, n_sites=2 * n0 + 1)
    branch = extract_branch(params, BranchType.ONSITE, k_grid, n0)
    return float(np.max(np.abs(branch.energies - onsite_dispersion(kappa, u, branch.k_grid))))
