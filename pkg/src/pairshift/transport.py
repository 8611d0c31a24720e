"""Transmission through an impurity chain: closed form, NEGF and wave matching."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .effective import ImpurityChain


@dataclass(frozen=True)
class TransmissionResult:
    k: float
    energy: float
    T: float
    R: float
    r_amp: complex | None = None
    t_amp: complex | None = None


def _check_k(k: float):
    if not 0.0 < k < math.pi:
        raise ValueError(f"incident momentum must lie in (0, pi), got {k}")


def _lead_kappa(chain: ImpurityChain) -> float:
    return -chain.lead_hopping


def surface_green(kappa: float, energy: float) -> complex:
    """Retarded surface Green's function of a semi-infinite chain with hopping -kappa."""
    t2 = kappa * kappa
    root = cmath.sqrt(4 * t2 - energy * energy)
    return (energy - 1j * root) / (2 * t2)


def device_hamiltonian(chain: ImpurityChain) -> np.ndarray:
    n = chain.device_length
    h = np.diag(np.asarray(chain.device_potentials, dtype=complex))
    inner = np.asarray(chain.device_hoppings[1:-1], dtype=complex)
    h[np.arange(n - 1), np.arange(1, n)] = inner
    h[np.arange(1, n), np.arange(n - 1)] = inner
    return h


def negf_transmission(chain: ImpurityChain, k: float) -> TransmissionResult:
    """Landauer transmission ``Tr[G1 G^R G2 G^A]`` at ``E = -2 kappa cos k``."""
    _check_k(k)
    kappa = _lead_kappa(chain)
    energy = -2.0 * kappa * math.cos(k)
    if chain.is_uniform:
        return TransmissionResult(k, energy, 1.0, 0.0)
    n = chain.device_length
    g = surface_green(kappa, energy)
    sigma1 = np.zeros((n, n), dtype=complex)
    sigma2 = np.zeros((n, n), dtype=complex)
    sigma1[0, 0] = chain.device_hoppings[0] ** 2 * g
    sigma2[-1, -1] = chain.device_hoppings[-1] ** 2 * g
    gamma1 = 1j * (sigma1 - sigma1.conj().T)
    gamma2 = 1j * (sigma2 - sigma2.conj().T)
    a = energy * np.eye(n) - device_hamiltonian(chain) - sigma1 - sigma2
    try:
        gr = np.linalg.solve(a, np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"singular device Green's function at k={k}") from exc
    T = float(np.trace(gamma1 @ gr @ gamma2 @ gr.conj().T).real)
    return TransmissionResult(k, energy, T, 1.0 - T)


def planewave_scattering(chain: ImpurityChain, k: float) -> TransmissionResult:
    """Match ``e^{ikx} + r e^{-ikx}`` (x < 0) and ``t e^{ikx}`` (x >= n) across the device.

    Device sites sit at x = 0..n-1. Unknowns are r, t and the device amplitudes;
    the equations are the Schrodinger equation on sites -1..n.
    """
    _check_k(k)
    kappa = _lead_kappa(chain)
    energy = -2.0 * kappa * math.cos(k)
    if chain.is_uniform:
        return TransmissionResult(k, energy, 1.0, 0.0, 0j, 1 + 0j)
    n = chain.device_length
    lead = chain.lead_hopping
    hop = chain.device_hoppings
    eps = chain.device_potentials
    e = cmath.exp
    # unknown vector: [r, psi_0 .. psi_{n-1}, t]
    m = np.zeros((n + 2, n + 2), dtype=complex)
    rhs = np.zeros(n + 2, dtype=complex)
    # site -1: E psi_-1 = lead psi_-2 + hop[0] psi_0
    m[0, 0] = energy * e(1j * k) - lead * e(2j * k)
    m[0, 1] = -hop[0]
    rhs[0] = -(energy * e(-1j * k) - lead * e(-2j * k))
    for j in range(n):
        row = j + 1
        m[row, j + 1] = energy - eps[j]
        if j == 0:
            m[row, 0] = -hop[0] * e(1j * k)
            rhs[row] = hop[0] * e(-1j * k)
        else:
            m[row, j] = -hop[j]
        if j == n - 1:
            m[row, n + 1] = -hop[n] * e(1j * k * n)
        else:
            m[row, j + 2] = -hop[j + 1]
    # site n: E psi_n = hop[n] psi_{n-1} + lead psi_{n+1}
    m[n + 1, n] = -hop[n]
    m[n + 1, n + 1] = energy * e(1j * k * n) - lead * e(1j * k * (n + 1))
    try:
        sol = np.linalg.solve(m, rhs)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"singular matching system at k={k}") from exc
    r, t = complex(sol[0]), complex(sol[-1])
    return TransmissionResult(k, energy, abs(t) ** 2, abs(r) ** 2, r, t)


def analytic_T12(kappa: float, v: float, k: float) -> float:
    """Closed-form transmission of the on-site pair impurity (potentials 2V, bond 2 kappa)."""
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    x = v / kappa
    c = math.cos(k)
    denom = 1.0
    for l in (-1, 1):
        denom *= 4 * (x + l) ** 2 + 4 * (x + l) * c + 1
    if not denom > 0:
        raise ArithmeticError(f"non-positive denominator {denom} at V={v}, k={k}")
    return 16 * math.sin(k) ** 2 / denom


def resonance_V(kappa: float, k: float) -> tuple[float, float]:
    """Both couplings V with unit transmission at momentum k, larger first."""
    if kappa == 0:
        raise ValueError("kappa must be nonzero")
    c = math.cos(k)
    root = math.sqrt(c * c + 3)
    a = kappa / 2 * (-c + root)
    b = kappa / 2 * (-c - root)
    return (a, b) if a >= b else (b, a)


def resonant_profile(k):
    """Transmission at V = sqrt(3) kappa / 2 as a function of k."""
    return 4 * np.sin(k) ** 2 / (4 - np.cos(k) ** 2)
