"""Short-time Lanczos propagation of ``exp(-iHt)`` on a state vector."""

from __future__ import annotations

import math

import numpy as np
from scipy.linalg import eigh_tridiagonal


class PropagationError(RuntimeError):
    def __init__(self, step: int, residual: float, tol: float):
        super().__init__(
            f"Krylov step {step} did not reach tolerance {tol:.1e} (residual estimate {residual:.3e})"
        )
        self.step = step
        self.residual = residual


def _matvec_of(h):
    if hasattr(h, "to_csr"):
        # complex copy avoids an upcast of the matrix data on every product
        return h.to_csr().astype(complex).__matmul__
    if callable(h):
        return h
    return h.__matmul__


def _small_expm_e1(alpha, beta, dt):
    if len(alpha) == 1:
        return np.array([np.exp(-1j * alpha[0] * dt)])
    theta, s = eigh_tridiagonal(np.asarray(alpha), np.asarray(beta))
    return s @ (np.exp(-1j * theta * dt) * s[0])


def krylov_step(matvec, psi, dt: float, tol: float, m_max: int = 40):
    """One step ``psi -> exp(-i H dt) psi``.

    The Lanczos basis (with full reorthogonalisation) grows until the standard
    a-posteriori estimate ``||psi|| * beta_m * |[exp(-i T_m dt)]_{m,1}|`` drops
    below ``tol``. Returns ``(new_psi, error_estimate, krylov_dim)``; raises
    ``PropagationError`` (step index 0) if ``m_max`` vectors are not enough.
    """
    norm0 = float(np.linalg.norm(psi))
    if norm0 == 0.0:
        return psi.copy(), 0.0, 0
    n = psi.shape[0]
    basis = np.empty((m_max, n), dtype=complex)
    basis[0] = psi / norm0
    alpha, beta = [], []
    err = math.inf
    for j in range(m_max):
        w = matvec(basis[j])
        a = float(np.vdot(basis[j], w).real)
        w = w - a * basis[j]
        if j:
            w -= beta[-1] * basis[j - 1]
        w -= basis[: j + 1].T @ (basis[: j + 1].conj() @ w)
        alpha.append(a)
        b = float(np.linalg.norm(w))
        y = _small_expm_e1(alpha, beta, dt)
        err = norm0 * b * abs(y[-1])
        if err <= tol or b <= 1e-14 * max(1.0, abs(a)):
            return norm0 * (y @ basis[: j + 1]), err, j + 1
        if j + 1 < m_max:
            beta.append(b)
            basis[j + 1] = w / b
    raise PropagationError(0, err, tol)


def propagate(h, psi, dt: float, t_total: float, tol: float = 1e-9, m_max: int = 40):
    """Yield ``(t, psi(t))`` at ``t = 0, dt, 2 dt, ...`` up to ``t_total``.

    The final step is shortened to land exactly on ``t_total``. States are
    yielded as fresh arrays; the generator keeps only the current one.
    """
    if not 1e-12 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-12, 1e-6], got {tol}")
    if dt <= 0 or t_total < 0:
        raise ValueError("need dt > 0 and t_total >= 0")
    matvec = _matvec_of(h)
    psi = np.asarray(psi, dtype=complex).copy()
    n_steps = math.ceil(t_total / dt - 1e-9)
    yield 0.0, psi
    t = 0.0
    for step in range(1, n_steps + 1):
        t_next = min(step * dt, t_total)
        try:
            psi, _, _ = krylov_step(matvec, psi, t_next - t, tol, m_max)
        except PropagationError as exc:
            raise PropagationError(step, exc.residual, tol) from None
        t = t_next
        yield t, psi
