"""Matrix Riccati dynamics for the base-manifold coordinate z(t).

The (N-n) x n coordinate z obeys

    i dz/dt = Htop z + V - z (V^H z + Hbot),

integrated with classical fixed-step RK4 from z(0) = 0.  When ||z||_F would
exceed the restart threshold the accumulated evolution is materialized and
integration resumes from z = 0; the product structure U = U_segment U_accum
makes that exact.  The SO(5) two-qubit case reduces to four real parameters
and gets its own right-hand side.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import BlockedHamiltonian, SO5Coefficients
from .linalg import PAULI, dagger, frobenius

DEFAULT_Z_MAX = 10.0
# Restarts closer together than this many grid steps indicate the trajectory
# hugs the coordinate singularity; bail out instead of thrashing.
MIN_STEPS_BETWEEN_RESTARTS = 4


class StiffnessError(RuntimeError):
    """Restarts requested too frequently near the coordinate singularity."""


@dataclass
class RiccatiTrajectory:
    """Uniform time grid with z samples and evolution-restart records.

    ``restarts`` holds (time, accumulated evolution operator) pairs; z is
    reset to zero at each restart time, so the stored sample there is the
    start of a fresh segment.
    """

    times: np.ndarray
    z_samples: np.ndarray  # (len(times), N-n, n) complex
    restarts: list = field(default_factory=list)
    est_error: float = 0.0

    @property
    def restart_times(self) -> np.ndarray:
        return np.array([t for t, _ in self.restarts])


def riccati_rhs(h_blocks, z: np.ndarray) -> np.ndarray:
    """dz/dt = -i [Htop z + V - z (V^H z + Hbot)]."""
    Htop, V, Hbot = h_blocks
    if z.shape != V.shape:
        raise ValueError(f"z has shape {z.shape}, expected {V.shape}")
    return -1j * (Htop @ z + V - z @ (dagger(V) @ z + Hbot))


def rk4_step(f, t: float, y: np.ndarray, dt: float) -> np.ndarray:
    """One classical Runge-Kutta 4 step for dy/dt = f(t, y)."""
    k1 = f(t, y)
    k2 = f(t + dt / 2.0, y + dt / 2.0 * k1)
    k3 = f(t + dt / 2.0, y + dt / 2.0 * k2)
    k4 = f(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate_riccati(
    h: BlockedHamiltonian,
    t_end: float,
    steps: int,
    Z_max: float = DEFAULT_Z_MAX,
) -> RiccatiTrajectory:
    """Integrate z(t) on a uniform grid of `steps` RK4 steps.

    Returns the trajectory produced by the full factored solve, so restart
    records carry genuinely accumulated (unitary) evolution operators and the
    step-doubling error estimate of the z integration.
    """
    from .factorization import solve_factored  # deferred: factorization builds on us

    return solve_factored(h, t_end, steps, Z_max=Z_max).trajectory


def so5_rhs(F: np.ndarray, z: np.ndarray) -> np.ndarray:
    """dz_mu/dt = F[5,mu](1 - z.z) + 2 F[mu,nu] z_nu + 2 F[5,nu] z_nu z_mu.

    z holds (z1, z2, z3, z4); F is the antisymmetric 5x5 coefficient matrix
    with 0-based indices, so F[4, mu] is the row coupling to the pole.
    """
    z = np.asarray(z, dtype=float)
    zz = float(z @ z)
    return F[4, :4] * (1.0 - zz) + 2.0 * (F[:4, :4] @ z) + 2.0 * float(F[4, :4] @ z) * z


def so5_z_matrix(z: np.ndarray) -> np.ndarray:
    """Quaternionic rendering z4 I - i z_i sigma_i as a 2x2 complex matrix."""
    out = z[3] * np.eye(2, dtype=complex)
    for i in range(3):
        out = out - 1j * z[i] * PAULI[i]
    return out


def so5_z_params(zmat: np.ndarray) -> np.ndarray:
    """Inverse of so5_z_matrix; valid for matrices in the quaternionic span."""
    z4 = complex(np.trace(zmat)) / 2.0
    zi = [complex(np.trace(zmat @ PAULI[i])) * 0.5j for i in range(3)]
    return np.array([zi[0].real, zi[1].real, zi[2].real, z4.real])


def integrate_so5(
    coeffs: SO5Coefficients,
    t_end: float,
    steps: int,
    Z_max: float = DEFAULT_Z_MAX,
) -> tuple[np.ndarray, np.ndarray, list]:
    """Integrate the four-real-parameter SO(5) Riccati form.

    Returns (times, z samples of shape (steps+1, 4), restart times).  The
    restart rule matches the matrix form: the quaternionic rendering has
    ||z||_F^2 = 2 z.z, so restarts trigger at the same trajectory points.
    """
    dt = t_end / steps
    times = np.linspace(0.0, t_end, steps + 1)
    samples = np.zeros((steps + 1, 4))
    restarts = []
    z = np.zeros(4)
    last_restart_step = -(MIN_STEPS_BETWEEN_RESTARTS + 1)

    def f(t, y):
        return so5_rhs(coeffs.at(t), y)

    for k in range(steps):
        t = times[k]
        z_half = rk4_step(f, t, z, dt / 2.0)
        z_new = rk4_step(f, t + dt / 2.0, z_half, dt / 2.0)
        if 2.0 * max(z_half @ z_half, z_new @ z_new) >= Z_max**2:
            if k - last_restart_step < MIN_STEPS_BETWEEN_RESTARTS:
                raise StiffnessError(
                    f"restart requested again after {k - last_restart_step} steps "
                    f"at t={t:.6g}: trajectory passes too near the coordinate "
                    "singularity"
                )
            last_restart_step = k
            restarts.append(t)
            z = np.zeros(4)
            samples[k] = z
            z_half = rk4_step(f, t, z, dt / 2.0)
            z_new = rk4_step(f, t + dt / 2.0, z_half, dt / 2.0)
        z = z_new
        samples[k + 1] = z
    return times, samples, restarts
