"""Evolution-operator assembly from Riccati output.

The evolution operator factors as U = U1 U2: a base-manifold factor U1
built from the nilpotent block-triangular exponentials and unitarized by a
block-diagonal gauge factor, and a block-diagonal fiber factor U2 driven by
Hermitian effective Hamiltonians.  For block size 1 the lower fiber block is
a pure phase (the corner phase) with a clean geometric/dynamical split, and
peeling one level at a time yields the full hierarchical solution
SU(N) -> SU(N-1) -> ... -> U(1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hamiltonian import BlockedHamiltonian
from .linalg import (
    ContractViolationError,
    blockdiag,
    dagger,
    frobenius,
    hermitian_eigendecomposition,
    inv_sqrt_hpd,
    sqrt_hpd,
    unitary_step,
)
from .riccati import (
    DEFAULT_Z_MAX,
    MIN_STEPS_BETWEEN_RESTARTS,
    RiccatiTrajectory,
    StiffnessError,
    riccati_rhs,
    rk4_step,
)


class UnsupportedConfigurationError(ValueError):
    """Operation requires block size 1."""


# ---------------------------------------------------------------------------
# algebra of the factors
# ---------------------------------------------------------------------------


def unitarity_closure(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(w, gamma1, gamma2) determined by z through unitarity of U.

    w = -gamma1^{-1} z, gamma1 = I + z z^H, gamma2 = I + z^H z.  The gammas
    are Hermitian positive definite for every z, so no invertibility guard is
    needed.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    m, n = z.shape
    gamma1 = np.eye(m, dtype=complex) + z @ dagger(z)
    gamma2 = np.eye(n, dtype=complex) + dagger(z) @ z
    w = -np.linalg.solve(gamma1, z)
    return w, gamma1, gamma2


def assemble_tilde_U1(z: np.ndarray) -> np.ndarray:
    """Product of the two unit-triangular nilpotent block factors.

    [[I, z], [0, I]] @ [[I, 0], [w^H, I]] with w fixed by unitarity; the
    result has unit determinant (both factors are unit triangular).
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    m, n = z.shape
    w, _, _ = unitarity_closure(z)
    upper = np.block([[np.eye(m, dtype=complex), z], [np.zeros((n, m), dtype=complex), np.eye(n, dtype=complex)]])
    lower = np.block([[np.eye(m, dtype=complex), np.zeros((m, n), dtype=complex)], [dagger(w), np.eye(n, dtype=complex)]])
    return upper @ lower


def gauge_factor(gamma1: np.ndarray, gamma2: np.ndarray) -> np.ndarray:
    """Block-diagonal positive factor (tildeU1^H tildeU1)^{-1/2}.

    tildeU1^H tildeU1 = blockdiag(gamma1^{-1}, gamma2), so the inverse square
    root is blockdiag(gamma1^{1/2}, gamma2^{-1/2}).
    """
    return blockdiag(sqrt_hpd(gamma1), inv_sqrt_hpd(gamma2))


def gauge_unitarize(
    tilde_U1: np.ndarray, gamma1: np.ndarray, gamma2: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Unitarize the nilpotent product: U1 = tildeU1 b with b the gauge factor."""
    b = gauge_factor(gamma1, gamma2)
    return tilde_U1 @ b, b


def unitarized_U1(z: np.ndarray) -> np.ndarray:
    """U1 as a function of z alone (any block size)."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    _, gamma1, gamma2 = unitarity_closure(z)
    U1, _ = gauge_unitarize(assemble_tilde_U1(z), gamma1, gamma2)
    return U1


def gamma1_sqrt_closed(z: np.ndarray) -> np.ndarray:
    """Closed-form gamma1^{1/2} = I + z z^H / (sqrt(g) + 1) for a column z."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    if z.shape[1] != 1:
        raise UnsupportedConfigurationError("closed form requires a column z (n=1)")
    g = 1.0 + (dagger(z) @ z)[0, 0].real
    return np.eye(z.shape[0], dtype=complex) + (z @ dagger(z)) / (np.sqrt(g) + 1.0)


def gamma1_inv_sqrt_closed(z: np.ndarray) -> np.ndarray:
    """Closed-form gamma1^{-1/2} = I - z z^H / (sqrt(g) + g) for a column z."""
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    if z.shape[1] != 1:
        raise UnsupportedConfigurationError("closed form requires a column z (n=1)")
    g = 1.0 + (dagger(z) @ z)[0, 0].real
    return np.eye(z.shape[0], dtype=complex) - (z @ dagger(z)) / (np.sqrt(g) + g)


def _unitarized_U1_column(z: np.ndarray) -> np.ndarray:
    """Cheap closed-form U1 for a column z, avoiding eigendecompositions.

    U1 = [[I - z z^H / (sqrt(g)(sqrt(g)+1)), z/sqrt(g)],
          [-z^H / sqrt(g),                   1/sqrt(g)]].
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    m = z.shape[0]
    g = 1.0 + (dagger(z) @ z)[0, 0].real
    sg = np.sqrt(g)
    out = np.empty((m + 1, m + 1), dtype=complex)
    out[:m, :m] = np.eye(m) - (z @ dagger(z)) / (sg * (sg + 1.0))
    out[:m, m:] = z / sg
    out[m:, :m] = -dagger(z) / sg
    out[m, m] = 1.0 / sg
    return out


def base_coordinate(U: np.ndarray, N: int, n: int) -> np.ndarray:
    """Extract z from a full evolution operator: z = U_topright U_botright^{-1}.

    Valid away from the stereographic pole, where the lower-right block of U
    becomes singular.
    """
    m = N - n
    return U[:m, m:] @ np.linalg.inv(U[m:, m:])


# ---------------------------------------------------------------------------
# effective Hamiltonians
# ---------------------------------------------------------------------------


def effective_hamiltonian_tilde(h_blocks, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Block-diagonal effective Hamiltonian for the non-unitarized fiber.

    upper = Htop - z V^H, lower = Hbot + V^H z.  Neither block is Hermitian
    or traceless in general.
    """
    Htop, V, Hbot = h_blocks
    return Htop - z @ dagger(V), Hbot + dagger(V) @ z


def sqrt_derivative(gamma: np.ndarray, gamma_dot: np.ndarray) -> np.ndarray:
    """d/dt gamma^{1/2} from gamma and its time derivative.

    Solves X g^{1/2} + g^{1/2} X = g_dot in the eigenbasis of gamma; exact to
    machine precision, so no finite-difference noise enters the commutator
    terms of the Hermitian effective Hamiltonians.
    """
    w, Q = hermitian_eigendecomposition(gamma)
    sq = np.sqrt(w)
    Gd = dagger(Q) @ gamma_dot @ Q
    X = Gd / (sq[:, None] + sq[None, :])
    return Q @ X @ dagger(Q)


def effective_hamiltonian_hermitian(
    h_blocks, z: np.ndarray, z_dot: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian effective Hamiltonians for the unitarized fiber blocks.

    upper = (i/2)[d/dt g1^{-1/2}, g1^{1/2}]
            + (1/2){g1^{-1/2} (Htop - z V^H) g1^{1/2} + h.c.}
    and the analogous expression with g2 and Hbot + z^H V for the lower
    block.  z_dot must be the analytic Riccati right-hand side.
    """
    Htop, V, Hbot = h_blocks
    z = np.atleast_2d(z)
    z_dot = np.atleast_2d(z_dot)
    _, gamma1, gamma2 = unitarity_closure(z)
    g1_dot = z_dot @ dagger(z) + z @ dagger(z_dot)
    g2_dot = dagger(z_dot) @ z + dagger(z) @ z_dot

    def block(gamma, gamma_dot, core):
        s = sqrt_hpd(gamma)
        s_inv = inv_sqrt_hpd(gamma)
        ds = sqrt_derivative(gamma, gamma_dot)
        ds_inv = -s_inv @ ds @ s_inv
        A = s_inv @ core @ s
        return 0.5j * (ds_inv @ s - s @ ds_inv) + 0.5 * (A + dagger(A))

    upper = block(gamma1, g1_dot, Htop - z @ dagger(V))
    lower = block(gamma2, g2_dot, Hbot + dagger(z) @ V)
    return upper, lower


def recursion_hamiltonian(h_blocks, z: np.ndarray) -> np.ndarray:
    """The (N-1)-level Hamiltonian obtained by peeling one level (n=1).

    H' = Htop - (z V^H + V z^H)/(sqrt(g)+1)
         - z (z^H V + V^H z) z^H / (2 (sqrt(g)+1)^2),
    whose trace equals -(H_NN + Re(V^H z)); the peeled corner phase restores
    it.
    """
    Htop, V, Hbot = h_blocks
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    if z.shape[1] != 1 or V.shape[1] != 1:
        raise UnsupportedConfigurationError("recursion requires block size 1")
    g = 1.0 + (dagger(z) @ z)[0, 0].real
    sg = np.sqrt(g)
    cross = z @ dagger(V) + V @ dagger(z)
    scalar = 2.0 * (dagger(V) @ z)[0, 0].real
    return Htop - cross / (sg + 1.0) - (z @ dagger(z)) * scalar / (2.0 * (sg + 1.0) ** 2)


def _corner_bracket(h_blocks, z: np.ndarray) -> float:
    """H_NN + (1/2)(V^H z + z^H V) for n=1; real by construction."""
    _, V, Hbot = h_blocks
    return Hbot[0, 0].real + (dagger(V) @ z)[0, 0].real


def _geometric_integrand(h_blocks, z: np.ndarray) -> float:
    """NN element of the geometric generator, i.e. of -i U1^{-1} dU1/dt.

    Equals -(1/g)[z^H (Htop - H_NN I) z + (z^H V + V^H z)(1 - g/2)]; the
    overall sign is fixed by the split-sum identity
    bracket = (U1^H H U1)_NN + (-i U1^H dU1/dt)_NN, verified against finite
    differences of U1 in the test suite.
    """
    Htop, V, Hbot = h_blocks
    g = 1.0 + (dagger(z) @ z)[0, 0].real
    hnn = Hbot[0, 0].real
    quad = (dagger(z) @ (Htop - hnn * np.eye(Htop.shape[0])) @ z)[0, 0].real
    lin = 2.0 * (dagger(V) @ z)[0, 0].real
    return -(quad + lin * (1.0 - g / 2.0)) / g


# ---------------------------------------------------------------------------
# direct factored solve (any block size)
# ---------------------------------------------------------------------------


@dataclass
class FactoredEvolution:
    """Snapshot of the factored evolution at one time."""

    z: np.ndarray
    w: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    U1: np.ndarray
    U2: np.ndarray
    U: np.ndarray
    mu_total: float | None = None
    phase_geometric: float | None = None
    phase_dynamical: float | None = None


@dataclass
class FactoredResult:
    """Full time series produced by solve_factored.

    U_samples are the complete evolution operators U(t_k) including all
    accumulated restart factors.  Phase arrays (block size 1 only) are
    cumulative across restarts.
    """

    h: BlockedHamiltonian
    times: np.ndarray
    z_samples: np.ndarray
    U_samples: np.ndarray
    U2_samples: np.ndarray
    restarts: list = field(default_factory=list)
    est_error: float = 0.0
    mu_total: np.ndarray | None = None
    phase_geometric: np.ndarray | None = None
    phase_dynamical: np.ndarray | None = None
    imag_mu: np.ndarray | None = None

    @property
    def trajectory(self) -> RiccatiTrajectory:
        return RiccatiTrajectory(
            times=self.times,
            z_samples=self.z_samples,
            restarts=list(self.restarts),
            est_error=self.est_error,
        )

    def evolution(self, index: int = -1) -> FactoredEvolution:
        z = self.z_samples[index]
        w, gamma1, gamma2 = unitarity_closure(z)
        U1, _ = gauge_unitarize(assemble_tilde_U1(z), gamma1, gamma2)
        return FactoredEvolution(
            z=z,
            w=w,
            gamma1=gamma1,
            gamma2=gamma2,
            U1=U1,
            U2=self.U2_samples[index],
            U=self.U_samples[index],
            mu_total=None if self.mu_total is None else float(self.mu_total[index]),
            phase_geometric=(
                None if self.phase_geometric is None else float(self.phase_geometric[index])
            ),
            phase_dynamical=(
                None if self.phase_dynamical is None else float(self.phase_dynamical[index])
            ),
        )


def solve_factored(
    h: BlockedHamiltonian,
    t_end: float,
    steps: int,
    Z_max: float = DEFAULT_Z_MAX,
) -> FactoredResult:
    """Solve i dU/dt = H U through the base/fiber factorization.

    z advances with two half RK4 steps per grid step (the intermediate value
    feeds the fiber); the fiber factor U2 advances with the midpoint
    exponential of the Hermitian effective Hamiltonian.  Restarts reset
    z = 0 and fold the current factors into the accumulated evolution.
    """
    m, n = h.N - h.n, h.n
    dt = t_end / steps
    times = np.linspace(0.0, t_end, steps + 1)
    z_samples = np.zeros((steps + 1, m, n), dtype=complex)
    U_samples = np.zeros((steps + 1, h.N, h.N), dtype=complex)
    U2_samples = np.zeros((steps + 1, h.N, h.N), dtype=complex)

    track_phases = n == 1
    if track_phases:
        mu = np.zeros(steps + 1)
        geo = np.zeros(steps + 1)
        imu = np.zeros(steps + 1)

    z = np.zeros((m, n), dtype=complex)
    z_coarse = np.zeros((m, n), dtype=complex)
    U2 = np.eye(h.N, dtype=complex)
    U_accum = np.eye(h.N, dtype=complex)
    restarts: list = []
    last_restart_step = -(MIN_STEPS_BETWEEN_RESTARTS + 1)

    def f(t, y):
        return riccati_rhs(h.blocks_unchecked(t), y)

    def full_U(z_now, U2_now):
        return unitarized_U1(z_now) @ U2_now @ U_accum

    U_samples[0] = np.eye(h.N)
    U2_samples[0] = np.eye(h.N)

    for k in range(steps):
        t = times[k]
        z_half = rk4_step(f, t, z, dt / 2.0)
        z_new = rk4_step(f, t + dt / 2.0, z_half, dt / 2.0)

        if max(frobenius(z_half), frobenius(z_new)) >= Z_max:
            if k - last_restart_step < MIN_STEPS_BETWEEN_RESTARTS:
                raise StiffnessError(
                    f"restart requested again after {k - last_restart_step} steps "
                    f"at t={t:.6g}: trajectory passes too near the coordinate "
                    "singularity"
                )
            last_restart_step = k
            U_accum = full_U(z, U2)
            restarts.append((t, U_accum))
            z = np.zeros((m, n), dtype=complex)
            z_coarse = z.copy()
            z_samples[k] = z
            U2 = np.eye(h.N, dtype=complex)
            z_half = rk4_step(f, t, z, dt / 2.0)
            z_new = rk4_step(f, t + dt / 2.0, z_half, dt / 2.0)

        # fiber: midpoint exponential of the Hermitian effective Hamiltonian
        t_mid = t + dt / 2.0
        blocks_mid = h.blocks_unchecked(t_mid)
        z_dot_mid = riccati_rhs(blocks_mid, z_half)
        upper, lower = effective_hamiltonian_hermitian(blocks_mid, z_half, z_dot_mid)
        U2 = blockdiag(unitary_step(upper, dt), unitary_step(lower, dt)) @ U2

        if track_phases:
            # trapezoid on the half grid, cumulative across restarts
            blocks_a = h.blocks_unchecked(t)
            blocks_b = h.blocks_unchecked(t + dt)
            za, zb = z, z_new
            for (ba, ya), (bb, yb), wgt in (
                ((blocks_a, za), (blocks_mid, z_half), dt / 4.0),
                ((blocks_mid, z_half), (blocks_b, zb), dt / 4.0),
            ):
                mu[k + 1] += -wgt * (_corner_bracket(ba, ya) + _corner_bracket(bb, yb))
                geo[k + 1] += -wgt * (
                    _geometric_integrand(ba, ya) + _geometric_integrand(bb, yb)
                )
                imu[k + 1] += -2.0 * wgt * (
                    (dagger(ba[1]) @ ya)[0, 0].imag + (dagger(bb[1]) @ yb)[0, 0].imag
                )
            mu[k + 1] += mu[k]
            geo[k + 1] += geo[k]
            imu[k + 1] += imu[k]

        z = z_new
        z_coarse = rk4_step(f, t, z_coarse, dt)
        z_samples[k + 1] = z
        U2_samples[k + 1] = U2
        U_samples[k + 1] = full_U(z, U2)

    est_error = frobenius(z - z_coarse)
    result = FactoredResult(
        h=h,
        times=times,
        z_samples=z_samples,
        U_samples=U_samples,
        U2_samples=U2_samples,
        restarts=restarts,
        est_error=est_error,
    )
    if track_phases:
        result.mu_total = mu
        result.phase_geometric = geo
        result.phase_dynamical = mu - geo
        result.imag_mu = imu
    return result


def reconstruct_full(result: FactoredResult, index: int = -1) -> FactoredEvolution:
    """Final factored evolution snapshot with all factors materialized."""
    return result.evolution(index)


def corner_phase(
    h: BlockedHamiltonian, traj: RiccatiTrajectory
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Corner-phase arrays (mu_total, geometric, dynamical) on the stored grid.

    mu_total(t) = -integral of [H_NN + (1/2)(V^H z + z^H V)]; the geometric
    part integrates the base-manifold contribution and the dynamical part is
    the remainder.  Quadrature: cumulative trapezoid on the trajectory grid.
    Requires block size 1.
    """
    if traj.z_samples.shape[2] != 1:
        raise UnsupportedConfigurationError("corner phase requires block size 1")
    from scipy.integrate import cumulative_trapezoid

    brackets = np.empty(len(traj.times))
    geos = np.empty(len(traj.times))
    for i, t in enumerate(traj.times):
        blocks = h.blocks_unchecked(t)
        brackets[i] = _corner_bracket(blocks, traj.z_samples[i])
        geos[i] = _geometric_integrand(blocks, traj.z_samples[i])
    mu = -cumulative_trapezoid(brackets, traj.times, initial=0.0)
    geo = -cumulative_trapezoid(geos, traj.times, initial=0.0)
    return mu, geo, mu - geo


# ---------------------------------------------------------------------------
# hierarchical n=1 peel
# ---------------------------------------------------------------------------


@dataclass
class HierarchicalResult:
    """Output of the level-by-level peel.

    ``level_mu`` etc. hold one cumulative phase per peeled level (level 0 is
    the full problem).  ``trace_phases`` hold the per-level overall phases
    restored after trace subtraction.
    """

    h: BlockedHamiltonian
    times: np.ndarray
    z_samples: np.ndarray  # level-0 coordinate
    U_samples: np.ndarray
    level_mu: np.ndarray  # (steps+1, N-1)
    level_geo: np.ndarray
    level_dyn: np.ndarray
    trace_phases: np.ndarray  # (steps+1, N-1)
    restarts: list = field(default_factory=list)

    @property
    def trajectory(self) -> RiccatiTrajectory:
        return RiccatiTrajectory(
            times=self.times, z_samples=self.z_samples, restarts=list(self.restarts)
        )


class _HierState:
    """Flat packing of all per-level coordinates and phases."""

    def __init__(self, N: int):
        self.N = N
        self.z_sizes = [N - 1 - k for k in range(N - 1)]
        self.z_offsets = np.concatenate(([0], np.cumsum(self.z_sizes)))
        self.nz = int(self.z_offsets[-1])
        self.size = self.nz + 3 * (N - 1)  # z blocks, mu, geo, phi

    def zeros(self) -> np.ndarray:
        return np.zeros(self.size, dtype=complex)

    def z(self, y: np.ndarray, k: int) -> np.ndarray:
        return y[self.z_offsets[k] : self.z_offsets[k + 1]].reshape(-1, 1)

    def set_z(self, y: np.ndarray, k: int, val: np.ndarray) -> None:
        y[self.z_offsets[k] : self.z_offsets[k + 1]] = val.ravel()

    def mu(self, y: np.ndarray) -> np.ndarray:
        return y[self.nz : self.nz + self.N - 1].real

    def geo(self, y: np.ndarray) -> np.ndarray:
        return y[self.nz + self.N - 1 : self.nz + 2 * (self.N - 1)].real

    def phi(self, y: np.ndarray) -> np.ndarray:
        return y[self.nz + 2 * (self.N - 1) :].real


def _hier_rhs(h: BlockedHamiltonian, packing: _HierState, t: float, y: np.ndarray) -> np.ndarray:
    N = packing.N
    dy = np.zeros_like(y)
    Hk = h.matrix(t)
    mu_dot = np.zeros(N - 1)
    geo_dot = np.zeros(N - 1)
    phi_dot = np.zeros(N - 1)
    for k in range(N - 1):
        d = N - k
        blocks = (Hk[: d - 1, : d - 1], Hk[: d - 1, d - 1 :], Hk[d - 1 :, d - 1 :])
        z = packing.z(y, k)
        packing.set_z(dy, k, riccati_rhs(blocks, z))
        mu_dot[k] = -_corner_bracket(blocks, z)
        geo_dot[k] = -_geometric_integrand(blocks, z)
        Hnext = recursion_hamiltonian(blocks, z)
        tau = float(np.real(np.trace(Hnext)))
        phi_dot[k] = -tau / (d - 1)
        Hk = Hnext - (tau / (d - 1)) * np.eye(d - 1)
    dy[packing.nz : packing.nz + N - 1] = mu_dot
    dy[packing.nz + N - 1 : packing.nz + 2 * (N - 1)] = geo_dot
    dy[packing.nz + 2 * (N - 1) :] = phi_dot
    return dy


def _hier_assemble(packing: _HierState, y: np.ndarray) -> np.ndarray:
    """Nested product of unitarized factors and phase factors for one state."""
    N = packing.N
    mu = packing.mu(y)
    phi = packing.phi(y)
    U = np.ones((1, 1), dtype=complex)
    for k in range(N - 2, -1, -1):
        d = N - k
        U2 = np.zeros((d, d), dtype=complex)
        U2[: d - 1, : d - 1] = np.exp(1j * phi[k]) * U
        U2[d - 1, d - 1] = np.exp(1j * mu[k])
        U = _unitarized_U1_column(packing.z(y, k)) @ U2
    return U


def hierarchical_solve(
    h: BlockedHamiltonian,
    t_end: float,
    steps: int,
    Z_max: float = DEFAULT_Z_MAX,
) -> HierarchicalResult:
    """Solve by peeling one level at a time with block size 1.

    Every level's Riccati coordinate, corner phase and trace phase advance
    jointly in a single RK4 state, so all quadrature inherits the
    integrator's fourth-order accuracy.
    """
    if h.n != 1:
        raise UnsupportedConfigurationError("hierarchical solve peels with n=1")
    N = h.N
    packing = _HierState(N)
    dt = t_end / steps
    times = np.linspace(0.0, t_end, steps + 1)

    y = packing.zeros()
    U_accum = np.eye(N, dtype=complex)
    phase_offsets = np.zeros((3, N - 1))  # mu, geo, phi accumulated at restarts
    restarts: list = []
    last_restart_step = -(MIN_STEPS_BETWEEN_RESTARTS + 1)

    z_samples = np.zeros((steps + 1, N - 1, 1), dtype=complex)
    U_samples = np.zeros((steps + 1, N, N), dtype=complex)
    level_mu = np.zeros((steps + 1, N - 1))
    level_geo = np.zeros((steps + 1, N - 1))
    trace_phases = np.zeros((steps + 1, N - 1))
    U_samples[0] = np.eye(N)

    def f(t, yy):
        return _hier_rhs(h, packing, t, yy)

    for k in range(steps):
        t = times[k]
        y_new = rk4_step(f, t, y, dt)
        if any(
            np.linalg.norm(packing.z(y_new, lvl)) >= Z_max for lvl in range(N - 1)
        ):
            if k - last_restart_step < MIN_STEPS_BETWEEN_RESTARTS:
                raise StiffnessError(
                    f"hierarchical restart requested again after "
                    f"{k - last_restart_step} steps at t={t:.6g} "
                    "(level trajectory near the coordinate singularity)"
                )
            last_restart_step = k
            U_accum = _hier_assemble(packing, y) @ U_accum
            restarts.append((t, U_accum))
            phase_offsets[0] += packing.mu(y)
            phase_offsets[1] += packing.geo(y)
            phase_offsets[2] += packing.phi(y)
            y = packing.zeros()
            z_samples[k] = packing.z(y, 0)
            y_new = rk4_step(f, t, y, dt)
        y = y_new
        z_samples[k + 1] = packing.z(y, 0)
        level_mu[k + 1] = packing.mu(y) + phase_offsets[0]
        level_geo[k + 1] = packing.geo(y) + phase_offsets[1]
        trace_phases[k + 1] = packing.phi(y) + phase_offsets[2]
        U_samples[k + 1] = _hier_assemble(packing, y) @ U_accum

    return HierarchicalResult(
        h=h,
        times=times,
        z_samples=z_samples,
        U_samples=U_samples,
        level_mu=level_mu,
        level_geo=level_geo,
        level_dyn=level_mu - level_geo,
        trace_phases=trace_phases,
        restarts=restarts,
    )


def schrodinger_residual(h: BlockedHamiltonian, times: np.ndarray, U_samples: np.ndarray) -> float:
    """Max relative residual of i dU/dt = H U by centered differences.

    Skips grid points adjacent to restarts only implicitly: the residual is
    computed on all interior points, so callers should pass restart-free
    stretches when restarts are present.
    """
    worst = 0.0
    for k in range(1, len(times) - 1):
        dt = times[k + 1] - times[k - 1]
        dU = (U_samples[k + 1] - U_samples[k - 1]) / dt
        H = h.matrix(times[k])
        scale = max(frobenius(H), 1e-30)
        worst = max(worst, frobenius(1j * dU - H @ U_samples[k]) / scale)
    return worst
