"""Stereographic Bloch maps and the linear precession pictures.

The base coordinate z maps to a real unit vector by inverse stereographic
projection: a 3-vector for a single spin, a 5-vector for the SO(5) two-qubit
model.  In both cases the nonlinear Riccati flow becomes linear precession
of the unit vector, which has no coordinate pole; cross-checking the two
pictures (including across Riccati restarts) is the point of this module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .factorization import base_coordinate, solve_factored
from .hamiltonian import SO5Coefficients, build_so5, spin_half
from .riccati import DEFAULT_Z_MAX, rk4_step, so5_z_params


def project2(z: complex) -> np.ndarray:
    """Unit 3-vector from a complex scalar: m+ = -2 z*/(1+|z|^2), m3 = (1-|z|^2)/(1+|z|^2)."""
    g = 1.0 + abs(z) ** 2
    m_plus = -2.0 * np.conj(z) / g
    return np.array([m_plus.real, m_plus.imag, (2.0 - g) / g])


def project5(z: np.ndarray) -> np.ndarray:
    """Unit 5-vector from four reals: m_mu = -2 z_mu/(1+z.z), m5 = (1-z.z)/(1+z.z)."""
    z = np.asarray(z, dtype=float)
    g = 1.0 + float(z @ z)
    return np.concatenate((-2.0 * z / g, [(2.0 - g) / g]))


def bloch3_rhs(B: np.ndarray, m: np.ndarray, kappa: float = 1.0) -> np.ndarray:
    """dm/dt = -kappa B x m.

    With H = -(1/2) sigma.B and the projection above, direct computation
    gives kappa = 1; crosscheck_pictures measures it rather than assuming it.
    """
    return -kappa * np.cross(np.asarray(B, float), m)


def bloch5_rhs(F: np.ndarray, m: np.ndarray) -> np.ndarray:
    """dm/dt = 2 F m; antisymmetry of F conserves the norm exactly."""
    return 2.0 * F @ m


def integrate_bloch3(B, t_end: float, steps: int, m0=None, kappa: float = 1.0) -> np.ndarray:
    """RK4 trajectory of the linear 3-vector equation on a uniform grid."""
    Bfun = B if callable(B) else (lambda t, b=np.asarray(B, float): b)
    m = np.array([0.0, 0.0, 1.0]) if m0 is None else np.asarray(m0, float)
    dt = t_end / steps
    out = np.zeros((steps + 1, 3))
    out[0] = m
    for k in range(steps):
        m = rk4_step(lambda t, y: bloch3_rhs(Bfun(t), y, kappa), k * dt, m, dt)
        out[k + 1] = m
    return out


def integrate_bloch5(coeffs: SO5Coefficients, t_end: float, steps: int, m0=None) -> np.ndarray:
    """RK4 trajectory of the linear 5-vector equation on a uniform grid."""
    m = np.array([0.0, 0.0, 0.0, 0.0, 1.0]) if m0 is None else np.asarray(m0, float)
    dt = t_end / steps
    out = np.zeros((steps + 1, 5))
    out[0] = m
    for k in range(steps):
        m = rk4_step(lambda t, y: bloch5_rhs(coeffs.at(t), y), k * dt, m, dt)
        out[k + 1] = m
    return out


@dataclass
class CrosscheckReport:
    """Outcome of comparing the Riccati-mapped and linear Bloch pictures."""

    times: np.ndarray
    m_riccati: np.ndarray
    m_linear: np.ndarray
    max_deviation: float
    norm_drift: float
    restarts: int
    kappa: float | None = None  # measured precession constant (spin-1/2 only)
    fd_residual: float | None = None  # max |dm/dt - 2 F m| by centered differences


def _mapped_su2(U_samples: np.ndarray) -> np.ndarray:
    out = np.zeros((len(U_samples), 3))
    for i, U in enumerate(U_samples):
        z = base_coordinate(U, 2, 1)[0, 0]
        out[i] = project2(z)
    return out


def _mapped_so5(U_samples: np.ndarray) -> np.ndarray:
    out = np.zeros((len(U_samples), 5))
    for i, U in enumerate(U_samples):
        zmat = base_coordinate(U, 4, 2)
        out[i] = project5(so5_z_params(zmat))
    return out


def _fit_kappa(times: np.ndarray, m: np.ndarray, Bfun) -> float:
    """Least-squares kappa in dm/dt = -kappa B x m from centered differences."""
    num = 0.0
    den = 0.0
    for k in range(1, len(times) - 1):
        dm = (m[k + 1] - m[k - 1]) / (times[k + 1] - times[k - 1])
        cx = -np.cross(Bfun(times[k]), m[k])
        num += float(dm @ cx)
        den += float(cx @ cx)
    return num / den if den > 0 else float("nan")


def crosscheck_su2(
    B, t_end: float, steps: int, Z_max: float = DEFAULT_Z_MAX
) -> CrosscheckReport:
    """Compare the Riccati picture with linear precession for a spin-1/2 field."""
    Bfun = B if callable(B) else (lambda t, b=np.asarray(B, float): b)
    h = spin_half(Bfun)
    result = solve_factored(h, t_end, steps, Z_max=Z_max)
    m_ric = _mapped_su2(result.U_samples)
    m_lin = integrate_bloch3(Bfun, t_end, steps)
    dev = float(np.max(np.linalg.norm(m_ric - m_lin, axis=1)))
    drift = float(np.max(np.abs(np.linalg.norm(m_lin, axis=1) - 1.0)))
    return CrosscheckReport(
        times=result.times,
        m_riccati=m_ric,
        m_linear=m_lin,
        max_deviation=dev,
        norm_drift=drift,
        restarts=len(result.restarts),
        kappa=_fit_kappa(result.times, m_ric, Bfun),
    )


def crosscheck_so5(
    coeffs: SO5Coefficients, t_end: float, steps: int, Z_max: float = DEFAULT_Z_MAX
) -> CrosscheckReport:
    """Compare the Riccati picture with the linear 5-vector equation."""
    h = build_so5(coeffs)
    result = solve_factored(h, t_end, steps, Z_max=Z_max)
    m_ric = _mapped_so5(result.U_samples)
    m_lin = integrate_bloch5(coeffs, t_end, steps)
    dev = float(np.max(np.linalg.norm(m_ric - m_lin, axis=1)))
    drift = float(np.max(np.abs(np.linalg.norm(m_lin, axis=1) - 1.0)))
    fd = 0.0
    for k in range(1, len(result.times) - 1):
        dm = (m_ric[k + 1] - m_ric[k - 1]) / (result.times[k + 1] - result.times[k - 1])
        fd = max(fd, float(np.max(np.abs(dm - bloch5_rhs(coeffs.at(result.times[k]), m_ric[k])))))
    return CrosscheckReport(
        times=result.times,
        m_riccati=m_ric,
        m_linear=m_lin,
        max_deviation=dev,
        norm_drift=drift,
        restarts=len(result.restarts),
        fd_residual=fd,
    )


def crosscheck_pictures(h_config: dict, t_end: float, steps: int, Z_max: float = DEFAULT_Z_MAX):
    """Dispatch on the scenario family (spin_half or so5)."""
    from .hamiltonian import from_config, so5_coefficients

    family = h_config.get("family")
    params = h_config.get("params", {})
    if family == "spin_half":
        h = from_config(h_config)
        return crosscheck_su2(lambda t: _spin_field_of(h, t), t_end, steps, Z_max)
    if family == "so5":
        F0 = np.asarray(params["F"], dtype=float)
        if "F_cos" in params or "F_sin" in params:
            Fc = np.asarray(params.get("F_cos", np.zeros((5, 5))), float)
            Fs = np.asarray(params.get("F_sin", np.zeros((5, 5))), float)
            w = float(params.get("omega", 1.0))
            coeffs = so5_coefficients(lambda t: F0 + Fc * np.cos(w * t) + Fs * np.sin(w * t))
        else:
            coeffs = so5_coefficients(F0)
        return crosscheck_so5(coeffs, t_end, steps, Z_max)
    raise ValueError(f"cross-check supports spin_half and so5, not {family!r}")


def _spin_field_of(h, t: float) -> np.ndarray:
    """Recover B(t) from a spin-1/2 Hamiltonian H = -(1/2) sigma.B."""
    from .linalg import PAULI

    H = h.matrix(t)
    return np.array([-2.0 * np.real(np.trace(H @ s)) / 2.0 for s in PAULI])
