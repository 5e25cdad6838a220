"""Equations of motion, the 9x9 generator, and steady-state solvers.

Two encodings of the same dynamics live here.  :func:`equations_of_motion`
writes the Bloch equations out element by element, while
:func:`build_liouvillian` assembles the generator from a Hamiltonian and
the cross-decay matrix through Kronecker products.  Tests check that they
agree, so neither is derived from the other.

Vectorisation is row-major: ``vec(rho)[3*i + j] = rho[i, j]``, hence
``vec(A @ rho @ B) = kron(A, B.T) @ vec(rho)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.integrate import RK45

from .core import DensityMatrix, SystemParams, cross_decay_matrix, require_valid
from .errors import IntegrationError, NonUniqueSteadyState

# positions of rho11, rho22, rho33 in vec(rho)
TRACE_POSITIONS = (0, 4, 8)
RCOND_THRESHOLD = 1e-12
CONVERGENCE_TOL = 1e-10


def _fields(params: SystemParams):
    return params.omega_c, params.omega_p


def equations_of_motion(params: SystemParams, rho) -> np.ndarray:
    """Time derivative of ``rho`` in the interaction picture.

    The map is complex-linear in ``rho``; the rows for rho22 and for the
    lower-triangle coherences follow from trace conservation and
    Hermiticity.  Both lower-level coherences pick up the same real source
    ``2 p sqrt(gamma2 gamma3) rho11`` from interfering decay channels.
    """
    require_valid(params)
    r = np.asarray(rho, dtype=complex)
    if r.shape == (9,):
        r = r.reshape(3, 3)
    g2, g3 = params.gamma2, params.gamma3
    gt = g2 + g3
    oc, op = _fields(params)
    dp = params.delta_p
    sgc = 2.0 * params.p * math.sqrt(g2 * g3)

    (r11, r12, r13), (r21, r22, r23), (r31, r32, r33) = r
    d = np.empty((3, 3), dtype=complex)
    d[0, 0] = -2.0 * gt * r11 + 1j * op * (r31 - r13) + 1j * oc * (r21 - r12)
    d[1, 1] = 2.0 * g2 * r11 + 1j * oc * (r12 - r21)
    d[2, 2] = 2.0 * g3 * r11 + 1j * op * (r13 - r31)

    d[1, 2] = -1j * dp * r23 + sgc * r11 + 1j * oc * r13 - 1j * op * r21
    d[2, 1] = 1j * dp * r32 + sgc * r11 - 1j * oc * r31 + 1j * op * r12

    d[0, 2] = -(gt + 1j * dp) * r13 - 1j * op * (r11 - r33) + 1j * oc * r23
    d[2, 0] = -(gt - 1j * dp) * r31 + 1j * op * (r11 - r33) - 1j * oc * r32

    d[0, 1] = -gt * r12 + 1j * op * r32 - 1j * oc * (r11 - r22)
    d[1, 0] = -gt * r21 - 1j * op * r23 + 1j * oc * (r11 - r22)
    return d


def hamiltonian(params: SystemParams) -> np.ndarray:
    """RWA Hamiltonian in the rotating frame, hbar = 1.

    The coupling is resonant, so |1> and |2> share the energy
    ``delta_p`` relative to |3>.
    """
    oc, op = _fields(params)
    dp = params.delta_p
    return np.array(
        [[dp, -oc, -op],
         [-oc, dp, 0.0],
         [-op, 0.0, 0.0]],
        dtype=complex,
    )


def _lowering_operators():
    s2 = np.zeros((3, 3), dtype=complex)
    s3 = np.zeros((3, 3), dtype=complex)
    s2[1, 0] = 1.0  # |2><1|
    s3[2, 0] = 1.0  # |3><1|
    return s2, s3


@dataclass(frozen=True, eq=False)
class LiouvillianMatrix:
    """Generator ``l`` with ``d vec(rho)/dt = l @ vec(rho)``."""

    l: np.ndarray
    params: SystemParams

    def __post_init__(self):
        l = np.array(self.l, dtype=complex)
        if l.shape != (9, 9):
            raise ValueError(f"Liouvillian must be 9x9, got {l.shape}")
        l.setflags(write=False)
        object.__setattr__(self, "l", l)

    def __array__(self, dtype=None, copy=None):
        return self.l if dtype is None else self.l.astype(dtype)

    def apply(self, rho) -> np.ndarray:
        """Return ``d rho/dt`` as a 3x3 matrix."""
        v = np.asarray(rho, dtype=complex).reshape(9)
        return (self.l @ v).reshape(3, 3)

    def trace_defect(self) -> float:
        """Largest entry of ``vec(I)^H @ l``; zero for a trace-preserving map."""
        return float(np.max(np.abs(self.l[list(TRACE_POSITIONS), :].sum(axis=0))))


def build_liouvillian(params: SystemParams) -> LiouvillianMatrix:
    """Assemble the generator from the Hamiltonian and the decay matrix.

    ``L rho = -i[H, rho] + sum_ij G_ij (s_i rho s_j^+ - {s_j^+ s_i, rho}/2)``
    with ``s_2 = |2><1|``, ``s_3 = |3><1|`` and ``G`` the cross-decay matrix.
    """
    require_valid(params)
    eye = np.eye(3)
    h = hamiltonian(params)
    l = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    gamma = cross_decay_matrix(params)
    ops = _lowering_operators()
    for i, si in enumerate(ops):
        for j, sj in enumerate(ops):
            if gamma[i, j] == 0.0:
                continue
            jump = np.kron(si, sj.conj())
            anti = sj.conj().T @ si
            l += gamma[i, j] * (jump - 0.5 * np.kron(anti, eye) - 0.5 * np.kron(eye, anti.T))
    return LiouvillianMatrix(l, params)


def steady_state(params: SystemParams, liouvillian: LiouvillianMatrix | None = None) -> DensityMatrix:
    """Unique stationary state, from a direct 9x9 solve.

    The rho11 row of the generator is redundant (rows sum to zero under
    trace conservation) and is replaced by the unit-trace condition.

    Raises
    ------
    NonUniqueSteadyState
        If the reciprocal condition number of the constrained system is
        below ``1e-12``, e.g. when both effective fields vanish.
    """
    if liouvillian is None:
        liouvillian = build_liouvillian(params)
    a = np.array(liouvillian.l)
    a[0, :] = 0.0
    a[0, list(TRACE_POSITIONS)] = 1.0
    b = np.zeros(9, dtype=complex)
    b[0] = 1.0

    rcond = 1.0 / np.linalg.cond(a)
    if not rcond >= RCOND_THRESHOLD:
        raise NonUniqueSteadyState(
            f"steady state is not unique (reciprocal condition {rcond:.3e})", rcond=rcond
        )
    x = np.linalg.solve(a, b).reshape(3, 3)
    return DensityMatrix(0.5 * (x + x.conj().T))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: List[DensityMatrix]
    converged: bool
    final_residual: float

    @property
    def final(self) -> DensityMatrix:
        return self.states[-1]

    def __len__(self):
        return len(self.times)


def evolve(
    params: SystemParams,
    rho0,
    t_final: float,
    rtol: float = 1e-9,
    atol: float = 1e-12,
    first_step: float = 1e-3,
    max_step: float = 0.1,
    stop_when_converged: bool = True,
) -> Trajectory:
    """Integrate the Bloch equations with adaptive Dormand-Prince 5(4).

    Every accepted step is reported.  ``converged`` is set once
    ``max|d rho/dt|`` drops below ``1e-10`` at an accepted step; by default
    integration also stops there.

    Raises
    ------
    IntegrationError
        If the step size underflows; the exception carries the last
        accepted time and state.
    """
    if not t_final > 0:
        raise ValueError("t_final must be positive")
    l = build_liouvillian(params).l
    y0 = np.asarray(rho0, dtype=complex).reshape(9).copy()

    def residual(y):
        return float(np.max(np.abs(l @ y)))

    stepper = RK45(lambda t, y: l @ y, 0.0, y0, float(t_final),
                   rtol=rtol, atol=atol, first_step=first_step, max_step=max_step)
    times = [0.0]
    vectors = [y0]
    res = residual(y0)
    converged = res < CONVERGENCE_TOL
    while stepper.status == "running" and not (converged and stop_when_converged):
        message = stepper.step()
        if stepper.status == "failed":
            raise IntegrationError(
                f"integration failed at t = {times[-1]:.6g}: {message}",
                last_time=times[-1], last_state=DensityMatrix(vectors[-1]),
            )
        times.append(stepper.t)
        vectors.append(stepper.y.copy())
        res = residual(stepper.y)
        converged = converged or res < CONVERGENCE_TOL

    return Trajectory(
        times=np.array(times),
        states=[DensityMatrix(y) for y in vectors],
        converged=converged,
        final_residual=res,
    )
