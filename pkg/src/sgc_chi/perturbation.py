"""Weak-probe expansion of the steady state.

All closed forms are returned per power of the effective probe Rabi
frequency: ``rho13 = c13_1 * Op + c13_2 * Op**2 + ...`` and likewise for
the second-order population ``rho11`` and lower-level coherence ``rho23``.
Without SGC the expansion of ``rho13`` has only odd powers; the cross-decay
source in the rho23 equation feeds the second-order population back into
the coherences and produces the even terms.

:func:`extract_orders` is the independent check: it reads the same
coefficients off full steady-state solutions by polynomial fitting.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import SystemParams, effective_rabi, require_valid
from .errors import ExtractionUnreliable, SingularityError
from .liouvillian import steady_state

DEFAULT_EPSILON = 1e-4
DEFAULT_NODES = 5
FIT_DEGREE = 4
FIT_RESIDUAL_TOL = 1e-8
# below this, fit residuals are indistinguishable from solver round-off
FIT_NOISE_FLOOR = 1e-13


@dataclass(frozen=True)
class PerturbativeCoefficients:
    """Probe-response coefficients of the steady state.

    ``fit_residual`` is only set by :func:`extract_orders`; it is the worst
    relative misfit over the three fitted matrix elements.  ``c23_1`` is
    likewise only available from the numerical route.
    """

    c13_1: complex
    c11_2: complex
    c23_2: complex
    c13_2: complex
    c23_1: Optional[complex] = None
    fit_residual: Optional[float] = None


def _two_photon_denominator(params: SystemParams) -> complex:
    gt = params.gamma_total
    dp = params.delta_p
    oc = params.omega_c
    den = dp * (gt + 1j * dp) - 1j * oc * oc
    if den == 0:
        raise SingularityError(
            f"weak-probe denominator vanishes at delta_p = {dp}, omega_c = {oc}"
        )
    return den


def rho13_first(params: SystemParams) -> complex:
    """Linear probe coherence per unit probe Rabi frequency.

    Vanishes at ``delta_p = 0`` (the EIT dark resonance).
    """
    require_valid(params)
    return 1j * params.delta_p / _two_photon_denominator(params)


def rho11_second(params: SystemParams) -> complex:
    """Excited population per unit ``Op**2``, from the stationary rho33 row.

    Real and non-negative, ``i (conj(c) - c) / (2 gamma3) = Im(c) / gamma3``.
    """
    c = rho13_first(params)
    return 1j * (c.conjugate() - c) / (2.0 * params.gamma3)


def rho23_second(params: SystemParams) -> complex:
    """Lower-level coherence per unit ``Op**2`` generated by SGC."""
    c = rho13_first(params)
    g2, g3 = params.gamma2, params.gamma3
    gt = g2 + g3
    dp = params.delta_p
    num = params.p * math.sqrt(g2 * g3) * (gt + 1j * dp) * (c.conjugate() - c)
    return num / (g3 * _two_photon_denominator(params))


def rho13_second(params: SystemParams) -> complex:
    """Second-order probe coherence per unit ``Op**2``.

    Obtained by feeding :func:`rho23_second` through the coupling field.
    """
    gt = params.gamma_total
    return 1j * params.omega_c * rho23_second(params) / (gt + 1j * params.delta_p)


def rho13_second_direct(params: SystemParams) -> complex:
    """Same coefficient as :func:`rho13_second`, in the fully expanded form.

    Kept separate so the two algebraic routes can be compared.
    """
    c = rho13_first(params)
    g2, g3 = params.gamma2, params.gamma3
    num = 1j * params.omega_c * params.p * math.sqrt(g2 * g3) * (c.conjugate() - c)
    return num / (g3 * _two_photon_denominator(params))


def analytic_coefficients(params: SystemParams) -> PerturbativeCoefficients:
    return PerturbativeCoefficients(
        c13_1=rho13_first(params),
        c11_2=rho11_second(params),
        c23_2=rho23_second(params),
        c13_2=rho13_second(params),
    )


def fit_zero_intercept(x, y, degree: int = FIT_DEGREE):
    """Least-squares fit ``y ~ sum_k a_k x**k`` for ``k = 1..degree``.

    The abscissae are rescaled to ``(0, 1]`` before building the Vandermonde
    matrix.  Returns the coefficients (lowest power first) and the largest
    absolute fit residual.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=complex)
    if x.size < degree:
        raise ValueError(f"need at least {degree} nodes for a degree-{degree} fit")
    scale = np.max(np.abs(x))
    if scale == 0:
        raise ExtractionUnreliable("all fit abscissae are zero")
    u = x / scale
    powers = np.arange(1, degree + 1)
    vander = u[:, None] ** powers[None, :]
    a, *_ = np.linalg.lstsq(vander, y, rcond=None)
    resid = float(np.max(np.abs(vander @ a - y)))
    return a / scale ** powers, resid


SteadySolver = Callable[[SystemParams], object]


def extract_orders(
    params: SystemParams,
    epsilon: float = DEFAULT_EPSILON,
    n_nodes: int = DEFAULT_NODES,
    solver: Optional[SteadySolver] = None,
) -> PerturbativeCoefficients:
    """Read the first two response orders off brute-force steady states.

    The bare probe amplitude is stepped through ``epsilon * (1..n_nodes)``.
    rho13, rho23 and rho11 are each fitted with a zero-intercept quartic in
    the *effective* probe Rabi frequency, and the linear and quadratic
    coefficients are returned.  ``epsilon`` trades truncation error against
    solver round-off; ``1e-4`` suits the default parameter range.

    ``solver`` maps parameters to a 3x3 state and defaults to
    :func:`~sgc_chi.liouvillian.steady_state`.

    Raises
    ------
    ExtractionUnreliable
        If a fit misses its data by more than ``1e-8`` relative to the
        data scale (and above the round-off floor).
    NonUniqueSteadyState
        Propagated from the solver.
    """
    require_valid(params)
    if n_nodes < FIT_DEGREE + 1:
        raise ValueError(f"n_nodes must be at least {FIT_DEGREE + 1}")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    solve = steady_state if solver is None else solver

    bare = epsilon * np.arange(1, n_nodes + 1)
    omegas = np.array([effective_rabi(b, params.p) for b in bare])
    if np.all(omegas == 0):
        raise ExtractionUnreliable("effective probe Rabi frequency is zero at |p| = 1")

    states = np.array([np.asarray(solve(params.with_(omega_p0=float(b))), dtype=complex).reshape(3, 3)
                       for b in bare])
    fits = {}
    worst = 0.0
    for name, (i, j) in (("13", (0, 2)), ("23", (1, 2)), ("11", (0, 0))):
        data = states[:, i, j]
        coeffs, resid = fit_zero_intercept(omegas, data)
        size = float(np.max(np.abs(data)))
        rel = resid / size if size > 0 else 0.0
        if resid > FIT_NOISE_FLOOR and rel > FIT_RESIDUAL_TOL:
            raise ExtractionUnreliable(
                f"rho{name} fit residual {rel:.3e} exceeds {FIT_RESIDUAL_TOL:g} relative"
            )
        if resid > FIT_NOISE_FLOOR:
            worst = max(worst, rel)
        fits[name] = coeffs

    return PerturbativeCoefficients(
        c13_1=complex(fits["13"][0]),
        c11_2=complex(fits["11"][1]),
        c23_2=complex(fits["23"][1]),
        c13_2=complex(fits["13"][1]),
        c23_1=complex(fits["23"][0]),
        fit_residual=worst,
    )


def response_scale(params: SystemParams, order: int) -> float:
    """Natural size ``(gamma2 + gamma3)**-order`` of an order-``order`` coefficient.

    ``Im c13_1`` peaks at ``1/(gamma2 + gamma3)`` on the Autler-Townes lines.
    Used as the normalisation floor when a closed-form coefficient is zero.
    """
    return params.gamma_total ** -order
