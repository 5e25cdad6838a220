"""Reduced linear and second-order susceptibilities.

``chi1`` and ``chi2`` are the medium response with the density and dipole
prefactors (``N mu^2 / eps0 hbar`` and ``N mu^3 / eps0 hbar^2``) set to one.
Pass ``scale`` to restore dimensional values.

The ``*_kernel`` functions broadcast over numpy arrays of detuning and
effective coupling and are what the sweep engine uses.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .core import SystemParams, require_valid
from .errors import SingularityError
from .perturbation import (
    DEFAULT_EPSILON,
    DEFAULT_NODES,
    extract_orders,
    rho13_first,
    rho13_second,
    response_scale,
)

CHI1_IDENTITY_TOL = 1e-12
CHI2_IDENTITY_TOL = 1e-10
ORACLE_TOL = 1e-4


@dataclass(frozen=True)
class SusceptibilityPoint:
    delta_p: float
    chi1: complex
    chi2: complex


def chi1_denominator(delta, omega_c, gamma2, gamma3):
    return -1j * omega_c**2 + delta * (gamma2 + gamma3 + 1j * delta)


def chi1_kernel(delta, omega_c, gamma2, gamma3):
    return 1j * delta / chi1_denominator(delta, omega_c, gamma2, gamma3)


def chi2_denominator(delta, omega_c, gamma2, gamma3):
    gt = gamma2 + gamma3
    a = omega_c**2 - delta**2
    b = delta * gt
    return np.sqrt(gamma2 * gamma3) * (-1j * a + b) ** 2 * (1j * a + b)


def chi2_kernel(delta, omega_c, p, gamma2, gamma3):
    num = 2.0 * omega_c * delta**2 * p * gamma2 * (gamma2 + gamma3)
    return num / chi2_denominator(delta, omega_c, gamma2, gamma3)


def _check(params, den):
    if den == 0:
        raise SingularityError(
            f"susceptibility denominator vanishes at delta_p = {params.delta_p}, "
            f"omega_c = {params.omega_c}"
        )


def chi1(params: SystemParams, scale: float = 1.0) -> complex:
    """Reduced linear susceptibility; zero on two-photon resonance."""
    require_valid(params)
    args = (params.delta_p, params.omega_c, params.gamma2, params.gamma3)
    _check(params, chi1_denominator(*args))
    return scale * complex(chi1_kernel(*args))


def chi2(params: SystemParams, scale: float = 1.0) -> complex:
    """Reduced second-order susceptibility.

    Nonzero only with SGC (``p != 0``) and away from ``delta_p = 0``.
    """
    require_valid(params)
    dp, oc = params.delta_p, params.omega_c
    g2, g3 = params.gamma2, params.gamma3
    _check(params, chi2_denominator(dp, oc, g2, g3))
    return scale * complex(chi2_kernel(dp, oc, params.p, g2, g3))


def susceptibility_point(params: SystemParams) -> SusceptibilityPoint:
    return SusceptibilityPoint(params.delta_p, chi1(params), chi2(params))


def relative_residual(value: complex, reference: complex, floor: float = 0.0) -> float:
    """``|value - reference| / max(|reference|, floor)``; 0 when both vanish."""
    diff = abs(value - reference)
    if diff == 0:
        return 0.0
    norm = max(abs(reference), floor)
    return diff / norm if norm > 0 else float("inf")


@dataclass(frozen=True)
class Residual:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.value <= self.tolerance


@dataclass(frozen=True)
class ConsistencyReport:
    params: SystemParams
    residuals: List[Residual] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.residuals)

    def lines(self):
        for r in self.residuals:
            flag = "PASS" if r.passed else "FAIL"
            yield f"{flag}  {r.name}: {r.value:.3e} (tol {r.tolerance:g})"


def consistency_report(params: SystemParams,
                       epsilon: float = DEFAULT_EPSILON,
                       n_nodes: int = DEFAULT_NODES) -> ConsistencyReport:
    """Cross-check the closed forms against each other and the numeric oracle.

    The oracle residual is normalised by ``max(|chi2|, (gamma2+gamma3)**-2)``
    so that points where the closed form is exactly zero stay meaningful.
    """
    c1 = chi1(params)
    c2 = chi2(params)
    numeric = extract_orders(params, epsilon=epsilon, n_nodes=n_nodes)
    floor = response_scale(params, 2)
    return ConsistencyReport(params, [
        Residual("chi1 vs rho13_first", relative_residual(c1, rho13_first(params)), CHI1_IDENTITY_TOL),
        Residual("chi2 vs rho13_second", relative_residual(c2, rho13_second(params)), CHI2_IDENTITY_TOL),
        Residual("chi2 vs extracted c13_2", relative_residual(numeric.c13_2, c2, floor), ORACLE_TOL),
    ])
