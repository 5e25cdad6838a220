"""Parameters, density matrices, and the geometric relations set by SGC.

Units: gamma2 is the frequency unit and hbar = 1, so rates, Rabi
frequencies and detunings are all plain floats measured in gamma2.
Levels are labelled as in the lambda scheme: index 0 is the excited
state |1>, indices 1 and 2 are the lower states |2> and |3>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import List

import numpy as np

from .errors import DomainError, InvalidParameters

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass(frozen=True)
class SystemParams:
    """Physical knobs of the driven lambda atom, in units of gamma2.

    ``gamma2``/``gamma3`` are decay half-rates from |1> into |2>/|3>,
    ``p`` is the cosine of the angle between the two dipole moments,
    ``omega_c0``/``omega_p0`` are bare Rabi frequencies of the coupling
    and probe fields and ``delta_p`` is the signed probe detuning.
    """

    gamma2: float = 1.0
    gamma3: float = 1.0
    p: float = 0.0
    omega_c0: float = 4.0
    omega_p0: float = 0.1
    delta_p: float = 0.0

    @property
    def gamma_total(self) -> float:
        return self.gamma2 + self.gamma3

    @property
    def omega_c(self) -> float:
        """Effective coupling Rabi frequency."""
        return effective_rabi(self.omega_c0, self.p)

    @property
    def omega_p(self) -> float:
        """Effective probe Rabi frequency."""
        return effective_rabi(self.omega_p0, self.p)

    def with_(self, **changes) -> "SystemParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class ValidationResult:
    violations: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def effective_rabi(omega0: float, p: float) -> float:
    """Rabi frequency left after projecting a bare field onto its transition.

    Each field drives only one arm of the lambda, so the usable coupling is
    ``omega0 * sin(theta)`` with ``cos(theta) = p``.  The branch
    ``sin(theta) >= 0`` is taken, giving a non-negative result.

    Raises
    ------
    DomainError
        If ``|p| > 1``.
    """
    if not abs(p) <= 1.0:
        raise DomainError(f"p = {p!r} is outside [-1, 1]")
    if abs(p) == 1.0:
        return 0.0
    return omega0 * math.sqrt(1.0 - p * p)


def validate_params(params: SystemParams) -> ValidationResult:
    """Collect every constraint violation in ``params`` without raising."""
    violations = []
    warnings = []
    for name in ("gamma2", "gamma3", "p", "omega_c0", "omega_p0", "delta_p"):
        value = getattr(params, name)
        if not isinstance(value, (int, float, np.floating, np.integer)) or not math.isfinite(value):
            violations.append(f"{name} must be a finite real number")
    if violations:
        return ValidationResult(violations, warnings)

    if not params.gamma2 > 0:
        violations.append("gamma2 must be positive")
    if not params.gamma3 > 0:
        violations.append("gamma3 must be positive")
    if abs(params.p) > 1:
        violations.append("p out of [-1,1]")
    elif abs(params.p) == 1:
        warnings.append("|p| = 1: both effective fields vanish, problem is degenerate")
    if params.omega_c0 < 0:
        violations.append("omega_c0 must be non-negative")
    if params.omega_p0 < 0:
        violations.append("omega_p0 must be non-negative")
    return ValidationResult(violations, warnings)


def require_valid(params: SystemParams) -> SystemParams:
    result = validate_params(params)
    if not result.ok:
        raise InvalidParameters(result.violations)
    return params


def cross_decay_matrix(params: SystemParams) -> np.ndarray:
    """Decay-rate matrix of the two emission channels |1>->|2>, |1>->|3>.

    The off-diagonal entry ``2 p sqrt(gamma2 gamma3)`` is the interference
    between the two channels.  The matrix is positive semidefinite for
    ``|p| <= 1`` and becomes rank one at ``|p| = 1``.
    """
    require_valid(params)
    g2, g3 = params.gamma2, params.gamma3
    cross = 2.0 * params.p * math.sqrt(g2 * g3)
    return np.array([[2.0 * g2, cross], [cross, 2.0 * g3]])


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """3x3 complex state of the atom, index order (|1>, |2>, |3>).

    The constructor only normalises dtype and shape; use
    :meth:`violations` to check the physical invariants.
    """

    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape == (9,):
            rho = rho.reshape(3, 3)
        if rho.shape != (3, 3):
            raise ValueError(f"density matrix must be 3x3, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.rho
        return self.rho.astype(dtype)

    def __getitem__(self, index):
        return self.rho[index]

    @classmethod
    def pure(cls, level: int) -> "DensityMatrix":
        """Projector onto level 1, 2 or 3."""
        if level not in (1, 2, 3):
            raise ValueError("level must be 1, 2 or 3")
        rho = np.zeros((3, 3), dtype=complex)
        rho[level - 1, level - 1] = 1.0
        return cls(rho)

    @classmethod
    def diagonal(cls, populations) -> "DensityMatrix":
        return cls(np.diag(np.asarray(populations, dtype=complex)))

    def vec(self) -> np.ndarray:
        """Row-major vectorisation (rho11, rho12, rho13, rho21, ..., rho33)."""
        return self.rho.reshape(9).copy()

    @property
    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    @property
    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    @property
    def trace_defect(self) -> float:
        return float(abs(np.trace(self.rho) - 1.0))

    @property
    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.rho + self.rho.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def violations(self, hermitian_tol=HERMITIAN_TOL, trace_tol=TRACE_TOL, psd_tol=PSD_TOL):
        found = []
        if self.hermiticity_defect > hermitian_tol:
            found.append(f"not Hermitian (defect {self.hermiticity_defect:.3e})")
        if self.trace_defect > trace_tol:
            found.append(f"trace differs from 1 by {self.trace_defect:.3e}")
        if self.min_eigenvalue < -psd_tol:
            found.append(f"negative eigenvalue {self.min_eigenvalue:.3e}")
        return found

    def is_physical(self, **tols) -> bool:
        return not self.violations(**tols)


def random_density_matrix(rng: np.random.Generator, rank: int = 3) -> DensityMatrix:
    """Random state from a Ginibre matrix of the given rank."""
    g = rng.normal(size=(3, rank)) + 1j * rng.normal(size=(3, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real)
