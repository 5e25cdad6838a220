"""Runtime invariant and oracle checks behind ``sgc-chi verify``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np

from .core import DensityMatrix, SystemParams, cross_decay_matrix, effective_rabi, random_density_matrix
from .errors import NonUniqueSteadyState
from .liouvillian import build_liouvillian, equations_of_motion, evolve, steady_state
from .perturbation import DEFAULT_EPSILON, extract_orders, rho11_second, rho13_first, rho13_second, rho13_second_direct
from .susceptibility import chi1_kernel, chi2_kernel, relative_residual
from .sweep import SweepConfig, run_sweep, table_to_csv

REFERENCE = SystemParams(gamma2=1.0, gamma3=1.0, p=0.0, omega_c0=4.0, omega_p0=0.1, delta_p=2.0)
ORACLE_DELTAS = (-8.0, -6.0, -4.0, -2.0, -1.0, 1.0, 2.0, 4.0, 6.0, 8.0)
ORACLE_PS = (0.0, 0.5, 0.99)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def _core() -> List[Tuple[str, bool, str]]:
    out = []
    ok = effective_rabi(4.0, 0.0) == 4.0 and effective_rabi(4.0, 1.0) == 0.0
    val = effective_rabi(4.0, 0.99)
    ok = ok and abs(val - 4.0 * math.sqrt(1 - 0.99**2)) < 1e-12
    out.append(("effective Rabi frequency values", ok, f"Omega(4, 0.99) = {val:.6f}"))
    worst = min(np.linalg.eigvalsh(cross_decay_matrix(REFERENCE.with_(p=float(p))))[0]
                for p in np.linspace(-1, 1, 101))
    out.append(("cross-decay matrix PSD on 101 p values", worst >= -1e-14, f"min eigenvalue {worst:.2e}"))
    return out


def _liouvillian() -> List[Tuple[str, bool, str]]:
    out = []
    rng = np.random.default_rng(20240601)
    params = REFERENCE.with_(p=0.99)
    lv = build_liouvillian(params)
    worst = max(np.max(np.abs(lv.apply(r) - equations_of_motion(params, r)))
                for r in (random_density_matrix(rng) for _ in range(20)))
    out.append(("generator matches equations of motion", worst <= 1e-12, f"max diff {worst:.2e}"))
    out.append(("trace preservation", lv.trace_defect() <= 1e-12, f"defect {lv.trace_defect():.2e}"))

    ss = steady_state(REFERENCE)
    res = float(np.max(np.abs(build_liouvillian(REFERENCE).l @ ss.vec())))
    out.append(("steady state residual and physicality", res <= 1e-10 and ss.is_physical(),
                f"residual {res:.2e}"))
    try:
        steady_state(REFERENCE.with_(omega_c0=0.0, omega_p0=0.0))
        out.append(("degenerate steady state detected", False, "no error raised"))
    except NonUniqueSteadyState:
        out.append(("degenerate steady state detected", True, ""))

    traj = evolve(REFERENCE, DensityMatrix.diagonal([1 / 3] * 3), 100.0)
    diff = float(np.max(np.abs(traj.final.rho - ss.rho)))
    out.append(("evolve agrees with direct steady state at p = 0", traj.converged and diff <= 1e-8,
                f"converged={traj.converged}, diff {diff:.2e}"))
    return out


def _perturbation() -> List[Tuple[str, bool, str]]:
    out = []
    worst1 = worst2 = worst_null = 0.0
    for p in ORACLE_PS:
        for d in ORACLE_DELTAS:
            params = REFERENCE.with_(p=p, delta_p=d)
            num = extract_orders(params)
            worst1 = max(worst1, relative_residual(num.c13_1, rho13_first(params)))
            ref2 = rho13_second(params)
            if ref2 == 0:
                worst_null = max(worst_null, abs(num.c13_2) / (1e-8 * abs(num.c13_1) / DEFAULT_EPSILON))
            else:
                worst2 = max(worst2, relative_residual(num.c13_2, ref2))
    out.append(("first-order oracle", worst1 <= 1e-6, f"max rel {worst1:.2e}"))
    out.append(("second-order oracle", worst2 <= 1e-4, f"max rel {worst2:.2e}"))
    out.append(("second order vanishes without SGC", worst_null <= 1.0,
                f"|c13_2| at {worst_null:.2e} of the null bound"))

    rng = np.random.default_rng(7)
    imag = two_form = 0.0
    for _ in range(50):
        params = _random_params(rng)
        imag = max(imag, abs(rho11_second(params).imag))
        two_form = max(two_form, relative_residual(rho13_second_direct(params), rho13_second(params)))
    out.append(("second-order population is real", imag <= 1e-14, f"max |Im| {imag:.2e}"))
    out.append(("two forms of rho13 second order agree", two_form <= 1e-12, f"max rel {two_form:.2e}"))
    return out


def _random_params(rng) -> SystemParams:
    return SystemParams(
        gamma2=1.0,
        gamma3=float(rng.uniform(0.2, 3.0)),
        p=float(rng.uniform(-0.99, 0.99)),
        omega_c0=float(rng.uniform(0.5, 6.0)),
        omega_p0=float(rng.uniform(0.0, 0.5)),
        delta_p=float(rng.uniform(-10, 10)),
    )


def _susceptibility() -> List[Tuple[str, bool, str]]:
    out = []
    d = np.linspace(-10, 10, 1001)
    d[500] = 0.0
    oc = effective_rabi(4.0, 0.99)
    c1 = chi1_kernel(d, oc, 1.0, 1.0)
    c2 = chi2_kernel(d, oc, 0.99, 1.0, 1.0)
    parity = max(np.max(np.abs(c1.imag - c1.imag[::-1])),
                 np.max(np.abs(c1.real + c1.real[::-1])),
                 np.max(np.abs(np.abs(c2) - np.abs(c2[::-1]))))
    out.append(("parity in detuning", parity <= 1e-12, f"max defect {parity:.2e}"))
    out.append(("probe absorption is passive", bool(np.all(c1.imag >= 0)), f"min Im {c1.imag.min():.2e}"))
    off = np.max(np.abs(chi2_kernel(d, 4.0, 0.0, 1.0, 1.0)))
    out.append(("SGC necessity", off == 0.0 and np.max(np.abs(c2)) > 0,
                f"max |chi2| p=0: {off:g}, p=0.99: {np.max(np.abs(c2)):.4f}"))
    point = complex(chi1_kernel(oc, oc, 1.0, 1.0))
    out.append(("Im chi1 at delta = Omega_c", abs(point.imag - 0.5) <= 1e-12, f"{point.imag:.15f}"))
    return out


def _sweep() -> List[Tuple[str, bool, str]]:
    config = SweepConfig()
    a = table_to_csv(run_sweep(config))
    b = table_to_csv(run_sweep(config))
    rows = a.count("\n") - 1
    return [
        ("deterministic output", a == b, f"{len(a)} bytes"),
        ("row count", rows == len(config.p_values) * config.delta_grid.count, f"{rows} rows"),
    ]


SUITES: List[Tuple[str, Callable]] = [
    ("core-model", _core),
    ("liouvillian", _liouvillian),
    ("perturbation", _perturbation),
    ("susceptibility", _susceptibility),
    ("sweep", _sweep),
]


def run_all() -> List[CheckResult]:
    results = []
    for suite, fn in SUITES:
        try:
            for name, passed, detail in fn():
                results.append(CheckResult(suite, name, bool(passed), detail))
        except Exception as exc:  # a crashing suite is reported, not raised
            results.append(CheckResult(suite, "suite crashed", False, f"{type(exc).__name__}: {exc}"))
    return results
