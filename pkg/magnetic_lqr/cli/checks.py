"""
Invariant Check Suite

Runs every structural and numerical property the design pipeline promises
against one configured problem and collects pass/fail results with the
measured value and the threshold it was held to.

Checks:
- Gamma_k symplectic, Gamma_0 spectrum reciprocal, Gamma_k Pi_k = I
- gamma/pi/eigen/recursion schedules agree
- periodic Riccati residual, symmetry and PSD of the gamma schedule
- closed-loop monodromy spectral radius below one
- inversion counts of the gamma and pi paths

The two Gamma_k product checks divide their Frobenius residual by
max(1, ||Gamma_k||_F); all other checks use the measures named in them.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from magnetic_lqr.core.config import settings
from magnetic_lqr.core.exceptions import NumericalError
from magnetic_lqr.core.problem import DesignProblem
from magnetic_lqr.services.riccati.oracle import backward_recursion_oracle
from magnetic_lqr.services.riccati.schedule import (
    GainSchedule,
    relative_difference,
    riccati_residual,
)
from magnetic_lqr.services.riccati.solvers import (
    solve_periodic_eigen,
    solve_periodic_gamma,
    solve_periodic_pi,
)
from magnetic_lqr.services.simulation.closed_loop import monodromy
from magnetic_lqr.services.symplectic.pencil import gamma_product, pi_product
from magnetic_lqr.services.symplectic.structure import symplectic_residual

logger = logging.getLogger(__name__)

RECIPROCITY_TOL = 1e-6
INVERSE_PRODUCT_TOL = 1e-8
PI_AGREEMENT_TOL = 1e-6
EIGEN_AGREEMENT_TOL = 1e-5
ORACLE_AGREEMENT_TOL = 1e-4
RESIDUAL_TOL = 1e-6
SYMMETRY_TOL = 1e-10
PSD_TOL = -1e-10


@dataclass
class CheckResult:
    """Outcome of one check."""

    name: str
    passed: bool
    measured: Optional[float]
    threshold: float
    detail: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "measured": self.measured,
            "threshold": self.threshold,
            "detail": self.detail,
        }


@dataclass
class CheckReport:
    """All check results of one run."""

    results: List[CheckResult] = field(default_factory=list)

    def add(self, name: str, measured: float, threshold: float, passed: bool, detail: str = "") -> CheckResult:
        result = CheckResult(
            name=name,
            passed=bool(passed),
            measured=None if measured is None else float(measured),
            threshold=threshold,
            detail=detail,
        )
        self.results.append(result)
        log = logger.info if result.passed else logger.warning
        log(
            f"Check {name}: {result.status}",
            extra={"check": name, "measured": result.measured, "threshold": threshold},
        )
        return result

    def add_failure(self, name: str, threshold: float, exc: Exception) -> CheckResult:
        """Record a check that could not be evaluated."""
        return self.add(name, None, threshold, False, detail=f"{type(exc).__name__}: {exc}")

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def to_dict(self) -> dict:
        return {
            "status": "pass" if self.passed else "fail",
            "total": len(self.results),
            "failed": len(self.failures),
            "checks": [r.to_dict() for r in self.results],
        }


def _max_schedule_difference(a: GainSchedule, b: GainSchedule) -> float:
    return max(relative_difference(Pa, Pb) for Pa, Pb in zip(a.P_list, b.P_list))


def _solve_or_record(
    report: CheckReport, name: str, threshold: float, solve: Callable[[], GainSchedule]
) -> Optional[GainSchedule]:
    try:
        return solve()
    except NumericalError as exc:
        report.add_failure(name, threshold, exc)
        return None


def _gamma_scale(G: np.ndarray) -> float:
    return max(1.0, float(np.linalg.norm(G)))


def run_check_suite(
    problem: DesignProblem,
    unit_circle_tol: Optional[float] = None,
    num_periods: Optional[int] = None,
    convergence_tol: Optional[float] = None,
    workers: Optional[int] = None,
) -> CheckReport:
    """
    Evaluate the invariant suite on a design problem.

    Numerical failures inside a check are recorded as failed checks; only
    failures that prevent building the problem itself propagate.

    Returns:
        CheckReport
    """
    report = CheckReport()
    pencil = problem.build_pencil()
    pm = problem.model
    p = pm.p

    # Pencil products
    gammas = [gamma_product(pencil, k) for k in range(p)]
    worst = max(symplectic_residual(G) / _gamma_scale(G) for G in gammas)
    report.add("gamma_symplectic", worst, settings.SYMPLECTIC_TOL, worst <= settings.SYMPLECTIC_TOL)

    log_magnitude = np.sort(np.log(np.abs(np.linalg.eigvals(gammas[0]))))
    asymmetry = float(np.max(np.abs(log_magnitude + log_magnitude[::-1])))
    report.add("gamma0_reciprocal_spectrum", asymmetry, RECIPROCITY_TOL, asymmetry <= RECIPROCITY_TOL)

    try:
        eye = np.eye(2 * pm.n)
        inverse_error = 0.0
        for k, G in enumerate(gammas):
            Pi = pi_product(pencil, k)
            inverse_error = max(inverse_error, float(np.linalg.norm(G @ Pi - eye) / _gamma_scale(G)))
        report.add("gamma_pi_inverse", inverse_error, INVERSE_PRODUCT_TOL, inverse_error <= INVERSE_PRODUCT_TOL)
    except NumericalError as exc:
        report.add_failure("gamma_pi_inverse", INVERSE_PRODUCT_TOL, exc)

    # Schedules
    gamma = _solve_or_record(
        report, "gamma_solve", RESIDUAL_TOL,
        lambda: solve_periodic_gamma(pencil, problem.weights, unit_circle_tol, workers),
    )
    if gamma is None:
        return report

    residual = float(np.max(riccati_residual(pm, problem.weights, gamma)))
    report.add("riccati_residual", residual, RESIDUAL_TOL, residual <= RESIDUAL_TOL)
    symmetry = gamma.symmetry_error()
    report.add("schedule_symmetry", symmetry, SYMMETRY_TOL, symmetry <= SYMMETRY_TOL)
    psd = gamma.psd_margin()
    report.add("schedule_psd", psd, PSD_TOL, psd >= PSD_TOL)

    pi = _solve_or_record(
        report, "pi_agreement", PI_AGREEMENT_TOL,
        lambda: solve_periodic_pi(pencil, problem.weights, unit_circle_tol, workers),
    )
    if pi is not None:
        diff = _max_schedule_difference(gamma, pi)
        report.add("pi_agreement", diff, PI_AGREEMENT_TOL, diff <= PI_AGREEMENT_TOL)

    eigen = _solve_or_record(
        report, "eigen_agreement", EIGEN_AGREEMENT_TOL,
        lambda: solve_periodic_eigen(pencil, problem.weights, unit_circle_tol, workers),
    )
    if eigen is not None:
        diff = _max_schedule_difference(gamma, eigen)
        report.add("eigen_agreement", diff, EIGEN_AGREEMENT_TOL, diff <= EIGEN_AGREEMENT_TOL)

    oracle = _solve_or_record(
        report, "oracle_agreement", ORACLE_AGREEMENT_TOL,
        lambda: backward_recursion_oracle(pm, problem.weights, num_periods, convergence_tol),
    )
    if oracle is not None:
        diff = _max_schedule_difference(gamma, oracle)
        report.add("oracle_agreement", diff, ORACLE_AGREEMENT_TOL, diff <= ORACLE_AGREEMENT_TOL)

    # Closed loop
    radius = monodromy(pm, gamma).spectral_radius
    report.add("monodromy_spectral_radius", radius, 1.0, radius < 1.0)

    # Inversion accounting
    report.add("gamma_inversions", gamma.inversions, 1, gamma.inversions == 1)
    if pi is not None:
        report.add("pi_inversions", pi.inversions, p, pi.inversions == p)

    return report
