"""Executable acceptance suite.

Each check compares one computed quantity against an independent expectation
(a closed form, an identity, or a frozen brute-force reference) and returns a
:class:`CheckResult`. Checks that bundle several comparisons report the worst
comparison normalised by its own tolerance, so ``measured`` is then a
dimensionless score that passes at or below 1.

Run from the command line with ``cpforce validate``.
"""

from __future__ import annotations

import enum
import json
import math
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Callable, Iterable

import numpy as np
from scipy.special import expi

from . import asymptotics as asy
from . import engine
from .green import conductor_f, g1
from .kernels import Polarization, kernel_endpoints
from .model import C_LIGHT
from .quadrature import RegulatorSchedule, integrate_adaptive, integrate_bose, integrate_pv, integrate_regulated

GROUND, EXCITED = -1, 1


class Status(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Comparison:
    """One measured-versus-expected pair with its acceptance rule."""

    name: str
    measured: float
    expected: float
    tolerance: float
    floor: float = 1.0

    @property
    def bound(self) -> float:
        return self.tolerance * max(abs(self.expected), self.floor)

    @property
    def passed(self) -> bool:
        return bool(abs(self.measured - self.expected) <= self.bound)

    @property
    def score(self) -> float:
        """Deviation in units of the allowed deviation."""
        dev = abs(self.measured - self.expected)
        if math.isnan(dev):
            return math.inf
        return dev / self.bound if self.bound > 0 else (0.0 if dev == 0 else math.inf)


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    status: Status
    measured: float
    expected: float
    tolerance: float
    runtime: float
    floor: float = 1.0
    details: dict = field(default_factory=dict)
    message: str = ""

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["status"] = self.status.value
        return rec


def _result(check_id: str, comparisons: list[Comparison], runtime: float, message: str = "") -> CheckResult:
    details = {c.name: {"measured": c.measured, "expected": c.expected, "tolerance": c.tolerance,
                        "floor": c.floor, "pass": c.passed} for c in comparisons}
    if len(comparisons) == 1:
        c = comparisons[0]
        status = Status.PASS if c.passed else Status.FAIL
        return CheckResult(check_id, status, c.measured, c.expected, c.tolerance, runtime, c.floor, details, message)
    worst = max(c.score for c in comparisons)
    status = Status.PASS if all(c.passed for c in comparisons) else Status.FAIL
    return CheckResult(check_id, status, worst, 0.0, 1.0, runtime, 1.0, details, message)


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


# --- frozen references --------------------------------------------------------

def load_reference() -> dict:
    """Brute-force oracle values frozen by ``scripts/freeze_reference.py``."""
    text = resources.files("cpforce").joinpath("data/reference.json").read_text()
    return json.loads(text)


# --- individual checks ------------------------------------------------------------
# Each returns (comparisons, message).

CONDUCTOR_EPS = 1e8
CONDUCTOR_GRID = [(x, z) for x in (0.3, 1.0, 3.0) for z in (1e-7, 1e-6, 1e-5)]


def check_conductor_g1():
    worst = 0.0
    for x, z in CONDUCTOR_GRID:
        omega = x * C_LIGHT / z
        worst = max(worst, _rel(g1(z, omega, CONDUCTOR_EPS), conductor_f(z, omega)))
    msg = "" if worst < 1e-3 else "finite-eps correction to g1 scales like 1/sqrt(eps); see notes"
    return [Comparison("max_rel_err", worst, 0.0, 1e-3)], msg


def check_vacuum_short():
    eps, zbar = 2.0, 1e-2
    parts = engine.shift_dimensionless(zbar, math.inf, math.inf, eps, GROUND)
    total = sum(p.value for p in parts.values())
    expected = -(eps - 1.0) / (eps + 1.0) / (8.0 * zbar**3)
    return [Comparison("total_shift", total, expected, 0.02)], ""


def check_g_consistency():
    comps = []
    for eps in (2.0, 4.0, 10.0):
        comps.append(Comparison(f"g({eps:g})", asy.coeff_g_numeric(eps).value, asy.coeff_g(eps), 1e-6))
    samples = np.linspace(1.0, 100.0, 21)[1:]
    largest = max(asy.coeff_g(float(e)) for e in samples)
    # negativity: measured max(g, 0) must be exactly 0
    comps.append(Comparison("max_positive_part", max(largest, 0.0), 0.0, 0.0))
    return comps, ""


def check_conductor_long():
    zbar = 30.0
    parts = engine.shift_dimensionless(zbar, math.inf, math.inf, math.inf, GROUND)
    total = sum(p.value for p in parts.values())
    expected = -3.0 / (8.0 * math.pi * zbar**4)
    return [Comparison("total_shift", total, expected, 0.03)], ""


def check_lowT_eq():
    eps, zbar, be = 2.0, 5.0, 500.0
    eq = engine.equilibrium_dimensionless(zbar, be, eps, GROUND).value
    eq -= engine.equilibrium_contact_term(be, eps, GROUND)
    f1, f2 = asy.coeff_f(1, eps).value, asy.coeff_f(2, eps).value
    expected = 96.0 * asy.ZETA5 / math.pi * f1 * zbar / be**5 + 16.0 * math.pi**5 / 63.0 * f2 * zbar**2 / be**6
    return [Comparison("eq_minus_contact", eq, expected, 0.05)], ""


NEQ_LONG = dict(eps=2.0, bs=100.0, be=200.0, zbar=2500.0)


def _neq_long_law(zbar: float, bs: float, be: float, eps: float, s: int) -> float:
    sign = -s
    return -sign * math.pi / 12.0 * (eps + 1.0) / math.sqrt(eps - 1.0) * (1 / bs**2 - 1 / be**2) / zbar**2


def log_log_slope(x: Iterable[float], y: Iterable[float]) -> float:
    x, y = np.log(np.asarray(x, float)), np.log(np.abs(np.asarray(y, float)))
    return float(np.polyfit(x, y, 1)[0])


def check_neq_long():
    p = NEQ_LONG
    neq = engine.nonequilibrium_dimensionless(p["zbar"], p["bs"], p["be"], p["eps"], GROUND).value
    expected = _neq_long_law(p["zbar"], p["bs"], p["be"], p["eps"], GROUND)
    zs = np.geomspace(p["zbar"], 8.0 * p["zbar"], 6)
    forces = []
    for z in zs:
        f = engine.force_dimensionless(float(z), p["bs"], p["be"], p["eps"], GROUND)
        forces.append(sum(v.value for v in f.values()))
    slope = log_log_slope(zs, forces)
    return [Comparison("neq_shift", neq, expected, 0.05),
            Comparison("force_slope", slope, -3.0, 0.05)], ""


def check_sign_law():
    p = NEQ_LONG
    args = (p["zbar"], p["bs"], p["be"], p["eps"], GROUND)
    swapped = (p["zbar"], p["be"], p["bs"], p["eps"], GROUND)
    hot_substrate = sum(v.value for v in engine.force_dimensionless(*args).values())
    cold_substrate = sum(v.value for v in engine.force_dimensionless(*swapped).values())
    neq = engine.nonequilibrium_dimensionless(*args).value
    neq_swapped = engine.nonequilibrium_dimensionless(*swapped).value
    return [
        # T_s > T_e here (bs < be): attractive, i.e. negative force
        Comparison("sign_force_hot_substrate", float(np.sign(hot_substrate)), -1.0, 0.0),
        Comparison("sign_force_cold_substrate", float(np.sign(cold_substrate)), 1.0, 0.0),
        Comparison("neq_antisymmetry", neq + neq_swapped, 0.0, 1e-12, abs(neq)),
    ], ""


def check_highT_intermediate():
    eps, zbar, bs, be = 2.0, 0.01, 1e-4, 2e-4
    eq = engine.equilibrium_dimensionless(zbar, be, eps, GROUND).value
    neq = engine.nonequilibrium_dimensionless(zbar, bs, be, eps, GROUND).value
    f4, f5 = asy.coeff_f(4, eps).value, asy.coeff_f(5, eps).value
    return [Comparison("eq", eq, f4 / (4.0 * be * zbar), 0.05),
            Comparison("neq", neq, f5 * (1 / bs - 1 / be) / (4.0 * zbar), 0.05)], ""


def check_kernel_relation():
    worst = 0.0
    for eps in (1.2, 2.0, 4.0, 16.0, 100.0):
        for sigma, d in kernel_endpoints(eps).items():
            worst = max(worst, _rel((eps - 1.0) * d.dT0, d.dA0))
    return [Comparison("max_rel_err", worst, 0.0, 1e-8)], ""


SWITCH_OFF_GRID = [
    (zbar, beta, eps, s)
    for zbar, beta in ((0.01, 1e-3), (0.3, 0.5), (2.0, 50.0), (40.0, 10.0), (1e3, 100.0))
    for eps, s in ((2.0, GROUND), (7.0, EXCITED))
]


def check_switch_off():
    worst = 0.0
    for zbar, beta, eps, s in SWITCH_OFF_GRID:
        worst = max(worst, abs(engine.nonequilibrium_dimensionless(zbar, beta, beta, eps, s).value))
    return [Comparison("max_abs_neq", worst, 0.0, 1e-14)], ""


FORCE_GRID = [
    (0.05, 2.0, 4.0, 2.0, GROUND),
    (0.05, 2.0, 4.0, 2.0, EXCITED),
    (0.5, 1.0, 3.0, 4.0, GROUND),
    (0.5, 1.0, 3.0, 4.0, EXCITED),
    (3.0, 20.0, 10.0, 2.0, GROUND),
    (3.0, 20.0, 10.0, 2.0, EXCITED),
    (20.0, 5.0, 8.0, 10.0, GROUND),
    (20.0, 5.0, 8.0, 10.0, EXCITED),
    (1.0, math.inf, math.inf, 3.0, GROUND),
    (1.0, 2.0, 2.0, 3.0, EXCITED),
    (2.0, 30.0, 30.0, math.inf, GROUND),
    (0.2, 0.5, 0.5, math.inf, EXCITED),
]


def check_force_methods():
    worst = 0.0
    for zbar, bs, be, eps, s in FORCE_GRID:
        a = sum(v.value for v in engine.force_dimensionless(zbar, bs, be, eps, s).values())
        b = sum(v.value for v in engine.force_central_difference_dimensionless(zbar, bs, be, eps, s).values())
        worst = max(worst, _rel(b, a))
    return [Comparison("max_rel_diff", worst, 0.0, 1e-4)], ""


def honesty_corpus() -> list[tuple[str, Callable[[], object], float]]:
    """Twenty integrals with known values: (name, integrator call, exact value)."""
    zeta3, zeta5 = asy.ZETA3, asy.ZETA5
    pi = math.pi
    sched = RegulatorSchedule.geometric(0.2, 0.5, 6, 3)
    out = [
        ("bose_x1", lambda: integrate_bose(lambda x: x, 1.0), pi**2 / 6),
        ("bose_x2", lambda: integrate_bose(lambda x: x**2, 1.0), 2 * zeta3),
        ("bose_x3", lambda: integrate_bose(lambda x: x**3, 1.0), pi**4 / 15),
        ("bose_x4", lambda: integrate_bose(lambda x: x**4, 1.0), 24 * zeta5),
        ("bose_x5", lambda: integrate_bose(lambda x: x**5, 1.0), 8 * pi**6 / 63),
        ("bose_x3_scaled", lambda: integrate_bose(lambda x: x**3, 1e-3 / C_LIGHT),
         pi**4 / 15 * (C_LIGHT / 1e-3) ** 4),
        ("damped_cos", lambda: integrate_adaptive(lambda x: np.exp(-x) * np.cos(5 * x), 0.0, 60.0,
                                                  1e-13, 1e-12, list(np.arange(1, 60) * pi / 5)), 1 / 26),
        ("damped_sin", lambda: integrate_adaptive(lambda x: np.exp(-x) * np.sin(10 * x), 0.0, 60.0,
                                                  1e-13, 1e-12, list(np.arange(1, 60) * pi / 10)), 10 / 101),
        ("gauss_damped_cos", lambda: integrate_adaptive(lambda x: np.exp(-x * x) * np.cos(3 * x), 0.0, 10.0,
                                                        1e-13, 1e-12), 0.5 * math.sqrt(pi) * math.exp(-2.25)),
        ("x_exp_sin", lambda: integrate_adaptive(lambda x: x * np.exp(-2 * x) * np.sin(x), 0.0, 40.0,
                                                 1e-13, 1e-12), 4 / 25),
        ("regulated_sin", lambda: integrate_regulated(np.sin, sched, pi, 1e-11), 1.0),
        ("regulated_cos_shift", lambda: integrate_regulated(lambda x: np.cos(x + 0.5), sched, pi, 1e-11),
         -math.sin(0.5)),
        ("pv_symmetric", lambda: integrate_pv(lambda x: 1 / (x - 1), 0.0, 2.0, 1.0), 0.0),
        ("pv_log", lambda: integrate_pv(lambda x: 1 / (x - 1), 0.0, 3.0, 1.0), math.log(2)),
        ("pv_quadratic", lambda: integrate_pv(lambda x: x * x / (x - 1), 0.0, 2.0, 1.0), 4.0),
        ("pv_exp", lambda: integrate_pv(lambda x: np.exp(-x) / (x - 1), 0.0, 40.0, 1.0),
         -math.exp(-1.0) * float(expi(1.0))),
        ("sqrt_endpoint", lambda: integrate_adaptive(np.sqrt, 0.0, 1.0, 1e-12, 1e-12), 2 / 3),
        ("log_endpoint", lambda: integrate_adaptive(np.log, 0.0, 1.0, 1e-12, 1e-12), -1.0),
        ("sine_half_period", lambda: integrate_adaptive(np.sin, 0.0, pi, 1e-13, 1e-13), 2.0),
        ("lorentzian", lambda: integrate_adaptive(lambda x: 1 / (1 + x * x), 0.0, 1e3, 1e-12, 1e-12,
                                                  [1.0, 10.0, 100.0]), math.atan(1e3)),
    ]
    return out


def check_honesty():
    rows = honesty_corpus()
    honest = 0
    for _, run, exact in rows:
        res = run()
        err = abs(res.value - exact)
        # an exact hit counts even if the estimate is zero
        if err <= 3.0 * res.abs_err or err == 0.0:
            honest += 1
    fraction = honest / len(rows)
    return [Comparison("fraction_within_3_sigma", fraction, 1.0, 0.05)], f"{honest}/{len(rows)} honest"


# extra checks, beyond the acceptance list

REGIME_GRID = [
    # (zbar, bs, be, eps, s)
    (0.005, 500.0, 1000.0, 2.0, GROUND),
    (40.0, 1e5, 2e5, 2.0, GROUND),
    (1e4, 100.0, 200.0, 2.0, EXCITED),
    (1e-6, 1e-3, 2e-3, 4.0, GROUND),
    (0.005, 2e-5, 4e-5, 4.0, EXCITED),
    (100.0, 0.01, 0.02, 2.0, GROUND),
    (30.0, math.inf, math.inf, math.inf, GROUND),
    (0.005, 1e3, 1e3, math.inf, EXCITED),
]


def check_regime_grid():
    worst = 0.0
    for zbar, bs, be, eps, s in REGIME_GRID:
        a = asy.asymptotic_dimensionless(zbar, bs, be, eps, s)
        parts = engine.shift_dimensionless(zbar, bs, be, eps, s)
        total = sum(p.value for p in parts.values())
        if a.omits_contact_constant:
            total -= engine.equilibrium_contact_term(be, eps, s) + engine.nonequilibrium_contact_term(bs, be, eps, s)
        worst = max(worst, _rel(total, a.value))
    return [Comparison("max_rel_diff", worst, 0.0, 0.05)], ""


def check_frozen_coefficients():
    ref = load_reference()
    comps = []
    for key, value in ref["coeff_f"].items():
        k, eps = key.split("@")
        comps.append(Comparison(key, asy.coeff_f(int(k), float(eps)).value, value, 1e-9))
    return comps, ""


CHECKS: dict[str, Callable] = {
    "conductor.g1_matches_f": check_conductor_g1,
    "vacuum.short_distance_law": check_vacuum_short,
    "asymptotics.g_consistency": check_g_consistency,
    "conductor.long_distance_ground": check_conductor_long,
    "thermal.lowT_eq_asymptote": check_lowT_eq,
    "thermal.neq_long_distance_law": check_neq_long,
    "force.sign_law": check_sign_law,
    "thermal.highT_intermediate": check_highT_intermediate,
    "kernels.TprimeA_relation": check_kernel_relation,
    "thermal.equilibrium_switch_off": check_switch_off,
    "force.method_agreement": check_force_methods,
    "quadrature.honesty_corpus": check_honesty,
    "asymptotics.regime_grid": check_regime_grid,
    "reference.frozen_coefficients": check_frozen_coefficients,
}

# acceptance criteria in order; the last two entries of CHECKS are extras
ACCEPTANCE_IDS = tuple(list(CHECKS)[:12])


class UnknownCheckError(KeyError):
    pass


def run_check(check_id: str) -> CheckResult:
    if check_id not in CHECKS:
        raise UnknownCheckError(check_id)
    start = time.perf_counter()
    try:
        comps, message = CHECKS[check_id]()
    except Exception as exc:  # a crashing check is a failing check
        runtime = time.perf_counter() - start
        return CheckResult(check_id, Status.FAIL, math.nan, math.nan, math.nan, runtime,
                           message=f"{type(exc).__name__}: {exc}")
    return _result(check_id, comps, time.perf_counter() - start, message)


def run_suite(selection: Iterable[str] | None = None, budget: float | None = None) -> list[CheckResult]:
    """Run the selected checks in a fixed order.

    ``budget`` is a wall-clock limit in seconds; checks not started before it
    runs out are reported Inconclusive. ``None`` selects every check.
    """
    ids = list(CHECKS) if selection is None else list(dict.fromkeys(selection))
    if not ids:
        raise ValueError("selection must not be empty")
    unknown = [c for c in ids if c not in CHECKS]
    if unknown:
        raise UnknownCheckError(", ".join(unknown))
    ids.sort(key=list(CHECKS).index)
    start = time.perf_counter()
    results = []
    for check_id in ids:
        if budget is not None and time.perf_counter() - start >= budget:
            results.append(CheckResult(check_id, Status.INCONCLUSIVE, math.nan, math.nan, math.nan, 0.0,
                                       message="budget exhausted"))
            continue
        results.append(run_check(check_id))
    return results


def write_report(results: list[CheckResult], stream) -> None:
    """One JSON object per line."""
    for r in results:
        stream.write(json.dumps(r.to_record(), sort_keys=True) + "\n")


def exit_code(results: list[CheckResult]) -> int:
    return 1 if any(r.status is Status.FAIL for r in results) else 0


def summary_line(r: CheckResult) -> str:
    label = {Status.PASS: "PASS", Status.FAIL: "FAIL", Status.INCONCLUSIVE: "INCONCLUSIVE"}[r.status]
    tail = f"  ({r.message})" if r.message else ""
    return (f"{label:12s} {r.check_id:34s} measured={r.measured:.6g} expected={r.expected:.6g} "
            f"tol={r.tolerance:.3g} t={r.runtime:.2f}s{tail}")
