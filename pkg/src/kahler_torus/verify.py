"""The acceptance suite as a library call.

:func:`run_verify` evaluates the twelve criteria at a level (``quick``: N=16,
M=8; ``full``: N=32, M=16) and returns a :class:`VerifyReport` whose text is
byte-stable for a given level and seed: no timings, every number printed with
17 significant digits.  Criteria that name their own grid use it at both
levels.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .energy import (
    KAPPA,
    calibrate_kappa,
    energy_convexity_check,
    mabuchi_energy,
    mabuchi_entropy,
    mabuchi_segment,
    scalar_curvature,
)
from .geometry import (
    PathGrid,
    alpha,
    christoffel,
    functional_I,
    metric_compatibility_residual,
    normalize,
    sectional_curvature,
)
from .grid import GridSpec, density
from .hcma import SolverConfig, comparison_gap, initial_path, solve_geodesic
from .metric import (
    distance,
    distance_first_variation,
    energy_drift_check,
    lower_bound_check,
    minimality_check,
    triangle_check,
)
from .oracle import reduced_oracle
from .potentials import mode_field, random_modes, random_potential

__all__ = ["Level", "LEVELS", "CriterionResult", "VerifyReport", "run_verify", "CRITERIA",
           "envelope_check", "closedness_residual"]

A0 = 0.05 / math.pi**2  # the standard one-mode amplitude


def _g(x) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class Level:
    name: str
    N: int
    M: int


LEVELS = {"quick": Level("quick", 16, 8), "full": Level("full", 32, 16)}


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.number:2d} {self.name}: {self.detail}"


@dataclass(frozen=True)
class VerifyReport:
    level: str
    seed: int
    results: tuple[CriterionResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_text(self) -> str:
        lines = [f"verify level = {self.level}", f"seed = {self.seed}"]
        lines.extend(r.line() for r in self.results)
        lines.append(f"overall = {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _rng(seed: int, number: int) -> np.random.Generator:
    return np.random.default_rng([seed, number])


# -- helpers shared with the tests ---------------------------------------------

def envelope_check(path: PathGrid, phi0, phi1, cfg: SolverConfig, tol: float) -> tuple[float, float, float]:
    """Worst violations of D_tt Phi >= 0, Phi >= Phi0 and Phi <= linear cap (<= 0 is good)."""
    S = path.slices
    tt = (S[2:] - 2.0 * S[1:-1] + S[:-2]) * float(path.M**2)
    lower, _ = initial_path(phi0, phi1, cfg)
    cap = PathGrid.linear(phi0, phi1, path.M).slices
    return float(-tt.min()), float((lower.slices - S).max()), float((S - cap).max())


def closedness_residual(phi, psi1, psi2, step: float) -> float:
    """Asymmetry of the mixed second difference of I in directions psi1, psi2."""
    def mixed(a, b):
        return (alpha(phi + step * b, a) - alpha(phi - step * b, a)) / (2.0 * step)
    return abs(mixed(psi1, psi2) - mixed(psi2, psi1))


# -- criteria -------------------------------------------------------------------

def c01_exact_geodesic(level: Level, seed: int) -> CriterionResult:
    N = 16
    cfg = SolverConfig(M=8, eps_target=1e-4)
    errs, slow = [], False
    for c in (0.5, 1.0, 2.0):
        start = time.perf_counter()
        rep = distance(np.zeros((N, N)), np.full((N, N), c), cfg)
        slow |= time.perf_counter() - start > 10.0
        errs.append(abs(rep.length - c) / c)
    ok = max(errs) <= 1e-6 and not slow
    return CriterionResult(1, "exact geodesic recovery", ok,
                           "rel errors " + " ".join(_g(e) for e in errs) + (" (too slow)" if slow else ""))


def _generic_pair(N: int):
    a = mode_field([(1, 0, 0.4 * A0, 0.0)], N)
    b = mode_field([(0, 1, 0.3 * A0, 0.5), (1, 1, 0.2 * A0, 0.0)], N) + 0.3
    return a, b


def c02_comparison(level: Level, seed: int) -> CriterionResult:
    a, b = _generic_pair(level.N)
    base = SolverConfig(M=level.M, eps_target=1e-8)
    p1, r1 = solve_geodesic(a, b, base)
    p2, r2 = solve_geodesic(a, b, base.replace(m_start=0.1))
    gap = comparison_gap(p1, p2)
    c = 0.7
    p3, _ = solve_geodesic(a + c, b + c, base)
    shift = float(np.abs(p3.slices - c - p1.slices).max())
    tol = 10.0 * base.newton_tol
    return CriterionResult(2, "comparison principle and uniqueness", gap <= tol and shift <= tol,
                           f"gap {_g(gap)} (m {_g(r1.m)} vs {_g(r2.m)}) shift {_g(shift)} tol {_g(tol)}")


def _drift_pairs(N: int):
    return [
        (np.zeros((N, N)), mode_field([(1, 0, A0, 0.0)], N) + 1.0),
        (mode_field([(0, 1, 0.5 * A0, 0.0)], N), mode_field([(0, 1, -0.5 * A0, 0.0)], N) + 0.5),
    ]


def c03_energy_drift(level: Level, seed: int) -> CriterionResult:
    eps_list = (1e-2, 1e-3, 1e-4)
    ok, parts = True, []
    for i, (a, b) in enumerate(_drift_pairs(level.N)):
        drifts = []
        for eps in eps_list:
            rep = distance(a, b, SolverConfig(M=level.M, eps_target=eps, m_margin=0.05))
            chk = energy_drift_check(rep)
            ok &= chk.passed
            drifts.append(chk.drift)
            parts.append(f"pair{i} eps {_g(eps)} drift/bound {_g(chk.drift / chk.bound)}")
        slope = float(np.polyfit(np.log10(eps_list), np.log10(drifts), 1)[0])
        ok &= abs(slope - 1.0) <= 0.2
        parts.append(f"pair{i} slope {_g(slope)}")
    return CriterionResult(3, "energy-element drift", ok, "; ".join(parts))


def c04_convexity_envelope(level: Level, seed: int) -> CriterionResult:
    pairs = [_generic_pair(level.N)] + _drift_pairs(level.N)
    worst = [-math.inf] * 3
    ok = True
    for eps in (1e-2, 1e-3):
        for a, b in pairs:
            cfg = SolverConfig(M=level.M, eps_target=eps)
            path, _ = solve_geodesic(a, b, cfg)
            v = envelope_check(path, a, b, cfg, cfg.newton_tol)
            worst = [max(w, x) for w, x in zip(worst, v)]
            ok &= v[0] <= cfg.newton_tol and v[1] <= 10 * cfg.newton_tol and v[2] <= 10 * cfg.newton_tol
    return CriterionResult(4, "t-convexity and envelope bounds", ok,
                           f"max(-Phi_tt) {_g(worst[0])} max(Phi0-Phi) {_g(worst[1])} max(Phi-cap) {_g(worst[2])}")


def c05_lower_bound(level: Level, seed: int) -> CriterionResult:
    rng = _rng(seed, 5)
    cfg = SolverConfig(M=level.M, eps_target=1e-3)
    ok, margins = True, []
    for i in range(10):
        phi = normalize(mode_field(random_modes(rng, max_modes=1 + i % 2, budget=0.4), level.N))
        length, rhs, passed = lower_bound_check(phi, cfg)
        ok &= passed and rhs > 0
        margins.append(length - rhs)
    return CriterionResult(5, "length lower bound", ok, "min(length - rhs) " + _g(min(margins)))


def c06_triangle(level: Level, seed: int) -> CriterionResult:
    rng = _rng(seed, 6)
    N = 16
    cfg = SolverConfig(M=level.M, eps_target=1e-3)
    start = time.perf_counter()
    slacks, ok = [], True
    for _ in range(20):
        a, b, c = (random_potential(N, rng) + rng.uniform(-0.5, 0.5) for _ in range(3))
        rep = triangle_check(a, b, c, cfg)
        ok &= rep.passed
        slacks.append(rep.slack / rep.tol)
    slow = time.perf_counter() - start > 900.0
    return CriterionResult(6, "triangle inequality", ok and not slow,
                           "min slack/tol " + _g(min(slacks)) + (" (too slow)" if slow else ""))


def c07_minimality(level: Level, seed: int) -> CriterionResult:
    rng = _rng(seed, 7)
    cfg = SolverConfig(M=level.M, eps_target=1e-3)
    ok, margins = True, []
    pairs = [_generic_pair(level.N)] + [
        (random_potential(level.N, rng), random_potential(level.N, rng) + 0.2) for _ in range(2)
    ]
    for i, (a, b) in enumerate(pairs):
        rep = minimality_check(a, b, 25, cfg, seed=int(rng.integers(2**31)))
        ok &= rep.passed
        margins.append(min(rep.candidate_lengths) - rep.geodesic_length)
    return CriterionResult(7, "minimality of geodesics", ok, "min(candidate - geodesic) " + _g(min(margins)))


def c08_first_variation(level: Level, seed: int) -> CriterionResult:
    N = level.N
    base = mode_field([(1, 0, 1.0, 0.0)], N)

    def family(s):
        return s * base + 0.2 * s

    rep = distance_first_variation(np.zeros((N, N)), family, 0.4 * A0, 0.05 * A0,
                                   SolverConfig(M=level.M, eps_target=1e-3))
    return CriterionResult(8, "first variation of distance", rep.rel_error <= 0.05,
                           f"fd {_g(rep.finite_difference)} formula {_g(rep.formula)} rel {_g(rep.rel_error)}")


def c09_oracle(level: Level, seed: int) -> CriterionResult:
    N, M, eps = 16, 8, 1e-3
    a = mode_field([(1, 0, 0.5 * A0, 0.3)], N)
    b = mode_field([(2, 0, 0.15 * A0, 0.0), (1, 0, -0.3 * A0, 0.0)], N) + 0.4
    path, _ = solve_geodesic(a, b, SolverConfig(M=M, eps_target=eps))
    ref = reduced_oracle(a, b, M=M, eps=eps)
    err = float(np.abs(path.slices - ref.slices).max())
    tol = 5.0 * (1.0 / N**2 + eps)
    return CriterionResult(9, "oracle equivalence", err <= tol, f"max diff {_g(err)} tol {_g(tol)}")


def _smooth_path(N: int, M: int):
    X, Y = GridSpec(N).coords()
    t = np.linspace(0.0, 1.0, M + 1)[:, None, None]
    tp = 2.0 * math.pi
    Phi = (0.4 * A0 * np.cos(tp * X) * (1.0 - t) + 0.3 * A0 * np.sin(tp * (X + Y)) * t
           + 0.2 * A0 * np.sin(math.pi * t) * np.cos(tp * Y) + 0.3 * t)
    psi = np.cos(math.pi * t) * np.sin(tp * X) + t * t * np.cos(tp * (X - Y)) + 0.5 * t
    return PathGrid(Phi), psi


def c10_formal_geometry(level: Level, seed: int) -> CriterionResult:
    rng = _rng(seed, 10)
    N = level.N
    phi = random_potential(N, rng)
    f1, f2 = random_potential(N, rng), random_potential(N, rng)
    torsion = bool(np.array_equal(christoffel(f1, f2, phi), christoffel(f2, f1, phi)))
    res = []
    for k in (1, 2):
        path, psi = _smooth_path(8 * k * 2, 4 * k * 2)
        res.append(metric_compatibility_residual(path, psi))
    order = math.log2(res[0] / res[1])
    closed = []
    for n in (N, 2 * N):
        X, Y = GridSpec(n).coords()
        p = 0.3 * A0 * np.cos(2 * math.pi * X)
        closed.append(closedness_residual(p, np.sin(2 * math.pi * Y), np.cos(2 * math.pi * (X + Y)), 1e-3))
    K = []
    for _ in range(1000):
        K.append(sectional_curvature(random_potential(N, rng), random_potential(N, rng), phi))
    ok = torsion and order >= 1.8 and max(closed) <= 1e-12 and max(K) <= 0.0
    return CriterionResult(10, "formal geometry", ok,
                           f"torsion {torsion} compat {_g(res[0])} -> {_g(res[1])} order {_g(order)} "
                           f"closedness {_g(closed[0])} {_g(closed[1])} max K {_g(max(K))}")


def _kappa_configs(N: int):
    return {
        "x": ([], [(1, 0, A0, 0.0)], 0.1),
        "mixed": ([(0, 1, 0.5 * A0, 0.3)], [(1, 1, 0.5 * A0, 0.0)], 0.1),
        "two-mode": ([(1, 0, 0.5 * A0, 1.0)], [(2, 1, 0.2 * A0, 0.5), (0, 1, 0.5 * A0, 0.0)], 0.1),
    }


def c11_energy_suite(level: Level, seed: int) -> CriterionResult:
    rng = _rng(seed, 11)
    N = level.N
    gb = max(abs(scalar_curvature(random_potential(N, rng)).Rbar) for _ in range(50))
    phi, mid = random_potential(N, rng), random_potential(N, rng)
    straight = mabuchi_energy(phi).value
    polygon = mabuchi_segment(np.zeros_like(phi), mid) + mabuchi_segment(mid, phi)
    closed_form = mabuchi_entropy(phi)
    path_dev = max(abs(straight - polygon), abs(straight - closed_form))
    emin = min(mabuchi_energy(random_potential(N, rng)).value for _ in range(50))
    eps = 1e-3
    kappas, second_min = [], math.inf
    for name, (m0, m1, c) in _kappa_configs(N).items():
        path, _ = solve_geodesic(mode_field(m0, N), mode_field(m1, N) + c, SolverConfig(M=level.M, eps_target=eps))
        rep = energy_convexity_check(path, eps)
        second_min = min(second_min, rep.min_second_difference)
        kappas.append(calibrate_kappa(path))
    spread = max(abs(k / KAPPA - 1.0) for k in kappas)
    ok = gb <= 1e-12 and path_dev <= 1e-10 and emin >= -1e-8 and second_min >= -10 * eps and spread <= 0.02
    return CriterionResult(11, "curvature and Mabuchi energy", ok,
                           f"max|int R| {_g(gb)} path dev {_g(path_dev)} min E {_g(emin)} "
                           f"min d2E {_g(second_min)} kappa " + " ".join(_g(k) for k in kappas))


CRITERIA: dict[int, Callable[[Level, int], CriterionResult]] = {
    1: c01_exact_geodesic,
    2: c02_comparison,
    3: c03_energy_drift,
    4: c04_convexity_envelope,
    5: c05_lower_bound,
    6: c06_triangle,
    7: c07_minimality,
    8: c08_first_variation,
    9: c09_oracle,
    10: c10_formal_geometry,
    11: c11_energy_suite,
}

# cheap criteria re-run by the determinism check
_REPLAY = (1, 9, 10)


def c12_determinism(level: Level, seed: int, first: dict[int, CriterionResult]) -> CriterionResult:
    same = all(CRITERIA[n](level, seed).line() == first[n].line() for n in _REPLAY if n in first)
    return CriterionResult(12, "determinism", same,
                           "replayed criteria " + " ".join(str(n) for n in _REPLAY if n in first))


def run_verify(level: str = "quick", seed: int = 7, only=None) -> VerifyReport:
    lv = LEVELS[level]
    wanted = sorted(set(only) if only else set(range(1, 13)))
    done: dict[int, CriterionResult] = {}
    for n in wanted:
        if n in CRITERIA:
            done[n] = CRITERIA[n](lv, seed)
    if 12 in wanted:
        for n in _REPLAY:
            if n not in done:
                done[n] = CRITERIA[n](lv, seed)
        done[12] = c12_determinism(lv, seed, done)
    results = tuple(done[n] for n in wanted)
    return VerifyReport(level, seed, results)
