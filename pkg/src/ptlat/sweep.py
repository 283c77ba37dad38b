"""
Parameter-space exploration over the phase, the gain/loss strength, the chain
length and the onsite amplitude.

Every grid point is an independent build-and-diagonalize task. ``threads``
controls a thread pool (numpy releases the GIL inside LAPACK); results are
always merged in grid order, so the output does not depend on the degree of
parallelism.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .analysis import EDGE_FRACTION, EPS_REAL, EPS_ZERO, W_MIN, find_zero_modes, ipr
from .eig import EigenConvergenceError, eigendecompose, eigenvalues
from .model import ModelSpec, Variant, build_hamiltonian

__all__ = [
    "TWO_PI",
    "PHI_POINTS",
    "SweepPointError",
    "Thresholds",
    "SweepRecord",
    "SweepResult",
    "Transitions",
    "AllPhi",
    "AtFixedPhi",
    "CriticalGammaResult",
    "NScanEntry",
    "LocalizationScan",
    "default_phi_grid",
    "sweep_grid",
    "sweep_phi",
    "transition_phis",
    "spectrum_is_real",
    "bisect_threshold",
    "critical_gamma",
    "phase_diagram",
    "n_scan",
    "localization_scan",
]

TWO_PI = 2.0 * np.pi
PHI_POINTS = 64


class SweepPointError(RuntimeError):
    """Solver failure at one grid point."""

    def __init__(self, index: int, point: dict, cause: Exception):
        self.index = index
        self.point = point
        super().__init__(f"grid point {index} {point}: {cause}")


@dataclass(frozen=True)
class Thresholds:
    eps_real: float = EPS_REAL
    eps_zero: float = EPS_ZERO
    w_min: float = W_MIN
    fraction: float = EDGE_FRACTION


def default_phi_grid(points: int = PHI_POINTS) -> np.ndarray:
    """
    Uniform cell-centred grid ``2 pi (k + 1/2) / points`` on (0, 2 pi).

    Cell centres avoid the isolated phases (0, pi/2, pi, 3pi/2 for small
    denominators) where the modulation degenerates, e.g. to uniform hopping.
    """
    if points < 1:
        raise ValueError("points must be >= 1")
    return TWO_PI * (np.arange(points) + 0.5) / points


def _map(fn: Callable, items: Sequence, threads: int | None) -> list:
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _validate_grid(name: str, grid, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError(f"{name} grid must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(g)):
        raise ValueError(f"{name} grid has non-finite values")
    if np.any(np.diff(g) <= 0):
        raise ValueError(f"{name} grid must be strictly increasing")
    if lo is not None and g[0] < lo:
        raise ValueError(f"{name} grid starts below {lo}")
    if hi is not None and g[-1] > hi:
        raise ValueError(f"{name} grid ends above {hi}")
    return g


@dataclass(frozen=True)
class SweepRecord:
    point: dict
    eigenvalues: np.ndarray
    max_imag: float
    zero_modes: int
    bulk_gap: float


@dataclass(frozen=True)
class SweepResult:
    """
    Records over a rectangular grid, row-major in ``axes`` order.

    A phase sweep has ``axes == ("phi",)``; a phase diagram has
    ``axes == ("phi", "gamma")`` with gamma varying fastest.
    """

    axes: tuple[str, ...]
    grids: tuple[np.ndarray, ...]
    records: tuple[SweepRecord, ...]
    template: ModelSpec
    thresholds: Thresholds = field(default_factory=Thresholds)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(g) for g in self.grids)

    @property
    def grid(self) -> np.ndarray:
        return self.grids[0]

    def _field(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records]).reshape(self.shape)

    @property
    def max_imag(self) -> np.ndarray:
        return self._field("max_imag")

    @property
    def zero_mode_counts(self) -> np.ndarray:
        return self._field("zero_modes")

    @property
    def bulk_gaps(self) -> np.ndarray:
        return self._field("bulk_gap")


def _evaluate(spec: ModelSpec, th: Thresholds) -> SweepRecord:
    s = eigendecompose(build_hamiltonian(spec))
    report = find_zero_modes(s, th.eps_zero, th.w_min, th.fraction)
    return SweepRecord(
        point={},
        eigenvalues=s.eigenvalues,
        max_imag=float(np.max(np.abs(s.eigenvalues.imag))),
        zero_modes=report.count,
        bulk_gap=report.bulk_gap,
    )


def sweep_grid(
    template: ModelSpec,
    axes: dict[str, Iterable[float]],
    thresholds: Thresholds = Thresholds(),
    threads: int | None = None,
) -> SweepResult:
    """Evaluate every point of the outer product of ``axes`` (ModelSpec field names)."""
    names = tuple(axes)
    grids = tuple(np.asarray(list(axes[n]), dtype=float) for n in names)
    mesh = np.meshgrid(*grids, indexing="ij")
    points = [
        {n: float(m.flat[i]) for n, m in zip(names, mesh)}
        for i in range(mesh[0].size)
    ]

    def work(item):
        index, point = item
        try:
            rec = _evaluate(template.with_(**point), thresholds)
        except EigenConvergenceError as exc:
            raise SweepPointError(index, point, exc) from exc
        return SweepRecord(point, rec.eigenvalues, rec.max_imag, rec.zero_modes, rec.bulk_gap)

    records = _map(work, list(enumerate(points)), threads)
    return SweepResult(names, grids, tuple(records), template, thresholds)


def sweep_phi(
    template: ModelSpec,
    grid: Sequence[float],
    thresholds: Thresholds = Thresholds(),
    threads: int | None = None,
) -> SweepResult:
    """Spectrum, reality and zero-mode count at each phase of ``grid`` (within [0, 2 pi])."""
    g = _validate_grid("phi", grid, 0.0, TWO_PI)
    return sweep_grid(template, {"phi": g}, thresholds, threads)


def phase_diagram(
    template: ModelSpec,
    phi_grid: Sequence[float],
    gamma_grid: Sequence[float],
    thresholds: Thresholds = Thresholds(),
    threads: int | None = None,
) -> SweepResult:
    pg = _validate_grid("phi", phi_grid, 0.0, TWO_PI)
    gg = _validate_grid("gamma", gamma_grid, 0.0)
    return sweep_grid(template, {"phi": pg, "gamma": gg}, thresholds, threads)


@dataclass(frozen=True)
class Transitions:
    """Phase intervals ``(phi_a, phi_b)`` across which the zero-mode count changes."""

    intervals: tuple[tuple[float, float], ...]
    counts: tuple[tuple[int, int], ...]
    gapless: bool
    constant: bool


def transition_phis(r: SweepResult, gap_threshold: float | None = None) -> Transitions:
    """
    Locate changes of the zero-mode count along a phase sweep.

    A sweep whose bulk gap never exceeds ``gap_threshold`` is flagged gapless
    and reports no transitions. The default threshold, ``4 pi t / (N + 1)``, is
    twice the band-centre level spacing of the unmodulated chain.
    """
    if r.axes != ("phi",):
        raise ValueError("transition_phis needs a one-dimensional phase sweep")
    spec = r.template
    if gap_threshold is None:
        gap_threshold = 4.0 * np.pi * spec.t / (spec.N + 1)
    gaps = r.bulk_gaps
    counts = r.zero_mode_counts
    gapless = bool(np.all(gaps[np.isfinite(gaps)] <= gap_threshold))
    changes = np.flatnonzero(np.diff(counts) != 0)
    constant = changes.size == 0
    if gapless or constant:
        return Transitions((), (), gapless, constant)
    g = r.grid
    return Transitions(
        tuple((float(g[i]), float(g[i + 1])) for i in changes),
        tuple((int(counts[i]), int(counts[i + 1])) for i in changes),
        False,
        False,
    )


# --------------------------------------------------------------------------
# critical gamma


@dataclass(frozen=True)
class AllPhi:
    """Real spectrum required at every phase of a grid."""

    points: int = PHI_POINTS
    grid: tuple[float, ...] | None = None

    def phases(self) -> np.ndarray:
        if self.grid is not None:
            return np.asarray(self.grid, dtype=float)
        return default_phi_grid(self.points)

    def describe(self) -> dict:
        return {"policy": "all_phi", "phi_points": len(self.phases())}


@dataclass(frozen=True)
class AtFixedPhi:
    phi: float

    def phases(self) -> np.ndarray:
        return np.array([self.phi])

    def describe(self) -> dict:
        return {"policy": "fixed_phi", "phi": self.phi}


def spectrum_is_real(
    spec: ModelSpec,
    phases: Sequence[float],
    eps_real: float = EPS_REAL,
    threads: int | None = None,
) -> tuple[bool, float]:
    """
    Whether the spectrum is real (``max |Im E| <= eps_real``) at every phase.

    Returns ``(verdict, worst max |Im E| seen)``. The serial path stops at the
    first complex phase, so the reported maximum is then only a lower bound.
    """

    def imag_at(phi: float) -> float:
        w = eigenvalues(build_hamiltonian(spec.with_(phi=float(phi))))
        return float(np.max(np.abs(w.imag)))

    if threads is None or threads <= 1:
        worst = 0.0
        for phi in phases:
            worst = max(worst, imag_at(phi))
            if worst > eps_real:
                return False, worst
        return True, worst
    values = _map(imag_at, list(phases), threads)
    worst = max(values)
    return worst <= eps_real, worst


def bisect_threshold(
    predicate: Callable[[float], bool],
    lo: float,
    hi: float,
    tol: float,
) -> tuple[float, float, int]:
    """
    Shrink ``[lo, hi]`` with ``predicate(lo)`` true and ``predicate(hi)`` false
    until ``hi - lo <= tol``. Returns ``(lo, hi, iterations)``.
    """
    iterations = 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
        iterations += 1
    return lo, hi, iterations


@dataclass(frozen=True)
class CriticalGammaResult:
    """
    Outcome of the gamma bisection.

    ``status`` is ``"ok"`` for an interior threshold, ``"zero"`` when the
    spectrum is already complex at ``gamma = tol`` (``gamma_c == 0``) and
    ``"no_breaking"`` when it is still real at ``gamma_max`` (``gamma_c`` is
    then ``None`` and the bracket is ``(gamma_max, inf)``).
    """

    gamma_c: float | None
    bracket: tuple[float, float]
    tolerance: float
    policy: AllPhi | AtFixedPhi
    iterations: int
    status: str
    trace: tuple[tuple[float, bool], ...] = ()


def critical_gamma(
    template: ModelSpec,
    policy: AllPhi | AtFixedPhi | None = None,
    gamma_max: float | None = None,
    tol: float = 1e-4,
    eps_real: float = EPS_REAL,
    threads: int | None = None,
) -> CriticalGammaResult:
    """Largest non-Hermitian degree below which the spectrum stays real under ``policy``."""
    policy = AllPhi() if policy is None else policy
    gamma_max = 2.0 * template.t if gamma_max is None else gamma_max
    if gamma_max <= 0 or tol <= 0:
        raise ValueError("gamma_max and tol must be positive")
    phases = policy.phases()
    trace: list[tuple[float, bool]] = []

    def real_at(gamma: float) -> bool:
        ok, _ = spectrum_is_real(template.with_(gamma=gamma), phases, eps_real, threads)
        trace.append((gamma, ok))
        return ok

    if not real_at(tol):
        return CriticalGammaResult(0.0, (0.0, tol), tol, policy, 0, "zero", tuple(trace))
    if real_at(gamma_max):
        return CriticalGammaResult(None, (gamma_max, math.inf), tol, policy, 0, "no_breaking", tuple(trace))
    lo, hi, n = bisect_threshold(real_at, tol, gamma_max, tol)
    return CriticalGammaResult(0.5 * (lo + hi), (lo, hi), hi - lo, policy, n, "ok", tuple(trace))


# --------------------------------------------------------------------------
# chain-length and localization scans


@dataclass(frozen=True)
class NScanEntry:
    N: int
    real: bool
    max_imag: float


def n_scan(
    template: ModelSpec,
    n_values: Sequence[int],
    gamma_probe: float,
    phases: Sequence[float] | None = None,
    eps_real: float = EPS_REAL,
    threads: int | None = None,
) -> list[NScanEntry]:
    """Reality of the spectrum over a phase grid for each chain length, at fixed ``j`` and gamma."""
    if gamma_probe < 0:
        raise ValueError("gamma_probe must be >= 0")
    phases = default_phi_grid() if phases is None else np.asarray(phases, dtype=float)
    out = []
    for n in n_values:
        spec = template.with_(N=int(n), gamma=float(gamma_probe))
        values = _map(
            lambda phi: float(np.max(np.abs(eigenvalues(build_hamiltonian(spec.with_(phi=float(phi)))).imag))),
            list(phases),
            threads,
        )
        worst = max(values)
        out.append(NScanEntry(int(n), worst <= eps_real, worst))
    return out


@dataclass(frozen=True)
class LocalizationScan:
    v_grid: np.ndarray
    mean_ipr: np.ndarray

    @property
    def transition(self) -> float:
        """Midpoint of the interval where mean IPR rises fastest with V."""
        if len(self.v_grid) < 2:
            raise ValueError("need at least two V values")
        slope = np.diff(self.mean_ipr) / np.diff(self.v_grid)
        k = int(np.argmax(slope))
        return float(0.5 * (self.v_grid[k] + self.v_grid[k + 1]))


def localization_scan(
    template: ModelSpec,
    v_grid: Sequence[float],
    threads: int | None = None,
) -> LocalizationScan:
    """Mean IPR over all eigenstates of the diagonal chain for each onsite amplitude ``V``."""
    if template.variant is not Variant.DIAGONAL_AA:
        raise ValueError("localization_scan needs the diagonal variant")
    g = _validate_grid("V", v_grid, 0.0)

    def mean_ipr(v: float) -> float:
        s = eigendecompose(build_hamiltonian(template.with_(V=float(v))))
        return float(np.mean([ipr(s.eigenvectors[:, k]) for k in range(len(s))]))

    return LocalizationScan(g, np.array(_map(mean_ipr, list(g), threads)))
