import math

import numpy as np
import pytest

from ptlat import sweep as sweepmod
from ptlat.eig import EigenConvergenceError
from ptlat.model import IrrationalBeta, ModelSpec, RationalBeta, Variant
from ptlat.sweep import (
    AllPhi,
    AtFixedPhi,
    SweepPointError,
    bisect_threshold,
    critical_gamma,
    default_phi_grid,
    localization_scan,
    n_scan,
    phase_diagram,
    spectrum_is_real,
    sweep_phi,
    transition_phis,
)

HALF = RationalBeta(1, 2)
GOLDEN = (math.sqrt(5) - 1) / 2
GRID201 = np.linspace(0, 2 * math.pi, 201)


@pytest.fixture(scope="module")
def ssh50():
    return sweep_phi(ModelSpec(N=50, lam=0.4, beta=HALF), GRID201)


def test_default_grid_is_cell_centred():
    g = default_phi_grid(4)
    np.testing.assert_allclose(g, [math.pi / 4, 3 * math.pi / 4, 5 * math.pi / 4, 7 * math.pi / 4])


def test_sweep_records_follow_grid(ssh50):
    assert len(ssh50.records) == 201
    assert [r.point["phi"] for r in ssh50.records] == list(GRID201)
    assert ssh50.shape == (201,)


def test_hermitian_sweep_is_real(ssh50):
    assert np.all(ssh50.max_imag <= 1e-12)


def test_gap_largest_at_zero_phase(ssh50):
    gaps = ssh50.bulk_gaps
    assert np.argmax(gaps) in (0, 200)
    k = int(np.argmin(gaps))
    assert gaps[k] < 0.1
    assert min(abs(GRID201[k] - math.pi / 2), abs(GRID201[k] - 3 * math.pi / 2)) < 0.35


def test_even_chain_transitions(ssh50):
    tr = transition_phis(ssh50)
    assert not tr.gapless and not tr.constant
    assert tr.counts == ((2, 0), (0, 2))
    (a0, a1), (b0, b1) = tr.intervals
    # trivial window contains [pi/2, 3pi/2]; finite N shifts the toggles outward by < 0.35
    assert a1 <= math.pi / 2 and b0 >= 3 * math.pi / 2
    assert math.pi / 2 - a1 < 0.35 and b0 - 3 * math.pi / 2 < 0.35


def test_uniform_chain_is_gapless():
    tr = transition_phis(sweep_phi(ModelSpec(N=50, lam=0.0), GRID201))
    assert tr.intervals == ()
    assert tr.gapless


@pytest.mark.parametrize("bad", [[], [0.3, 0.2], [0.0, 7.0], [-0.1, 1.0]])
def test_sweep_rejects_bad_grids(bad):
    with pytest.raises(ValueError):
        sweep_phi(ModelSpec(N=4), bad)


def test_sweep_tags_failing_point(monkeypatch):
    real = sweepmod.eigendecompose

    def flaky(h):
        if abs(h[0, 1] + 1.4) < 1e-12:  # phi = pi on bond 1
            raise EigenConvergenceError(h.shape[0], 0)
        return real(h)

    monkeypatch.setattr(sweepmod, "eigendecompose", flaky)
    with pytest.raises(SweepPointError) as info:
        sweep_phi(ModelSpec(N=6, lam=0.4), [0.0, math.pi, 6.0])
    assert info.value.index == 1
    assert info.value.point == {"phi": math.pi}


def test_parallel_sweep_matches_serial():
    spec = ModelSpec(N=50, lam=0.4, gamma=0.45, j=2)
    a = sweep_phi(spec, GRID201[::4], threads=1)
    b = sweep_phi(spec, GRID201[::4], threads=4)
    assert all(x.eigenvalues.tobytes() == y.eigenvalues.tobytes() for x, y in zip(a.records, b.records))
    assert a.max_imag.tobytes() == b.max_imag.tobytes()


# ------------------------------------------------------------ critical gamma


def test_bisection_on_known_threshold():
    lo, hi, n = bisect_threshold(lambda g: g < 0.3137, 0.0, 1.0, 1e-6)
    assert lo < 0.3137 <= hi and hi - lo <= 1e-6
    assert n == math.ceil(math.log2(1 / 1e-6))


def test_dimer_threshold():
    # E = +-sqrt(tau^2 - gamma^2): real up to gamma = tau
    r = critical_gamma(ModelSpec(N=2, j=1, lam=0.0), tol=1e-4)
    assert r.status == "ok"
    assert r.gamma_c == pytest.approx(1.0, abs=1e-4)
    assert r.bracket[1] - r.bracket[0] <= 1e-4


def test_bisection_invariants_hold():
    spec = ModelSpec(N=30, lam=0.4, j=2)
    r = critical_gamma(spec, AllPhi(16), tol=1e-3)
    phases = AllPhi(16).phases()
    lo, hi = r.bracket
    assert lo <= r.gamma_c <= hi and hi - lo <= 1e-3
    assert spectrum_is_real(spec.with_(gamma=lo), phases)[0]
    assert not spectrum_is_real(spec.with_(gamma=hi), phases)[0]


def test_strong_modulation_kills_threshold():
    spec = ModelSpec(N=50, lam=1.2, j=2)
    assert critical_gamma(spec).gamma_c < 0.05
    # a bond amplitude 1 + 1.2 cos(.) vanishes here and cuts the chain
    phi0 = math.acos(-1 / 1.2)
    r = critical_gamma(spec, AtFixedPhi(phi0))
    assert r.status == "zero" and r.gamma_c == 0.0


def test_no_breaking_is_reported_distinctly():
    r = critical_gamma(ModelSpec(N=2, j=1), gamma_max=0.5)
    assert r.status == "no_breaking"
    assert r.gamma_c is None


def test_quasi_periodic_threshold_is_zero():
    r = critical_gamma(ModelSpec(N=50, lam=0.4, beta=IrrationalBeta(math.sqrt(13) - 3), j=2))
    assert r.status == "zero" and r.gamma_c == 0.0


def test_threshold_falls_with_impurity_depth():
    base = ModelSpec(N=50, lam=0.4, beta=HALF)
    assert critical_gamma(base.with_(j=4)).gamma_c < critical_gamma(base.with_(j=2)).gamma_c


def test_odd_even_thresholds_agree():
    g49 = critical_gamma(ModelSpec(N=49, lam=0.4, j=2)).gamma_c
    g50 = critical_gamma(ModelSpec(N=50, lam=0.4, j=2)).gamma_c
    assert abs(g49 - g50) <= 0.05


def test_threshold_parallel_equals_serial():
    spec = ModelSpec(N=40, lam=0.4, j=2)
    a = critical_gamma(spec, AllPhi(16), tol=1e-3, threads=1)
    b = critical_gamma(spec, AllPhi(16), tol=1e-3, threads=3)
    assert a.bracket == b.bracket


# ------------------------------------------------------------ phase diagram


def test_phase_diagram_regions():
    phis = np.linspace(0, 2 * math.pi, 17)
    gammas = np.linspace(0.0, 1.0, 11)
    r = phase_diagram(ModelSpec(N=50, lam=0.4, j=2), phis, gammas)
    assert len(r.records) == 17 * 11
    assert r.shape == (17, 11)
    mi = r.max_imag
    assert np.all(mi[:, 0] <= 1e-12)
    assert np.all(mi[:, gammas <= 0.5] <= 1e-8)
    assert np.any(mi[:, -1] > 1e-8)
    # row-major: gamma varies fastest
    assert r.records[1].point == {"phi": 0.0, "gamma": 0.1}


# ------------------------------------------------------------------ N scans


def test_n_scan_third_filling():
    out = n_scan(ModelSpec(lam=0.4, beta=RationalBeta(1, 3), j=3), [48, 49, 50], 0.1)
    assert [(e.N, e.real) for e in out] == [(48, False), (49, False), (50, True)]


def test_n_scan_quarter_filling():
    out = n_scan(ModelSpec(lam=0.4, beta=RationalBeta(1, 4), j=4), [51, 55, 59], 0.1)
    assert all(e.real for e in out)


def test_n_scan_hermitian_probe():
    out = n_scan(ModelSpec(lam=0.4, beta=RationalBeta(1, 3), j=3), [47, 48, 49], 0.0)
    assert all(e.real for e in out)


# ------------------------------------------------------------- localization


def diag_template(**kw):
    return ModelSpec(variant=Variant.DIAGONAL_AA, N=100, beta=IrrationalBeta(GOLDEN), **kw)


def test_free_chain_ipr():
    # open-chain standing waves all have IPR 3 / (2 (N + 1))
    scan = localization_scan(diag_template(), [0.0])
    assert scan.mean_ipr[0] == pytest.approx(3 / (2 * 101), rel=1e-9)


def test_localized_regime_ipr():
    scan = localization_scan(diag_template(), [4.0])
    assert scan.mean_ipr[0] > 20 / 100


def test_transition_estimator():
    scan = sweepmod.LocalizationScan(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.1, 0.12, 0.5, 0.55]))
    assert scan.transition == 1.5


def test_localization_needs_diagonal_variant():
    with pytest.raises(ValueError):
        localization_scan(ModelSpec(N=10), [0.0, 1.0])
