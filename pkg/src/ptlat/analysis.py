"""
Diagnostics on a single spectrum or model: reality of the spectrum, zero-energy
edge modes, PT invariance of the matrix, and the Majorana rewriting of the
two-band (beta = 1/2) chain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eig import Spectrum
from .model import ModelSpec, RationalBeta, Variant

__all__ = [
    "EPS_REAL",
    "EPS_ZERO",
    "W_MIN",
    "EDGE_FRACTION",
    "max_imag",
    "is_spectrum_real",
    "ipr",
    "edge_weight",
    "ZeroMode",
    "EdgeStateReport",
    "find_zero_modes",
    "pt_deviation",
    "check_pt",
    "MajoranaBilinear",
    "MajoranaForm",
    "majorana_form",
]

EPS_REAL = 1e-8
EPS_ZERO = 1e-3
W_MIN = 0.5
EDGE_FRACTION = 0.1


def max_imag(s: Spectrum) -> float:
    """Largest ``|Im E|`` over the spectrum."""
    return float(np.max(np.abs(np.asarray(s.eigenvalues).imag)))


def is_spectrum_real(s: Spectrum, eps_real: float = EPS_REAL) -> bool:
    if eps_real <= 0:
        raise ValueError("eps_real must be positive")
    return max_imag(s) <= eps_real


def ipr(v) -> float:
    """Inverse participation ratio ``sum |v_n|^4`` of a unit-norm vector."""
    p = np.abs(np.asarray(v)) ** 2
    return float(np.sum(p * p))


def _edge_sites(n: int, fraction: float) -> int:
    if not 0.0 < fraction <= 0.5:
        raise ValueError(f"fraction must be in (0, 0.5], got {fraction}")
    # guard against 0.1 * 50 = 5.000000000000001
    return min(n, math.ceil(round(fraction * n, 9)))


def edge_weight(v, fraction: float = EDGE_FRACTION) -> float:
    """
    Probability held by the first and last ``ceil(fraction * N)`` sites.

    The two windows never double count: for short chains they are merged.
    """
    p = np.abs(np.asarray(v)) ** 2
    n = len(p)
    k = _edge_sites(n, fraction)
    mask = np.zeros(n, dtype=bool)
    mask[:k] = True
    mask[n - k:] = True
    return float(np.sum(p[mask]))


@dataclass(frozen=True)
class ZeroMode:
    index: int
    energy: complex
    ipr: float
    edge_weight: float


@dataclass(frozen=True)
class EdgeStateReport:
    """
    Zero-energy edge-mode candidates of one spectrum.

    ``count`` is the number of eigenpairs that pass both gates
    (``|Re E| <= eps_zero`` and ``edge_weight >= w_min``); ``near_zero`` counts
    those passing the energy gate alone. ``bulk_gap`` is the smallest ``|Re E|``
    among the eigenpairs that are not accepted zero modes (``inf`` if none).
    """

    zero_modes: tuple[ZeroMode, ...]
    near_zero: int
    bulk_gap: float
    eps_zero: float
    w_min: float
    fraction: float

    @property
    def count(self) -> int:
        return len(self.zero_modes)


def find_zero_modes(
    s: Spectrum,
    eps_zero: float = EPS_ZERO,
    w_min: float = W_MIN,
    fraction: float = EDGE_FRACTION,
) -> EdgeStateReport:
    if eps_zero <= 0 or w_min <= 0:
        raise ValueError("eps_zero and w_min must be positive")
    energies = np.asarray(s.eigenvalues)
    near = np.abs(energies.real) <= eps_zero
    modes = []
    accepted = np.zeros(len(energies), dtype=bool)
    for k in np.flatnonzero(near):
        v = s.eigenvectors[:, k]
        w = edge_weight(v, fraction)
        if w >= w_min:
            accepted[k] = True
            modes.append(ZeroMode(int(k), complex(energies[k]), ipr(v), w))
    rest = np.abs(energies.real[~accepted])
    gap = float(rest.min()) if rest.size else math.inf
    return EdgeStateReport(tuple(modes), int(near.sum()), gap, eps_zero, w_min, fraction)


def pt_deviation(h) -> float:
    """``max |P conj(H) P - H|`` with P the site reversal n -> N + 1 - n."""
    h = np.asarray(h)
    return float(np.max(np.abs(h[::-1, ::-1].conj() - h)))


def check_pt(h, eps: float | None = None) -> bool:
    """
    True iff the matrix is invariant under site reversal combined with complex
    conjugation, to within ``eps`` (default ``1e-12 * ||H||_F``).
    """
    h = np.asarray(h)
    if eps is None:
        eps = 1e-12 * float(np.linalg.norm(h))
    elif eps <= 0:
        raise ValueError("eps must be positive")
    return pt_deviation(h) <= eps


# --------------------------------------------------------------------------
# Majorana decomposition for beta = 1/2
#
# Convention: a_m = sigma_m + i tau_m (m even), a_m = tau_m + i sigma_m (m odd).
# A bilinear is written with the operator carrying the real part of a_m first,
# so a_m^dagger a_m = const + 2i * (first_m second_m) on every site.


@dataclass(frozen=True)
class MajoranaBilinear:
    """``coefficient * first second`` with each operator a (species, site) pair."""

    first: tuple[str, int]
    second: tuple[str, int]
    coefficient: complex
    sign: int

    @property
    def sites(self) -> frozenset[int]:
        return frozenset((self.first[1], self.second[1]))

    def __str__(self) -> str:
        sym = {"sigma": "σ", "tau": "τ"}
        sgn = "+" if self.sign > 0 else "-"
        return f"{sgn}{sym[self.first[0]]}{self.first[1]}{sym[self.second[0]]}{self.second[1]}"


@dataclass(frozen=True)
class MajoranaForm:
    delta_plus: complex
    delta_minus: complex
    coupling_terms: tuple[MajoranaBilinear, ...]
    touches_unpaired: bool
    z2_nontrivial: bool
    unpaired: frozenset[tuple[str, int]] = field(default_factory=frozenset)


def _ordered_pair(m: int) -> tuple[tuple[str, int], tuple[str, int]]:
    if m % 2 == 0:
        return ("sigma", m), ("tau", m)
    return ("tau", m), ("sigma", m)


def majorana_form(spec: ModelSpec) -> MajoranaForm:
    """
    Rewrite the beta = 1/2 off-diagonal chain in Majorana operators.

    ``delta_minus, delta_plus = -2it(1 -/+ cos(phi))`` (lambda does not enter).
    The gain/loss term ``i gamma (n_j - n_{N-j+1})`` becomes
    ``-2 gamma (X_j - X_{N-j+1})`` with ``X_m`` the on-site bilinear of
    :func:`_ordered_pair`; constants are dropped. Each coupling term carries
    ``sign`` +1 for the gain site and -1 for the loss site.
    """
    if spec.variant is not Variant.OFFDIAGONAL_AA:
        raise ValueError(f"Majorana form needs the off-diagonal variant, got {spec.variant.value}")
    if spec.beta != RationalBeta(1, 2):
        raise ValueError(f"Majorana form is defined only for beta = 1/2, got {spec.beta}")

    c = math.cos(spec.phi)
    delta_minus = -2j * spec.t * (1.0 - c)
    delta_plus = -2j * spec.t * (1.0 + c)

    terms = []
    p = spec.placement
    if spec.gamma != 0.0 and not p.degenerate:
        for site, sign in ((p.gain_site, 1), (p.loss_site, -1)):
            first, second = _ordered_pair(site)
            terms.append(MajoranaBilinear(first, second, complex(-2.0 * spec.gamma * sign), sign))

    unpaired = frozenset({("sigma", 1), ("tau", 1), ("sigma", spec.N), ("tau", spec.N)})
    touched = any(t.first in unpaired or t.second in unpaired for t in terms)
    return MajoranaForm(
        delta_plus=delta_plus,
        delta_minus=delta_minus,
        coupling_terms=tuple(terms),
        touches_unpaired=touched,
        z2_nontrivial=abs(delta_plus) > abs(delta_minus),
        unpaired=unpaired,
    )
