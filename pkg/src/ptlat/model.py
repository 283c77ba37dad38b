"""
Lattice parameterizations and dense single-particle Hamiltonians.

Three open-boundary chains are supported:

* ``OFFDIAGONAL_AA``      -- cosine-modulated hopping ``-t(1 + lam cos(2 pi beta n + phi))``
  with balanced gain/loss impurities ``+i gamma`` at site ``j`` and ``-i gamma`` at
  site ``N - j + 1``.
* ``OFFDIAGONAL_AA_NNN``  -- the above plus a constant next-nearest-neighbour
  hopping ``+t_prime``.
* ``DIAGONAL_AA``         -- uniform hopping ``-t`` with onsite potential
  ``V cos(2 pi beta n + phi)`` and the same impurity pair.

Site indices are 1-based in every public field; matrices are stored 0-based,
so site ``n`` lives in row/column ``n - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Union

import numpy as np

__all__ = [
    "ModelValidationError",
    "RationalBeta",
    "IrrationalBeta",
    "BetaValue",
    "ImpurityPlacement",
    "Variant",
    "ModelSpec",
    "bond_phases",
    "bond_amplitudes",
    "build_offdiagonal_aa",
    "build_with_nnn",
    "build_diagonal_aa",
    "build_hamiltonian",
]


class ModelValidationError(ValueError):
    """Invalid model parameter; ``field`` names the offending parameter."""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"{field}: {reason}")


@dataclass(frozen=True)
class RationalBeta:
    """Commensurate modulation ``numerator / denominator`` in lowest terms."""

    numerator: int
    denominator: int

    def __post_init__(self):
        a, q = self.numerator, self.denominator
        if not isinstance(a, (int, np.integer)) or not isinstance(q, (int, np.integer)):
            raise ModelValidationError("beta", "numerator and denominator must be integers")
        if a < 1 or q < 2:
            raise ModelValidationError("beta", f"need numerator >= 1 and denominator >= 2, got {a}/{q}")
        if math.gcd(int(a), int(q)) != 1:
            raise ModelValidationError("beta", f"{a}/{q} is not in lowest terms")
        if a >= q:
            raise ModelValidationError("beta", f"{a}/{q} is not inside (0, 1)")

    @property
    def value(self) -> float:
        return self.numerator / self.denominator

    def phase(self, n: np.ndarray) -> np.ndarray:
        # reduce a*n mod q in integers so bond amplitudes repeat bit-for-bit
        n = np.asarray(n, dtype=np.int64)
        return 2.0 * np.pi * ((self.numerator * n) % self.denominator) / self.denominator

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class IrrationalBeta:
    """Incommensurate modulation kept as a full-precision real."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if not math.isfinite(v) or not 0.0 < v < 1.0:
            raise ModelValidationError("beta", f"irrational beta must be finite and inside (0, 1), got {self.value!r}")
        object.__setattr__(self, "value", v)

    def phase(self, n: np.ndarray) -> np.ndarray:
        return 2.0 * np.pi * self.value * np.asarray(n, dtype=float)

    def __str__(self) -> str:
        return repr(self.value)


BetaValue = Union[RationalBeta, IrrationalBeta]


@dataclass(frozen=True)
class ImpurityPlacement:
    """Gain site ``j`` and its mirror loss site ``N - j + 1`` (both 1-based)."""

    j: int
    N: int

    def __post_init__(self):
        if not 1 <= self.j <= self.N:
            raise ModelValidationError("j", f"impurity site must satisfy 1 <= j <= N={self.N}, got {self.j}")

    @property
    def gain_site(self) -> int:
        return self.j

    @property
    def loss_site(self) -> int:
        return self.N - self.j + 1

    @property
    def degenerate(self) -> bool:
        """Gain and loss on the same (center) site: the impurity term vanishes."""
        return self.gain_site == self.loss_site

    def aligned(self, beta: BetaValue) -> bool:
        """True iff ``j = m / beta`` for a positive integer ``m``."""
        if isinstance(beta, RationalBeta):
            return (self.j * beta.numerator) % beta.denominator == 0
        return False


class Variant(str, Enum):
    OFFDIAGONAL_AA = "offdiagonal"
    OFFDIAGONAL_AA_NNN = "offdiagonal_nnn"
    DIAGONAL_AA = "diagonal"


@dataclass(frozen=True)
class ModelSpec:
    """
    Full parameterization of one lattice instance.

    ``lam`` is only read by the off-diagonal variants, ``V`` only by the diagonal
    one and ``t_prime`` only by ``OFFDIAGONAL_AA_NNN``. Energies are in the units
    of ``t``.
    """

    variant: Variant = Variant.OFFDIAGONAL_AA
    N: int = 50
    beta: BetaValue = field(default_factory=lambda: RationalBeta(1, 2))
    t: float = 1.0
    lam: float = 0.0
    V: float = 0.0
    phi: float = 0.0
    gamma: float = 0.0
    j: int = 1
    t_prime: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        if not isinstance(self.N, (int, np.integer)) or isinstance(self.N, bool) or self.N < 2:
            raise ModelValidationError("N", f"site count must be an integer >= 2, got {self.N!r}")
        if not isinstance(self.j, (int, np.integer)) or isinstance(self.j, bool):
            raise ModelValidationError("j", f"impurity site must be an integer, got {self.j!r}")
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "j", int(self.j))
        if not isinstance(self.beta, (RationalBeta, IrrationalBeta)):
            raise ModelValidationError("beta", f"expected RationalBeta or IrrationalBeta, got {type(self.beta).__name__}")
        for name in ("t", "lam", "V", "phi", "gamma", "t_prime"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ModelValidationError(name, f"must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.t <= 0:
            raise ModelValidationError("t", f"hopping must be positive, got {self.t}")
        if self.gamma < 0:
            raise ModelValidationError("gamma", f"non-Hermitian degree must be >= 0, got {self.gamma}")
        ImpurityPlacement(self.j, self.N)

    @property
    def placement(self) -> ImpurityPlacement:
        return ImpurityPlacement(self.j, self.N)

    def with_(self, **changes) -> "ModelSpec":
        """Copy with some fields replaced (validation re-runs)."""
        return replace(self, **changes)


def _require(spec: ModelSpec, *variants: Variant) -> None:
    if spec.variant not in variants:
        allowed = ", ".join(v.value for v in variants)
        raise ModelValidationError("variant", f"expected {allowed}, got {spec.variant.value}")


def bond_phases(spec: ModelSpec) -> np.ndarray:
    """Cosine arguments ``2 pi beta n + phi`` for n = 1..N-1 (bond n joins sites n, n+1)."""
    n = np.arange(1, spec.N)
    return spec.beta.phase(n) + spec.phi


def bond_amplitudes(spec: ModelSpec) -> np.ndarray:
    """Modulated nearest-neighbour hopping ``t(1 + lam cos(...))`` per bond, without the minus sign."""
    return spec.t * (1.0 + spec.lam * np.cos(bond_phases(spec)))


def _add_impurities(h: np.ndarray, spec: ModelSpec) -> None:
    p = spec.placement
    h[p.gain_site - 1, p.gain_site - 1] += 1j * spec.gamma
    h[p.loss_site - 1, p.loss_site - 1] -= 1j * spec.gamma


def _freeze(h: np.ndarray) -> np.ndarray:
    h.setflags(write=False)
    return h


def _offdiagonal(spec: ModelSpec) -> np.ndarray:
    h = np.zeros((spec.N, spec.N), dtype=complex)
    hop = -bond_amplitudes(spec)
    idx = np.arange(spec.N - 1)
    h[idx, idx + 1] = hop
    h[idx + 1, idx] = hop
    _add_impurities(h, spec)
    return h


def build_offdiagonal_aa(spec: ModelSpec) -> np.ndarray:
    """
    Hamiltonian of the off-diagonal Aubry-Andre chain with a gain/loss pair.

    Returns a read-only complex (N, N) array with
    ``H[n-1, n] = H[n, n-1] = -t (1 + lam cos(2 pi beta n + phi))`` for bonds
    n = 1..N-1, ``+i gamma`` on site ``j`` and ``-i gamma`` on site ``N - j + 1``.
    """
    _require(spec, Variant.OFFDIAGONAL_AA)
    return _freeze(_offdiagonal(spec))


def build_with_nnn(spec: ModelSpec) -> np.ndarray:
    """Off-diagonal chain plus constant ``+t_prime`` between sites n and n+2."""
    _require(spec, Variant.OFFDIAGONAL_AA_NNN)
    h = _offdiagonal(spec)
    if spec.N > 2:
        idx = np.arange(spec.N - 2)
        h[idx, idx + 2] += spec.t_prime
        h[idx + 2, idx] += spec.t_prime
    return _freeze(h)


def build_diagonal_aa(spec: ModelSpec) -> np.ndarray:
    """Uniform ``-t`` hopping with onsite ``V cos(2 pi beta n + phi)`` and the gain/loss pair."""
    _require(spec, Variant.DIAGONAL_AA)
    n = np.arange(1, spec.N + 1)
    h = np.diag((spec.V * np.cos(spec.beta.phase(n) + spec.phi)).astype(complex))
    idx = np.arange(spec.N - 1)
    h[idx, idx + 1] = -spec.t
    h[idx + 1, idx] = -spec.t
    _add_impurities(h, spec)
    return _freeze(h)


_BUILDERS = {
    Variant.OFFDIAGONAL_AA: build_offdiagonal_aa,
    Variant.OFFDIAGONAL_AA_NNN: build_with_nnn,
    Variant.DIAGONAL_AA: build_diagonal_aa,
}


def build_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """Dispatch on ``spec.variant``."""
    return _BUILDERS[spec.variant](spec)
