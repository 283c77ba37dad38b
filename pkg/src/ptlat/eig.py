"""
Dense complex eigendecomposition for non-Hermitian lattice matrices.

Two backends produce a :class:`Spectrum`:

``"lapack"``  numpy's ``eig`` (zgeev: balancing, Hessenberg, shifted QR,
              triangular back-substitution). Default; used by every sweep.
``"qr"``      the same pipeline written out in numpy: Parlett-Reinsch
              balancing, Householder Hessenberg reduction, Wilkinson-shifted
              complex QR with deflation and eigenvectors from the Schur form.
              Slower, kept as a transparent second route.

:func:`charpoly_roots` is an independent oracle for tiny matrices: it builds
the characteristic polynomial in extended precision (Faddeev-LeVerrier) and
finds its roots with Durand-Kerner iteration. It shares no code with either
backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
import numpy as np

__all__ = [
    "EigenConvergenceError",
    "OracleRangeError",
    "Spectrum",
    "canonical_order",
    "eigendecompose",
    "eigenvalues",
    "charpoly_coefficients",
    "charpoly_roots",
    "ORACLE_MAX_N",
]

ORACLE_MAX_N = 8
SWEEPS_PER_SIZE = 30


class EigenConvergenceError(RuntimeError):
    """Shifted QR did not converge within its sweep budget."""

    def __init__(self, n: int, iterations: int, detail: str = ""):
        self.n = n
        self.iterations = iterations
        msg = f"eigensolver did not converge for a {n}x{n} matrix after {iterations} QR sweeps"
        super().__init__(msg + (f" ({detail})" if detail else ""))


class OracleRangeError(ValueError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """
    Eigenpairs of one matrix.

    Attributes
    ----------
    eigenvalues : (N,) complex array, sorted by (real, imag) ascending
    eigenvectors : (N, N) complex array, column k is the unit-norm right
        eigenvector of ``eigenvalues[k]``
    residuals : (N,) float array, ``||H v_k - E_k v_k||_2``
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def vector(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, k]


def canonical_order(values: np.ndarray) -> np.ndarray:
    """Permutation sorting complex values by real part, then imaginary part."""
    values = np.asarray(values)
    return np.lexsort((values.imag, values.real))


def _as_matrix(h) -> np.ndarray:
    a = np.asarray(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix must be at least 1x1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _normalize_columns(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v, axis=0)
    # fix the free phase: largest component real and positive
    lead = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])]
    return v * (np.abs(lead) / lead)


def eigendecompose(h, method: str = "lapack") -> Spectrum:
    """
    All eigenvalues, right eigenvectors and residuals of a dense square matrix.

    Raises :class:`EigenConvergenceError` if the QR iteration gives up.
    """
    a = _as_matrix(h)
    n = a.shape[0]
    if method == "lapack":
        try:
            w, v = np.linalg.eig(a)
        except np.linalg.LinAlgError as exc:
            raise EigenConvergenceError(n, SWEEPS_PER_SIZE * n, str(exc)) from exc
    elif method == "qr":
        w, v = _qr_eig(a)
    else:
        raise ValueError(f"unknown method {method!r}; use 'lapack' or 'qr'")

    order = canonical_order(w)
    w = w[order]
    v = _normalize_columns(v[:, order])
    residuals = np.linalg.norm(a @ v - v * w, axis=0)
    for arr in (w, v, residuals):
        arr.setflags(write=False)
    return Spectrum(w, v, residuals)


def eigenvalues(h, method: str = "lapack") -> np.ndarray:
    """Sorted eigenvalues only; cheaper than :func:`eigendecompose`."""
    a = _as_matrix(h)
    if method == "lapack":
        try:
            w = np.linalg.eigvals(a)
        except np.linalg.LinAlgError as exc:
            raise EigenConvergenceError(a.shape[0], SWEEPS_PER_SIZE * a.shape[0], str(exc)) from exc
    elif method == "qr":
        w, _ = _qr_eig(a, vectors=False)
    else:
        raise ValueError(f"unknown method {method!r}; use 'lapack' or 'qr'")
    return w[canonical_order(w)]


# --------------------------------------------------------------------------
# hand-written QR backend

def _balance(a: np.ndarray, radix: float = 2.0) -> tuple[np.ndarray, np.ndarray]:
    """Parlett-Reinsch diagonal scaling; returns (D^-1 A D, diag(D))."""
    a = a.copy()
    n = a.shape[0]
    d = np.ones(n)
    converged = False
    off = ~np.eye(n, dtype=bool)
    while not converged:
        converged = True
        for i in range(n):
            c = float(np.sum(np.abs(a[off[:, i], i])))
            r = float(np.sum(np.abs(a[i, off[i, :]])))
            if c == 0.0 or r == 0.0:
                continue
            f = 1.0
            s = c + r
            while c < r / radix:
                c *= radix
                r /= radix
                f *= radix
            while c >= r * radix:
                c /= radix
                r *= radix
                f /= radix
            if (c + r) < 0.95 * s:
                converged = False
                d[i] *= f
                a[i, :] /= f
                a[:, i] *= f
    return a, d


def _hessenberg(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Householder reduction A = Q H Q^H with H upper Hessenberg."""
    h = a.copy()
    n = h.shape[0]
    q = np.eye(n, dtype=complex)
    for k in range(n - 2):
        x = h[k + 1:, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * alpha
        v /= np.linalg.norm(v)
        h[k + 1:, :] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, :])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h, q


def _givens(a: complex, b: complex) -> tuple[float, complex]:
    """(c, s) with [[c, s], [-conj(s), c]] @ [a, b] = [r, 0]."""
    if b == 0:
        return 1.0, 0j
    if a == 0:
        return 0.0, np.conj(b) / abs(b)
    norm = np.hypot(abs(a), abs(b))
    c = abs(a) / norm
    s = (a / abs(a)) * np.conj(b) / norm
    return c, s


def _wilkinson_shift(h: np.ndarray, hi: int) -> complex:
    a, b = h[hi - 1, hi - 1], h[hi - 1, hi]
    c, d = h[hi, hi - 1], h[hi, hi]
    tr = a + d
    det = a * d - b * c
    disc = np.sqrt(tr * tr / 4.0 - det)
    l1, l2 = tr / 2.0 + disc, tr / 2.0 - disc
    return l1 if abs(l1 - d) < abs(l2 - d) else l2


def _schur(h: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Complex Schur form of a Hessenberg matrix by explicit shifted QR."""
    n = h.shape[0]
    eps = np.finfo(float).eps
    budget = SWEEPS_PER_SIZE * n
    sweeps = 0
    hi = n - 1
    stalled = 0
    while hi > 0:
        # find the bottom of the active unreduced block
        lo = hi
        while lo > 0:
            scale = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if scale == 0.0:
                scale = np.linalg.norm(h, 1)
            if abs(h[lo, lo - 1]) <= eps * scale:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            stalled = 0
            continue
        if sweeps >= budget:
            raise EigenConvergenceError(n, sweeps)
        sweeps += 1
        stalled += 1
        if stalled % 11 == 0:
            # exceptional shift to break cycles
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson_shift(h, hi)

        idx = np.arange(lo, hi + 1)
        h[idx, idx] -= mu
        rotations = []
        for k in range(lo, hi):
            c, s = _givens(h[k, k], h[k + 1, k])
            rows = h[k:k + 2, k:].copy()
            h[k, k:] = c * rows[0] + s * rows[1]
            h[k + 1, k:] = -np.conj(s) * rows[0] + c * rows[1]
            h[k + 1, k] = 0.0
            rotations.append((k, c, s))
        for k, c, s in rotations:
            top = min(k + 2, hi) + 1
            cols = h[:top, k:k + 2].copy()
            h[:top, k] = c * cols[:, 0] + np.conj(s) * cols[:, 1]
            h[:top, k + 1] = -s * cols[:, 0] + c * cols[:, 1]
            zc = z[:, k:k + 2].copy()
            z[:, k] = c * zc[:, 0] + np.conj(s) * zc[:, 1]
            z[:, k + 1] = -s * zc[:, 0] + c * zc[:, 1]
        h[idx, idx] += mu
    return np.triu(h), z


def _triangular_eigenvectors(t: np.ndarray) -> np.ndarray:
    n = t.shape[0]
    small = np.finfo(float).eps * max(np.linalg.norm(t, 1), np.finfo(float).tiny)
    y = np.zeros((n, n), dtype=complex)
    for k in range(n):
        y[k, k] = 1.0
        lam = t[k, k]
        for i in range(k - 1, -1, -1):
            denom = t[i, i] - lam
            if abs(denom) < small:
                denom = small
            y[i, k] = -(t[i, i + 1:k + 1] @ y[i + 1:k + 1, k]) / denom
    return y


def _qr_eig(a: np.ndarray, vectors: bool = True) -> tuple[np.ndarray, np.ndarray | None]:
    b, d = _balance(a)
    h, q = _hessenberg(b)
    t, z = _schur(h, q)
    w = np.diag(t).copy()
    if not vectors:
        return w, None
    v = d[:, None] * (z @ _triangular_eigenvectors(t))
    return w, v


# --------------------------------------------------------------------------
# characteristic-polynomial oracle

_ORACLE_DPS = 60


def charpoly_coefficients(h) -> list:
    """
    Coefficients ``[1, c1, ..., cN]`` of ``det(zI - H)`` (highest power first),
    computed by Faddeev-LeVerrier recursion in 60-digit arithmetic.
    """
    a = _as_matrix(h)
    n = a.shape[0]
    if n > ORACLE_MAX_N:
        raise OracleRangeError(f"characteristic-polynomial oracle is limited to N <= {ORACLE_MAX_N}, got N={n}")
    with mpmath.workdps(_ORACLE_DPS):
        A = mpmath.matrix([[mpmath.mpc(complex(x)) for x in row] for row in a])
        coeffs = [mpmath.mpc(1)]
        M = mpmath.zeros(n, n)
        for k in range(1, n + 1):
            M = A * M
            for i in range(n):
                M[i, i] += coeffs[-1]
            AM = A * M
            trace = sum(AM[i, i] for i in range(n))
            coeffs.append(-trace / k)
        return coeffs


def _durand_kerner(coeffs: list, max_iter: int = 5000) -> list:
    n = len(coeffs) - 1
    radius = 1 + max(abs(c) for c in coeffs[1:])
    seed = mpmath.mpc(0.4, 0.9)
    z = [radius * seed ** k for k in range(n)]
    tol = mpmath.mpf(10) ** (-(_ORACLE_DPS - 15))

    def poly(x):
        acc = mpmath.mpc(0)
        for c in coeffs:
            acc = acc * x + c
        return acc

    for _ in range(max_iter):
        biggest = mpmath.mpf(0)
        for i in range(n):
            denom = mpmath.mpc(1)
            for k in range(n):
                if k != i:
                    denom *= z[i] - z[k]
            if denom == 0:
                denom = tol
            step = poly(z[i]) / denom
            z[i] -= step
            biggest = max(biggest, abs(step))
        if biggest <= tol * radius:
            break
    return z


def charpoly_roots(h) -> list[complex]:
    """
    Eigenvalues of a small matrix (N <= 8) as roots of its characteristic
    polynomial, sorted like :func:`eigendecompose`.
    """
    coeffs = charpoly_coefficients(h)
    if len(coeffs) == 2:
        roots = [-coeffs[1]]
    else:
        with mpmath.workdps(_ORACLE_DPS):
            roots = _durand_kerner(coeffs)
    out = np.array([complex(r) for r in roots])
    return [complex(x) for x in out[canonical_order(out)]]
