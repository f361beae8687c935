"""
Analytic perturbation series of ``A(t) = A0 + t A1`` for symmetric
matrices with a simple unperturbed spectrum, and the a-priori bounds on
the series coefficients.

Corrections are stored in the eigenbasis of ``A0``: with ``B = V0^T A1 V0``
and ``X_k = V0^T V_k``,

    Lambda_k = diag(B X_{k-1})
    X_k = P o (Lambda_k + X_1 Lambda_{k-1} + ... + X_{k-1} Lambda_1 - B X_{k-1})

where ``P[m, n] = 1 / (lam_m - lam_n)`` off the diagonal and 0 on it.  The
diagonal of ``X_k`` vanishes for ``k >= 1`` (intermediate normalisation:
``v_n^T v_k = 0``).
"""

from contextlib import nullcontext
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import DegenerateSpectrum, NotPositiveSemidefinite, OrderUnavailable
from .hypergeom import c_sequence
from .spectral import EigenSystem, eigensystem


@dataclass(frozen=True)
class HypothesisFailed:
    """A bound whose smallness hypothesis ``norm < d_min / 6`` does not hold."""

    norm: float
    limit: float

    def __bool__(self):
        return False

    def as_dict(self):
        return {"hypothesis_failed": True, "norm": self.norm, "limit": self.limit}


@dataclass(frozen=True, eq=False)
class PerturbationSeries:
    """Eigenvalue corrections ``lambdas[k-1]`` and eigenvector corrections
    ``vectors[k-1]`` (columns) for orders ``k = 1..K``."""

    base: EigenSystem
    lambdas: tuple = field(repr=False)
    vectors: tuple = field(repr=False)
    d_min: float
    a1_norm: float
    dps: int = None

    @property
    def order(self):
        return len(self.lambdas)


def spectral_gap(values):
    """Smallest gap between consecutive sorted eigenvalues."""
    values = np.sort(np.asarray(values))
    if values.size < 2:
        return np.inf
    return float(np.min(np.diff(values)))


def _mp_eigensystem(A, dps):
    with mpmath.mp.workdps(dps):
        vals, vecs = mpmath.mp.eigsy(mpmath.mp.matrix(A.tolist()))
        n = A.shape[0]
        order = sorted(range(n), key=lambda i: vals[i])
        lam = np.array([vals[i] for i in order], dtype=object)
        V = np.array([[vecs[r, i] for i in order] for r in range(n)], dtype=object)
    return EigenSystem(lam, V)


def _precision(dps):
    return mpmath.mp.workdps(dps) if dps else nullcontext()


def perturbation_series(A0, A1, K, psd_tol=1e-10, dps=None):
    """Coefficients of the eigenvalue and eigenvector expansions up to order K.

    With ``dps`` the recursion runs in ``mpmath`` arithmetic at that many
    decimal digits (arrays of dtype object), which exposes truncation errors
    far below double rounding.

    Raises
    ------
    DegenerateSpectrum
        If two eigenvalues of ``A0`` are closer than ``1e-8 * ||A0||_F``.
    NotPositiveSemidefinite
        If ``A1`` has an eigenvalue below ``-psd_tol * max(1, ||A1||_F)``.
    """
    if K < 1:
        raise ValueError("order must be at least 1")
    A0 = np.asarray(A0, dtype=float)
    A1 = np.asarray(A1, dtype=float)
    if A0.shape != A1.shape:
        raise ValueError(f"shapes {A0.shape} and {A1.shape} differ")
    base = eigensystem(A0)
    a1_norm = float(np.linalg.norm(A1))
    d_min = spectral_gap(base.eigenvalues)
    if d_min <= 1e-8 * np.linalg.norm(A0):
        raise DegenerateSpectrum(f"minimal eigenvalue gap {d_min:.3e} of A0")
    if A1.size and np.linalg.eigvalsh(0.5 * (A1 + A1.T))[0] < -psd_tol * max(1.0, a1_norm):
        raise NotPositiveSemidefinite("perturbation A1 is not positive semidefinite")

    with _precision(dps):
        if dps:
            base = _mp_eigensystem(A0, dps)
            A1 = np.array([[mpmath.mpf(x) for x in row] for row in A1], dtype=object)
        lam, V0 = base.eigenvalues, base.eigenvectors
        n = len(lam)
        dtype = object if dps else float
        diff = lam[:, None] - lam[None, :]
        P = np.zeros((n, n), dtype=dtype)
        off = ~np.eye(n, dtype=bool)
        P[off] = 1 / diff[off]
        B = V0.T @ A1 @ V0
        B = (B + B.T) / 2

        X = [np.eye(n, dtype=dtype)]
        lams = []
        for k in range(1, K + 1):
            lam_k = np.diag(B @ X[k - 1]).copy()
            lams.append(lam_k)
            rhs = np.diag(lam_k) - B @ X[k - 1]
            for j in range(1, k):
                rhs = rhs + X[j] * lams[k - j - 1][None, :]
            X.append(P * rhs)
        vectors = tuple(V0 @ x for x in X[1:])
    return PerturbationSeries(base, tuple(lams), vectors, d_min, a1_norm, dps)


def evaluate_series(s, t, K=None, normalize=False):
    """Partial sums ``lam0 + sum_k Lambda_k t**k`` and ``V0 + sum_k V_k t**k``.

    With ``normalize`` the eigenvector columns are scaled to unit length.

    Raises
    ------
    OrderUnavailable
        If ``K`` exceeds the computed order.
    """
    K = s.order if K is None else K
    if K > s.order or K < 0:
        raise OrderUnavailable(f"order {K} requested, {s.order} available")
    with _precision(s.dps):
        if s.dps:
            t = mpmath.mpf(t)
        vals = s.base.eigenvalues.copy()
        vecs = s.base.eigenvectors.copy()
        tk = 1
        for k in range(K):
            tk = tk * t
            vals = vals + tk * s.lambdas[k]
            vecs = vecs + tk * s.vectors[k]
        if normalize:
            norms = np.array([mpmath.sqrt(x) if s.dps else np.sqrt(x) for x in (vecs * vecs).sum(axis=0)])
            vecs = vecs / norms[None, :]
    return vals, vecs


def error_bound(a1_norm, d_min, C=1.0, variant="paper"):
    """A-priori bound ``C n (1 + n / (d_min/6))**-1`` on ``|lam(1) - lam0|``.

    ``variant="conservative"`` uses ``(1 - n / (d_min/6))**-1``, the sum of
    the majorising geometric series.  Returns :class:`HypothesisFailed`
    unless ``n < d_min / 6``.
    """
    if variant not in ("paper", "conservative"):
        raise ValueError(f"unknown variant {variant!r}")
    limit = d_min / 6.0
    if not a1_norm < limit:
        return HypothesisFailed(float(a1_norm), float(limit))
    q = a1_norm / limit
    factor = 1.0 + q if variant == "paper" else 1.0 - q
    return C * a1_norm / factor


@dataclass(frozen=True)
class BoundRow:
    k: int
    norm: float
    bound: float

    @property
    def margin(self):
        return self.bound - self.norm


@dataclass(frozen=True)
class PropositionReport:
    """Per-order comparison of ``||V_k||_F`` against ``c(k) d_min**-k ||A1||_F**k``.

    ``eigenvalue_rows`` compares ``||Lambda_{k+1}||_F`` with
    ``c(k) d_min**-k ||A1||_F**(k+1)``.
    """

    d_min: float
    a1_norm: float
    rows: tuple
    eigenvalue_rows: tuple

    @property
    def violations(self):
        return [r for r in self.rows + self.eigenvalue_rows if r.norm > r.bound * (1 + 1e-9)]


def proposition_bound_check(A0, A1, K):
    """Check the coefficient bounds for orders ``1..K`` using the
    generating-function coefficients and the spectral-gap ``d_min``."""
    s = perturbation_series(A0, A1, K + 1)
    c = c_sequence(K, "generating_function")
    rows, eig_rows = [], []
    for k in range(1, K + 1):
        scale = c[k] * (s.a1_norm / s.d_min) ** k
        rows.append(BoundRow(k, float(np.linalg.norm(s.vectors[k - 1])), scale))
        eig_rows.append(
            BoundRow(k, float(np.linalg.norm(s.lambdas[k])), scale * s.a1_norm)
        )
    return PropositionReport(s.d_min, s.a1_norm, tuple(rows), tuple(eig_rows))
