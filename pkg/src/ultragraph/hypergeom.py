"""
Coefficient sequences of the perturbation bound and the special functions
needed to evaluate them: reciprocal Gamma, generalized binomials and the
Gauss hypergeometric series.
"""

import math

from .errors import Divergent, HypothesisViolated, PoleInC


def _is_nonpositive_integer(x):
    return x <= 0 and float(x).is_integer()


def reciprocal_gamma(x):
    """``1 / Gamma(x)`` for real ``|x| <= 60``; exactly 0 at the poles."""
    x = float(x)
    if _is_nonpositive_integer(x):
        return 0.0
    if x >= 0.5:
        return 1.0 / math.gamma(x)
    # reflection: 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi
    return math.gamma(1.0 - x) * math.sin(math.pi * x) / math.pi


def binom_gamma(a, k):
    """``C(a, k)`` through reciprocal Gamma values (valid when ``a + 1 > 0``)."""
    return math.gamma(a + 1.0) * reciprocal_gamma(k + 1.0) * reciprocal_gamma(a - k + 1.0)


def pochhammer(a, k):
    out = 1.0
    for j in range(k):
        out *= a + j
    return out


def hypergeometric_2f1(a, b, c, z, tol=1e-17, max_terms=100000):
    """Gauss hypergeometric series ``2F1(a, b; c; z)``.

    Terminates when ``a`` or ``b`` is a nonpositive integer; otherwise needs
    ``|z| < 1``.

    Raises
    ------
    PoleInC
        If ``c + k = 0`` is reached before the series terminates.
    Divergent
        If the series does not terminate and ``|z| >= 1``.
    """
    terminating = _is_nonpositive_integer(a) or _is_nonpositive_integer(b)
    if not terminating and abs(z) >= 1:
        raise Divergent(f"2F1 series diverges or converges too slowly at z={z}")
    total, term = 1.0, 1.0
    k = 0
    while k < max_terms:
        if a + k == 0 or b + k == 0:
            return total
        if c + k == 0:
            raise PoleInC(f"c + {k} = 0 before the series terminates")
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
        total += term
        k += 1
        if not terminating and abs(term) <= tol * abs(total):
            return total
    raise Divergent("2F1 series did not converge")


def gauss_sum_2f1_at_1(a, b, c):
    """``2F1(a, b; c; 1) = Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))``.

    Raises
    ------
    HypothesisViolated
        Unless ``c - a - b > 0`` and ``c`` is not a nonpositive integer.
    """
    if not c - a - b > 0:
        raise HypothesisViolated("Gauss summation needs c - a - b > 0")
    if _is_nonpositive_integer(c):
        raise HypothesisViolated("c must not be a nonpositive integer")
    if a == 0 or b == 0:
        return 1.0
    rc = reciprocal_gamma(c)
    rcab = reciprocal_gamma(c - a - b)
    return reciprocal_gamma(c - a) * reciprocal_gamma(c - b) / (rc * rcab)


def b_coefficient(m):
    """``b(m) = sum_k C(1/2, m-k) C(m-k, k) 6**(-2k)`` as a direct finite sum."""
    total = 0.0
    for k in range(m // 2 + 1):
        total += binom_gamma(0.5, m - k) * math.comb(m - k, k) * 36.0 ** (-k)
    return total


def b_coefficient_hypergeometric(m):
    """The same coefficient as ``C(1/2, m) 2F1(1/2 - m/2, -m/2; 3/2 - m; 1/9)``."""
    return binom_gamma(0.5, m) * hypergeometric_2f1(0.5 - m / 2, -m / 2, 1.5 - m, 1.0 / 9.0)


def c_sequence(K, variant="generating_function"):
    """Integer coefficients ``c(0..K)`` of the eigenvector bound.

    Both variants use ``c(k) = c(k-1) + sum_{i<k} c(i) c(k-1-i)``.  The
    ``generating_function`` variant applies it from ``k = 1`` (so
    ``c(1) = 2``), matching the root of ``C**2 + (x-1) C + x = 0`` with
    ``C(x) = sum c(k) x**(k+1)``; ``as_stated`` pins ``c(1) = 1`` and
    recurses from ``k = 2``.
    """
    if variant not in ("as_stated", "generating_function"):
        raise ValueError(f"unknown variant {variant!r}")
    if K < 0:
        return []
    c = [1]
    start = 1
    if variant == "as_stated" and K >= 1:
        c.append(1)
        start = 2
    for k in range(start, K + 1):
        c.append(c[k - 1] + sum(c[i] * c[k - 1 - i] for i in range(k)))
    return c[: K + 1]


def c_from_b(k):
    """``-(-6)**(k+1) b(k+1) / 2``, equal to ``c(k)`` for ``k >= 1``.

    At ``k = 0`` the linear term of the generating function interferes.
    """
    return -((-6.0) ** (k + 1)) * b_coefficient(k + 1) / 2.0


def c_closed_form_as_printed(m):
    """``(-1)**m 6**m b(m) / 2``, the closed form without index shift."""
    return (-1.0) ** m * 6.0**m * b_coefficient(m) / 2.0


def coefficient_reconciliation(K):
    """Rows ``(m, c_gf(m), printed(m), c_from_b(m))`` for ``m = 0..K``.

    For ``m >= 1``, ``printed(m + 1) == -c_gf(m)``: the closed form without
    shift is off by one in the index and by a sign.
    """
    c = c_sequence(K, "generating_function")
    return [(m, c[m], c_closed_form_as_printed(m), c_from_b(m)) for m in range(K + 1)]


def gamma_product_1(m):
    """``1 / (Gamma(3/2 - m) Gamma(m + 1))``."""
    return reciprocal_gamma(1.5 - m) * reciprocal_gamma(m + 1)


def gamma_product_2(m):
    """``1 / (Gamma(1 - m/2) Gamma(3/2 - m/2) Gamma(m + 1))``."""
    return reciprocal_gamma(1 - m / 2) * reciprocal_gamma(1.5 - m / 2) * reciprocal_gamma(m + 1)
