"""Givental-style R-matrix machinery.

Builds the curve-side matrix series from Bergman data, reconstructs the
volume-form side from scaling data (closed rank-2 forms and the general
recursion over the homogeneous coefficient ring), checks the symplectic
and kernel-expansion identities, and classifies polynomial cases.

Sign conventions, fixed once:

* R_sigma(z) = 1 + sum_{k>=0} (-1)^k (2k-1)!! z^(k+1) (B_{2k,0})^T.
* The bilinear kernel of a symplectic series R is
      (R(z1)^T R(z2) - 1)/(z1 + z2) = sum V_{k,l} (-z1)^k (-z2)^l,
  exposed as :func:`v_matrices_frob`; the volume-form variant uses
  R(z1) R(z2)^T instead (:func:`v_matrices_omega`).  These are separate
  constructors on purpose: silent transposes are the dominant failure
  mode in this corner.
"""

from __future__ import annotations

from fractions import Fraction

from .curve import BergmanExpansion
from .homog import HomogeneousRatCoeff
from .matrixseries import (MatrixSeries, MatrixSeriesError, mat_add,
                           mat_identity, mat_mul, mat_scale, mat_sub,
                           mat_transpose, mat_zero)
from .scalars import GaussianRational
from .series import double_factorial

__all__ = [
    "RData",
    "r_sigma_from_bergman",
    "check_symplectic",
    "check_eynard_identity",
    "v_matrices_frob",
    "v_matrices_omega",
    "reconstruct_r_omega_general",
    "reconstruct_r_omega_rank2",
    "rank2_scaling_constants",
    "rank2_ak_sequence",
    "rank2_polynomial_degree",
    "polynomiality_degree",
    "specialize",
    "compose_r",
    "classify_dimensions",
]


class RData:
    """A matrix series tagged with its provenance and critical values."""

    def __init__(self, series: MatrixSeries, provenance: str, crit_values=None):
        if provenance not in ("sigma", "omega", "product", "external"):
            raise ValueError(f"unknown provenance {provenance!r}")
        self.series = series
        self.provenance = provenance
        self.crit_values = crit_values

    @property
    def n(self):
        return self.series.n

    @property
    def order(self):
        return self.series.order


def r_sigma_from_bergman(bergman: BergmanExpansion, order: int) -> RData:
    """Curve-side matrix series from the (2k, 0) column of Bergman data."""
    if 2 * (order - 1) - 2 > 2 * bergman.cutoff:
        raise MatrixSeriesError(
            f"Bergman cutoff {bergman.cutoff} insufficient for order {order}")
    b = bergman.cover.backend
    N = bergman.cover.N
    z, o = b.zero(), b.one()
    coeffs = [mat_identity(N, o, z)]
    for k in range(order - 1):
        base = mat_transpose(bergman.matrix(2 * k, 0))
        w = double_factorial(2 * k - 1) * (-1) ** (k % 2)
        coeffs.append(mat_scale(base, b.from_fraction(w)))
    series = MatrixSeries(coeffs, z, o, unit_leading=True)
    return RData(series, "sigma", list(bergman.cover.crit_values))


def check_symplectic(series: MatrixSeries, order: int | None = None) -> float:
    """Largest coefficient magnitude of R(z) R(-z)^T - 1 through z^order."""
    s = series if order is None else series.truncate(order + 1)
    return s.symplectic_defect().max_abs()


def _divide_by_z1_plus_z2(num, order, zero):
    """Solve Q from N = (z1+z2) Q given the grid N[a][b] of matrices.

    N_{a,b} = Q_{a-1,b} + Q_{a,b-1}; raises if the division is inexact
    (checked via the a = 0 row after solving).
    """
    q = {}
    for b_ in range(order - 1):
        for a in range(order - 1):
            # use N_{a+1, b} = Q_{a, b} + Q_{a+1, b-1}
            val = num.get((a + 1, b_))
            if val is None:
                continue
            prev = q.get((a + 1, b_ - 1))
            if prev is not None:
                val = mat_sub(val, prev)
            q[(a, b_)] = val
    return q


def v_matrices_frob(r: RData | MatrixSeries, order: int | None = None):
    """V_{k,l} with (R(z1)^T R(z2)-1)/(z1+z2) = sum V_{k,l} (-z1)^k (-z2)^l.

    Raises MatrixSeriesError when the numerator is not divisible, i.e. when
    R is not symplectic to the working order.
    """
    return _v_matrices(r, transpose_first=True, order=order)


def v_matrices_omega(r: RData | MatrixSeries, order: int | None = None):
    """V with (R(z1) R(z2)^T - 1)/(z1+z2) = sum V_{k,l} (-z1)^k (-z2)^l."""
    return _v_matrices(r, transpose_first=False, order=order)


def _v_matrices(r, transpose_first: bool, order):
    series = r.series if isinstance(r, RData) else r
    if order is not None:
        series = series.truncate(order + 1)
    n = series.n
    zero, one = series.zero, series.one
    K = series.order
    num = {}
    for a in range(K):
        ca = series.coeffs[a]
        ca_t = mat_transpose(ca)
        for b_ in range(K):
            cb = series.coeffs[b_]
            term = mat_mul(ca_t, cb) if transpose_first else mat_mul(ca, mat_transpose(cb))
            key = (a, b_)
            num[key] = mat_add(num[key], term) if key in num else term
    num[(0, 0)] = mat_sub(num[(0, 0)], mat_identity(n, one, zero))
    q = _divide_by_z1_plus_z2(num, K, zero)
    # verify divisibility via the boundary relations N_{0,b} = Q_{0,b-1}
    for b_ in range(K):
        lhs = num.get((0, b_), mat_zero(n, zero))
        rhs = q.get((0, b_ - 1), mat_zero(n, zero))
        defect = mat_sub(lhs, rhs)
        mx = max(abs(x) for row in defect for x in row)
        tol = 0.0 if _exact_entries(defect) else _scale(num) * 1e-12
        if mx > tol:
            raise MatrixSeriesError(
                "V undefined: numerator not divisible by z1+z2 "
                f"(defect {mx:.3g}); is the series symplectic?")
    out = {}
    for (a, b_), m in q.items():
        if a + b_ <= K - 2:
            sign = (-1) ** ((a + b_) % 2)
            out[(a, b_)] = mat_scale(m, sign)
    return out


def _exact_entries(m) -> bool:
    return isinstance(m[0][0], (GaussianRational, HomogeneousRatCoeff, int, Fraction))


def _scale(num) -> float:
    mx = 0.0
    for m in num.values():
        for row in m:
            for x in row:
                mx = max(mx, abs(x))
    return mx or 1.0


def check_eynard_identity(r_sigma: RData, bergman: BergmanExpansion,
                          order: int) -> dict:
    """Compare the bilinear kernel of R_sigma with the even Bergman grid.

    Returns per-(m,n) deviations for m+n <= order; since R_sigma is built
    from the (2k,0) column only, the (m, n>0) entries are a genuine check.
    """
    v = v_matrices_frob(r_sigma)
    b = bergman.cover.backend
    report = {}
    for m in range(order + 1):
        for n in range(order + 1 - m):
            if (m, n) not in v:
                continue
            w = double_factorial(2 * m - 1) * double_factorial(2 * n - 1)
            target = mat_scale(bergman.matrix(2 * m, 2 * n), b.from_fraction(w))
            defect = mat_sub(v[(m, n)], target)
            report[(m, n)] = max(abs(x) for row in defect for x in row)
    return report


# ---------------------------------------------------------------------------
# Reconstruction from scaling data (the volume-form side)


def reconstruct_r_omega_general(gamma, beta, n_coords: int, order: int) -> RData:
    """Unique symplectic solution of the scaling system from gamma and beta.

    ``gamma`` and ``beta`` are N x N matrices over HomogeneousRatCoeff with
    zero diagonal; gamma must be symmetric.  Recursion:

        off-diagonal:  (R_{k+1})_{ai} = d_{u_i}(R_k)_{ai}
                                        - (R_k Gamma_i)_{ai} + (B_i R_k)_{ai}
        diagonal:      (R_k)_{ii} = -(1/k) [R_k U_G - U_B R_k]_{ii}

    with U_G, U_B the matrices (u_a - u_b) gamma_ab, (u_a - u_b) beta_ab.
    """
    N = n_coords
    for i in range(N):
        for j in range(N):
            if gamma[i][j] != gamma[j][i]:
                raise MatrixSeriesError(
                    "gamma must be symmetric (scaling-system constraint)")
    zero = HomogeneousRatCoeff(N)
    one = HomogeneousRatCoeff.const(N, 1)

    def u_weighted(m):
        out = [[zero for _ in range(N)] for _ in range(N)]
        for a in range(N):
            for b_ in range(N):
                if a == b_:
                    continue
                w = (HomogeneousRatCoeff.diff_power(N, a, b_, 1)
                     if a < b_ else
                     -HomogeneousRatCoeff.diff_power(N, b_, a, 1))
                out[a][b_] = w * m[a][b_]
        return out

    u_gamma = u_weighted(gamma)
    u_beta = u_weighted(beta)

    def gamma_col(i):
        # Gamma_i = sum_{j != i} gamma_ij (E_ij - E_ji)
        g = [[zero for _ in range(N)] for _ in range(N)]
        for j in range(N):
            if j == i:
                continue
            g[i][j] = gamma[i][j]
            g[j][i] = -gamma[i][j]
        return g

    def beta_col(i):
        g = [[zero for _ in range(N)] for _ in range(N)]
        for j in range(N):
            if j == i:
                continue
            g[i][j] = beta[i][j]
            g[j][i] = -beta[i][j]
        return g

    gammas = [gamma_col(i) for i in range(N)]
    betas = [beta_col(i) for i in range(N)]

    def diagonal_fill(rk, k):
        prod1 = mat_mul(rk, u_gamma)
        prod2 = mat_mul(u_beta, rk)
        for i in range(N):
            rk[i][i] = -(prod1[i][i] - prod2[i][i]) / k
        return rk

    coeffs = [mat_identity(N, one, zero)]
    # R_1 off-diagonal
    r1 = [[gamma[i][j] - beta[i][j] if i != j else zero for j in range(N)]
          for i in range(N)]
    r1 = diagonal_fill(r1, 1)
    coeffs.append(r1)
    for k in range(1, order - 1):
        rk = coeffs[k]
        nxt = [[zero for _ in range(N)] for _ in range(N)]
        for i in range(N):
            m1 = mat_mul(rk, gammas[i])
            m2 = mat_mul(betas[i], rk)
            for a in range(N):
                if a == i:
                    continue
                nxt[a][i] = rk[a][i].d(i) - m1[a][i] + m2[a][i]
        nxt = diagonal_fill(nxt, k + 1)
        coeffs.append(nxt)
    return RData(MatrixSeries(coeffs, zero, one, unit_leading=True), "omega")


def rank2_scaling_constants(case: int, r) -> tuple[GaussianRational, GaussianRational]:
    """(a, b) with a = -sqrt(-1)(r - 1/2) and b the case constant i/6 or i/2."""
    r = Fraction(r)
    a = GaussianRational(0, Fraction(1, 2) - r)
    b = GaussianRational(0, Fraction(1, 6) if case == 1 else Fraction(1, 2))
    return a, b


def reconstruct_r_omega_rank2(case: int, r, order: int, branch: int = +1) -> RData:
    """Closed-form rank-2 series over the homogeneous coefficient ring.

    Built from the general reconstruction with gamma_12 = branch*a/(u1-u2),
    beta_12 = b/(u1-u2); ``branch`` = +-1 selects the scaling-constant sign
    c_1/c_2 = +- sqrt(-1) (the two choices correspond to relabelling the
    canonical coordinates).
    """
    a, b = rank2_scaling_constants(case, r)
    if branch < 0:
        a = -a
    g12 = HomogeneousRatCoeff.diff_power(2, 0, 1, -1, a)
    b12 = HomogeneousRatCoeff.diff_power(2, 0, 1, -1, b)
    zero = HomogeneousRatCoeff(2)
    gamma = [[zero, g12], [g12, zero]]
    beta = [[zero, b12], [b12, zero]]
    out = reconstruct_r_omega_general(gamma, beta, 2, order)
    out.provenance = "omega"
    return out


def rank2_ak_sequence(case: int, r, count: int, branch: int = +1):
    """The scalar sequence a_k with a_1 = a - b and
    a_{k+1} = (a^2 + b^2 + k^2 + 2ab(-1)^(k-1)) a_k / (k+1)."""
    a, b = rank2_scaling_constants(case, r)
    if branch < 0:
        a = -a
    seq = []
    ak = a - b
    seq.append(ak)
    for k in range(1, count):
        factor = a * a + b * b + Fraction(k * k) + a * b * Fraction(2 * (-1) ** ((k - 1) % 2))
        ak = factor * ak / Fraction(k + 1)
        seq.append(ak)
    return seq


def rank2_polynomial_degree(case: int, r):
    """Exact polynomiality decision for the rank-2 scaling solutions.

    Returns the smallest m with R_k = 0 for all k >= m, minimized over the
    two scaling branches c_1/c_2 = +- sqrt(-1), or None.  Decided exactly:
    a_{m} vanishes iff a = b (then m = 1) or the recursion factor
    k^2 - (ahat + bhat (-1)^(k-1))^2 vanishes at some k = m - 1 >= 1, where
    a = ahat*i, b = bhat*i.
    """
    r = Fraction(r)
    _, b = rank2_scaling_constants(case, r)
    bhat = b.im
    best = None
    for branch in (+1, -1):
        ahat = (Fraction(1, 2) - r) * branch
        if ahat == bhat:
            best = 1 if best is None else min(best, 1)
            continue
        # k odd: factor zero iff ahat + bhat = +-k; k even: ahat - bhat = +-k
        for s in (1, -1):
            v = s * (ahat + bhat)
            if v.denominator == 1 and v >= 1 and v.numerator % 2 == 1:
                m = int(v) + 1
                best = m if best is None else min(best, m)
            v = s * (ahat - bhat)
            if v.denominator == 1 and v >= 1 and v.numerator % 2 == 0:
                m = int(v) + 1
                best = m if best is None else min(best, m)
    return best


def polynomiality_degree(r: RData, probe_order: int | None = None):
    """Smallest m with all stored R_k = 0 for k >= m, exact entries only.

    Returns None when the last probed coefficient is nonzero (no finite
    degree visible) or when entries are inexact: near-zeros are never
    thresholded, bigfloat input is "undetermined" by design.  Certified
    decisions for the rank-2 families come from
    :func:`rank2_polynomial_degree`, against which this is cross-checked.
    """
    series = r.series
    if not _exact_entries(series.coeffs[0]):
        return None
    K = probe_order if probe_order is not None else series.order
    K = min(K, series.order)
    last_nonzero = -1
    for k in range(1, K):
        if any(bool(x) for row in series.coeffs[k] for x in row):
            last_nonzero = k
    if last_nonzero == K - 1:
        return None
    return last_nonzero + 1


def specialize(r: RData, u_values) -> RData:
    """Evaluate a homogeneous-ring series at numeric canonical coordinates."""
    anchor = u_values[0] - u_values[0]

    def ev(h):
        if isinstance(h, HomogeneousRatCoeff):
            return anchor + h.evaluate(u_values)
        return h

    return RData(r.series.map(ev), r.provenance, list(u_values))


def compose_r(r_omega: RData, r_sigma: RData, u_values=None) -> RData:
    """R = R_omega^T R_sigma, specializing homogeneous entries at u first."""
    if u_values is not None and isinstance(
            r_omega.series.coeffs[0][0][0], HomogeneousRatCoeff):
        r_omega = specialize(r_omega, u_values)
    if r_omega.series.n != r_sigma.series.n:
        raise MatrixSeriesError("dimension mismatch")
    prod = r_omega.series.transpose() * r_sigma.series
    return RData(prod, "product", r_sigma.crit_values)


def classify_dimensions(case: int, n_range) -> list[dict]:
    """Conformal dimensions of the polynomial family.

    Case 1: D = (-1)^n/3 + 2n.  Case 2: the odd integers D = 2n + 1 (the
    alternating-sign form of the case-2 ladder enumerates only half of the
    odd integers; the relabelling symmetry of the canonical coordinates
    fills in the rest, so the odd ladder is listed directly).  Every listed
    dimension is cross-checked against the exact recursion-based decision.
    """
    out = []
    for n in n_range:
        if case == 1:
            D = Fraction(1, 3) * (-1) ** (n % 2) + 2 * n
        else:
            D = Fraction(2 * n + 1)
        r = (1 - D) / 2
        m = rank2_polynomial_degree(case, r)
        out.append({"n": n, "D": D, "r": r, "degree": m,
                    "polynomial": m is not None})
    return out
