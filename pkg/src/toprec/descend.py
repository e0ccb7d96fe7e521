"""Calibration at z = infinity and descendant invariants.

The z-connection  (z d/dz + E.) J = theta J  admits a fundamental solution
S(t,z) z^delta z^nu with S = 1 + S_1/z + ... ; the S-series is produced by
the grade-by-grade recursion

    k S_k + [theta, S_k] = E. S_{k-1} + sum_{l=1..k} S_{k-l} nu_{[-l]},

normalized by (S_k)_{[-k]} = 0, and then gauge-fixed to the symplectic
condition S(-z)^T S(z) = 1 by a unique constant C = 1 + sum C_{[-l]} with
C_{[-l]}^T = (-1)^l C_{[-l]}.  Transposes are with respect to the
Frobenius pairing throughout.

Descendants dress ancestors by [S(psibar) phi_a psibar^k]_+; the four
unstable values follow the published closed forms.
"""

from __future__ import annotations

from fractions import Fraction

from .localrec import AncestorEngine, sum_scalars
from .matrixseries import (MatrixSeries, mat_add, mat_identity, mat_mul,
                           mat_scale, mat_sub, mat_transpose, mat_zero)

__all__ = [
    "Calibration",
    "levelt_solution",
    "symplectic_gauge",
    "w_matrices",
    "descendant_stable",
    "descendant_01",
    "descendant_02",
    "descendant_00",
    "descendant_10_rank2",
    "check_eo_desc",
]


class CalibrationError(ValueError):
    pass


def _eta_transpose(x, eta, eta_inv):
    return mat_mul(eta_inv, mat_mul(mat_transpose(x), eta))


def _grade(a, b, delta):
    return delta[a] - delta[b]


def _project(x, delta, grade, zero):
    n = len(x)
    return [[x[a][b] if _grade(a, b, delta) == grade else zero
             for b in range(n)] for a in range(n)]


class Calibration:
    """S-series with its spectral data and pairing."""

    def __init__(self, s_coeffs, delta, nu_parts, theta, eta, backend):
        self.s = s_coeffs          # list of matrices, S_0 = 1
        self.delta = delta         # list of Fractions (diagonal of theta_ss)
        self.nu = nu_parts         # dict l -> matrix nu_{[-l]}
        self.theta = theta
        self.eta = eta
        self.backend = backend

    @property
    def order(self):
        return len(self.s)

    def eta_inv(self):
        b = self.backend
        if len(self.eta) == 2 and not bool(self.eta[0][0]):
            return self.eta  # the swap matrix is its own inverse
        if all(not bool(self.eta[i][j]) for i in range(len(self.eta))
               for j in range(len(self.eta)) if i != j):
            return [[(1 / self.eta[i][j]) if i == j and bool(self.eta[i][j])
                     else b.zero() for j in range(len(self.eta))]
                    for i in range(len(self.eta))]
        raise CalibrationError("pairing must be diagonal or the rank-2 swap")

    def symplectic_defect(self) -> float:
        """max |coeff| of S(-z)^T S(z) - 1 through the stored order."""
        eta_inv = self.eta_inv()
        K = self.order
        dev = 0.0
        n = len(self.s[0])
        for k in range(K):
            acc = mat_zero(n, self.backend.zero())
            for j in range(k + 1):
                sj = mat_scale(self.s[j], (-1) ** (j % 2))
                acc = mat_add(acc, mat_mul(
                    _eta_transpose(sj, self.eta, eta_inv), self.s[k - j]))
            if k == 0:
                acc = mat_sub(acc, mat_identity(n, self.backend.one(),
                                                self.backend.zero()))
            dev = max(dev, max(abs(x) for row in acc for x in row))
        return dev


def levelt_solution(theta_diag, e_matrix, order: int, eta, backend) -> Calibration:
    """Weak fundamental-solution series at z = infinity.

    ``theta_diag``: rational eigenvalues (the input frame must diagonalize
    the grading operator); ``e_matrix``: Euler multiplication in that
    frame.  Solves grade-by-grade with (S_k)_{[-k]} = 0.
    """
    delta = [Fraction(d) for d in theta_diag]
    n = len(delta)
    b = backend
    zero, one = b.zero(), b.one()
    theta = [[b.from_fraction(delta[a]) if a == c else zero
              for c in range(n)] for a in range(n)]
    s = [mat_identity(n, one, zero)]
    nu_parts = {}
    for k in range(1, order):
        rhs = mat_mul(e_matrix, s[k - 1])
        for l, nu_l in nu_parts.items():
            if l <= k - 1:
                rhs = mat_add(rhs, mat_mul(s[k - l], nu_l))
        sk = [[zero for _ in range(n)] for _ in range(n)]
        nu_k = [[zero for _ in range(n)] for _ in range(n)]
        has_nu = False
        for a in range(n):
            for c in range(n):
                d = delta[a] - delta[c]
                if d == -k:
                    # resonant entry: determines nu_{[-k]}, S-entry zeroed
                    if bool(rhs[a][c]):
                        nu_k[a][c] = -rhs[a][c]
                        has_nu = True
                else:
                    denom = b.from_fraction(Fraction(k) + d)
                    sk[a][c] = rhs[a][c] / denom
        if has_nu:
            nu_parts[k] = nu_k
        s.append(sk)
    return Calibration(s, delta, nu_parts, theta, eta, backend)


def symplectic_gauge(cal: Calibration) -> Calibration:
    """Unique right gauge C in G_delta making the series symplectic."""
    b = cal.backend
    n = len(cal.s[0])
    zero, one = b.zero(), b.one()
    eta_inv = cal.eta_inv()
    K = cal.order
    # G_k: z^{-k} coefficient of S(-z)^T S(z)
    g = []
    for k in range(K):
        acc = mat_zero(n, zero)
        for j in range(k + 1):
            sj = mat_scale(cal.s[j], (-1) ** (j % 2))
            acc = mat_add(acc, mat_mul(
                _eta_transpose(sj, cal.eta, eta_inv), cal.s[k - j]))
        g.append(acc)
    # B_{[-l]} = grade -l part of G_l; other grades must vanish
    bparts = {0: mat_identity(n, one, zero)}
    for l in range(1, K):
        proj = _project(g[l], cal.delta, Fraction(-l), zero)
        rem = mat_sub(g[l], proj)
        mism = max(abs(x) for row in rem for x in row)
        scale = max(1.0, max(abs(x) for row in g[l] for x in row))
        if mism > (0.0 if _is_exact(rem) else scale * 1e-12):
            raise CalibrationError(
                f"gauge input outside G_delta at order {l} (defect {mism:.2e})")
        bparts[l] = proj
    # solve C_{[-l]} = -(B_{[-l]} + sum') / 2
    cparts = {0: mat_identity(n, one, zero)}
    for l in range(1, K):
        acc = bparts.get(l, mat_zero(n, zero))
        for i in range(l):
            for k in range(l):
                j = l - i - k
                if j < 0 or j >= l:
                    continue
                if i == 0 and k == 0 and j == l:
                    continue
                ci = cparts.get(i)
                bk = bparts.get(k)
                cj = cparts.get(j)
                if ci is None or bk is None or cj is None:
                    continue
                term = mat_mul(_eta_transpose(ci, cal.eta, eta_inv),
                               mat_mul(bk, cj))
                acc = mat_add(acc, mat_scale(term, (-1) ** (i % 2)))
        cl = mat_scale(acc, b.from_fraction(Fraction(-1, 2)))
        # constraint check: C^T = (-1)^l C
        ct = _eta_transpose(cl, cal.eta, eta_inv)
        defect = mat_sub(ct, mat_scale(cl, (-1) ** (l % 2)))
        mism = max(abs(x) for row in defect for x in row)
        if mism > (0.0 if _is_exact(defect) else 1e-12):
            raise CalibrationError(
                f"gauge constraint violated at order {l} (defect {mism:.2e})")
        cparts[l] = cl
    # S~ = S(z) . (sum_l C_{[-l]} z^{-l})
    new_s = []
    for k in range(K):
        acc = mat_zero(n, zero)
        for j in range(k + 1):
            cl = cparts.get(k - j)
            if cl is None:
                continue
            acc = mat_add(acc, mat_mul(cal.s[j], cl))
        new_s.append(acc)
    return Calibration(new_s, cal.delta, cal.nu, cal.theta, cal.eta, b)


def _is_exact(m) -> bool:
    from .scalars import GaussianRational
    return isinstance(m[0][0], GaussianRational)


def w_matrices(cal: Calibration, order: int | None = None):
    """W_{k,l} with (S(z)^T S(w) - 1)/(z^-1 + w^-1) = sum W z^-k w^-l."""
    b = cal.backend
    n = len(cal.s[0])
    zero = b.zero()
    eta_inv = cal.eta_inv()
    K = cal.order if order is None else min(order + 2, cal.order)
    num = {}
    for k in range(K):
        skt = _eta_transpose(cal.s[k], cal.eta, eta_inv)
        for l in range(K):
            num[(k, l)] = mat_mul(skt, cal.s[l])
    num[(0, 0)] = mat_sub(num[(0, 0)],
                          mat_identity(n, b.one(), zero))
    # N_{k,l} = W_{k-1,l} + W_{k,l-1}
    w = {}
    for l in range(K - 1):
        for k in range(K - 1):
            val = num.get((k + 1, l))
            if val is None:
                continue
            prev = w.get((k + 1, l - 1))
            if prev is not None:
                val = mat_sub(val, prev)
            w[(k, l)] = val
    # check the boundary relations N_{0,l} = W_{0,l-1}
    for l in range(K - 1):
        lhs = num.get((0, l), mat_zero(n, zero))
        rhs = w.get((0, l - 1), mat_zero(n, zero))
        defect = mat_sub(lhs, rhs)
        mism = max(abs(x) for row in defect for x in row)
        if mism > (0.0 if _is_exact(defect) else 1e-12):
            raise CalibrationError(
                "W undefined: series not symplectic "
                f"(defect {mism:.2e} at order {l})")
    out = {}
    for (k, l), m in w.items():
        if k + l <= K - 2:
            out[(k, l)] = m
    return out


# ---------------------------------------------------------------------------
# Descendants


def descendant_stable(cal: Calibration, anc: AncestorEngine, g: int,
                      insertions):
    """<prod [S(psibar) phi_a psibar^k]_+>_g via finite dressing sums."""
    n = len(insertions)
    b = cal.backend
    total = b.zero()
    idx = [0] * n

    def rec(pos, coeff, dressed):
        nonlocal total
        if pos == n:
            v = anc.correlator(g, tuple(dressed))
            if bool(v):
                total = total + coeff * v
            return
        k, a = insertions[pos]
        for j in range(k + 1):
            sj = cal.s[j] if j < cal.order else None
            if sj is None:
                raise CalibrationError("calibration order too small for request")
            for b_idx in range(len(sj)):
                c = sj[b_idx][a]
                if not bool(c):
                    continue
                rec(pos + 1, coeff * c, dressed + [(k - j, b_idx)])

    rec(0, b.one(), [])
    return total


def descendant_02(cal: Calibration, k: int, a: int, l: int, b_: int):
    """<phi_a psi^k, phi_b psi^l>_{0,2} = (W_{kl} phi_b, phi_a)."""
    w = w_matrices(cal)
    mat = w.get((k, l))
    if mat is None:
        return cal.backend.zero()
    # (W phi_b, phi_a) = sum_c eta_{ac} (W)_{cb}
    return sum_scalars(cal.eta[a][c] * mat[c][b_] for c in range(len(mat)))


def descendant_01(cal: Calibration, k: int, a: int, unit_coords):
    """<phi_a psi^k>_{0,1} = (S_{k+2} phi_a, 1)."""
    if k + 2 >= cal.order:
        raise CalibrationError("calibration order too small")
    col = [cal.s[k + 2][c][a] for c in range(len(cal.s[0]))]
    return _pair(cal, col, unit_coords)


def descendant_00(cal: Calibration, flat_coords, unit_coords):
    """(1/2) ((S_2 S_1 - S_3) 1, 1) at the calibration point."""
    m = mat_sub(mat_mul(cal.s[2], cal.s[1]), cal.s[3])
    vec = [sum_scalars(m[c][d] * unit_coords[d] for d in range(len(m)))
           for c in range(len(m))]
    return _pair(cal, vec, unit_coords) * Fraction(1, 2)


def _pair(cal, v, w):
    return sum_scalars(v[a] * cal.eta[a][b] * w[b]
                       for a in range(len(v)) for b in range(len(v)))


def descendant_10_rank2(r1_const, du_start, du_end, c_start, c_end, backend):
    """Genus-one primary value difference along a rank-2 family path.

    (1/2) int sum_i R_1^{ii} du_i - (1/24) sum log c_i, evaluated as a
    difference between path endpoints: the R_1 diagonal for homogeneous
    rank-2 data is kappa (du_1 - du_2)/(u_1 - u_2) with exact logarithmic
    antiderivative kappa log(u_1 - u_2).
    """
    import mpmath
    from mpmath import mp

    def logv(x):
        with mp.workdps(backend.dps):
            return backend.from_complex(mpmath.log(x.value))

    term_r = (logv(du_end) - logv(du_start)) * r1_const * Fraction(1, 2)
    term_c = backend.zero()
    for ce, cs in zip(c_end, c_start):
        term_c = term_c + (logv(ce) - logv(cs))
    return term_r - term_c * Fraction(1, 24)


# ---------------------------------------------------------------------------
# Oscillatory-integral cross-check


def check_eo_desc(eo_engine, anc: AncestorEngine, psi, r_series: MatrixSeries,
                  g: int, thimbles, z_window, backend) -> dict:
    """Laplace transform of pulled-back forms vs dressed ancestor series.

    LHS: the per-slot formal Laplace of the cycle pullback of the global
    correlator form.  RHS: ancestors with the insertion
    -J(z_a) sum_k psibar^k z_a^(-k-1), J(z) = Psi R(z) e_i (the common
    e^{u_i/z} prefactors cancel between the two sides).  Returns the
    coefficient tables and their maximal deviation inside the window.
    """
    from .recursion import cycle_pullback, laplace_oscillatory
    n = len(thimbles)
    form = eo_engine.correlator(g, n)
    pb = cycle_pullback(eo_engine, form, thimbles, order=z_window[1] + 4)
    lhs = laplace_oscillatory(pb, backend, z_window)
    N = r_series.n
    jmax = r_series.order
    rhs = {}
    # ancestor psibar-classes vanish above the moduli dimension
    k_budget = 3 * g - 3 + n

    def add(key, val):
        if not bool(val):
            return
        cur = rhs.get(key)
        rhs[key] = val if cur is None else cur + val

    def rec(pos, zkey, coeff, dressed, kleft):
        if pos == n:
            v = anc.correlator(g, tuple(dressed))
            if bool(v):
                add(tuple(zkey), coeff * v)
            return
        i = thimbles[pos]
        for k in range(kleft + 1):
            for j in range(jmax):
                m = j - k - 1
                if m < z_window[0] or m > z_window[1]:
                    continue
                for b_ in range(N):
                    c = sum_scalars(psi[b_][c2] * r_series.coeffs[j][c2][i]
                                    for c2 in range(N))
                    if not bool(c):
                        continue
                    rec(pos + 1, zkey + [m], coeff * (-c),
                        dressed + [(k, b_)], kleft - k)

    rec(0, [], backend.one(), [], k_budget)
    dev = 0.0
    for key in set(lhs) | set(rhs):
        a = lhs.get(key)
        b_ = rhs.get(key)
        if a is None:
            dev = max(dev, abs(b_))
        elif b_ is None:
            dev = max(dev, abs(a))
        else:
            dev = max(dev, abs(a - b_))
    return {"dev": dev, "lhs": lhs, "rhs": rhs}
