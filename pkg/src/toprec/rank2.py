"""The two rank-2 covering families and their exact Frobenius data.

Case 1:  x(t) = t^3/3 + s1 t + s2           (one pole of order 3)
Case 2:  x(t) = t + s1/t + s2               (two simple poles)

with s1 in C*, s2 in C, s1 = exp(t1) on the universal cover.  These carry
semi-simple rank-2 Frobenius structures whose critical values are

    case 1:  u_{1,2} = s2 +- (2 sqrt(-1)/3) exp(3 t1/2)
    case 2:  u_{1,2} = s2 +- 2 exp(t1/2)

The module pins down the published square-root conventions
sqrt(p_i) = exp((t1 + (2i-1) pi sqrt(-1))/4)  (case 1, and the analogous
even-multiple rule for case 2) so that *signed* constants -- not just
magnitudes -- are reproducible: with these labels the Bergman constant is
beta_{12} (u1 - u2) = sqrt(-1)/6 (case 1) and sqrt(-1)/2 (case 2).
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
from mpmath import mp

from .curve import (INF, BranchedCover, CurveError, Differential, Poly,
                    RationalFunction, beta_matrix, c_vector)
from .scalars import Backend, BigFloat

__all__ = [
    "Rank2Family",
    "build_family",
    "family_from_u",
    "c_scaling_solution",
    "check_gamma_beta",
    "frobenius_frame",
    "scaling_data_cover",
]


class Rank2Family:
    """A rank-2 cover with the published chart labels and branch records.

    ``order``: permutation mapping family index a (0-based: the published
    index a+1) to the cover's u-sorted chart index.
    """

    def __init__(self, case, s1, s2, backend, cover, order, sqrt_p, t1):
        self.case = case
        self.s1 = s1
        self.s2 = s2
        self.backend = backend
        self.cover = cover
        self.order = order          # family label -> cover chart index
        self.sqrt_p = sqrt_p        # family-labelled sqrt(p_a), the branch record
        self.t1 = t1                # principal log of s1

    def chart_index(self, a: int) -> int:
        return self.order[a]

    def p(self, a: int):
        return self.cover.ram_points[self.order[a]]

    def u(self, a: int):
        return self.cover.crit_values[self.order[a]]

    def delta_u(self):
        return self.u(0) - self.u(1)

    def beta_family(self):
        """beta in family labels; beta_{12} * (u1 - u2) is the case constant."""
        berg = self.cover.bergman(1)
        bm = beta_matrix(berg)
        o = self.order
        return [[bm[o[a]][o[b]] for b in range(2)] for a in range(2)]


def _mp_exp(backend: BigFloat, z):
    with mp.workdps(backend.dps):
        return backend.from_complex(mpmath.exp(z.value))


def _mp_log(backend: BigFloat, z):
    with mp.workdps(backend.dps):
        return backend.from_complex(mpmath.log(z.value))


def build_family(case: int, s1, s2, backend: Backend,
                 chart_order: int = 16) -> Rank2Family:
    """Construct a rank-2 family with the published chart conventions.

    Exact backends are supported only as far as the ramification data stays
    in Q(i); the branch bookkeeping (log s1) needs a bigfloat backend.
    """
    if not bool(s1):
        raise CurveError("s1 must be nonzero")
    b = backend
    if case == 1:
        num = Poly([s2, s1, b.zero(), b.from_fraction(Fraction(1, 3))], b)
        den = Poly([b.one()], b)
        poles = [(INF, 3)]
    elif case == 2:
        num = Poly([s1, s2, b.one()], b)
        den = Poly([b.zero(), b.one()], b)
        poles = [(INF, 1), (b.zero(), 1)]
    else:
        raise CurveError(f"unknown case {case}")
    cover = BranchedCover(RationalFunction(num, den), poles=poles,
                          chart_order=chart_order, label=f"case{case}")
    if cover.N != 2:
        raise CurveError("rank-2 family did not produce two charts")

    if not isinstance(b, BigFloat):
        # exact construction: keep the u-sorted labels, no branch record
        return Rank2Family(case, s1, s2, b, cover, [0, 1], None, None)

    t1 = _mp_log(b, s1)
    with mp.workdps(b.dps):
        pi_i = b.from_complex(mpmath.mpc(0, mpmath.pi))
    order = []
    sqrt_p = []
    half = b.from_fraction(Fraction(1, 2))
    quarter = b.from_fraction(Fraction(1, 4))
    for a in range(2):
        if case == 1:
            phase = pi_i * (2 * a + 1)
        else:
            phase = pi_i * (2 * a)
        p_target = _mp_exp(b, (t1 + phase) * half)
        root = _mp_exp(b, (t1 + phase) * quarter)
        # match to a cover chart
        dists = [abs(p_target - p) for p in cover.ram_points]
        idx = dists.index(min(dists))
        if dists[idx] > 10.0 ** (-b.dps / 2):
            raise CurveError("failed to match published critical point labels")
        order.append(idx)
        sqrt_p.append(root)
    if order[0] == order[1]:
        raise CurveError("label matching collapsed; non-generic parameters")

    # install the published chart signs: t_a'(p_a) = sqrt(2) sqrt(p_a) (case 1)
    # and sqrt(2)/sqrt(p_a) (case 2)
    r2 = b.sqrt(b.from_fraction(2))
    signs = {}
    for a in range(2):
        i = order[a]
        target = r2 * sqrt_p[a] if case == 1 else r2 / sqrt_p[a]
        lead = cover.chart(i).lead
        ratio = lead / target
        if abs(ratio - 1) < 1e-6:
            signs[i] = 1
        elif abs(ratio + 1) < 1e-6:
            signs[i] = -1
        else:
            raise CurveError("chart leading coefficient mismatch with convention")
    cover = BranchedCover(RationalFunction(num, den), poles=poles,
                          chart_signs=signs, chart_order=chart_order,
                          label=f"case{case}")
    return Rank2Family(case, s1, s2, b, cover, order, sqrt_p, t1)


def family_from_u(case: int, u1, u2, backend: BigFloat,
                  chart_order: int = 16) -> Rank2Family:
    """Invert the critical-value map (principal branches) and build.

    case 1: u1 - u2 = (4 sqrt(-1)/3) exp(3 t1/2); case 2: u1 - u2 = 4 exp(t1/2).
    """
    b = backend
    du = u1 - u2
    if not bool(du):
        raise CurveError("non-semisimple point: u1 = u2")
    if case == 1:
        ii = b.from_pair(0, 1)
        w = du * 3 / (ii * 4)
        t1 = _mp_log(b, w) * b.from_fraction(Fraction(2, 3))
    else:
        w = du / 4
        t1 = _mp_log(b, w) * 2
    s1 = _mp_exp(b, t1)
    s2 = (u1 + u2) / 2
    fam = build_family(case, s1, s2, b, chart_order=chart_order)
    # sanity: recovered critical values match the requested ones
    if abs(fam.u(0) - u1) > 10.0 ** (-b.dps + 10) and abs(fam.u(0) - u2) > 10.0 ** (-b.dps + 10):
        raise CurveError("failed to invert the critical-value map")
    if abs(fam.u(0) - u1) > abs(fam.u(0) - u2):
        fam.order = [fam.order[1], fam.order[0]]
        fam.sqrt_p = [fam.sqrt_p[1], fam.sqrt_p[0]]
    return fam


def caustic_margin(family: Rank2Family) -> float:
    b = family.backend
    return abs(family.delta_u()) - 10.0 ** (-b.dps / 3)


def c_scaling_solution(family: Rank2Family, r):
    """The homogeneous solution c_a(u, 0) = c_a^o (u1-u2)^(r-1/2).

    c_1^o = sqrt(-1), c_2^o = 1, principal branch of the power; family
    labels throughout.
    """
    b = family.backend
    if caustic_margin(family) <= 0:
        raise CurveError("non-semisimple point: caustic margin exhausted")
    du = family.delta_u()
    expo = Fraction(r) - Fraction(1, 2)
    with mp.workdps(b.dps):
        power = b.from_complex(mpmath.exp(
            mpmath.log(du.value) * (mpmath.mpf(expo.numerator) / expo.denominator)))
    i_unit = b.from_pair(0, 1)
    return [i_unit * power, power]


def _fd_partial(case, r, u_vals, a, h, backend, component):
    """Central difference of c_component w.r.t. u_a."""
    shifts = []
    for sgn in (1, -1):
        u = list(u_vals)
        u[a] = u[a] + backend.from_fraction(Fraction(sgn) * h)
        fam = family_from_u(case, u[0], u[1], backend)
        shifts.append(c_scaling_solution(fam, r)[component])
    return (shifts[0] - shifts[1]) / backend.from_fraction(2 * Fraction(h))


def check_gamma_beta(family: Rank2Family, r, h=Fraction(1, 1000)) -> dict:
    """Finite-difference gamma matrix vs closed form, and vs beta when r
    is the homogeneity degree of a primary differential.

    Central differences with Richardson extrapolation (h and h/2); reports
    the deviations, raising no exceptions: report-valued.
    """
    b = family.backend
    u_vals = [family.u(0), family.u(1)]
    c0 = c_scaling_solution(family, r)
    out = {}

    def gamma_fd(i, j):
        # gamma_ij = d(c_i)/d(u_j) / c_j
        vals = []
        for step in (h, h / 2):
            d = _fd_partial(family.case, r, u_vals, j, step, b, i)
            vals.append(d / c0[j])
        return (4 * vals[1] - vals[0]) / 3  # Richardson for O(h^2) centrals

    g12 = gamma_fd(0, 1)
    g21 = gamma_fd(1, 0)
    du = family.delta_u()
    i_unit = b.from_pair(0, 1)
    expo = b.from_fraction(Fraction(r) - Fraction(1, 2))
    closed = -(expo / du) * (c0[0] / c0[1])
    out["gamma12_fd"] = g12
    out["gamma12_closed"] = closed
    out["dev_closed"] = abs(g12 - closed)
    out["dev_symmetry"] = abs(g12 - g21)
    beta = family.beta_family()
    out["beta12"] = beta[0][1]
    out["dev_beta"] = abs(g12 - beta[0][1])
    return out


def scaling_data_cover(family: Rank2Family, r, order: int):
    """(R_omega at u, c(u,0)) re-indexed to the cover's chart ordering.

    The closed-form reconstruction lives in the published family labels;
    engines index charts by sorted critical values, so both the matrix and
    the scaling vector are permuted through ``family.order``.
    """
    from .rmatrix import reconstruct_r_omega_rank2, specialize
    b = family.backend
    r_omega = reconstruct_r_omega_rank2(family.case, r, order)
    u_family = [family.u(0), family.u(1)]
    r_num = specialize(r_omega, u_family)
    o = family.order
    coeffs = []
    for k in range(r_num.series.order):
        m = r_num.series.coeffs[k]
        cm = [[None, None], [None, None]]
        for a in range(2):
            for c in range(2):
                cm[o[a]][o[c]] = m[a][c]
        coeffs.append(cm)
    from .matrixseries import MatrixSeries
    from .rmatrix import RData
    series = MatrixSeries(coeffs, b.zero(), b.one(), unit_leading=True)
    c_family = c_scaling_solution(family, r)
    c_cover = [None, None]
    for a in range(2):
        c_cover[o[a]] = c_family[a]
    return RData(series, "omega", list(family.cover.crit_values)), c_cover


# ---------------------------------------------------------------------------
# Frobenius frames for the distinguished primary differentials


class FrobeniusFrame:
    """Flat-frame data of the Frobenius structure induced by a volume form.

    Basis (phi_1, phi_2) has constant Gram matrix eta = [[0,1],[1,0]].
    Chart indexing follows the *cover* ordering (sorted critical values),
    matching every engine downstream; du_i/dt_a = rep_a(p_i) with rep the
    Kodaira-Spencer representative of the flat field.
    """

    def __init__(self, family: Rank2Family, phi: Differential, r, theta_eigs,
                 rep_values, e_matrix, flat_point):
        self.family = family
        self.phi = phi
        self.r = Fraction(r)
        b = family.backend
        self.backend = b
        self.eta = [[b.zero(), b.one()], [b.one(), b.zero()]]
        self.theta_eigs = tuple(theta_eigs)
        self.theta = [[b.from_fraction(theta_eigs[0]), b.zero()],
                      [b.zero(), b.from_fraction(theta_eigs[1])]]
        self.e_matrix = e_matrix
        self.unit = [b.zero(), b.one()]
        self.flat_point = flat_point
        cov = family.cover
        self.u = list(cov.crit_values)
        self.c = c_vector(cov, phi)
        # Psi_{a i} = -c_i eta^{ab} rep_b(p_i); with eta the swap, this is
        # -c_i * rep_{other(a)}(p_i)
        self.psi = [[None, None], [None, None]]
        for i in range(2):
            for a in range(2):
                self.psi[a][i] = -(self.c[i] * rep_values[1 - a][i])
        dev = self.orthonormal_defect()
        if dev > 10.0 ** (-b.dps / 2):
            raise CurveError(
                "volume form is not unit-normalized for this frame "
                f"(Psi^T eta Psi deviates by {dev:.2e}); rescale phi")

    def orthonormal_defect(self) -> float:
        b = self.backend
        dev = 0.0
        for i in range(2):
            for j in range(2):
                acc = b.zero()
                for a in range(2):
                    for c in range(2):
                        acc = acc + self.psi[a][i] * self.eta[a][c] * self.psi[c][j]
                want = b.one() if i == j else b.zero()
                dev = max(dev, abs(acc - want))
        return dev

    def pair(self, v, w):
        total = self.backend.zero()
        for a in range(2):
            for b_ in range(2):
                total = total + v[a] * self.eta[a][b_] * w[b_]
        return total


def frobenius_frame(family: Rank2Family, phi: Differential, r) -> FrobeniusFrame:
    """Frame for case 1 with a degree-r primary differential, or case 2.

    Kodaira-Spencer representatives: case 1 basis (x, 1); case 2 basis
    (s1/x, 1).  Euler multiplication in that basis:

        case 1: [[s2, (2/3) s1], [-(2/3) s1^2, s2]]
        case 2: [[s2, 2], [2 s1, s2]]
    """
    b = family.backend
    s1, s2 = family.s1, family.s2
    r = Fraction(r)
    if (family.case, r) not in ((1, Fraction(1, 3)), (2, Fraction(0))):
        raise CurveError(
            "flat frames are shipped for the distinguished volume forms "
            "only: case 1 with r = 1/3, case 2 with r = 0")
    two_thirds = b.from_fraction(Fraction(2, 3))
    theta_eigs = (Fraction(r) - Fraction(1, 2), Fraction(1, 2) - Fraction(r))
    rep1 = list(family.cover.ram_points)   # x (case 1) or s1/x (case 2) at p_i
    rep2 = [b.one(), b.one()]
    if family.case == 1:
        e_matrix = [[s2, two_thirds * s1],
                    [-(two_thirds * (s1 * s1)), s2]]
        flat_point = [s1, s2]
    else:
        e_matrix = [[s2, b.from_fraction(2)],
                    [2 * s1, s2]]
        flat_point = [family.t1, s2]
    return FrobeniusFrame(family, phi, r, theta_eigs, [rep1, rep2],
                          e_matrix, flat_point)
