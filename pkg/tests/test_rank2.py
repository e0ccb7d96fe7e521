"""Rank-2 families: published conventions, scaling solutions, derivative checks."""

from fractions import Fraction

import pytest

from toprec.curve import CurveError, primary_differential
from toprec.rank2 import (build_family, c_scaling_solution, check_gamma_beta,
                          family_from_u, frobenius_frame, scaling_data_cover)
from toprec.scalars import BigFloat, GaussianRational
from toprec.series import Series

BF = BigFloat(60)


def fam1(s1=-1, s2=0, order=16):
    return build_family(1, BF.from_fraction(s1), BF.from_fraction(s2), BF,
                        chart_order=order)


def fam2(s1=1, s2=0, order=16):
    return build_family(2, BF.from_fraction(s1), BF.from_fraction(s2), BF,
                        chart_order=order)


class TestFamilies:
    def test_case1_critical_data(self):
        f = fam1()
        ps = sorted(float(abs(f.p(a))) for a in range(2))
        assert all(abs(p - 1) < 1e-40 for p in ps)
        assert abs(abs(f.u(0) - f.u(1)) - Fraction(4, 3)) < 1e-40

    def test_case2_critical_data(self):
        f = fam2()
        assert abs(f.u(0) - 2) < 1e-40
        assert abs(f.u(1) + 2) < 1e-40

    def test_u_formula_random_points(self):
        import mpmath
        from toprec.rank2 import _mp_exp
        for case in (1, 2):
            s1 = BF.from_pair(Fraction(3, 7), Fraction(1, 5))
            s2 = BF.from_pair(Fraction(-2, 9), Fraction(1, 3))
            f = build_family(case, s1, s2, BF, chart_order=12)
            if case == 1:
                pref = BF.from_pair(0, Fraction(2, 3))
                expo = BF.from_fraction(Fraction(3, 2))
            else:
                pref = BF.from_fraction(2)
                expo = BF.from_fraction(Fraction(1, 2))
            pred = s2 + pref * _mp_exp(BF, f.t1 * expo)
            assert abs(f.u(0) - pred) < 1e-40

    def test_signed_beta_constants(self):
        f = fam1()
        got = f.beta_family()[0][1] * f.delta_u()
        assert abs(got - GaussianRational(0, Fraction(1, 6))) < 1e-50
        f = fam2()
        got = f.beta_family()[0][1] * f.delta_u()
        assert abs(got - GaussianRational(0, Fraction(1, 2))) < 1e-50

    def test_beta_constant_along_family(self):
        for params in ((Fraction(1, 2), Fraction(1, 3)),
                       (Fraction(-7, 5), Fraction(2))):
            f = build_family(1, BF.from_fraction(params[0]),
                             BF.from_fraction(params[1]), BF, chart_order=12)
            got = f.beta_family()[0][1] * f.delta_u()
            assert abs(got - GaussianRational(0, Fraction(1, 6))) < 1e-45

    def test_s1_zero_rejected(self):
        with pytest.raises(CurveError):
            build_family(1, BF.zero(), BF.zero(), BF)

    def test_family_from_u_round_trip(self):
        f = fam1()
        g = family_from_u(1, f.u(0), f.u(1), BF, chart_order=12)
        assert abs(g.u(0) - f.u(0)) < 1e-45
        assert abs(g.u(1) - f.u(1)) < 1e-45


class TestScalingSolutions:
    def test_r_half_constant(self):
        f = fam1()
        c = c_scaling_solution(f, Fraction(1, 2))
        assert abs(c[0] - GaussianRational(0, 1)) < 1e-50
        assert abs(c[1] - 1) < 1e-50

    def test_euler_scaling_by_finite_differences(self):
        # (u1 d1 + u2 d2) c_i = (r - 1/2) c_i
        f = fam1()
        r = Fraction(1, 5)
        h = Fraction(1, 2000)
        c0 = c_scaling_solution(f, r)
        for comp in range(2):
            acc = BF.zero()
            for a in range(2):
                us = [f.u(0), f.u(1)]
                up, um = list(us), list(us)
                up[a] = up[a] + BF.from_fraction(h)
                um[a] = um[a] - BF.from_fraction(h)
                cp = c_scaling_solution(family_from_u(1, up[0], up[1], BF, 8), r)
                cm = c_scaling_solution(family_from_u(1, um[0], um[1], BF, 8), r)
                acc = acc + us[a] * (cp[comp] - cm[comp]) / BF.from_fraction(2 * h)
            want = c0[comp] * (Fraction(r) - Fraction(1, 2))
            assert abs(acc - want) < 1e-5

    def test_translation_invariance_by_finite_differences(self):
        f = fam1()
        r = Fraction(1, 5)
        h = Fraction(1, 2000)
        for comp in range(2):
            us = [f.u(0), f.u(1)]
            up = [u + BF.from_fraction(h) for u in us]
            um = [u - BF.from_fraction(h) for u in us]
            cp = c_scaling_solution(family_from_u(1, up[0], up[1], BF, 8), r)
            cm = c_scaling_solution(family_from_u(1, um[0], um[1], BF, 8), r)
            d = (cp[comp] - cm[comp]) / BF.from_fraction(2 * h)
            assert abs(d) < 1e-6

    def test_gamma_beta_report(self):
        f = fam1(order=12)
        rep = check_gamma_beta(f, Fraction(1, 3))
        assert rep["dev_closed"] < 1e-6
        assert rep["dev_symmetry"] < 1e-6
        # volume-form case: gamma = beta
        assert rep["dev_beta"] < 1e-6

    def test_gamma_generic_r_not_beta(self):
        f = fam1(order=12)
        rep = check_gamma_beta(f, Fraction(1, 5))
        assert rep["dev_symmetry"] < 1e-6
        assert rep["dev_beta"] > 1e-3


class TestRauchConsistency:
    def test_primary_differential_c_derivative(self):
        # d c_j / d u_a = beta_aj c_a for volume-form scaling data
        from toprec.curve import c_vector
        f = fam1(order=12)
        h = Fraction(1, 2000)
        beta = f.beta_family()
        us = [f.u(0), f.u(1)]
        a, j = 0, 1

        def cj(u_vals):
            g = family_from_u(1, u_vals[0], u_vals[1], BF, 10)
            phi = primary_differential(g.cover, "I", 0, 1)
            cv = c_vector(g.cover, phi)
            return [cv[g.order[0]], cv[g.order[1]]]

        up, um = list(us), list(us)
        up[a] = up[a] + BF.from_fraction(h)
        um[a] = um[a] - BF.from_fraction(h)
        d = (cj(up)[j] - cj(um)[j]) / BF.from_fraction(2 * h)
        c_here = cj(us)
        want = beta[a][j] * c_here[a]
        assert abs(d - want) < 1e-4


class TestFrames:
    def test_orthonormality(self):
        from toprec.curve import Differential, RationalFunction, Poly
        f = fam1(order=14)
        phi = Differential(RationalFunction(Poly.from_fractions([1], BF),
                                            Poly.from_fractions([1], BF)))
        frame = frobenius_frame(f, phi, Fraction(1, 3))
        assert frame.orthonormal_defect() < 1e-50

    def test_case2_orthonormality(self):
        from toprec.curve import Differential, RationalFunction, Poly
        f = fam2(order=14)
        phi = Differential(RationalFunction(Poly.from_fractions([1], BF),
                                            Poly.from_fractions([0, 1], BF)))
        frame = frobenius_frame(f, phi, Fraction(0))
        assert frame.orthonormal_defect() < 1e-50

    def test_euler_matrix_eigenvalues_are_critical_values(self):
        from toprec.curve import Differential, RationalFunction, Poly
        f = fam1(order=14)
        phi = Differential(RationalFunction(Poly.from_fractions([1], BF),
                                            Poly.from_fractions([1], BF)))
        frame = frobenius_frame(f, phi, Fraction(1, 3))
        e = frame.e_matrix
        tr = e[0][0] + e[1][1]
        det = e[0][0] * e[1][1] - e[0][1] * e[1][0]
        want_tr = frame.u[0] + frame.u[1]
        want_det = frame.u[0] * frame.u[1]
        assert abs(tr - want_tr) < 1e-45 and abs(det - want_det) < 1e-45

    def test_unsupported_frame_rejected(self):
        from toprec.curve import Differential, RationalFunction, Poly
        f = fam1(order=12)
        phi = Differential(RationalFunction(Poly.from_fractions([1], BF),
                                            Poly.from_fractions([1], BF)))
        with pytest.raises(CurveError):
            frobenius_frame(f, phi, Fraction(2, 3))

    def test_scaling_data_cover_indexing(self):
        f = fam1(order=12)
        r_omega, c0 = scaling_data_cover(f, Fraction(-1, 3), 4)
        # the permuted scaling vector keeps the family ratio c1/c2 = i
        a, b = f.order
        ratio = c0[a] / c0[b]
        assert abs(ratio - GaussianRational(0, 1)) < 1e-45


class TestPairingResidues:
    def test_diagonal_pairing_equals_c_squared(self):
        # the flat pairing diagonal computed as res_{p_i}(phi^2/dF) equals
        # c_i(u,0)^2; for the unit-normalized case-1 form this is 1/(2 p_i)
        from toprec.curve import Differential, RationalFunction, Poly, c_vector
        f = fam1(order=14)
        phi = Differential(RationalFunction(Poly.from_fractions([1], BF),
                                            Poly.from_fractions([1], BF)))
        c = c_vector(f.cover, phi)
        for i in range(2):
            h = phi.expand_in_chart(f.cover, i, 6)
            # phi^2/dF = h(t)^2 / t dt in the chart
            quot = (h * h) * Series("ti", {-1: BF.one()}, backend=BF)
            res = quot.residue()
            assert abs(res - c[i] * c[i]) < 1e-45
            p = f.cover.ram_points[i]
            assert abs(res * (2 * p) - 1) < 1e-45
