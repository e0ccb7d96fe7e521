"""The acceptance suite: eleven numbered checks with pinned tolerances.

Each criterion function returns a list of (label, measured, tolerance,
passed) tuples; ``run_suite`` packs them into a Report with one pass/fail
row per sub-check and per criterion.  The ``fault`` hook deliberately
corrupts one Bergman coefficient so the negative-control path of the
driver can be exercised end to end.
"""

from __future__ import annotations

import random
import time
from fractions import Fraction

from .curve import (Differential, Poly, RationalFunction, BranchedCover,
                    combine_differentials, good_basis_form,
                    primary_differential)
from .descend import (descendant_01, descendant_02, check_eo_desc,
                      levelt_solution, symplectic_gauge)
from .kdv import psi_correlator
from .localrec import (AncestorEngine, LocalEngine, compare_frob_eo,
                       p_data_from_r)
from .matrixseries import MatrixSeries
from .rank2 import build_family, frobenius_frame, scaling_data_cover
from .recursion import EOEngine, cycle_pullback, v_from_r_omega
from .report import Report
from .rmatrix import (check_eynard_identity, check_symplectic, compose_r,
                      r_sigma_from_bergman, rank2_polynomial_degree)
from .scalars import EXACT, BigFloat

__all__ = ["run_suite", "CRITERIA"]

TOL_BETA = 1e-40
TOL_SYMPL = 1e-25
TOL_EYNARD = 1e-25
TOL_THM3 = 1e-20
TOL_NEG = 1e-5
TOL_GEN = 1e-18
TOL_GB = 1e-25
TOL_CAL = 1e-25
TOL_DESC = 1e-20


def _airy(backend, chart_order=24):
    num = Poly.from_fractions([0, 0, Fraction(1, 2)], backend)
    den = Poly.from_fractions([1], backend)
    return BranchedCover(RationalFunction(num, den), chart_order=chart_order,
                         label="airy")


def _minus_dt(backend):
    return Differential(RationalFunction(Poly.from_fractions([-1], backend),
                                         Poly.from_fractions([1], backend)))


def _dx(backend):
    return Differential(RationalFunction(Poly.from_fractions([1], backend),
                                         Poly.from_fractions([1], backend)))


def criterion_1():
    """Rank-2 classification, case 1 (exact)."""
    t0 = time.time()
    out = []
    for D in (Fraction(1, 3), Fraction(5, 3), Fraction(-1, 3), Fraction(13, 3)):
        m = rank2_polynomial_degree(1, (1 - D) / 2)
        out.append((f"case1 D={D} polynomial", 0.0 if m is not None else 1.0,
                    0.5, m is not None))
    for D in (Fraction(1, 2), Fraction(2, 3), Fraction(3, 5)):
        m = rank2_polynomial_degree(1, (1 - D) / 2)
        out.append((f"case1 D={D} not polynomial", 0.0 if m is None else 1.0,
                    0.5, m is None))
    dt = time.time() - t0
    out.append(("case1 classification runtime (s)", dt, 1.0, dt < 1.0))
    return out


def criterion_2():
    """Rank-2 classification, case 2 (exact)."""
    out = []
    for D in (-3, -1, 1, 3, 5):
        m = rank2_polynomial_degree(2, Fraction(1 - D, 2))
        out.append((f"case2 D={D} polynomial", 0.0 if m is not None else 1.0,
                    0.5, m is not None))
    for D in (0, 2, Fraction(1, 3)):
        m = rank2_polynomial_degree(2, (1 - D) / 2)
        out.append((f"case2 D={D} not polynomial", 0.0 if m is None else 1.0,
                    0.5, m is None))
    return out


def criterion_3(dps=60):
    """Signed Bergman constants at random parameter points."""
    bf = BigFloat(dps)
    rng = random.Random(20260808)
    out = []
    for case, b_im in ((1, Fraction(1, 6)), (2, Fraction(1, 2))):
        target = bf.from_pair(0, b_im)
        for trial in range(5):
            s1 = bf.from_pair(Fraction(rng.randint(-40, 40), 16) or 1,
                              Fraction(rng.randint(-40, 40), 16))
            s2 = bf.from_pair(Fraction(rng.randint(-40, 40), 16),
                              Fraction(rng.randint(-40, 40), 16))
            if not bool(s1):
                s1 = bf.one()
            fam = build_family(case, s1, s2, bf, chart_order=14)
            beta = fam.beta_family()
            got = beta[0][1] * fam.delta_u()
            dev = abs(got - target)
            out.append((f"case{case} beta12*(u1-u2) point {trial+1}",
                        dev, TOL_BETA, dev < TOL_BETA))
    return out


def _rank2_bergman(case, dps, cutoff, chart_order=None):
    bf = BigFloat(dps)
    s1 = bf.from_fraction(-1 if case == 1 else 1)
    fam = build_family(case, s1, bf.zero(), bf,
                       chart_order=chart_order or (2 * cutoff + 10))
    return fam, fam.cover.bergman(cutoff)


def criterion_4(dps=60):
    """Symplectic condition for the curve-side series through z^6."""
    t0 = time.time()
    out = []
    for case in (1, 2):
        fam, berg = _rank2_bergman(case, dps, 6)
        rs = r_sigma_from_bergman(berg, 7)
        dev = check_symplectic(rs.series, 6)
        out.append((f"case{case} symplectic defect z^<=6", dev, TOL_SYMPL,
                    dev < TOL_SYMPL))
    dt = time.time() - t0
    out.append(("symplectic runtime (s)", dt, 10.0, dt < 10.0))
    return out


def criterion_5(dps=60, fault=None):
    """Bilinear kernel identity against the even Bergman grid, m+n <= 3."""
    from .matrixseries import MatrixSeriesError
    out = []
    for case in (1, 2):
        fam, berg = _rank2_bergman(case, dps, 8)
        if fault == "sign_flip" and case == 1:
            key = (0, 1)
            grid = dict(berg.table[key])
            grid[(2, 0)] = -grid[(2, 0)]
            berg.table[key] = grid
        rs = r_sigma_from_bergman(berg, 6)
        try:
            rep = check_eynard_identity(rs, berg, 3)
            dev = max(rep.values())
        except MatrixSeriesError:
            dev = float("inf")
        out.append((f"case{case} kernel-expansion identity m+n<=3", dev,
                    TOL_EYNARD, dev < TOL_EYNARD))
    return out


def criterion_6():
    """Exact Airy forms and the trivial-point correlators vs the oracle."""
    b = EXACT
    cov = _airy(b)
    eng = EOEngine(cov, phi=_minus_dt(b), series_order=24)
    w03 = eng.correlator(0, 3)
    key3 = (("pole", 0, 2),) * 3
    ok3 = w03.data == {key3: b.one()}
    w11 = eng.correlator(1, 1)
    ok11 = w11.data == {(("pole", 0, 4),): b.from_fraction(Fraction(1, 8))}
    out = [("airy omega_{0,3} = dq^3/(q^2)^3", 0.0 if ok3 else 1.0, 0.5, ok3),
           ("airy omega_{1,1} = dq/(8 q^4)", 0.0 if ok11 else 1.0, 0.5, ok11)]
    R = MatrixSeries.identity(1, 14, b.zero(), b.one())
    anc = AncestorEngine(R, [[-b.one()]], [[b.one()]], [b.zero()],
                         [[b.zero()]], b)
    anc.set_unit([b.one()])
    for label, g, ins, want in (
            ("<tau_0^3>_0", 0, ((0, 0),) * 3, psi_correlator(0, 0, 0)),
            ("<tau_1>_1", 1, ((1, 0),), psi_correlator(1)),
            ("<tau_4>_2", 2, ((4, 0),), psi_correlator(4))):
        got = anc.correlator(g, ins)
        ok = got.re == want and not got.im
        out.append((f"{label} = {want}", 0.0 if ok else 1.0, 0.5, ok))
    return out


def criterion_7(dps=60):
    """Local-recursion equivalence on both curves, plus a negative control."""
    t0 = time.time()
    bf = BigFloat(dps)
    out = []
    budget = [(0, 3), (1, 1), (0, 4), (1, 2)]
    for case, phi_args, s1 in ((1, ("I", 0, 1), -1), (2, ("III", 1), 1)):
        fam = build_family(case, bf.from_fraction(s1), bf.zero(), bf,
                           chart_order=36)
        phi = primary_differential(fam.cover, *phi_args)
        rep = compare_frob_eo(fam.cover, phi, budget, kmax=6, depth=8)
        for (g, n), dev in rep.items():
            out.append((f"case{case} ({g},{n}) form agreement", dev, TOL_THM3,
                        dev < TOL_THM3))
    # negative control: scale phi by a factor depending on the covering map
    # itself (equivalently on the base coordinate), which leaves the span of
    # z-independent classes and must break the P-data matching
    fam = build_family(1, bf.from_fraction(-1), bf.zero(), bf, chart_order=36)
    phi = primary_differential(fam.cover, "I", 0, 1)
    x = fam.cover.x
    bad_num = phi.rational.num * (x.den.scale(10) + x.num)
    bad_den = phi.rational.den * x.den.scale(10)
    bad = Differential(RationalFunction(bad_num, bad_den))
    # (0,3) is blind to this perturbation for residue-degree reasons; the
    # one-holed torus form sees it
    rep = compare_frob_eo(fam.cover, bad, [(1, 1)], kmax=6, depth=8)
    dev = rep[(1, 1)]
    out.append(("negative control: perturbed form disagrees", dev, TOL_NEG,
                dev > TOL_NEG))
    dt = time.time() - t0
    out.append(("equivalence runtime (s)", dt, 120.0, dt < 120.0))
    return out


def criterion_8(dps=60):
    """Generalized recursion for the degree-1 polynomial case, D = 5/3."""
    bf = BigFloat(dps)
    fam = build_family(1, bf.from_fraction(-1), bf.zero(), bf, chart_order=36)
    cov = fam.cover
    r = Fraction(-1, 3)
    r_omega, c0 = scaling_data_cover(fam, r, 6)
    a1_nonzero = any(bool(x) for row in r_omega.series.coeff(1) for x in row)
    a2_zero = all(not bool(x) for row in r_omega.series.coeff(2) for x in row)
    out = [("D=5/3: matrix degree exactly 1", 0.0 if (a1_nonzero and a2_zero)
            else 1.0, 0.5, a1_nonzero and a2_zero)]
    V = v_from_r_omega(r_omega)
    gb = [good_basis_form(cov, i) for i in range(2)]
    w0 = combine_differentials(c0, gb)
    r1 = r_omega.series.coeff(1)
    r1c = [sum((r1[i][j] * c0[j] for j in range(2)), bf.zero())
           for i in range(2)]
    w1 = combine_differentials([-x for x in r1c], gb)
    eng = EOEngine(cov, omega_parts=[w0, w1], v_corrections=V, series_order=26)
    berg = cov.bergman(6)
    rsig = r_sigma_from_bergman(berg, 8)
    R = compose_r(r_omega, rsig)
    pd = p_data_from_r(R.series, c0, cov.crit_values, 6)
    le = LocalEngine(pd, depth=8)
    import itertools
    for (g, n) in ((1, 1), (0, 3)):
        form = eng.correlator(g, n)
        lform = le.correlator(g, n)
        dev = 0.0
        for charts in itertools.product(range(2), repeat=n):
            pb = cycle_pullback(eng, form, charts, order=6)
            stored = lform.data.get(charts, {})
            for k in set(pb) | set(stored):
                if any(e > Fraction(5, 2) for e in k):
                    continue
                a = pb.get(k)
                b_ = stored.get(k)
                d = abs(a - b_) if a is not None and b_ is not None else \
                    abs(a if a is not None else b_)
                dev = max(dev, d)
        out.append((f"generalized ({g},{n}) pullback agreement", dev, TOL_GEN,
                    dev < TOL_GEN))
    # degeneration: V = 0 and z-independent form reproduces plain bit-exactly
    b = EXACT
    cova = _airy(b)
    plain = EOEngine(cova, phi=_minus_dt(b), series_order=20)
    gen = EOEngine(cova, omega_parts=[_minus_dt(b)], v_corrections={},
                   series_order=20, force_generalized=True)
    same = all(plain.correlator(g, n).data == gen.correlator(g, n).data
               for (g, n) in ((0, 3), (1, 1), (0, 4)))
    out.append(("degeneration V=0 bit-exact", 0.0 if same else 1.0, 0.5, same))
    return out


def criterion_9(dps=60):
    """Good-basis normalization and the z-pairing of the curve series."""
    out = []
    b = EXACT
    cov = _airy(b)
    lead = good_basis_form(cov, 0).expand_in_chart(cov, 0, 3).coeff(0)
    ok = lead == -1
    out.append(("airy good-basis leading coefficient = -1",
                0.0 if ok else 1.0, 0.5, ok))
    bf = BigFloat(dps)
    for case in (1, 2):
        fam, berg = _rank2_bergman(case, dps, 6)
        dev = 0.0
        for i in range(2):
            lead = good_basis_form(fam.cover, i).expand_in_chart(
                fam.cover, i, 3).coeff(0)
            dev = max(dev, abs(lead + 1))
        out.append((f"case{case} good-basis leading coefficients = -1",
                    dev, TOL_GB, dev < TOL_GB))
        rs = r_sigma_from_bergman(berg, 7)
        # pairing: z sum_i R(z)_{ai} R(-z)_{bi} = z delta_ab through z^6
        prod = rs.series * rs.series.negate_z().transpose()
        dev = prod.minus_identity().truncate(7).max_abs()
        out.append((f"case{case} higher-residue pairing z*delta through z^6",
                    dev, TOL_GB, dev < TOL_GB))
    return out


def criterion_10():
    """Calibration: gauge-fixed series and unstable cross-identities."""
    b = EXACT
    eta = [[b.zero(), b.one()], [b.one(), b.zero()]]
    em = [[b.zero(), b.from_fraction(Fraction(-2, 3))],
          [b.from_fraction(Fraction(-2, 3)), b.zero()]]
    cal = symplectic_gauge(levelt_solution(
        (Fraction(-1, 6), Fraction(1, 6)), em, 9, eta, b))
    dev = cal.symplectic_defect()
    out = [("gauge-fixed series symplectic through z^-6", dev, TOL_CAL,
            dev < TOL_CAL)]
    unit = [b.zero(), b.one()]
    exact_ok = True
    for k in range(4):
        for a in range(2):
            lhs = descendant_01(cal, k, a, unit)
            rhs = b.zero()
            for c in range(2):
                if bool(unit[c]):
                    rhs = rhs + descendant_02(cal, k + 1, a, 0, c) * unit[c]
            if bool(lhs - rhs):
                exact_ok = False
    out.append(("(0,1)/(0,2) unstable cross-identities exact",
                0.0 if exact_ok else 1.0, 0.5, exact_ok))
    return out


def criterion_11(dps=60):
    """Oscillatory-integral vs descendant expansion on the case-1 curve."""
    bf = BigFloat(dps)
    fam = build_family(1, bf.from_fraction(-1), bf.zero(), bf, chart_order=36)
    phi = _dx(bf)
    frame = frobenius_frame(fam, phi, Fraction(1, 3))
    berg = fam.cover.bergman(8)
    rs = r_sigma_from_bergman(berg, 10)
    anc = AncestorEngine(rs.series, frame.psi, frame.eta, frame.u,
                         frame.e_matrix, bf)
    anc.set_unit(frame.unit)
    eng = EOEngine(fam.cover, phi=phi, series_order=26)
    out = []
    rep = check_eo_desc(eng, anc, frame.psi, rs.series, 1, (0,), (-8, 5), bf)
    out.append(("(1,1) oscillatory vs descendant through z^5", rep["dev"],
                TOL_DESC, rep["dev"] < TOL_DESC))
    rep = check_eo_desc(eng, anc, frame.psi, rs.series, 0, (0, 1, 0),
                        (-5, 5), bf)
    out.append(("(0,3) oscillatory vs descendant through z^5", rep["dev"],
                TOL_DESC, rep["dev"] < TOL_DESC))
    return out


CRITERIA = {
    1: ("rank-2 classification case 1", criterion_1),
    2: ("rank-2 classification case 2", criterion_2),
    3: ("signed Bergman constants", criterion_3),
    4: ("symplectic condition", criterion_4),
    5: ("kernel-expansion identity", criterion_5),
    6: ("Airy/KdV oracle", criterion_6),
    7: ("local-recursion equivalence", criterion_7),
    8: ("generalized recursion", criterion_8),
    9: ("good-basis normalization and pairing", criterion_9),
    10: ("calibration", criterion_10),
    11: ("oscillatory/descendant comparison", criterion_11),
}


def run_suite(selected=None, dps=60, fault=None, verbose=True) -> Report:
    report = Report("acceptance suite", {"precision": dps})
    items = sorted(CRITERIA) if selected is None else sorted(selected)
    for num in items:
        title, fn = CRITERIA[num]
        kwargs = {}
        if fn.__code__.co_varnames[:fn.__code__.co_argcount].__contains__("dps"):
            kwargs["dps"] = dps
        if fault is not None and num == 5:
            kwargs["fault"] = fault
        results = fn(**kwargs)
        all_ok = all(ok for (_, _, _, ok) in results)
        for label, measured, tol, ok in results:
            report.add(f"[{num}] {label}", measured,
                       f"verify.criterion_{num}", tol,
                       "pass" if ok else "fail")
        if verbose:
            import sys
            print(f"criterion {num:2d} ({title}): "
                  f"{'PASS' if all_ok else 'FAIL'}", file=sys.stderr)
    return report
