"""Global residue recursion for correlator forms on genus-0 covers.

Correlator forms are stored in a partial-fraction tensor basis: for
2g - 2 + n > 0 every slot dependence is a combination of

    ("pole", i, m)  ->  dq / (q - p_i)^m,   m >= 2
    ("good", b, k)  ->  omega_b(q) (-z)^k   (generalized recursion only)

so a form is a dict mapping slot-key profiles to scalars.  All residues
are evaluated chart-locally on truncated series; no quadrature anywhere.

The recursion step at chart i uses, with f = f_i(t) the global-coordinate
shift and H the zero-constant antiderivative of the kernel denominator's
chart coefficient:

    kernel numerator (plain part):
        int_p^{tau p} B(q0, .) = sum_{m>=1} (f(-t)^m - f(t)^m) dq0/(q0-p_i)^(m+1)
    kernel denominator:  dx * int_p^{tau p} (forms) = t (H(-t) - H(t)) dt_i.

Consumed slots are expanded in the chart; the tau-side pullback of a
coefficient series E is -E(-t).
"""

from __future__ import annotations

from fractions import Fraction

from .curve import (BranchedCover, CurveError, Differential, good_basis_form,
                    vc_integral_scaled)
from .series import Series, SeriesDepthError, SeriesError, gamma_half_ratio

__all__ = [
    "EOEngine",
    "RecursionForm",
    "dx_apply",
    "dx_inverse",
    "v_from_r_omega",
    "cycle_pullback",
    "laplace_oscillatory",
]


class RecursionForm:
    """A correlator form: dict profile -> scalar, profile a tuple of keys."""

    __slots__ = ("n", "data")

    def __init__(self, n: int, data=None):
        self.n = n
        self.data = {}
        if data:
            for k, v in data.items():
                if bool(v):
                    self.data[k] = v

    def add(self, profile, value):
        if not bool(value):
            return
        cur = self.data.get(profile)
        if cur is None:
            self.data[profile] = value
        else:
            s = cur + value
            if bool(s):
                self.data[profile] = s
            else:
                del self.data[profile]

    def permuted(self, perm):
        """Simultaneous slot permutation: new_slot[a] = old_slot[perm[a]]."""
        out = RecursionForm(self.n)
        for prof, v in self.data.items():
            out.add(tuple(prof[perm[a]] for a in range(self.n)), v)
        return out

    def max_coeff_dev(self, other) -> float:
        keys = set(self.data) | set(other.data)
        dev = 0.0
        for k in keys:
            a = self.data.get(k)
            b = other.data.get(k)
            if a is None:
                dev = max(dev, abs(b))
            elif b is None:
                dev = max(dev, abs(a))
            else:
                dev = max(dev, abs(a - b))
        return dev

    def __eq__(self, other):
        return isinstance(other, RecursionForm) and self.n == other.n \
            and self.data == other.data


def dx_apply(h: Series) -> Series:
    """d(theta/dx) on chart data: h dt_i -> ((h/t)') dt_i."""
    return (h * Series.monomial(h.var, h.backend, -1)).differentiate()


def dx_inverse(h: Series, n: int = 1) -> Series:
    """Chart-local inverse derivative with the zero-constant gauge.

    h dt_i -> (antiderivative of h) * t dt_i, iterated n times; raises on a
    logarithmic obstruction (t^-1 term).
    """
    out = h
    for _ in range(n):
        out = out.antidifferentiate() * Series.monomial(out.var, out.backend, 1)
    return out


def v_from_r_omega(r_omega, order: int | None = None):
    """Finite V-correction matrices of a polynomial symplectic series.

    (R(z1) R(z2)^T - 1)/(z1 + z2) = sum V_{m,n} (-z1)^m (-z2)^n; validates
    the symmetry V_mn^{ij} = V_nm^{ji} and finite support.
    """
    from .matrixseries import MatrixSeriesError
    from .rmatrix import RData, v_matrices_omega
    series = r_omega.series if isinstance(r_omega, RData) else r_omega
    v = v_matrices_omega(series, order)
    out = {}
    for (m, n), mat in v.items():
        if any(bool(x) for row in mat for x in row):
            out[(m, n)] = mat
    for (m, n), mat in out.items():
        if (n, m) not in out:
            raise MatrixSeriesError("V symmetry violated: missing transpose block")
        other = out[(n, m)]
        for i in range(len(mat)):
            for j in range(len(mat)):
                if bool(mat[i][j] - other[j][i]):
                    raise MatrixSeriesError("V symmetry violated")
    return out


class EOEngine:
    """Residue recursion on a cover for a fixed kernel differential.

    Plain mode: ``phi`` is a Differential with phi(p_i) != 0.
    Generalized mode: ``omega_parts`` is the list of z-graded volume-form
    components (coefficients of (-z)^n) and ``v_corrections`` the finite
    V-matrix support; the plain mode is the special case V = 0 with a
    z-independent form.
    """

    def __init__(self, cover: BranchedCover, phi: Differential = None,
                 omega_parts=None, v_corrections=None, series_order: int = 24,
                 force_generalized: bool = False):
        self.cover = cover
        self.backend = cover.backend
        self.T = series_order
        if phi is not None:
            self.omega_parts = [phi]
        else:
            self.omega_parts = list(omega_parts)
        self.v = dict(v_corrections or {})
        for (m, n), mat in self.v.items():
            if (n, m) not in self.v:
                raise CurveError("V corrections must be symmetric in (m,n)<->(n,m)")
        self.generalized = (bool(self.v) or len(self.omega_parts) > 1
                            or force_generalized)
        self._forms = {}
        self._good = {}
        self._chart = {}
        for i in range(cover.N):
            self._chart[i] = self._build_chart(i)

    # -- chart-local data ------------------------------------------------------

    def good_form(self, b: int) -> Differential:
        if b not in self._good:
            self._good[b] = good_basis_form(self.cover, b)
        return self._good[b]

    def _build_chart(self, i: int) -> dict:
        T = self.T
        cov = self.cover
        ch = cov.chart(i, T + 8)
        f = ch.s_of_ti.truncate(T + 2)
        fneg = f.substitute_neg()
        fp = f.differentiate()
        data = {"f": f, "fneg": fneg, "fp": fp, "p": ch.p, "u": ch.u}
        # kernel denominator: t * (H(-t) - H(t)), H = antider of the
        # z-graded volume form sum_n dx^{-n} omega^(n)
        den_coeff = None
        for n, part in enumerate(self.omega_parts):
            h = part.expand_in_chart(cov, i, T)
            h = dx_inverse(h, n)
            den_coeff = h if den_coeff is None else den_coeff + h
        if den_coeff.is_zero() or den_coeff.order() != 0:
            raise CurveError(
                f"degenerate kernel: volume form vanishes at p_{i+1}")
        H = den_coeff.antidifferentiate()
        dd = (H.substitute_neg() - H) * Series.monomial("ti", self.backend, 1)
        data["rho"] = dd.inverse()
        # plain numerator families: f(-t)^m - f(t)^m for m >= 1
        numb = []
        pw_pos = Series.one("ti", self.backend, trunc=f.trunc)
        pw_neg = Series.one("ti", self.backend, trunc=f.trunc)
        for m in range(1, T // 2 + 2):
            pw_pos = pw_pos * f
            pw_neg = pw_neg * fneg
            numb.append(pw_neg - pw_pos)
        data["numB"] = numb
        # B-row: (k+1) f^k f' paired with ("pole", i, k+2)
        brow = []
        fk = Series.one("ti", self.backend, trunc=f.trunc)
        for k in range(0, T // 2 + 2):
            brow.append((fk * fp) * (k + 1))
            fk = fk * f
        data["Brow"] = brow
        # B-diagonal: -f'(t) f'(-t) / (f(t) - f(-t))^2
        fpneg = fp.substitute_neg()
        diff = f - fneg
        data["Bdiag"] = -(fp * fpneg) * (diff * diff).inverse()
        return data

    def _xi_chart(self, i: int, key) -> Series:
        """Chart-i coefficient series of a slot-basis form."""
        cache = self._chart[i].setdefault("xi", {})
        if key in cache:
            return cache[key]
        kind = key[0]
        f = self._chart[i]["f"]
        fp = self._chart[i]["fp"]
        if kind == "pole":
            _, j, m = key
            if j == i:
                base = f.truncate(self.T).inverse()
            else:
                c = self._chart[i]["p"] - self.cover.ram_points[j]
                inv = 1 / c if not hasattr(c, "inverse") else c.inverse()
                base = ((f * inv) + 1).truncate(self.T).inverse() * inv
            out = (base ** m) * fp
        elif kind == "good":
            _, b, zdeg = key
            h = self.good_form(b).expand_in_chart(self.cover, i, self.T)
            out = dx_inverse(h, zdeg)
        else:
            raise CurveError(f"unknown slot basis {key!r}")
        out = out.truncate(self.T)
        cache[key] = out
        return out

    # -- the recursion ---------------------------------------------------------

    def correlator(self, g: int, n: int) -> RecursionForm:
        """omega_{g,n} for 2g - 2 + n > 0."""
        if 2 * g - 2 + n <= 0:
            raise CurveError("unstable correlators are not stored as forms")
        key = (g, n)
        if key in self._forms:
            return self._forms[key]
        out = self._step(g, n - 1)
        self._forms[key] = out
        return out

    def _consume(self, i: int, key, tau: bool) -> Series:
        e = self._xi_chart(i, key)
        if tau:
            return -(e.substitute_neg())
        return e

    def _step(self, g: int, n: int) -> RecursionForm:
        """omega_{g,n+1}(q0, q1..qn) from lower data."""
        cov = self.cover
        out = RecursionForm(n + 1)
        half = Fraction(1, 2)
        for i in range(cov.N):
            chart = self._chart[i]
            rho = chart["rho"]
            brackets = {}  # spectator profile (len n) -> Series

            def bracket_add(profile, series):
                cur = brackets.get(profile)
                brackets[profile] = series if cur is None else cur + series

            # (g-1, n+2) term
            if g >= 1:
                if g - 1 == 0 and n == 0:
                    diag = chart["Bdiag"]
                    for (zm, zn), mat in self.v.items():
                        for a_idx in range(cov.N):
                            for b_idx in range(cov.N):
                                vab = mat[a_idx][b_idx]
                                if not bool(vab):
                                    continue
                                ea = self._xi_chart(i, ("good", a_idx, zm))
                                eb = self._consume(i, ("good", b_idx, zn), tau=True)
                                diag = diag + (ea * eb) * vab
                    bracket_add((), diag)
                elif 2 * (g - 1) - 2 + (n + 2) > 0:
                    low = self.correlator(g - 1, n + 2)
                    for prof, val in low.data.items():
                        e0 = self._consume(i, prof[0], tau=False)
                        e1 = self._consume(i, prof[1], tau=True)
                        bracket_add(prof[2:], (e0 * e1) * val)
            # split terms; the factors with (g', set) = (0, empty) vanish
            # identically and must be skipped before touching the partner
            # factor (which would be the correlator being computed)
            for mask in range(1 << n):
                s_idx = [a for a in range(n) if mask >> a & 1]
                c_idx = [a for a in range(n) if not mask >> a & 1]
                for g1 in range(g + 1):
                    g2 = g - g1
                    if (g1 == 0 and not s_idx) or (g2 == 0 and not c_idx):
                        continue
                    t1 = self._factor(i, g1, s_idx, tau=False)
                    if t1 is None:
                        continue
                    t2 = self._factor(i, g2, c_idx, tau=True)
                    if t2 is None:
                        continue
                    for prof1, ser1 in t1:
                        for prof2, ser2 in t2:
                            prof = [None] * n
                            for a, kk in zip(s_idx, prof1):
                                prof[a] = kk
                            for a, kk in zip(c_idx, prof2):
                                prof[a] = kk
                            bracket_add(tuple(prof), ser1 * ser2)

            pole_bound = 6 * g + 2 * (n + 1)
            for spec_prof, series in brackets.items():
                integrand = (series * rho)
                # plain numerator
                for m, numb in enumerate(chart["numB"], start=1):
                    coeff = numb.mul_residue(integrand)
                    if coeff is None:
                        if m + 1 > pole_bound:
                            continue
                        raise SeriesDepthError(
                            f"series order {self.T} insufficient for the "
                            f"(g,n)=({g},{n + 1}) step; increase it")
                    coeff = coeff * half
                    if bool(coeff):
                        out.add((("pole", i, m + 1),) + spec_prof, coeff)
                # V-corrected numerator
                for (zm, zn), mat in self.v.items():
                    for a_idx in range(cov.N):
                        for b_idx in range(cov.N):
                            vab = mat[a_idx][b_idx]
                            if not bool(vab):
                                continue
                            gk = self._good_kernel(i, b_idx, zn)
                            coeff = gk.mul_residue(integrand)
                            if coeff is None:
                                raise SeriesDepthError(
                                    f"series order {self.T} insufficient; increase it")
                            coeff = coeff * half * vab
                            if bool(coeff):
                                out.add((("good", a_idx, zm),) + spec_prof, coeff)
        return out

    def _good_kernel(self, i: int, b: int, zn: int) -> Series:
        """int_p^{tau p} of dx^{-zn} omega_b, as a series in t_i."""
        cache = self._chart[i].setdefault("goodker", {})
        key = (b, zn)
        if key in cache:
            return cache[key]
        h = self._xi_chart(i, ("good", b, zn))
        A = h.antidifferentiate()
        out = A.substitute_neg() - A
        cache[key] = out
        return out

    def _factor(self, i, g, idx, tau):
        """Stable or B-type factor with first slot consumed at chart i.

        Returns a list of (profile-over-idx, series) or None if the factor
        vanishes identically ((0,1) and (0,0) cases).  Memoized on
        (i, g, len(idx), tau): profiles do not depend on slot labels.
        """
        mkey = (i, g, len(idx), tau)
        cache = self._forms.setdefault("_factors", {})
        if mkey in cache:
            return cache[mkey]
        out = self._factor_build(i, g, idx, tau)
        cache[mkey] = out
        return out

    def _factor_build(self, i, g, idx, tau):
        n_slots = len(idx)
        if g == 0 and n_slots == 0:
            return None
        if g == 0 and n_slots == 1:
            if self.generalized:
                terms = []
                chart = self._chart[i]
                for k, ser in enumerate(chart["Brow"]):
                    s = -(ser.substitute_neg()) if tau else ser
                    terms.append(((("pole", i, k + 2),), s))
                # V-part of W(p, q_a): sum V_mn^{ab} dx^{-m} omega_a (p) x
                # omega_b(q_a) (-z)^n
                for (zm, zn), mat in self.v.items():
                    for a_idx in range(self.cover.N):
                        for b_idx in range(self.cover.N):
                            vab = mat[a_idx][b_idx]
                            if not bool(vab):
                                continue
                            e = self._xi_chart(i, ("good", a_idx, zm))
                            s = -(e.substitute_neg()) if tau else e
                            terms.append(((("good", b_idx, zn),), s * vab))
                return terms
            chart = self._chart[i]
            terms = []
            for k, ser in enumerate(chart["Brow"]):
                s = -(ser.substitute_neg()) if tau else ser
                terms.append(((("pole", i, k + 2),), s))
            return terms
        if 2 * g - 2 + (n_slots + 1) <= 0:
            return None
        form = self.correlator(g, n_slots + 1)
        outs = []
        for prof, val in form.data.items():
            e0 = self._consume(i, prof[0], tau=tau)
            outs.append((prof[1:], e0 * val))
        return outs


# ---------------------------------------------------------------------------
# Cycle pullbacks and oscillatory transforms


def cycle_pullback(engine: EOEngine, form: RecursionForm, chart_indices,
                   order: int):
    """Per-slot vanishing-cycle pullback: d/dlam of the cycle integral.

    Returns a dict mapping exponent tuples (k_1..k_n) to scalars for the
    form sum c * prod (lam_a - u_{i_a})^(k_a - 1/2)  -- exponents are the
    keys of the e=2 lattice (odd integers 2k-1).  True cycle normalization
    (including the sqrt(2) factors) on bigfloat backends.
    """
    cov = engine.cover
    b = engine.backend
    n = form.n
    r2 = b.sqrt(b.from_fraction(2))
    out = {}
    for prof, val in form.data.items():
        per_slot = []
        for a in range(n):
            key = prof[a]
            i = chart_indices[a]
            h = engine._xi_chart(i, key)
            # odd chart powers (including t^-1) integrate to constants over
            # the cycle and drop under d/dlam: keep the even part only
            h = h.truncate(2 * order + 3).even_part()
            pulled = vc_integral_scaled(h) * r2
            pulled = pulled.differentiate()
            per_slot.append(pulled)
        # tensor out (small supports)
        items = [list(s.items()) for s in per_slot]
        _tensor_accumulate(out, items, val)
    return out


def _tensor_accumulate(out, items, val, prefix=(), acc=None):
    if acc is None:
        acc = val
    if not items:
        key = prefix
        cur = out.get(key)
        out[key] = acc if cur is None else cur + acc
        return
    head, rest = items[0], items[1:]
    for exp, c in head:
        _tensor_accumulate(out, rest, val, prefix + (exp,), acc * c)


def laplace_oscillatory(pullback: dict, backend, out_window) -> dict:
    """Term-wise formal Laplace of a pulled-back form.

    (lam - u)^(k - 1/2) -> e^{u/z} (1/sqrt(2)) (-z)^k / c(k), with c(k) the
    exact half-integer Gamma ratio; the e^{u_i/z} prefactors are common to
    each slot and tracked by the caller.  Returns {(m_1..m_n): scalar} for
    z-exponents inside ``out_window``.
    """
    r2inv = 1 / backend.sqrt(backend.from_fraction(2))
    out = {}
    for exps, val in pullback.items():
        zkey = []
        c = val
        for e in exps:
            k = (Fraction(e) + Fraction(1, 2))
            if k.denominator != 1:
                raise SeriesError("pullback exponent not in the half-odd lattice")
            k = int(k)
            w = gamma_half_ratio(k)
            c = c * (backend.from_fraction(Fraction(1, w) * Fraction((-1) ** (k % 2))) * r2inv)
            zkey.append(k)
        zkey = tuple(zkey)
        if out_window is not None and any(
                k < out_window[0] or k > out_window[1] for k in zkey):
            continue
        cur = out.get(zkey)
        out[zkey] = c if cur is None else cur + c
    return out
