"""Genus-0 branched coverings x: P^1 -> P^1 and their local data.

The global coordinate is called t; a cover is a rational function
x(t) = N(t)/D(t) with deg N > deg D, so the coordinate point at infinity
always lies over infinity.  Everything downstream -- Morse charts,
Bergman-kernel coefficients, good-basis differentials, primary
differentials -- is computed from truncated series expansions of x.

Conventions baked in here:

* finite ramification points are sorted by (Re u, Im u) of their critical
  values, which fixes chart indices deterministically;
* the first entry of ``poles`` is the distinguished point over infinity
  used by third-kind forms (it is the coordinate infinity unless a cover
  spec lists the poles explicitly);
* Morse coordinates use the principal square root of 2(x - u_i), with an
  optional per-chart sign override;
* vanishing-cycle integrals are returned in a scaled normalization:
  the true integral over the cycle is sqrt(2) times the returned series,
  which keeps all stored coefficients inside the exact field.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath
from mpmath import mp

from .scalars import Backend, BackendError, GaussianRational
from .series import Series, SeriesError

__all__ = [
    "CurveError",
    "Poly",
    "RationalFunction",
    "BranchedCover",
    "MorseChart",
    "BergmanExpansion",
    "Differential",
    "Bivariate",
    "beta_matrix",
    "good_basis_form",
    "primary_differential",
    "c_vector",
    "vc_integral_scaled",
    "vanishing_cycle_integral",
    "cover_from_spec",
]

INF = "inf"


class CurveError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Dense polynomials over a backend


class Poly:
    """Dense polynomial c0 + c1 t + ... over backend scalars."""

    __slots__ = ("coeffs", "backend")

    def __init__(self, coeffs, backend: Backend):
        self.backend = backend
        cs = list(coeffs)
        while cs and not bool(cs[-1]):
            cs.pop()
        self.coeffs = cs

    @classmethod
    def from_fractions(cls, fracs, backend: Backend):
        return cls([backend.from_fraction(Fraction(f)) for f in fracs], backend)

    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else -1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other):
        n = max(len(self.coeffs), len(other.coeffs))
        z = self.backend.zero()
        a = self.coeffs + [z] * (n - len(self.coeffs))
        b = other.coeffs + [z] * (n - len(other.coeffs))
        return Poly([x + y for x, y in zip(a, b)], self.backend)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return Poly([x * c for x in self.coeffs], self.backend)

    def __mul__(self, other):
        if not self.coeffs or not other.coeffs:
            return Poly([], self.backend)
        z = self.backend.zero()
        out = [z] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a * b
        return Poly(out, self.backend)

    def derivative(self):
        return Poly([c * k for k, c in enumerate(self.coeffs)][1:], self.backend)

    def __call__(self, x):
        acc = self.backend.zero()
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def shift_taylor(self, a, order: int) -> Series:
        """Series of p(a + s) in s, exact (trunc=None) up to the degree."""
        # Repeated synthetic division by (s) after substituting t = a + s:
        # Horner-shift gives all Taylor coefficients exactly.
        n = len(self.coeffs)
        if n == 0:
            return Series.zero("s", self.backend)
        work = list(self.coeffs)
        out = []
        for k in range(n):
            acc = self.backend.zero()
            for c in reversed(work):
                acc = acc * a + c
            out.append(acc)
            # divide by (t - a): synthetic
            new = []
            carry = self.backend.zero()
            for c in reversed(work):
                carry = c + carry * a
                new.append(carry)
            new = list(reversed(new[:-1]))
            work = new
            if not work:
                break
        return Series("s", {k: v for k, v in enumerate(out)}, backend=self.backend)

    def reverse_series(self, order: int) -> Series:
        """Series of p(1/s) * s^deg in s (coefficients reversed)."""
        d = self.degree()
        return Series("s", {d - k: c for k, c in enumerate(self.coeffs)},
                      backend=self.backend)

    def divide_out_root(self, root, multiplicity: int = 1) -> "Poly":
        """Synthetic division by (t - root)^multiplicity, remainder dropped."""
        work = list(self.coeffs)
        for _ in range(multiplicity):
            new = []
            carry = self.backend.zero()
            for c in reversed(work):
                carry = c + carry * root
                new.append(carry)
            work = list(reversed(new[:-1]))
        return Poly(work, self.backend)

    def roots(self, separation_check: bool = True):
        """All complex roots.  Exact backend: degree <= 2 only."""
        b = self.backend
        d = self.degree()
        if d <= 0:
            return []
        if b.exact:
            if d == 1:
                return [-self.coeffs[0] / self.coeffs[1]]
            if d == 2:
                a2, a1, a0 = self.coeffs[2], self.coeffs[1], self.coeffs[0]
                disc = a1 * a1 - 4 * a2 * a0
                r = disc.sqrt()
                if r is None:
                    raise BackendError(
                        "roots not in Q(i); use a bigfloat backend")
                return [(-a1 + r) / (2 * a2), (-a1 - r) / (2 * a2)]
            raise BackendError(
                f"exact roots of degree {d} unsupported; use a bigfloat backend")
        dps = b.dps
        with mp.workdps(dps + 15):
            cs = [c.value for c in reversed(self.coeffs)]
            rts = mpmath.polyroots(cs, maxsteps=200, extraprec=80)
        out = [b.from_complex(r) for r in rts]
        if separation_check and len(out) > 1:
            thresh = 10.0 ** (-dps / 2)
            for i in range(len(out)):
                for j in range(i + 1, len(out)):
                    if abs(out[i] - out[j]) <= thresh:
                        raise CurveError(
                            "non-generic cover: root pair closer than the "
                            "certified separation 10^(-P/2)")
        return out


class RationalFunction:
    """num/den with polynomial parts over one backend."""

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly):
        if den.is_zero():
            raise CurveError("zero denominator")
        self.num = num
        self.den = den

    @property
    def backend(self):
        return self.num.backend

    def __call__(self, x):
        return self.num(x) / self.den(x)

    def derivative(self) -> "RationalFunction":
        n, d = self.num, self.den
        return RationalFunction(n.derivative() * d - n * d.derivative(), d * d)

    def expand_at(self, point, order: int) -> Series:
        """Laurent series in s = t - point, known strictly below s^order."""
        ns = self.num.shift_taylor(point, 0)
        ds = self.den.shift_taylor(point, 0)
        if ds.is_zero():
            raise CurveError("expansion at a zero of the denominator polynomial")
        mu = int(ds.order())
        depth = order + 2 * mu + 2
        return (ns.truncate(depth) / ds.truncate(depth)).truncate(order)

    def expand_at_infinity(self, order: int) -> Series:
        """Laurent series in s = 1/t, known strictly below s^order."""
        dn, dd = self.num.degree(), self.den.degree()
        ns = self.num.reverse_series(order)
        ds = self.den.reverse_series(order)
        # num(1/s) = s^-dn * ns, den(1/s) = s^-dd * ds
        depth = order + max(dn - dd, 0) + 2
        quot = ns.truncate(depth) / ds.truncate(depth)
        return quot.shift(dd - dn).truncate(order)


# ---------------------------------------------------------------------------
# Bivariate truncated series (for Bergman coefficients)


class Bivariate:
    """Truncated bivariate series: dict (a,b) -> scalar, total degree < cap."""

    __slots__ = ("coeffs", "cap", "backend")

    def __init__(self, coeffs, cap, backend):
        self.cap = cap
        self.backend = backend
        self.coeffs = {k: v for k, v in coeffs.items()
                       if bool(v) and k[0] + k[1] < cap}

    @classmethod
    def from_univariate(cls, f: Series, slot: int, cap: int, backend):
        data = {}
        for k, v in f.items():
            kk = int(k)
            key = (kk, 0) if slot == 0 else (0, kk)
            data[key] = v
        return cls(data, cap, backend)

    def __add__(self, other):
        cap = min(self.cap, other.cap)
        data = dict(self.coeffs)
        for k, v in other.coeffs.items():
            data[k] = data[k] + v if k in data else v
        return Bivariate(data, cap, self.backend)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return Bivariate({k: v * c for k, v in self.coeffs.items()},
                         self.cap, self.backend)

    def __mul__(self, other):
        cap = min(self.cap, other.cap)
        data = {}
        for (a1, b1), v1 in self.coeffs.items():
            for (a2, b2), v2 in other.coeffs.items():
                a, b = a1 + a2, b1 + b2
                if a + b >= cap:
                    continue
                p = v1 * v2
                key = (a, b)
                data[key] = data[key] + p if key in data else p
        return Bivariate(data, cap, self.backend)

    def inverse(self):
        """Inverse of a series with nonzero constant term."""
        c0 = self.coeffs.get((0, 0))
        if c0 is None or not bool(c0):
            raise CurveError("bivariate inverse needs a unit constant term")
        inv0 = 1 / c0 if not hasattr(c0, "inverse") else c0.inverse()
        u = Bivariate({k: -v * inv0 for k, v in self.coeffs.items() if k != (0, 0)},
                      self.cap, self.backend)
        acc = Bivariate({(0, 0): self.backend.one()}, self.cap, self.backend)
        term = acc
        for _ in range(self.cap):
            term = term * u
            if not term.coeffs:
                break
            acc = acc + term
        return acc.scale(inv0)

    def divide_diag_square(self) -> "Bivariate":
        """Divide by (s - t)^2, assuming exact divisibility.

        c_{m,n} = e_{m-2,n} - 2 e_{m-1,n-1} + e_{m,n-2}; per total degree d
        solve for e with m descending so the needed entries already exist.
        The m in {0,1} relations are redundant consistency equations.
        """
        out = {}
        z = self.backend.zero()
        maxdeg = max((a + b for a, b in self.coeffs), default=0)
        for d in range(2, maxdeg + 1):
            for m in range(d, 1, -1):
                n = d - m
                c = self.coeffs.get((m, n), z)
                e = c + 2 * out.get((m - 1, n - 1), z) - out.get((m, n - 2), z)
                if bool(e):
                    out[(m - 2, n)] = e
        return Bivariate(out, self.cap, self.backend)


# ---------------------------------------------------------------------------
# Covers


class MorseChart:
    """Local Morse coordinate t_i with x = u_i + t_i^2/2.

    ``ti_of_s``: series of t_i in s = t - p_i;  ``s_of_ti``: its reversion.
    """

    __slots__ = ("index", "p", "u", "ti_of_s", "s_of_ti", "sign")

    def __init__(self, index, p, u, ti_of_s, s_of_ti, sign):
        self.index = index
        self.p = p
        self.u = u
        self.ti_of_s = ti_of_s
        self.s_of_ti = s_of_ti
        self.sign = sign

    @property
    def lead(self):
        """dt_i/dt at p_i."""
        return self.ti_of_s.coeff(1)

    def order(self) -> int:
        return int(self.s_of_ti.trunc)


class BranchedCover:
    """A generic genus-0 cover with derived ramification data and caches."""

    def __init__(self, x: RationalFunction, poles=None, chart_signs=None,
                 chart_order: int = 16, label: str = ""):
        self.x = x
        self.backend = x.backend
        self.label = label
        self.chart_order = chart_order
        self._chart_signs = chart_signs or {}
        self._charts = {}
        self._bergman = {}
        dn, dd = x.num.degree(), x.den.degree()
        if dn <= dd:
            raise CurveError(
                "unsupported cover: coordinate infinity must lie over infinity "
                "(need deg num > deg den)")
        self.degree = dn
        self.poles = poles if poles is not None else self._derive_poles()
        self._validate_poles()
        self.d = len(self.poles)
        self.pole_orders = [m for _, m in self.poles]
        self.expected_N = self.degree + self.d - 2
        self.ram_points, self.crit_values = self._ramification()
        self.N = len(self.ram_points)

    # -- construction helpers ------------------------------------------------

    def _derive_poles(self):
        out = [(INF, self.x.num.degree() - self.x.den.degree())]
        if self.x.den.degree() > 0:
            rts = self.x.den.roots()
            seen = []
            for r in rts:
                for entry in seen:
                    if self._close(entry[0], r):
                        entry[1] += 1
                        break
                else:
                    seen.append([r, 1])
            seen.sort(key=lambda e: self._sort_key(e[0]))
            out.extend((r, m) for r, m in seen)
        return out

    def _validate_poles(self):
        total = sum(m for _, m in self.poles)
        if total != self.degree:
            raise CurveError("pole orders do not sum to the covering degree")

    def _close(self, a, b) -> bool:
        if self.backend.exact:
            return a == b
        return abs(a - b) < 10.0 ** (-self.backend.dps / 2)

    def _sort_key(self, v):
        if v == INF:
            return (float("inf"), 0.0)
        if isinstance(v, GaussianRational):
            return (float(v.re), float(v.im))
        return (float(mpmath.re(v.value)), float(mpmath.im(v.value)))

    def _ramification(self):
        x = self.x
        w = x.num.derivative() * x.den - x.num * x.den.derivative()
        # deflate the forced zeros at finite poles (order mu-1 each)
        for point, m in self.poles:
            if point == INF or m < 2:
                continue
            w = w.divide_out_root(point, m - 1)
        if w.degree() != self.expected_N:
            raise CurveError(
                f"non-generic cover: expected {self.expected_N} simple "
                f"ramification points, derivative has degree {w.degree()}")
        pts = w.roots()
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if self._close(pts[i], pts[j]):
                    raise CurveError(
                        "non-generic cover: higher ramification (repeated "
                        f"zero of dx near {pts[i]!r})")
        vals = [x(p) for p in pts]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if self._close(vals[i], vals[j]):
                    raise CurveError(
                        f"non-generic cover: coincident critical values "
                        f"{vals[i]!r}, {vals[j]!r}")
        order = sorted(range(len(pts)),
                       key=lambda k: (self._sort_key(vals[k]), self._sort_key(pts[k])))
        pts = [pts[k] for k in order]
        vals = [vals[k] for k in order]
        return pts, vals

    # -- charts ---------------------------------------------------------------

    def chart(self, i: int, order: int | None = None) -> MorseChart:
        order = order or self.chart_order
        cached = self._charts.get(i)
        if cached is not None and cached.order() >= order:
            return cached
        p, u = self.ram_points[i], self.crit_values[i]
        xs = self.x.expand_at(p, order + 3)
        a = (xs - u).truncate(order + 3)
        # the s^0 and s^1 coefficients vanish identically (u = x(p), dx(p) = 0);
        # strip the numerical residue they leave on inexact backends
        lead = abs(a.coeff(2)) if not self.backend.exact else None
        kept = {}
        for k, v in a.items():
            if k in (0, 1):
                if self.backend.exact:
                    if bool(v):
                        raise CurveError(
                            f"Morse chart undefined at p_{i+1}: ramification not simple")
                elif lead and abs(v) > lead * 10.0 ** (-self.backend.dps // 2):
                    raise CurveError(
                        f"Morse chart undefined at p_{i+1}: ramification not simple")
                continue
            kept[k] = v
        a = Series(a.var, kept, trunc=a.trunc, e=1, backend=self.backend)
        if a.is_zero() or a.order() != 2:
            raise CurveError(f"Morse chart undefined at p_{i+1}: ramification not simple")
        ti = (2 * a).sqrt()  # order-1 series in s, principal branch
        if self._chart_signs.get(i, 1) < 0:
            ti = -ti
        s_of_ti = ti.reversion()
        s_of_ti = Series("ti", s_of_ti.coeffs, trunc=s_of_ti.trunc, e=1,
                         backend=self.backend, _raw=True)
        chart = MorseChart(i, p, u, ti, s_of_ti, self._chart_signs.get(i, 1))
        self._charts[i] = chart
        return chart

    def charts(self, order: int | None = None):
        return [self.chart(i, order) for i in range(self.N)]

    # -- expansions -------------------------------------------------------------

    def expand_function_in_chart(self, r: RationalFunction, i: int, order: int) -> Series:
        """Series in t_i of r(t) pulled back through the chart."""
        ch = self.chart(i, order + 8)
        f = ch.s_of_ti.truncate(order + 6)
        loc = r.expand_at(ch.p, order + 6)
        return _laurent_compose(loc, f).truncate(order)

    def expand_form_in_chart(self, num_den, i: int, order: int) -> Series:
        """Series in t_i of r(t) dt, returned as the dt_i-coefficient."""
        r = num_den
        ch = self.chart(i, order + 8)
        f = ch.s_of_ti.truncate(order + 6)
        loc = r.expand_at(ch.p, order + 6)
        comp = _laurent_compose(loc, f)
        return (comp * f.differentiate()).truncate(order)

    # -- Bergman ------------------------------------------------------------------

    def bergman(self, cutoff: int) -> "BergmanExpansion":
        cached = self._bergman.get("obj")
        if cached is not None and cached.cutoff >= cutoff:
            return cached
        obj = BergmanExpansion(self, cutoff)
        self._bergman["obj"] = obj
        return obj


def _laurent_compose(outer: Series, inner: Series) -> Series:
    """outer(inner) where outer may have a finite pole part, inner order 1."""
    if outer.is_zero():
        return Series.zero(inner.var, outer.backend,
                           trunc=outer.trunc, e=inner.e)
    lo = outer.order()
    if lo >= 0:
        return outer.compose(inner)
    m = int(-lo)
    shifted = Series(outer.var,
                     {k + m: v for k, v in outer.items()},
                     trunc=None if outer.trunc is None else outer.trunc + m,
                     e=outer.e, backend=outer.backend)
    head = shifted.compose(inner)
    return head * inner.truncate(head.trunc).inverse() ** m


class BergmanExpansion:
    """Regular-part coefficients B_mn^{ij} of the fundamental bi-differential."""

    def __init__(self, cover: BranchedCover, cutoff: int):
        self.cover = cover
        self.cutoff = cutoff
        self.table = {}
        b = cover.backend
        cap = 2 * cutoff + 1
        order = 2 * cutoff + 4
        charts = cover.charts(order + 4)
        fs = [ch.s_of_ti.truncate(order) for ch in charts]
        for i in range(cover.N):
            fi = fs[i]
            fpi = fi.differentiate()
            for j in range(i, cover.N):
                if i == j:
                    grid = _bergman_diag(fi, cap, b)
                else:
                    grid = _bergman_offdiag(
                        charts[i].p, charts[j].p, fi, fs[j], fpi,
                        fs[j].differentiate(), cap, b)
                self.table[(i, j)] = grid
                if i != j:
                    self.table[(j, i)] = {(n, m): v for (m, n), v in grid.items()}

    def coeff(self, i, j, m, n):
        if m + n > 2 * self.cutoff:
            raise CurveError(f"Bergman coefficient ({m},{n}) beyond cutoff")
        return self.table[(i, j)].get((m, n), self.cover.backend.zero())

    def matrix(self, m, n):
        """B_{m,n} as an N x N matrix of scalars."""
        N = self.cover.N
        return [[self.coeff(i, j, m, n) for j in range(N)] for i in range(N)]


def _bergman_offdiag(pi, pj, fi, fj, fpi, fpj, cap, backend):
    c = pi - pj
    inv_c = 1 / c if not hasattr(c, "inverse") else c.inverse()
    u = (Bivariate.from_univariate(fi, 0, cap, backend)
         - Bivariate.from_univariate(fj, 1, cap, backend)).scale(inv_c)
    one = Bivariate({(0, 0): backend.one()}, cap, backend)
    denom = (one + u) * (one + u)
    grid = denom.inverse().scale(inv_c * inv_c)
    grid = grid * Bivariate.from_univariate(fpi, 0, cap, backend)
    grid = grid * Bivariate.from_univariate(fpj, 1, cap, backend)
    return grid.coeffs


def _bergman_diag(f, cap, backend):
    # regular part of f'(s) f'(t) / (f(s)-f(t))^2 - 1/(s-t)^2
    capx = cap + 2
    h = Bivariate({}, capx, backend)
    for k, v in f.items():
        kk = int(k)
        data = {(p, kk - 1 - p): v for p in range(kk)}
        h = h + Bivariate(data, capx, backend)
    fp = f.differentiate()
    u = (Bivariate.from_univariate(fp, 0, capx, backend)
         * Bivariate.from_univariate(fp, 1, capx, backend)) - h * h
    q = u.divide_diag_square()
    grid = q * (h * h).inverse()
    return Bivariate(grid.coeffs, cap, backend).coeffs


def beta_matrix(bergman: BergmanExpansion):
    """beta_{ai} = B_00^{ai} for a != i, zero diagonal."""
    N = bergman.cover.N
    z = bergman.cover.backend.zero()
    return [[bergman.coeff(a, i, 0, 0) if a != i else z for i in range(N)]
            for a in range(N)]


# ---------------------------------------------------------------------------
# Differentials


class Differential:
    """A relative 1-form, globally rational and/or chart-local.

    ``rational``: RationalFunction r with the form r(t) dt, or None.
    ``charts``: dict i -> Series in t_i (the dt_i-coefficient), filled on
    demand when a cover is attached.
    ``z_parts``: optional list of Differentials, the coefficients of
    (-z)^n for polynomial z-dependence; None for plain forms.
    """

    def __init__(self, rational=None, charts=None, z_parts=None, label=""):
        self.rational = rational
        self._charts = dict(charts) if charts else {}
        self.z_parts = z_parts
        self.label = label

    def expand_in_chart(self, cover: BranchedCover, i: int, order: int) -> Series:
        key = (cover, i)
        cached = self._charts.get(key) or self._charts.get(i)
        if cached is not None and (cached.trunc is None or cached.trunc >= order):
            return cached.truncate(order) if cached.trunc is not None else cached
        if self.rational is None:
            raise CurveError("no global representation to expand")
        s = cover.expand_form_in_chart(self.rational, i, order)
        self._charts[key] = s
        return s

    def residue_at(self, cover: BranchedCover, point):
        """Residue of the rational form at a finite point or INF."""
        if self.rational is None:
            raise CurveError("residue needs the rational representation")
        if point == INF:
            # t = 1/s: r(t) dt = -r(1/s) s^-2 ds, so res = -[s^1] r(1/s)
            s = self.rational.expand_at_infinity(3)
            return -(s.shift(-2).residue())
        loc = self.rational.expand_at(point, 2)
        return loc.residue()

    def scale(self, c):
        rat = None
        if self.rational is not None:
            rat = RationalFunction(self.rational.num.scale(c), self.rational.den)
        charts = {i: s * c for i, s in self._charts.items()}
        zp = None
        if self.z_parts is not None:
            zp = [d.scale(c) for d in self.z_parts]
        return Differential(rat, charts, zp, label=self.label)


def good_basis_form(cover: BranchedCover, i: int) -> Differential:
    """The i-th good-basis differential as a global rational form.

    Closed genus-0 formula: (1/t_i'(p_i)) [1/(p_i - t) - 1/(p_i - w1)] x'(t) dt,
    where w1 is the first pole; the constant term is dropped when w1 is the
    coordinate infinity.  Its expansion at its own chart is (-1 + O(t_i)) dt_i.
    """
    b = cover.backend
    ch = cover.chart(i)
    a1 = ch.lead
    w1 = cover.poles[0][0]
    xp = cover.x.derivative()
    # poly representation of [1/(p_i - t) - c_inf] * x'(t)
    one = Poly([b.one()], b)
    lin = Poly([ch.p, -b.one()], b)  # (p_i - t)
    num = xp.num
    den = xp.den * lin
    if w1 != INF:
        cinf = 1 / (ch.p - w1) if not hasattr(ch.p - w1, "inverse") else (ch.p - w1).inverse()
        num = num - (xp.num * lin).scale(cinf)
    inv_a1 = 1 / a1 if not hasattr(a1, "inverse") else a1.inverse()
    num = num.scale(inv_a1)
    return Differential(RationalFunction(num, den), label=f"omega_{i+1}")


def combine_differentials(coeffs, diffs) -> Differential:
    """Linear combination of rational 1-forms over a common denominator."""
    num = None
    den = None
    for c, d in zip(coeffs, diffs):
        if d.rational is None:
            raise CurveError("combination needs rational representations")
        n_i, d_i = d.rational.num.scale(c), d.rational.den
        if num is None:
            num, den = n_i, d_i
        else:
            num = num * d_i + n_i * den
            den = den * d_i
    return Differential(RationalFunction(num, den), label="combo")


def c_vector(cover: BranchedCover, phi: Differential, order: int = 4):
    """c_a = -res_{p_a} phi/t_a: minus the t_a^0 chart coefficient of phi."""
    out = []
    for a in range(cover.N):
        s = phi.expand_in_chart(cover, a, order)
        if not s.is_zero() and s.order() < 0:
            raise CurveError(f"not holomorphic at ramification point p_{a+1}")
        out.append(-s.coeff(0))
    return out


def vc_integral_scaled(f: Series, lam_var: str = "lam") -> Series:
    """Vanishing-cycle integral of f(t_i) dt_i, divided by sqrt(2).

    Term rule: t^m dt -> 0 for odd m, and 2^(m/2+1)/(m+1) (lam-u)^((m+1)/2)
    for even m.  The true cycle integral is sqrt(2) times the result, a
    normalization kept out of the stored coefficients so the exact backend
    can be used throughout.
    """
    data = {}
    for k, v in f.items():
        if k != int(k):
            raise SeriesError("chart expansion must have integer exponents")
        m = int(k)
        if m == -1:
            raise SeriesError("logarithmic term, not integrable over vanishing cycle")
        if m % 2:
            continue
        w = Fraction(2) ** (m // 2 + 1) / (m + 1)
        data[m + 1] = v * w  # key m+1 in the e=2 lattice = exponent (m+1)/2
    t = None
    if f.trunc is not None:
        t = (f.trunc + 1) / 2
    return Series(lam_var, {Fraction(k, 2): v for k, v in data.items()},
                  trunc=t, e=2, backend=f.backend)


def vanishing_cycle_integral(f: Series, lam_var: str = "lam") -> Series:
    """True vanishing-cycle integral: sqrt(2) * the scaled rule."""
    scaled = vc_integral_scaled(f, lam_var)
    r2 = f.backend.sqrt(f.backend.from_fraction(2))
    return scaled * r2


def primary_differential(cover: BranchedCover, kind: str, pole_index: int = 0,
                         a: int = 1) -> Differential:
    """Dubrovin primary differentials of types I-III on a genus-0 cover.

    Type I:   (1/a) res_{q=inf_i} F(q)^(a/m_i) B(q, p),  1 <= a <= m_i - 1.
    Type II:  res_{q=inf_i} F(q) B(q, p),                2 <= i <= d.
    Type III: the third-kind form with residues -1 at inf_1, +1 at inf_i.

    Fractional powers of the leading coefficient use the principal branch.
    """
    b = cover.backend
    if kind == "III":
        if pole_index == 0 or pole_index >= cover.d:
            raise CurveError("type III needs a pole other than the first")
        w1, wi = cover.poles[0][0], cover.poles[pole_index][0]
        # [1/(t - wi) - 1/(t - w1)] dt with residues +1 at wi, -1 at w1;
        # a term at the coordinate infinity is dropped (its residue is
        # carried by the point at infinity automatically).
        if wi != INF and w1 == INF:
            num, den = Poly([b.one()], b), Poly([-wi, b.one()], b)
        elif wi == INF and w1 != INF:
            num, den = Poly([-b.one()], b), Poly([-w1, b.one()], b)
        elif wi != INF and w1 != INF:
            num = Poly([wi - w1], b)
            den = Poly([-wi, b.one()], b) * Poly([-w1, b.one()], b)
        else:
            raise CurveError("degenerate type III: both poles at infinity")
        return Differential(RationalFunction(num, den), label=f"phi_w{pole_index+1}")

    w, m = cover.poles[pole_index]
    if kind == "I":
        if not (1 <= a <= m - 1):
            raise CurveError("type I requires 1 <= a <= m_i - 1")
        frac = Fraction(a, m)
        prefac = Fraction(1, a)
    elif kind == "II":
        if pole_index == 0 or pole_index >= cover.d:
            raise CurveError("type II needs a pole other than the first")
        frac = Fraction(1)
        a = m
        prefac = Fraction(1)
    else:
        raise CurveError(f"unknown primary differential type {kind!r}")

    depth = a + 3
    if w == INF:
        fx = cover.x.expand_at_infinity(depth)
    else:
        fx = cover.x.expand_at(w, depth)
    # fx has a pole of order m; take the a/m fractional power
    fpow = _fractional_power(fx, frac, m, b)
    # residue against B(q,p) in the local parameter s at the pole
    if w == INF:
        # B(q,p) = -(sum (k+1) p^k s^k) ds dp
        out_poly = [b.zero()] * (a)
        for kk in range(0, a):
            c = fpow.coeff(-1 - kk)
            out_poly[kk] = -(c * (kk + 1))
        num = Poly(out_poly, b).scale(b.from_fraction(prefac))
        return Differential(RationalFunction(num, Poly([b.one()], b)),
                            label=f"phi_{kind}_{pole_index+1}_{a}")
    # finite pole: B(q,p) = sum (k+1)(-1)^k s^k/(w-p)^(k+2) ds dp
    parts = {}
    for kk in range(0, a):
        c = fpow.coeff(-1 - kk)
        parts[kk + 2] = c * (kk + 1) * ((-1) ** (kk % 2)) * prefac
    # assemble sum_j parts[j] / (w - p)^j as a rational function
    maxj = max(parts)
    den = Poly([b.one()], b)
    lin = Poly([w, -b.one()], b)  # (w - p)
    for _ in range(maxj):
        den = den * lin
    num = Poly([], b)
    for j, cj in parts.items():
        piece = Poly([b.one()], b)
        for _ in range(maxj - j):
            piece = piece * lin
        num = num + piece.scale(cj)
    return Differential(RationalFunction(num, den),
                        label=f"phi_{kind}_{pole_index+1}_{a}")


def _fractional_power(fx: Series, frac: Fraction, m: int, backend) -> Series:
    """(c s^-m (1+u))^frac with principal-branch c^frac."""
    lo = fx.order()
    if lo != -m:
        raise CurveError("pole order mismatch in fractional power")
    c = fx.coeff(lo)
    if frac.denominator == 1:
        cpow = c ** frac.numerator
    elif frac.denominator == 2 and frac.numerator == 1:
        cpow = backend.sqrt(c)
    else:
        if backend.exact:
            raise BackendError(
                "fractional power of leading coefficient needs a bigfloat backend")
        with mp.workdps(backend.dps):
            cpow = backend.from_complex(
                mpmath.exp(mpmath.log(c.value) * mpmath.mpf(frac.numerator)
                           / frac.denominator))
    inv_c = 1 / c if not hasattr(c, "inverse") else c.inverse()
    u = Series(fx.var, {k - lo: v * inv_c for k, v in fx.items() if k != lo},
               trunc=None if fx.trunc is None else fx.trunc - lo,
               e=1, backend=backend)
    # (1+u)^frac via binomial series
    depth = int(u.trunc) if u.trunc is not None else 1
    acc = Series.one(fx.var, backend, trunc=u.trunc)
    term = Series.one(fx.var, backend, trunc=u.trunc)
    coeff = Fraction(1)
    for j in range(1, depth + 1):
        coeff *= (frac - (j - 1)) / j
        term = term * u
        if term.is_zero():
            break
        acc = acc + term * backend.from_fraction(coeff)
    return (acc * cpow).shift(lo * frac)


# ---------------------------------------------------------------------------
# Cover specification


def cover_from_spec(spec: dict, backend: Backend, chart_order: int = 16) -> BranchedCover:
    """Build a cover from a config record.

    Either {"family": "airy"|"case1"|"case2", "params": {...}} or
    {"coordinate": "rational", "numerator": [...], "denominator": [...]}.
    Family parameters may be given as [re, im] pairs or numbers.
    """
    if "family" in spec:
        from .rank2 import build_family  # cycle-free: rank2 imports lazily
        fam = spec["family"]
        params = spec.get("params", {})
        if fam == "airy":
            num = Poly([backend.zero(), backend.zero(),
                        backend.from_fraction(Fraction(1, 2))], backend)
            return BranchedCover(RationalFunction(num, Poly([backend.one()], backend)),
                                 poles=[(INF, 2)], chart_order=chart_order,
                                 label="airy")
        if fam in ("case1", "case2"):
            s1 = _param_scalar(params.get("s1", 1), backend)
            s2 = _param_scalar(params.get("s2", 0), backend)
            return build_family(1 if fam == "case1" else 2, s1, s2,
                                backend, chart_order=chart_order).cover
        raise CurveError(f"unknown family {spec['family']!r}")
    if spec.get("coordinate") != "rational":
        raise CurveError("cover spec needs 'family' or coordinate='rational'")
    num = Poly([_param_scalar(c, backend) for c in spec["numerator"]], backend)
    den = Poly([_param_scalar(c, backend) for c in spec.get("denominator", [1])], backend)
    return BranchedCover(RationalFunction(num, den), chart_order=chart_order,
                         label="rational")


def _param_scalar(v, backend: Backend):
    if isinstance(v, (list, tuple)):
        return backend.from_pair(Fraction(str(v[0])), Fraction(str(v[1])))
    return backend.from_fraction(Fraction(str(v)))
