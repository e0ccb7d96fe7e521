"""Chart-local residue recursion: P-data, correlator forms, ancestors.

Two consumers share the Puiseux residue machinery:

* a *form-level* engine producing multivalued correlator forms from
  P-data assembled either from a matrix series + scaling vector
  (:func:`p_data_from_r`) or from curve data (:func:`p_data_from_curve`);
  the two constructions agreeing is the main equivalence check;

* a *correlator-level* engine producing ancestor invariants of a
  semi-simple structure from (R, Psi, eta, u, E) data.

Normalization used throughout: the period expansions are stored reduced
by a global factor sqrt(2),

    Itilde^(-n)_i = sum_k (-1)^k Psi R_k e_i c(k+n) (lam - u_i)^(k+n-1/2),

with c(m) = sqrt(pi)/Gamma(m+1/2) exact-rational for every integer m.
Kernel ratios are invariant under the reduction; the one place the factor
matters quadratically (the unstable two-point term) keeps its published
1/2 prefactor against reduced periods times an overall bracket factor 2,
which is absorbed into the step constant: step = 1/2 res[ratio * bracket].
This convention is pinned by the N = 1 checks <tau_0^3> = 1 and
<tau_1> = 1/24.
"""

from __future__ import annotations

from fractions import Fraction

from .curve import BranchedCover, CurveError, Differential, vc_integral_scaled
from .matrixseries import MatrixSeries
from .rmatrix import RData, r_sigma_from_bergman, v_matrices_frob
from .series import Series, double_factorial, gamma_half_ratio

__all__ = [
    "PData",
    "p_data_from_curve",
    "p_data_from_r",
    "LocalForm",
    "LocalEngine",
    "AncestorEngine",
    "period_series",
    "compare_frob_eo",
]


def _cc(m: int) -> Fraction:
    return gamma_half_ratio(m)


def period_series(r: MatrixSeries, psi, i: int, n: int, order: int,
                  lam_var: str = "lam"):
    """Reduced period expansion as a list of (exponent, vector) pairs.

    Exponents are k+n-1/2 for k < order; vectors are columns
    (-1)^k c(k+n) Psi R_k e_i in the flat basis.
    """
    N = r.n
    out = []
    for k in range(min(order, r.order)):
        col = [r.coeffs[k][a][i] for a in range(N)]
        vec = _mat_vec(psi, col)
        w = _cc(k + n) * (-1) ** (k % 2)
        out.append((Fraction(k + n) - Fraction(1, 2),
                    [v * w for v in vec]))
    return out


def _mat_vec(m, v):
    return [sum_scalars(m[a][b] * v[b] for b in range(len(v))) for a in range(len(m))]


def sum_scalars(it):
    total = None
    for x in it:
        total = x if total is None else total + x
    return total


# ---------------------------------------------------------------------------
# P-data


class PData:
    """Local recursion data: per-chart series P^j and regular grids P^{ij}.

    ``grids[(i,j)][(k,l)]`` is the coefficient of
    (lam1-u_i)^(k-1/2) (lam2-u_j)^(l-1/2); the universal singular part on
    the diagonal is implied, never stored.  ``pj[j][k]`` is the
    coefficient of (lam-u_j)^(k+1/2).
    """

    def __init__(self, n, u, grids, pj, backend, kmax, label=""):
        self.n = n
        self.u = u
        self.grids = grids
        self.pj = pj
        self.backend = backend
        self.kmax = kmax
        self.label = label

    def grid_coeff(self, i, j, k, l):
        return self.grids.get((i, j), {}).get((k, l), self.backend.zero())

    def pj_series(self, j, depth) -> Series:
        data = {}
        for k, v in self.pj[j].items():
            data[Fraction(k) + Fraction(1, 2)] = v
        return Series("lam", data, trunc=Fraction(self.kmax) + Fraction(3, 2),
                      e=2, backend=self.backend)

    def diag_series(self, i, depth) -> Series:
        """omega_{0,2}^{b_i, b_i}(lam, lam): (1/4)(lam-u)^-2 + regular."""
        data = {-2: self.backend.from_fraction(Fraction(1, 4))}
        for (k, l), v in self.grids.get((i, i), {}).items():
            e = k + l - 1
            data[e] = data.get(e, self.backend.zero()) + v
        return Series("lam", data, trunc=self.kmax, e=1, backend=self.backend)

    def offdiag_series(self, i, j, depth):
        """omega_{0,2}^{b_i, a_j}(lam, lam_j): list of (spectator exponent,
        Series in (lam - u_i)), including the universal singular part when
        the spectator chart is i itself.  Each spectator exponent l - 1/2
        carries its honest truncation (kmax - l) + 1/2 on the triangular
        grid."""
        out = {}
        truncs = {}
        for (k, l), v in self.grids.get((i, j), {}).items():
            e_spec = Fraction(l) - Fraction(1, 2)
            ser = out.setdefault(e_spec, {})
            e = Fraction(k) - Fraction(1, 2)
            ser[e] = ser.get(e, self.backend.zero()) + v
            truncs[e_spec] = Fraction(self.kmax - l) + Fraction(1, 2)
        for l in range(self.kmax + 1):
            e_spec = Fraction(l) - Fraction(1, 2)
            truncs.setdefault(e_spec, Fraction(self.kmax - l) + Fraction(1, 2))
            out.setdefault(e_spec, {})
        if i == j:
            one = self.backend.one()
            for m in range(depth + 2):
                c = one * (m + 1)
                for (e_lam, e_spec) in (
                        (Fraction(m) + Fraction(1, 2), -Fraction(m) - Fraction(5, 2)),
                        (Fraction(m) - Fraction(1, 2), -Fraction(m) - Fraction(3, 2))):
                    ser = out.setdefault(e_spec, {})
                    ser[e_lam] = ser.get(e_lam, self.backend.zero()) + c
                    cur = truncs.get(e_spec)
                    cap = Fraction(depth) + Fraction(1, 2)
                    truncs[e_spec] = cap if cur is None else min(cur, cap)
        return [(e_spec, Series("lam", d, trunc=truncs[e_spec], e=2,
                                backend=self.backend))
                for e_spec, d in sorted(out.items())]

    def kernel_numerator(self, i0, i, depth):
        """A^{i0,i}(lam0, lam) = (1/2) contour integral of P^{i0,i}(lam0, mu):
        the mu-antiderivative.  Returns list of (lam0 exponent, Series in
        (lam - u_i))."""
        out = {}
        truncs = {}
        for (k, l), v in self.grids.get((i0, i), {}).items():
            e0 = Fraction(k) - Fraction(1, 2)
            e = Fraction(l) + Fraction(1, 2)
            ser = out.setdefault(e0, {})
            ser[e] = ser.get(e, self.backend.zero()) + v / e
        for k in range(self.kmax + 1):
            e0 = Fraction(k) - Fraction(1, 2)
            out.setdefault(e0, {})
            truncs[e0] = Fraction(self.kmax - k) + Fraction(3, 2)
        if i0 == i:
            one = self.backend.one()
            for m in range(depth + 2):
                c = one * (m + 1)
                for (e0, e_pre) in (
                        (-Fraction(m) - Fraction(3, 2), Fraction(m) - Fraction(1, 2)),
                        (-Fraction(m) - Fraction(5, 2), Fraction(m) + Fraction(1, 2))):
                    e = e_pre + 1
                    ser = out.setdefault(e0, {})
                    ser[e] = ser.get(e, self.backend.zero()) + c / e
                    cap = Fraction(depth) + Fraction(3, 2)
                    cur = truncs.get(e0)
                    truncs[e0] = cap if cur is None else min(cur, cap)
        return [(e0, Series("lam", d, trunc=truncs[e0], e=2,
                            backend=self.backend))
                for e0, d in sorted(out.items())]


def p_data_from_curve(cover: BranchedCover, phi: Differential, kmax: int,
                      label="curve") -> PData:
    """P-data of the residue recursion satisfied by cycle pullbacks.

    P^{ij}_{kl} = 2^(k+l+1) B^{ij}_{2k,2l};  P^j = 4 * cycle integral of phi.
    """
    b = cover.backend
    berg = cover.bergman(kmax)
    grids = {}
    for i in range(cover.N):
        for j in range(cover.N):
            g = {}
            for k in range(kmax + 1):
                for l in range(kmax + 1 - k):
                    v = berg.coeff(i, j, 2 * k, 2 * l)
                    if bool(v):
                        g[(k, l)] = v * Fraction(2 ** (k + l + 1))
            grids[(i, j)] = g
    r2 = b.sqrt(b.from_fraction(2))
    pj = {}
    for j in range(cover.N):
        h = phi.expand_in_chart(cover, j, 2 * kmax + 4)
        scaled = vc_integral_scaled(h)
        d = {}
        for e, v in scaled.items():
            k = e - Fraction(1, 2)
            if k.denominator == 1 and 0 <= int(k) <= kmax:
                d[int(k)] = v * r2 * 4
        pj[j] = d
    return PData(cover.N, list(cover.crit_values), grids, pj, b, kmax, label)


def p_data_from_r(r: RData | MatrixSeries, c0, u, kmax: int,
                  label="rmatrix") -> PData:
    """P-data from a symplectic matrix series and the scaling vector c(u,0).

    P^{ij}_{kl} = 2^(k+l+1) V^{ij}_{kl} / ((2k-1)!!(2l-1)!!)  and
    P^j(lam) = sum_k 4 sqrt(2) (-1)^(k+1) c(k+1) (c0^T R_k)_j (lam-u_j)^(k+1/2).
    """
    series = r.series if isinstance(r, RData) else r
    N = series.n
    b = None
    for x in c0:
        from .scalars import backend_of
        b = backend_of(x)
        break
    v = v_matrices_frob(series)
    grids = {}
    for i in range(N):
        for j in range(N):
            g = {}
            for (k, l), mat in v.items():
                if k + l > kmax:
                    continue
                val = mat[i][j]
                if bool(val):
                    w = Fraction(2 ** (k + l + 1),
                                 double_factorial(2 * k - 1) * double_factorial(2 * l - 1))
                    g[(k, l)] = val * w
            grids[(i, j)] = g
    r2 = b.sqrt(b.from_fraction(2))
    pj = {}
    for j in range(N):
        d = {}
        for k in range(min(series.order, kmax + 1)):
            acc = sum_scalars(c0[a] * series.coeffs[k][a][j] for a in range(N))
            w = _cc(k + 1) * (-1) ** ((k + 1) % 2) * 4
            val = acc * w * r2
            if bool(val):
                d[k] = val
        pj[j] = d
    return PData(N, list(u), grids, pj, b, kmax, label)


# ---------------------------------------------------------------------------
# Form-level engine


class LocalForm:
    """Multivalued correlator form: {charts: {exponents: coeff}}.

    Exponents are Fractions in the half-odd lattice, one per slot.
    """

    __slots__ = ("n", "data")

    def __init__(self, n):
        self.n = n
        self.data = {}

    def add(self, charts, exps, value):
        if not bool(value):
            return
        slot = self.data.setdefault(charts, {})
        cur = slot.get(exps)
        if cur is None:
            slot[exps] = value
        else:
            s = cur + value
            if bool(s):
                slot[exps] = s
            else:
                del slot[exps]

    def window_dev(self, other: "LocalForm", per_slot: int = 4) -> float:
        """Max coefficient deviation over the first ``per_slot`` exponents
        of each slot (union of both forms' supports)."""
        dev = 0.0
        charts = set(self.data) | set(other.data)
        for ch in charts:
            a = self.data.get(ch, {})
            bdat = other.data.get(ch, {})
            floors = []
            n = self.n
            for s in range(n):
                es = [e[s] for e in a] + [e[s] for e in bdat]
                floors.append(min(es) if es else Fraction(0))
            keys = set(a) | set(bdat)
            for e in keys:
                if any(e[s] >= floors[s] + per_slot for s in range(n)):
                    continue
                x = a.get(e)
                y = bdat.get(e)
                if x is None:
                    dev = max(dev, abs(y))
                elif y is None:
                    dev = max(dev, abs(x))
                else:
                    dev = max(dev, abs(x - y))
        return dev


class LocalEngine:
    """Form-level local recursion on fixed P-data.

    Output forms are complete per slot through the exponent window
    W0 = kmax - 5/2; residues affecting only exponents beyond W0 are
    dropped, anything undetermined inside the window raises.  The
    window is validated operationally by the stability-under-refinement
    property: doubling kmax must not change windowed coefficients.
    """

    def __init__(self, pdata: PData, depth: int = 10, floor=Fraction(-9, 2)):
        self.p = pdata
        self.depth = depth
        self.backend = pdata.backend
        self.window = Fraction(pdata.kmax) - Fraction(5, 2)
        # slot exponents below the floor vanish identically for the
        # supported (g, n) budget (pole orders at ramification points are
        # bounded); keeping the lattice finite on both ends bounds work
        self.FLOOR = Fraction(floor)
        self._forms = {}
        self._factor_cache = {}
        self._pj_inv = {}
        for i in range(pdata.n):
            ser = pdata.pj_series(i, depth + 4)
            if ser.is_zero() or ser.order() != Fraction(1, 2):
                raise CurveError(
                    f"non-semisimple direction: P^{i+1} has vanishing leading term")
            self._pj_inv[i] = ser.inverse()
        self._kernels = {}
        self._offdiag = {}
        self._diag = {}
        for i in range(pdata.n):
            self._diag[i] = pdata.diag_series(i, depth + 4)
            for j in range(pdata.n):
                self._kernels[(j, i)] = [
                    (e0, s) for e0, s in pdata.kernel_numerator(j, i, depth + 4)
                    if e0 >= self.FLOOR]
                self._offdiag[(i, j)] = [
                    (e, s) for e, s in pdata.offdiag_series(i, j, depth + 4)
                    if e >= self.FLOOR]

    def correlator(self, g: int, n: int) -> LocalForm:
        if 2 * g - 2 + n <= 0:
            raise CurveError("unstable correlator forms are not stored")
        key = (g, n)
        if key in self._forms:
            return self._forms[key]
        out = self._step(g, n - 1)
        self._forms[key] = out
        return out

    def _bracket(self, g, n, i):
        """T_i(lam; spectators): dict (charts, exps) -> Series in (lam-u_i)."""
        out = {}

        def add(charts, exps, series):
            key = (charts, exps)
            cur = out.get(key)
            out[key] = series if cur is None else cur + series

        if g >= 1:
            if g - 1 == 0 and n == 0:
                add((), (), -self._diag[i])
            elif 2 * (g - 1) - 2 + (n + 2) > 0:
                low = self.correlator(g - 1, n + 2)
                # completeness of the diagonal evaluation: stored slots are
                # complete through the window, so pair sums are complete
                # through window + (lowest partner exponent present)
                lowmin = None
                for charts, slots in low.data.items():
                    if charts[0] != i or charts[1] != i:
                        continue
                    for exps in slots:
                        m = min(exps[0], exps[1])
                        lowmin = m if lowmin is None else min(lowmin, m)
                if lowmin is None:
                    pass
                else:
                    pair_trunc = self.window + lowmin + 1
                    collected = {}
                    for charts, slots in low.data.items():
                        if charts[0] != i or charts[1] != i:
                            continue
                        for exps, val in slots.items():
                            e = exps[0] + exps[1]
                            if e >= pair_trunc:
                                continue
                            key = (charts[2:], exps[2:])
                            d = collected.setdefault(key, {})
                            d[e] = d.get(e, self.backend.zero()) - val
                    for (charts, exps), d in collected.items():
                        add(charts, exps, Series("lam", d, e=2, trunc=pair_trunc,
                                                 backend=self.backend))
        for mask in range(1 << n):
            s_idx = [a for a in range(n) if mask >> a & 1]
            c_idx = [a for a in range(n) if not mask >> a & 1]
            for g1 in range(g + 1):
                g2 = g - g1
                if (g1 == 0 and not s_idx) or (g2 == 0 and not c_idx):
                    continue
                t1 = self._form_factor(g1, len(s_idx), i, flipped=False)
                if t1 is None:
                    continue
                t2 = self._form_factor(g2, len(c_idx), i, flipped=True)
                if t2 is None:
                    continue
                for (ch1, ex1, s1) in t1:
                    for (ch2, ex2, s2) in t2:
                        charts = [None] * n
                        exps = [None] * n
                        for a, c, e in zip(s_idx, ch1, ex1):
                            charts[a], exps[a] = c, e
                        for a, c, e in zip(c_idx, ch2, ex2):
                            charts[a], exps[a] = c, e
                        add(tuple(charts), tuple(exps), s1 * s2)
        return out

    def _form_factor(self, g, ns, i, flipped):
        """omega^{(+-)b_i, ...}(lam, ns spectators): list of
        (spectator charts, spectator exps, Series in (lam-u_i));
        flipped applies the (-b_i) branch (global minus).  Memoized: the
        result depends only on (g, ns, i, flipped)."""
        mkey = (g, ns, i, flipped)
        if mkey in self._factor_cache:
            return self._factor_cache[mkey]
        out = self._form_factor_build(g, ns, i, flipped)
        self._factor_cache[mkey] = out
        return out

    def _form_factor_build(self, g, ns, i, flipped):
        sign = -1 if flipped else 1
        if g == 0 and ns == 0:
            return None
        if g == 0 and ns == 1:
            terms = []
            for j in range(self.p.n):
                for e_spec, ser in self._offdiag[(i, j)]:
                    terms.append(((j,), (e_spec,), ser * sign))
            return terms
        if 2 * g - 2 + (ns + 1) <= 0:
            return None
        form = self.correlator(g, ns + 1)
        collected = {}
        for charts, slots in form.data.items():
            if charts[0] != i:
                continue
            for exps, val in slots.items():
                key = (charts[1:], exps[1:])
                d = collected.setdefault(key, {})
                d[exps[0]] = d.get(exps[0], self.backend.zero()) + val * sign
        outs = []
        for (charts, exps), d in collected.items():
            outs.append((charts, exps,
                         Series("lam", d, e=2, trunc=self.window,
                                backend=self.backend)))
        return outs

    def _step(self, g, n) -> LocalForm:
        out = LocalForm(n + 1)
        for i in range(self.p.n):
            brackets = self._bracket(g, n, i)
            inv = self._pj_inv[i]
            for (charts, exps), series in brackets.items():
                integrand = series * inv
                beyond = any(e > self.window for e in exps)
                for i0 in range(self.p.n):
                    for e0, aser in self._kernels[(i0, i)]:
                        val = aser.mul_residue(integrand)
                        if val is None:
                            if e0 > self.window or beyond:
                                continue
                            raise CurveError(
                                "local recursion window undetermined at "
                                f"exponent {e0}; increase kmax/depth")
                        if bool(val):
                            out.add((i0,) + charts, (e0,) + exps, val)
        return out


# ---------------------------------------------------------------------------
# Correlator-level engine (ancestors)


class AncestorEngine:
    """Ancestor correlators of a semi-simple structure at a point.

    Data: numeric symplectic ``r`` (MatrixSeries), ``psi`` with
    Psi^T eta Psi = 1, Gram matrix ``eta``, canonical values ``u``,
    Euler multiplication ``e_matrix`` in the flat basis.  Correlators are
    keyed by tuples of (k, a) with a a 0-based flat index.
    """

    def __init__(self, r: MatrixSeries, psi, eta, u, e_matrix, backend):
        self.r = r
        self.psi = psi
        self.eta = eta
        self.u = u
        self.em = e_matrix
        self.backend = backend
        self.N = r.n
        self.jmax = r.order
        self._cache = {}
        # v[k][i] = (-1)^k Psi R_k e_i
        self.v = []
        for k in range(r.order):
            cols = []
            for i in range(self.N):
                col = [r.coeffs[k][a][i] for a in range(self.N)]
                vec = _mat_vec(psi, col)
                if k % 2:
                    vec = [-x for x in vec]
                cols.append(vec)
            self.v.append(cols)
        self._den_inv = {}
        for i in range(self.N):
            den = self._pair_series(i, 1, self._unit_pairing)
            if den.is_zero() or den.order() != Fraction(1, 2):
                raise CurveError("non-semisimple direction: vanishing denominator")
            self._den_inv[i] = den.inverse()

    # pairing helpers ------------------------------------------------------

    def _unit_pairing(self, vec):
        """(vec, 1): pairing against the unit field's flat coordinates."""
        return self._eta_pair(vec, self.unit)

    def _eta_pair(self, v, w):
        total = None
        for a in range(self.N):
            for b in range(self.N):
                t = v[a] * self.eta[a][b] * w[b]
                total = t if total is None else total + t
        return total

    @property
    def unit(self):
        if not hasattr(self, "_unit"):
            one = self.backend.one()
            zero = self.backend.zero()
            self._unit = [zero] * (self.N - 1) + [one]
        return self._unit

    def set_unit(self, coords):
        self._unit = list(coords)

    def _pair_series(self, i, n, pairing) -> Series:
        """(Itilde^(-n)_i, .) as a scalar Puiseux series."""
        data = {}
        for k in range(self.jmax):
            w = _cc(k + n)
            val = pairing(self.v[k][i]) * w
            if bool(val):
                data[Fraction(k + n) - Fraction(1, 2)] = val
        return Series("lam", data, e=2,
                      trunc=Fraction(self.jmax + n) - Fraction(1, 2),
                      backend=self.backend)

    def _ratio(self, k, a, i) -> Series:
        """(Itilde^(-k-1), phi_a)/(Itilde^(-1), 1): integer exponents."""
        ea = [self.backend.zero()] * self.N
        ea[a] = self.backend.one()
        num = self._pair_series(i, k + 1, lambda vec: self._eta_pair(vec, ea))
        return num * self._den_inv[i]

    def _plus_coord(self, i, n, b) -> Series:
        """Coordinate b of the psibar^n insertion series of phi^+.

        (-1)^(n+1) Itilde^(n+1)_i: exponents j - n - 3/2.  The global sign
        makes the leading weight (2n+1)!!/2^(n+1) positive; together with
        the unsigned two-point value below this is the unique convention
        reproducing the string/dilaton ladder at the trivial point.
        """
        data = {}
        sign = (-1) ** ((n + 1) % 2)
        for j in range(self.jmax):
            w = _cc(j - n - 1) * sign
            val = self.v[j][i][b] * w
            if bool(val):
                data[Fraction(j - n - 1) - Fraction(1, 2)] = val
        return Series("lam", data, e=2,
                      trunc=Fraction(self.jmax - n - 1) - Fraction(1, 2),
                      backend=self.backend)

    def _unstable02(self, i) -> Series:
        """((lam - E)Itilde^(1), Itilde^(1)) at chart i, times 1/2."""
        # (lam - E) acts as (u_i - E) + lam' on vector coefficients
        vecs = []
        for j in range(self.jmax):
            w = _cc(j - 1)
            vecs.append((Fraction(j - 1) - Fraction(1, 2),
                         [x * w for x in self.v[j][i]]))
        shifted = {}
        for e, vec in vecs:
            im = _mat_vec(self.em, vec)
            base = [self.u[i] * x - y for x, y in zip(vec, im)]
            shifted.setdefault(e, [self.backend.zero()] * self.N)
            shifted[e] = [p + q for p, q in zip(shifted[e], base)]
            shifted.setdefault(e + 1, [self.backend.zero()] * self.N)
            shifted[e + 1] = [p + q for p, q in zip(shifted[e + 1], vec)]
        data = {}
        for e1, v1 in shifted.items():
            for e2, vec2 in vecs:
                val = self._eta_pair(v1, vec2)
                if bool(val):
                    e = e1 + e2
                    data[e] = data.get(e, self.backend.zero()) + val
        out = Series("lam", data, e=2,
                     trunc=Fraction(self.jmax - 3), backend=self.backend)
        return out * Fraction(1, 2)

    def _unstable02_fixed(self, i, k, a) -> Series:
        """<phi^+, phi_a psibar^k>_{0,2} = (Itilde^(-k), phi_a) series."""
        ea = [self.backend.zero()] * self.N
        ea[a] = self.backend.one()
        return self._pair_series(i, k, lambda vec: self._eta_pair(vec, ea))

    # the recursion --------------------------------------------------------

    def correlator(self, g: int, insertions) -> object:
        """<prod phi_{a_j} psibar^{k_j}>_g, insertions a tuple of (k, a)."""
        ins = tuple(sorted(insertions))
        n = len(ins)
        if 2 * g - 2 + n <= 0:
            return self.backend.zero()
        key = (g, ins)
        if key in self._cache:
            return self._cache[key]
        k0, a0 = ins[0]
        rest = ins[1:]
        total = self.backend.zero()
        for i in range(self.N):
            ratio = self._ratio(k0, a0, i)
            bracket = self._bracket(g, rest, i, depth_hint=k0 + self.jmax)
            if bracket.is_zero():
                continue
            val = ratio.mul_residue(bracket)
            if val is None:
                raise CurveError(
                    "ancestor recursion under-determined; increase the "
                    "matrix series order")
            total = total + val * Fraction(1, 2)
        self._cache[key] = total
        return total

    def _bracket(self, g, rest, i, depth_hint) -> Series:
        n = len(rest)
        zero = Series.zero("lam", self.backend, e=2,
                           trunc=Fraction(self.jmax - 3))
        total = zero
        nmax = depth_hint + 3
        if g >= 1:
            if g - 1 == 0 and n == 0:
                total = total + self._unstable02(i)
            elif 2 * (g - 1) - 2 + (n + 2) > 0:
                for n1 in range(nmax + 1):
                    s1 = None
                    for m1 in range(nmax + 1 - n1):
                        inner = self._pair_insertions(g - 1, (n1, m1), rest, i)
                        if inner is None:
                            continue
                        if s1 is None:
                            s1 = self._plus_series_cache(i, n1)
                        s2 = self._plus_series_cache(i, m1)
                        for (a, b_), val in inner.items():
                            if bool(val):
                                total = total + (s1[a] * s2[b_]) * val
        for mask in range(1 << n):
            s_idx = tuple(a for a in range(n) if mask >> a & 1)
            c_idx = tuple(a for a in range(n) if not mask >> a & 1)
            for g1 in range(g + 1):
                g2 = g - g1
                if (g1 == 0 and not s_idx) or (g2 == 0 and not c_idx):
                    continue
                f1 = self._plus_factor(g1, tuple(rest[a] for a in s_idx), i, nmax)
                if f1 is None:
                    continue
                f2 = self._plus_factor(g2, tuple(rest[a] for a in c_idx), i, nmax)
                if f2 is None:
                    continue
                total = total + f1 * f2
        return total

    def _plus_series_cache(self, i, n):
        cache = self._cache.setdefault("plus", {})
        out = cache.get((i, n))
        if out is None:
            out = [self._plus_coord(i, n, b) for b in range(self.N)]
            cache[(i, n)] = out
        return out

    def _pair_insertions(self, g, powers, rest, i):
        """<phi_a psibar^{n1}, phi_b psibar^{m1}, rest>_g summed over a, b
        -- returns the matrix-contracted coefficient multiplier or None."""
        n1, m1 = powers
        vals = {}
        any_nonzero = False
        for a in range(self.N):
            for b in range(self.N):
                v = self.correlator(g, ((n1, a), (m1, b)) + rest)
                if bool(v):
                    any_nonzero = True
                vals[(a, b)] = v
        if not any_nonzero:
            return None
        return vals

    def _plus_factor(self, g, sub, i, nmax):
        """<phi^+_{b_i}(lam), sub>_{g, len(sub)+1} as a scalar series."""
        ns = len(sub)
        if g == 0 and ns == 0:
            return None
        if g == 0 and ns == 1:
            k, a = sub[0]
            return self._unstable02_fixed(i, k, a)
        if 2 * g - 2 + ns + 1 <= 0:
            return None
        total = None
        for n1 in range(nmax + 1):
            coords = None
            for b in range(self.N):
                val = self.correlator(g, ((n1, b),) + sub)
                if not bool(val):
                    continue
                if coords is None:
                    coords = self._plus_series_cache(i, n1)
                t = coords[b] * val
                total = t if total is None else total + t
        if total is None:
            return Series.zero("lam", self.backend, e=2,
                               trunc=Fraction(self.jmax - 3))
        return total

# ---------------------------------------------------------------------------
# Comparison harness


def compare_frob_eo(cover: BranchedCover, phi: Differential, budget,
                    kmax: int = 7, depth: int = 8, per_slot: int = 4,
                    r_matrix=None, c0=None) -> dict:
    """Run the local recursion from both P-data constructions and report
    the maximal coefficient discrepancy per (g, n) in the budget.

    By default the matrix side uses R = R_sigma and c0 = c(phi), the
    volume-form-trivial case; pass ``r_matrix``/``c0`` to compare against
    a composed matrix (polynomial volume-form cases).
    """
    from .curve import c_vector
    eo_p = p_data_from_curve(cover, phi, kmax)
    if r_matrix is None:
        berg = cover.bergman(kmax + 1)
        r_matrix = r_sigma_from_bergman(berg, kmax + 2).series
    if c0 is None:
        c0 = c_vector(cover, phi)
    frob_p = p_data_from_r(r_matrix, c0, cover.crit_values, kmax)
    eng_eo = LocalEngine(eo_p, depth)
    eng_fr = LocalEngine(frob_p, depth)
    report = {}
    for (g, n) in budget:
        a = eng_eo.correlator(g, n)
        b = eng_fr.correlator(g, n)
        report[(g, n)] = a.window_dev(b, per_slot)
    return report
