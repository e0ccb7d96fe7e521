"""Configuration-driven command line front end.

Subcommands: curve-info, recursion, r-matrix, classify-2d, descendants,
compare, verify.  Configs are single declarative JSON documents; outputs
are json or csv tables, with optional matplotlib figures rendered next to
them via --figures.

Exit codes: 0 success, 2 config error, 3 verification failure,
4 degenerate input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .curve import CurveError, Differential, RationalFunction, Poly, beta_matrix, \
    cover_from_spec, good_basis_form, primary_differential, combine_differentials
from .report import Report
from .scalars import BackendError, parse_backend
from .series import SeriesError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VERIFY = 3
EXIT_DEGENERATE = 4


class ConfigError(ValueError):
    pass


def _load_config(path):
    if path is None:
        raise ConfigError("missing --config")
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e


def _get_backend(args, config):
    text = args.backend or config.get("backend", "bigfloat:60")
    return parse_backend(text)


def _cover(config, backend, chart_order=None):
    spec = config.get("cover")
    if spec is None:
        raise ConfigError("config needs a 'cover' record")
    order = chart_order or int(config.get("chart_order", 20))
    return cover_from_spec(spec, backend, chart_order=order)


def _phi(config, cover, backend):
    spec = config.get("phi")
    if spec is None:
        raise ConfigError("config needs a 'phi' record")
    kind = spec.get("type")
    if kind == "primary":
        return primary_differential(cover, spec.get("class", "I"),
                                    int(spec.get("pole_index", 0)),
                                    int(spec.get("a", 1)))
    if kind == "minus_dy":
        num = Poly([_scalar(c, backend) for c in spec["y"]["numerator"]], backend)
        den = Poly([_scalar(c, backend) for c in
                    spec["y"].get("denominator", [1])], backend)
        y = RationalFunction(num, den)
        dy = y.derivative()
        return Differential(RationalFunction(dy.num.scale(-1), dy.den))
    if kind == "good_basis_combo":
        coeffs = [_scalar(c, backend) for c in spec["coefficients"]]
        gb = [good_basis_form(cover, i) for i in range(len(coeffs))]
        return combine_differentials(coeffs, gb)
    if kind == "polynomial_primitive":
        raise ConfigError(
            "polynomial_primitive forms are driven through the 'recursion' "
            "command with generalized=true")
    raise ConfigError(f"unknown phi type {kind!r}")


def _scalar(v, backend):
    if isinstance(v, (list, tuple)):
        return backend.from_pair(Fraction(str(v[0])), Fraction(str(v[1])))
    return backend.from_fraction(Fraction(str(v)))


def _emit(report: Report, args):
    text = report.render(args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.figures:
        from . import figures
        figures.deviation_figure(report, args.figures)


def cmd_curve_info(args):
    config = _load_config(args.config)
    backend = _get_backend(args, config)
    cover = _cover(config, backend)
    rep = Report("curve-info", {"label": cover.label, "backend": backend.name})
    rep.add("degree", cover.degree, "curve.BranchedCover")
    rep.add("charts", cover.N, "curve.BranchedCover")
    for i, (p, u) in enumerate(zip(cover.ram_points, cover.crit_values)):
        rep.add(f"p_{i+1}", p, "curve.ramification")
        rep.add(f"u_{i+1}", u, "curve.ramification")
        rep.add(f"chart_{i+1} leading coefficient", cover.chart(i).lead,
                "curve.MorseChart")
    cutoff = int(config.get("bergman_cutoff", 3))
    berg = cover.bergman(cutoff)
    bm = beta_matrix(berg)
    for i in range(cover.N):
        for j in range(cover.N):
            if i != j:
                rep.add(f"beta_{i+1}{j+1}", bm[i][j], "curve.beta_matrix")
    for m in range(cutoff + 1):
        for n in range(cutoff + 1 - m):
            for i in range(cover.N):
                for j in range(cover.N):
                    v = berg.coeff(i, j, m, n)
                    if bool(v):
                        rep.add(f"B[{m},{n}]^{i+1}{j+1}", v,
                                "curve.BergmanExpansion")
    _emit(rep, args)
    if args.figures:
        from . import figures
        figures.curve_figure(cover, args.figures)
    return EXIT_OK


def cmd_recursion(args):
    config = _load_config(args.config)
    backend = _get_backend(args, config)
    from .recursion import EOEngine, cycle_pullback
    budget = [tuple(gn) for gn in config.get("budget", [[0, 3], [1, 1]])]
    for g, n in budget:
        if g > 3 or n > 5:
            raise ConfigError("budget exceeds the documented caps g<=3, n<=5")
    series_order = int(config.get("series_order", 24))
    phi_spec = config.get("phi", {})
    if phi_spec.get("type") == "polynomial_primitive":
        # z-graded volume form of a rank-2 family plus its finite
        # bi-differential corrections
        from .rank2 import build_family, scaling_data_cover
        from .recursion import v_from_r_omega
        fam_spec = config.get("cover", {})
        case = 1 if fam_spec.get("family", phi_spec.get("family")) == "case1" else 2
        params = fam_spec.get("params", {})
        fam = build_family(case, _scalar(params.get("s1", -1 if case == 1 else 1),
                                         backend),
                           _scalar(params.get("s2", 0), backend), backend,
                           chart_order=int(config.get("chart_order", 30)))
        cover = fam.cover
        r = Fraction(str(phi_spec["r"]))
        r_omega, c0 = scaling_data_cover(fam, r, series_order // 4 + 3)
        from .rmatrix import polynomiality_degree
        deg = polynomiality_degree(r_omega)
        if deg is None:
            from .rmatrix import rank2_polynomial_degree
            if rank2_polynomial_degree(case, r) is None:
                raise ConfigError(
                    f"r = {r} does not give a polynomial volume form")
        v = v_from_r_omega(r_omega)
        parts = [combine_differentials(c0, [good_basis_form(cover, i)
                                            for i in range(cover.N)])]
        k = 1
        while True:
            coeffs = []
            any_nonzero = False
            for i in range(cover.N):
                acc = backend.zero()
                for j in range(cover.N):
                    acc = acc + r_omega.series.coeffs[k][i][j] * c0[j]
                if bool(acc):
                    any_nonzero = True
                coeffs.append(acc * (-1) ** (k % 2))
            if not any_nonzero:
                break
            parts.append(combine_differentials(
                coeffs, [good_basis_form(cover, i) for i in range(cover.N)]))
            k += 1
        eng = EOEngine(cover, omega_parts=parts, v_corrections=v,
                       series_order=series_order)
    else:
        cover = _cover(config, backend)
        phi = _phi(config, cover, backend)
        eng = EOEngine(cover, phi=phi, series_order=series_order)
    rep = Report("recursion", {"label": cover.label, "backend": backend.name})
    for (g, n) in budget:
        form = eng.correlator(g, n)
        for prof, val in sorted(form.data.items(), key=repr):
            label = " ".join(f"{k[0]}{k[1]+1}^{k[2]}" for k in prof)
            rep.add(f"omega[{g},{n}] {label}", val, "recursion.EOEngine")
    pulls = config.get("pullbacks", [])
    for entry in pulls:
        g, n = entry["gn"]
        charts = tuple(entry["charts"])
        form = eng.correlator(g, n)
        pb = cycle_pullback(eng, form, charts,
                            order=int(entry.get("order", 5)))
        for exps, val in sorted(pb.items()):
            lab = ",".join(str(e) for e in exps)
            rep.add(f"pullback[{g},{n}]@{charts} exps ({lab})", val,
                    "recursion.cycle_pullback")
    _emit(rep, args)
    return EXIT_OK


def cmd_r_matrix(args):
    config = _load_config(args.config)
    backend = _get_backend(args, config)
    cover = _cover(config, backend)
    from .rmatrix import r_sigma_from_bergman, check_symplectic
    order = int(config.get("z_order", 6))
    berg = cover.bergman(max(order - 1, 1))
    rs = r_sigma_from_bergman(berg, order)
    rep = Report("r-matrix", {"label": cover.label, "backend": backend.name})
    for k in range(rs.series.order):
        for i in range(cover.N):
            for j in range(cover.N):
                v = rs.series.coeffs[k][i][j]
                if bool(v):
                    rep.add(f"R_{k}[{i+1},{j+1}]", v, "rmatrix.r_sigma_from_bergman")
    rep.add("symplectic defect", check_symplectic(rs.series, order - 1),
            "rmatrix.check_symplectic", 1e-25,
            "pass" if check_symplectic(rs.series, order - 1) < 1e-25 else "fail")
    _emit(rep, args)
    return EXIT_OK if rep.passed() else EXIT_VERIFY


def cmd_classify_2d(args):
    config = _load_config(args.config) if args.config else {}
    from .rmatrix import classify_dimensions
    case = int(config.get("case", 1))
    n_lo, n_hi = config.get("n_range", [-3, 4])
    table = classify_dimensions(case, range(int(n_lo), int(n_hi) + 1))
    rep = Report("classify-2d", {"case": case})
    for row in table:
        rep.add(f"n={row['n']} D={row['D']}",
                row["degree"] if row["degree"] is not None else "none",
                "rmatrix.classify_dimensions", None,
                "pass" if row["polynomial"] else "fail")
    _emit(rep, args)
    if args.figures:
        from . import figures
        figures.classification_figure(table, case, args.figures)
    return EXIT_OK


def cmd_descendants(args):
    config = _load_config(args.config)
    backend = _get_backend(args, config)
    if backend.exact:
        raise ConfigError("descendants need a bigfloat backend")
    from .rank2 import build_family, frobenius_frame
    from .rmatrix import r_sigma_from_bergman
    from .localrec import AncestorEngine
    from .descend import levelt_solution, symplectic_gauge, descendant_stable, \
        descendant_01, descendant_02
    fam_cfg = config.get("cover", {})
    case = 1 if fam_cfg.get("family") == "case1" else 2
    params = fam_cfg.get("params", {})
    fam = build_family(case, _scalar(params.get("s1", -1 if case == 1 else 1),
                                     backend),
                       _scalar(params.get("s2", 0), backend), backend,
                       chart_order=int(config.get("chart_order", 30)))
    r_hom = Fraction(1, 3) if case == 1 else Fraction(0)
    phi = _dx_like(backend, case)
    frame = frobenius_frame(fam, phi, r_hom)
    berg = fam.cover.bergman(int(config.get("bergman_cutoff", 6)))
    rs = r_sigma_from_bergman(berg, int(config.get("z_order", 8)))
    anc = AncestorEngine(rs.series, frame.psi, frame.eta, frame.u,
                         frame.e_matrix, backend)
    anc.set_unit(frame.unit)
    cal = symplectic_gauge(levelt_solution(
        frame.theta_eigs, frame.e_matrix, int(config.get("z_order", 8)) + 2,
        frame.eta, backend))
    rep = Report("descendants", {"case": case, "backend": backend.name})
    rep.add("gauge defect", cal.symplectic_defect(),
            "descend.symplectic_gauge", 1e-25)
    for req in config.get("requests", [{"g": 1, "insertions": [[1, 0]]}]):
        g = int(req["g"])
        ins = tuple((int(k), int(a)) for k, a in req["insertions"])
        if 2 * g - 2 + len(ins) > 0:
            val = descendant_stable(cal, anc, g, ins)
        elif (g, len(ins)) == (0, 2):
            (k, a), (l, b_) = ins
            val = descendant_02(cal, k, a, l, b_)
        elif (g, len(ins)) == (0, 1):
            val = descendant_01(cal, ins[0][0], ins[0][1], frame.unit)
        else:
            raise ConfigError("unsupported unstable request")
        rep.add(f"descendant g={g} {ins}", val, "descend.descendant_correlators")
    _emit(rep, args)
    return EXIT_OK


def _dx_like(backend, case):
    if case == 1:
        return Differential(RationalFunction(
            Poly.from_fractions([1], backend), Poly.from_fractions([1], backend)))
    return Differential(RationalFunction(
        Poly.from_fractions([1], backend), Poly.from_fractions([0, 1], backend)))


def cmd_compare(args):
    config = _load_config(args.config)
    backend = _get_backend(args, config)
    if backend.exact:
        raise ConfigError("compare needs a bigfloat backend")
    cover = _cover(config, backend, chart_order=int(config.get("chart_order", 36)))
    phi = _phi(config, cover, backend)
    from .localrec import compare_frob_eo
    budget = [tuple(gn) for gn in config.get("budget", [[0, 3], [1, 1]])]
    tol = float(config.get("tolerance", 1e-20))
    rep = Report("compare", {"label": cover.label, "backend": backend.name})
    results = compare_frob_eo(cover, phi, budget,
                              kmax=int(config.get("kmax", 6)),
                              depth=int(config.get("depth", 8)))
    for (g, n), dev in results.items():
        rep.add(f"({g},{n}) discrepancy", dev, "localrec.compare_frob_eo",
                tol, "pass" if dev < tol else "fail")
    _emit(rep, args)
    return EXIT_OK if rep.passed() else EXIT_VERIFY


def cmd_verify(args):
    config = _load_config(args.config) if args.config else {}
    from .verify import run_suite
    backend = _get_backend(args, config)
    dps = backend.dps if not backend.exact else 60
    selected = config.get("criteria")
    fault = config.get("fault")
    rep = run_suite(selected=selected, dps=dps, fault=fault, verbose=True)
    _emit(rep, args)
    return EXIT_OK if rep.passed() else EXIT_VERIFY


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="toprec",
        description="residue recursions on genus-0 covers with matrix-series "
                    "cross-checks")
    parser.add_argument("--config", help="path to a JSON config document")
    parser.add_argument("--backend", help="exact or bigfloat:<digits>")
    parser.add_argument("--out", help="write the table to this path")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--figures", help="directory for PNG companions")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("curve-info", "recursion", "r-matrix", "classify-2d",
                 "descendants", "compare", "verify"):
        sub.add_parser(name)
    args = parser.parse_args(argv)
    handlers = {
        "curve-info": cmd_curve_info,
        "recursion": cmd_recursion,
        "r-matrix": cmd_r_matrix,
        "classify-2d": cmd_classify_2d,
        "descendants": cmd_descendants,
        "compare": cmd_compare,
        "verify": cmd_verify,
    }
    try:
        return handlers[args.command](args)
    except (ConfigError, BackendError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (CurveError, SeriesError) as e:
        print(f"degenerate input: {e}", file=sys.stderr)
        return EXIT_DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
