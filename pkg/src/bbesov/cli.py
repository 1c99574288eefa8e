"""Command-line interface.

Subcommands: kernel (eval / norm-scan / bracket-scan), lattice, measure
(carleson / vanishing / berezin / averaging), toeplitz (matrix / spectrum /
schatten / intertwine / bounded), verify.  Reports are JSON, scan tables CSV;
identical arguments (including --seed) produce byte-identical output.

Exit codes: 0 success, 1 failed verification/audit, 2 invalid parameters.
"""

import argparse
import json
import sys

import numpy as np

from . import calculus as ca
from . import geometry as ge
from . import kernelcore as kc
from . import measures as me
from . import toeplitz as tp
from . import verify as vf
from .errors import ParameterError, TruncationError


def _vec(text):
    return np.array([float(v) for v in text.split(",")])


def _floats(text):
    return [float(v) for v in text.split(",")]


def _emit(args, text):
    if getattr(args, "output", None):
        with open(args.output, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _fmt(v):
    return repr(float(v))


def _json(obj):
    def default(o):
        if isinstance(o, np.ndarray):
            return o.tolist()
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.bool_):
            return bool(o)
        raise TypeError(type(o))

    return json.dumps(obj, indent=2, sort_keys=True, default=default)


def _load_measure(path):
    with open(path) as fh:
        return me.measure_from_json(fh.read())


# --------------------------------------------------------------------------


def cmd_kernel(args):
    if args.kernel_cmd == "eval":
        x = _vec(args.x)
        y = _vec(args.y)
        if float(x @ x) >= 1.0 or float(y @ y) >= 1.0:
            raise ParameterError("Eq. (1.1)",
                                 "points must lie in the open unit ball")
        kv = kc.kernel_eval(args.n, args.alpha, x, y, args.tol)
        _emit(args, _json({"value": kv.value,
                           "truncation_bound": kv.truncation_bound,
                           "terms_used": kv.terms_used}))
        return 0
    radii = _floats(args.radii)
    if args.kernel_cmd == "norm-scan":
        res = ca.kernel_norm_scan(args.alpha, args.p, args.beta, radii,
                                  n=args.n, level=args.level)
    else:
        res = ca.bracket_integral_scan(args.beta, args.s, radii,
                                       n=args.n, level=max(args.level, 256))
    lines = ["r,one_minus_r2,value"]
    for r, o, v in zip(res.radii, res.one_minus_r2, res.values):
        lines.append(f"{_fmt(r)},{_fmt(o)},{_fmt(v)}")
    lines.append(f"# slope={_fmt(res.slope)}"
                 f" predicted={_fmt(res.predicted_exponent)}"
                 f" max_min_ratio={_fmt(res.max_min_ratio)}")
    _emit(args, "\n".join(lines))
    return 0


def cmd_lattice(args):
    if not 0.0 < args.delta < 1.0:
        raise ParameterError("Lemma 2.5", "delta must lie in (0, 1)")
    if not 0.0 < args.horizon < 1.0:
        raise ParameterError("Lemma 2.5", "horizon must lie in (0, 1)")
    lat = ge.lattice_gen(args.n, args.delta, args.horizon)
    sep = ge.lattice_separation(lat)
    uncovered, mult = ge.lattice_coverage(lat, samples=10_000, seed=args.seed)
    _emit(args, ge.lattice_to_json(lat))
    if (sep < args.delta - 1e-12 or uncovered > 0
            or mult > lat.multiplicity_bound):
        print(f"audit failed: separation={sep} uncovered={uncovered} "
              f"multiplicity={mult}", file=sys.stderr)
        return 1
    return 0


def cmd_measure(args):
    mu = _load_measure(args.file)
    if args.measure_cmd in ("carleson", "vanishing"):
        lat = ge.lattice_gen(mu.n, args.delta, args.horizon)
    if args.measure_cmd == "carleson":
        rep = me.carleson_statistic(mu, args.lam, args.alpha, lat, args.level)
        _emit(args, rep.to_json())
    elif args.measure_cmd == "vanishing":
        prof = me.vanishing_profile(mu, args.lam, args.alpha, lat,
                                    level=args.level)
        _emit(args, _json({
            "lambda": prof.lam, "alpha": prof.alpha,
            "shell_edges": prof.shell_edges, "shell_max": prof.shell_max,
            "vanishing": prof.vanishing, "fitted_slope": prof.fitted_slope,
            "note": prof.note, "horizon": lat.rmax}))
    elif args.measure_cmd == "berezin":
        x = _vec(args.x)
        val = me.berezin2(mu, args.phi, args.alpha, x, args.tol, args.level)
        _emit(args, _json({"x": x, "Phi": args.phi, "alpha": args.alpha,
                           "value": val}))
    else:  # averaging
        radii = _floats(args.radii)
        lines = ["r,theta,value"]
        for r in radii:
            for j in range(args.angles):
                th = 2.0 * np.pi * j / args.angles
                x = r * np.array([np.cos(th), np.sin(th)])
                if mu.n == 3:
                    x = np.array([x[0], x[1], 0.0])
                val = me.averaging(mu, args.alpha, args.delta, x, args.level)
                lines.append(f"{_fmt(r)},{_fmt(th)},{_fmt(val)}")
        _emit(args, "\n".join(lines))
    return 0


def cmd_toeplitz(args):
    spec = tp.BasisSpec(args.n, args.alpha, args.s, args.K)
    if args.toeplitz_cmd == "bounded":
        mu = _load_measure(args.file)
        est = tp.boundedness_estimate(mu, args.p1, args.alpha1, args.p2,
                                      args.alpha2, args.s, args.t,
                                      args.trials, args.seed, level=args.level)
        zeta = 1.0 + 1.0 / args.p1 - 1.0 / args.p2
        gamma = (args.s + args.t + args.alpha1 / args.p1
                 - args.alpha2 / args.p2) / zeta
        kappa = me.kappa_from_mu(mu, args.s, args.t, args.alpha1)
        lat = ge.lattice_gen(mu.n, args.delta, args.horizon)
        crep = me.carleson_statistic(kappa, zeta, gamma, lat, args.level)
        _emit(args, _json({"estimate": est, "zeta": zeta, "gamma": gamma,
                           "carleson_statistic": crep.value,
                           "carleson_kind": crep.kind,
                           "horizon": crep.horizon}))
        return 0
    mu = _load_measure(args.file)
    if args.toeplitz_cmd == "matrix":
        M = tp.toeplitz_matrix(mu, spec, args.level)
        lines = [",".join(_fmt(v) for v in row) for row in M.entries]
        _emit(args, "\n".join(lines))
    elif args.toeplitz_cmd == "spectrum":
        M = tp.toeplitz_matrix(mu, spec, args.level)
        rep = tp.spectrum(M, _floats(args.p_list))
        _emit(args, _json({"eigenvalues": rep.eigenvalues,
                           "schatten": {str(k): v for k, v in rep.schatten.items()},
                           "trace": rep.trace, "K": rep.K}))
    elif args.toeplitz_cmd == "schatten":
        lat = ge.lattice_gen(mu.n, args.delta, args.horizon)
        sd = tp.schatten_diagnostic(mu, spec, args.p, lat, args.level)
        _emit(args, _json({
            "p": sd.p, "ladder_K": sd.ladder_K, "ladder_Sp": sd.ladder_Sp,
            "ladder_rel_change": sd.ladder_rel_change,
            "berezin_lp": {"lattice_sum": sd.berezin_lp.lattice_sum,
                           "radial_integral": sd.berezin_lp.radial_integral,
                           "growth_ratio": sd.berezin_lp.growth_ratio,
                           "horizon": sd.berezin_lp.horizon},
            "averaging_lp_sum": sd.averaging_lp_sum,
            "averaging_growth": sd.averaging_growth,
            "classifications": sd.classifications}))
    else:  # intertwine
        rep = tp.intertwine_check(mu, spec, args.t, args.level)
        _emit(args, _json({"residual": rep.residual, "t": args.t,
                           "alpha": args.alpha, "s": args.s, "K": args.K}))
    return 0


def cmd_verify(args):
    res = vf.run(args.suite)
    _emit(args, vf.report_json(res))
    return 0 if res["ok"] else 1


# --------------------------------------------------------------------------


def _common(sp):
    sp.add_argument("--horizon", type=float, default=0.95)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--level", type=int, default=48)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--output", default=None)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="bbesov",
        description="weighted harmonic function spaces: kernels, lattices, "
                    "Carleson measures, Toeplitz truncations")
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="reproducing kernel evaluation and scans")
    ks = k.add_subparsers(dest="kernel_cmd", required=True)
    ke = ks.add_parser("eval")
    ke.add_argument("--n", type=int, default=2)
    ke.add_argument("--alpha", type=float, required=True)
    ke.add_argument("--x", required=True)
    ke.add_argument("--y", required=True)
    _common(ke)
    kn = ks.add_parser("norm-scan")
    kn.add_argument("--n", type=int, default=2)
    kn.add_argument("--alpha", type=float, required=True)
    kn.add_argument("--p", type=float, required=True)
    kn.add_argument("--beta", type=float, required=True)
    kn.add_argument("--radii", required=True)
    _common(kn)
    kb = ks.add_parser("bracket-scan")
    kb.add_argument("--n", type=int, default=2)
    kb.add_argument("--beta", type=float, required=True)
    kb.add_argument("--s", type=float, required=True)
    kb.add_argument("--radii", required=True)
    _common(kb)
    k.set_defaults(func=cmd_kernel)

    lt = sub.add_parser("lattice", help="generate and audit a separated net")
    lt.add_argument("--n", type=int, default=2)
    lt.add_argument("--delta", type=float, required=True)
    _common(lt)
    lt.set_defaults(func=cmd_lattice)

    m = sub.add_parser("measure", help="Carleson statistics and transforms")
    ms = m.add_subparsers(dest="measure_cmd", required=True)
    mc = ms.add_parser("carleson")
    mc.add_argument("--file", required=True)
    mc.add_argument("--lambda", dest="lam", type=float, required=True)
    mc.add_argument("--alpha", type=float, required=True)
    mc.add_argument("--delta", type=float, default=0.5)
    _common(mc)
    mv = ms.add_parser("vanishing")
    mv.add_argument("--file", required=True)
    mv.add_argument("--lambda", dest="lam", type=float, required=True)
    mv.add_argument("--alpha", type=float, required=True)
    mv.add_argument("--delta", type=float, default=0.5)
    _common(mv)
    mb = ms.add_parser("berezin")
    mb.add_argument("--file", required=True)
    mb.add_argument("--Phi", dest="phi", type=float, required=True)
    mb.add_argument("--alpha", type=float, required=True)
    mb.add_argument("--x", required=True)
    _common(mb)
    ma = ms.add_parser("averaging")
    ma.add_argument("--file", required=True)
    ma.add_argument("--alpha", type=float, required=True)
    ma.add_argument("--delta", type=float, default=0.5)
    ma.add_argument("--radii", default="0.0,0.2,0.4,0.6,0.8")
    ma.add_argument("--angles", type=int, default=4)
    _common(ma)
    m.set_defaults(func=cmd_measure)

    t = sub.add_parser("toeplitz", help="finite operator truncations")
    ts = t.add_subparsers(dest="toeplitz_cmd", required=True)
    for name in ("matrix", "spectrum", "schatten", "intertwine", "bounded"):
        p = ts.add_parser(name)
        p.add_argument("--file", required=True)
        p.add_argument("--n", type=int, default=2)
        p.add_argument("--alpha", type=float, default=0.0)
        p.add_argument("--s", type=float, default=1.0)
        p.add_argument("--K", type=int, default=8)
        if name == "spectrum":
            p.add_argument("--p-list", default="1,2")
        if name == "schatten":
            p.add_argument("--p", type=float, default=1.0)
            p.add_argument("--delta", type=float, default=0.5)
        if name == "intertwine":
            p.add_argument("--t", type=float, required=True)
        if name == "bounded":
            p.add_argument("--p1", type=float, required=True)
            p.add_argument("--alpha1", type=float, required=True)
            p.add_argument("--p2", type=float, required=True)
            p.add_argument("--alpha2", type=float, required=True)
            p.add_argument("--t", type=float, required=True)
            p.add_argument("--trials", type=int, default=20)
            p.add_argument("--delta", type=float, default=0.5)
        _common(p)
    t.set_defaults(func=cmd_toeplitz)

    v = sub.add_parser("verify", help="run lemma-level verification suites")
    v.add_argument("suite", choices=list(vf.SUITES) + ["all"])
    _common(v)
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except TruncationError as exc:
        print(f"truncation error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
