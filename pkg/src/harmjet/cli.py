"""Command line front end.

Exit codes: 0 fillable / all identities hold, 1 not fillable, 2 indeterminate,
3 invalid input, 4 computation failure.  Errors are reported on stderr as a
one-line JSON object ``{"error": CODE, "message": ...}``.
"""

import argparse
import json
import sys

from . import fill as fillmod
from . import holo
from .conslaw import TOL_ISO, TOL_MOM, harmonic_basis
from .errors import FormatError, HarmJetError
from .extcalc import identity_suite, suite_passes
from .jetgeom import JetBoundary

EXIT_INVALID = 3
EXIT_FAILURE = 4


def _dump(obj):
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _read(path):
    if path in (None, "-"):
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc


def _samples(text, n):
    if text is None:
        return 256 if n == 2 else (32, 64)
    if n == 3:
        try:
            a, b = text.lower().split("x")
            return int(a), int(b)
        except ValueError:
            raise FormatError("n = 3 needs --samples THETAxPHI, e.g. 32x64") from None
    try:
        return int(text)
    except ValueError:
        raise FormatError(f"--samples must be an integer, got {text!r}") from None


def _basis(args, n, m):
    if args.basis_k is None:
        return harmonic_basis(n, m)
    return harmonic_basis(n, m, args.basis_k)


# ---------------------------------------------------------------- commands
def cmd_gen(args):
    if args.kind == "holo_loop":
        loop = holo.generate_loop(args.seed, m=args.m or 2, deg=args.deg,
                                  samples=_samples(args.samples, 2), eps=args.eps or 0.0,
                                  power=args.power)
        _write(_dump(loop.to_dict()), args.out)
        return 0
    n = args.n or 2
    params = dict(n=n, m=args.m or 1, deg=args.deg, samples=_samples(args.samples, n),
                  domain=args.domain)
    if args.eps is not None:
        params["eps"] = args.eps
    b = fillmod.generate(args.kind, args.seed, **params)
    _write(_dump(b.to_dict()), args.out)
    return 0


def _load_boundary(args):
    return JetBoundary.from_json(_read(args.inp))


def cmd_check(args):
    b = _load_boundary(args)
    rep = fillmod.check(b, basis=_basis(args, b.n, b.m), tol_iso=args.tol_iso,
                        tol_mom=args.tol_mom, tol_zeta=args.tol_zeta, method=args.method,
                        h=args.grid_h, spectral_n=args.spectral_n)
    _write(_dump(rep.to_dict()), args.out)
    return rep.exit_code


def cmd_fill(args):
    b = _load_boundary(args)
    rep = fillmod.check(b, basis=_basis(args, b.n, b.m), tol_iso=args.tol_iso,
                        tol_mom=args.tol_mom, tol_zeta=args.tol_zeta, method=args.method,
                        h=args.grid_h, spectral_n=args.spectral_n)
    if rep.fill is None:
        # inadmissible for filling: the isotropy stage failed
        _write(_dump(rep.to_dict()), args.out if args.format == "json" else None)
        return rep.exit_code
    if args.format == "tsv":
        if b.n == 2:
            _write(rep.fill.grid_tsv(), args.out)
        if args.zeta_out:
            _write(rep.fill.zeta_tsv(), args.zeta_out)
        if b.n == 3 and not args.zeta_out:
            _write(rep.fill.zeta_tsv(), args.out)
    else:
        _write(_dump(rep.to_dict()), args.out)
        if args.zeta_out:
            _write(rep.fill.zeta_tsv(), args.zeta_out)
    return rep.exit_code


def _load_loop(args):
    return holo.ComplexLoop.from_json(_read(args.inp))


def cmd_holo_check(args):
    loop = _load_loop(args)
    k = holo.DEFAULT_HOLO_K if args.basis_k is None else args.basis_k
    rep = holo.holo_check(loop, k, args.tol_mom)
    _write(_dump(rep.to_dict()), args.out)
    return {"FILLABLE": 0, "NOT_FILLABLE": 1, "INDETERMINATE": 2}[rep.verdict]


def cmd_holo_fill(args):
    loop = _load_loop(args)
    k = holo.DEFAULT_HOLO_K if args.basis_k is None else args.basis_k
    res = holo.fill_holo(loop, k, args.tol_mom, h=args.grid_h)
    if args.format == "json":
        _write(_dump(res.to_dict()), args.out)
    else:
        _write(res.to_tsv(), args.out)
    sys.stderr.write(f"verdict={res.verdict} stage={res.stage} cr_residual={res.cr_residual!r} "
                     f"trace_error={res.trace_error!r}\n")
    return res.exit_code


def cmd_verify_identities(args):
    checks = identity_suite(max_poly_degree=args.deg if args.deg is not None else 6,
                            seed=args.seed)
    printed = [c for c in checks if c.as_printed]
    ok = suite_passes(checks) and not any(c.holds for c in printed)
    if args.format == "json":
        out = _dump({"format": 1, "passed": ok,
                     "identities": [{"name": c.name, "status": c.status} for c in checks]})
    else:
        out = "".join(f"{c.status}\t{c.name}\n" for c in checks)
        out += f"{'OK' if ok else 'FAILED'}\t{sum(c.holds for c in checks if not c.as_printed)}/" \
               f"{sum(not c.as_printed for c in checks)} identities hold\n"
    _write(out, args.out)
    return 0 if ok else 1


# ------------------------------------------------------------------ parser
def _positive(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="harmjet",
                                description="Fillability of boundary data by harmonic 1-jet graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, inp=True):
        if inp:
            sp.add_argument("--in", dest="inp", help="input JSON (default stdin)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--seed", type=int, default=0)

    def tolerances(sp):
        sp.add_argument("--basis-k", type=int, help="harmonic basis degree (K for n=2, L for n=3)")
        sp.add_argument("--tol-mom", type=_positive, default=TOL_MOM)
        sp.add_argument("--tol-iso", type=_positive, default=TOL_ISO)
        sp.add_argument("--tol-zeta", type=_positive, default=fillmod.TOL_ZETA)
        sp.add_argument("--grid-h", type=_positive, help="finite-difference grid spacing")
        sp.add_argument("--spectral-n", type=int,
                        help="spectral truncation: Fourier mode (n=2) or degree (n=3)")
        sp.add_argument("--method", choices=("auto", "spectral", "fd"), default="auto")

    g = sub.add_parser("gen", help="generate a test boundary or loop")
    common(g, inp=False)
    g.add_argument("--kind", required=True, choices=fillmod.KINDS + ("holo_loop",))
    g.add_argument("--n", type=int, choices=(2, 3))
    g.add_argument("--m", type=int)
    g.add_argument("--samples", help="N for curves, THETAxPHI for spheres")
    g.add_argument("--deg", type=int, default=4)
    g.add_argument("--eps", type=float)
    g.add_argument("--power", type=int, default=1, help="conj(w) power for holo_loop defects")
    g.add_argument("--domain", choices=("circle", "ellipse"), default="circle")
    g.add_argument("--format", choices=("json",), default="json")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="dual-path fillability verdict")
    common(c)
    tolerances(c)
    c.add_argument("--format", choices=("json",), default="json")
    c.set_defaults(func=cmd_check)

    f = sub.add_parser("fill", help="harmonic filling and defect profile")
    common(f)
    tolerances(f)
    f.add_argument("--format", choices=("json", "tsv"), default="json")
    f.add_argument("--zeta-out", help="write the defect profile TSV here")
    f.set_defaults(func=cmd_fill)

    hc = sub.add_parser("holo-check", help="holomorphic moment conditions of a loop")
    common(hc)
    hc.add_argument("--basis-k", type=int)
    hc.add_argument("--tol-mom", type=_positive, default=TOL_MOM)
    hc.add_argument("--format", choices=("json",), default="json")
    hc.set_defaults(func=cmd_holo_check)

    hf = sub.add_parser("holo-fill", help="reconstruct the holomorphic disk of a loop")
    common(hf)
    hf.add_argument("--basis-k", type=int)
    hf.add_argument("--tol-mom", type=_positive, default=TOL_MOM)
    hf.add_argument("--grid-h", type=_positive)
    hf.add_argument("--format", choices=("json", "tsv"), default="tsv")
    hf.set_defaults(func=cmd_holo_fill)

    v = sub.add_parser("verify-identities", help="run the exact identity suite")
    common(v, inp=False)
    v.add_argument("--deg", type=int, help="max harmonic polynomial degree (default 6)")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.set_defaults(func=cmd_verify_identities)
    return p


def _error(exc, code):
    sys.stderr.write(json.dumps({"error": code, "message": str(exc)}) + "\n")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except HarmJetError as exc:
        _error(exc, exc.code)
        return EXIT_INVALID if exc.invalid_input else EXIT_FAILURE
    except (ValueError, TypeError) as exc:
        _error(exc, "E_INVALID")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
