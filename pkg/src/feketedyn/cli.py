"""Command-line front end: periodic points, energies, rate tables, arithmetic.

Exit codes: 0 success, 2 usage or input error, 3 violated mathematical
invariant, 4 numeric divergence.  All outputs embed the resolved
configuration and library version and are byte-deterministic given a seed.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .dynatomic import periodic_points
from .equilibrium import get_observable
from .errors import (DegenerateLift, FeketeDynError, IncompleteRoots,
                     InexactDivision, IntegralityViolation, MapSpecError,
                     NegativeA, NotGoodLift, PreimageSolveFailed,
                     RootFindingDiverged, UnknownObservable, ZeroDiscriminant)
from .exact import product_formula_report
from .fekete import SamplerConfig, baker_check, config_energy, rate_table
from .geometry import load_map_spec
from .potential import GreenEvaluator

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_THEORY = 3
EXIT_NUMERIC = 4

_THEORY_ERRORS = (IntegralityViolation, NegativeA, InexactDivision, NotGoodLift)
_NUMERIC_ERRORS = (RootFindingDiverged, PreimageSolveFailed, IncompleteRoots,
                   ZeroDiscriminant)
_USAGE_ERRORS = (MapSpecError, UnknownObservable, DegenerateLift, ValueError)


def _resolved_config(args: argparse.Namespace) -> dict:
    # the output path is not part of the computation; leaving it out keeps
    # artifacts byte-identical wherever they are written
    cfg = {k: v for k, v in sorted(vars(args).items())
           if k not in ("func", "out")}
    cfg["version"] = __version__
    return cfg


def _emit_json(doc: dict, out_path: str | None) -> None:
    text = json.dumps(doc, indent=1, sort_keys=True) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_text(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_perpts(args) -> int:
    F = load_map_spec(args.map, args.precision)
    cfg = periodic_points(F, args.n, tol=1e-12)
    _emit_json({"config": _resolved_config(args), "result": cfg.to_json()},
               args.out)
    return EXIT_OK


def cmd_energy(args) -> int:
    F = load_map_spec(args.map, args.precision)
    ev = GreenEvaluator.make(F)
    per = periodic_points(F, args.n, tol=1e-12)
    rep = config_energy(ev, per)
    doc = rep.to_json()
    doc["baker"] = baker_check(ev, per)
    _emit_json({"config": _resolved_config(args), "result": doc}, args.out)
    return EXIT_OK


def cmd_rate(args) -> int:
    F = load_map_spec(args.map, args.precision)
    observables = [o.strip() for o in args.obs.split(",") if o.strip()]
    for name in observables:
        get_observable(name, None if name != "potential" else
                       GreenEvaluator.make(F))
    scfg = SamplerConfig(seed=args.seed, samples=args.samples,
                         burn_in=args.burnin, normalization=args.norm)
    table = rate_table(F, args.nmax, observables, scfg)
    header = "".join(f"# {k}={v}\n" for k, v in sorted(_resolved_config(args).items()))
    fitted = "".join(f"# fitted_C[{k}]={v!r}\n"
                     for k, v in sorted(table.fitted_C.items()))
    fails = "".join(f"# failed n={f['n']}: {f['error']}\n" for f in table.failures)
    _emit_text(header + fitted + fails + table.to_csv(), args.out)
    return EXIT_OK


def cmd_arith(args) -> int:
    F = load_map_spec(args.map, args.precision)
    if not F.exact:
        raise MapSpecError("arith requires a rational-coefficient map spec")
    rep = product_formula_report(F, args.n)
    _emit_json({"config": _resolved_config(args), "result": rep.to_json()},
               args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="feketedyn",
        description="Periodic points, equilibrium potentials and pair "
                    "energies of rational maps on the projective line.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, need_n=False, need_nmax=False):
        sp.add_argument("--map", required=True, help="map spec JSON path")
        if need_n:
            sp.add_argument("--n", type=int, required=True, help="period")
        if need_nmax:
            sp.add_argument("--nmax", type=int, required=True)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--samples", type=int, default=20000)
        sp.add_argument("--burnin", type=int, default=60)
        sp.add_argument("--precision", type=int, default=53)
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("perpts", help="period-n point configuration")
    common(sp, need_n=True)
    sp.set_defaults(func=cmd_perpts)

    sp = sub.add_parser("energy", help="pair-energy report for Per_n")
    common(sp, need_n=True)
    sp.set_defaults(func=cmd_energy)

    sp = sub.add_parser("rate", help="equidistribution rate table (CSV)")
    common(sp, need_nmax=True)
    sp.add_argument("--obs", default="re_chordal",
                    help="comma-separated observable names")
    sp.add_argument("--norm", choices=["dn", "dpow"], default="dn")
    sp.set_defaults(func=cmd_rate)

    sp = sub.add_parser("arith", help="exact discriminant / product formula")
    common(sp, need_n=True)
    sp.set_defaults(func=cmd_arith)
    return p


def _error_exit(exc: Exception, out_path: str | None) -> int:
    if isinstance(exc, _THEORY_ERRORS):
        code = EXIT_THEORY
    elif isinstance(exc, _NUMERIC_ERRORS):
        code = EXIT_NUMERIC
    else:
        code = EXIT_USAGE
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    if out_path:
        try:
            with open(out_path, "w") as fh:
                json.dump(doc, fh, indent=1, sort_keys=True)
                fh.write("\n")
        except OSError:
            pass
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (_USAGE_ERRORS + _THEORY_ERRORS + _NUMERIC_ERRORS +
            (FeketeDynError, OSError)) as exc:
        return _error_exit(exc, getattr(args, "out", None))


if __name__ == "__main__":
    sys.exit(main())
