"""Command-line batch driver.

Exit status: 0 when every selected suite passes, 1 when a suite fails,
2 for usage errors (unknown model or suite, bad tolerance, ...).
"""

import argparse
import sys

from .errors import UnsupportedModelError, UsageError
from .runner import SUITES, TOLERANCE_ENV, RunConfig, run

__all__ = ["main", "build_parser"]


def _keyval(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    k, v = text.split("=", 1)
    try:
        return k.strip(), float(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {k!r} needs a number") from None


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text}")
        return v
    return conv


def build_parser():
    p = argparse.ArgumentParser(
        prog="malab",
        description="Run Monge-Ampère / adapted-structure certificates on a model.",
        epilog=f"Default tolerances can be overridden by a KEY=VALUE file named in ${TOLERANCE_ENV}.")
    p.add_argument("--model", default="euclidean(2)",
                   help="euclidean(n) n=2..4, sphere(n) / rproj(n) n=2..4, cproj(1)")
    p.add_argument("--suite", action="append", choices=SUITES, default=[],
                   help="suite to run (repeatable; default: all suites for the model)")
    p.add_argument("--samples", type=_positive(int), default=None,
                   help="sample count for every suite (default: per-suite)")
    p.add_argument("--h", type=_positive(float), default=1e-3, help="finite-difference step")
    p.add_argument("--dt", type=_positive(float), default=0.05, help="integrator step")
    p.add_argument("--tol", type=_keyval, action="append", default=[], metavar="KEY=VAL")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ma-kind", choices=("sqrt_tau", "log_tau"), default=None,
                   help="exhaustion kind for the ma suite (a mismatched kind runs as a "
                        "negative control)")
    p.add_argument("--out", default=None, help="report path (default: stdout)")
    p.add_argument("--export-spectra", default=None, metavar="PATH")
    p.add_argument("--export-traces", default=None, metavar="PATH")
    p.add_argument("--export-phi", default=None, metavar="PATH")
    p.add_argument("--timings", action="store_true", help="include wall times in the report")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not 0 <= args.seed < 2**64:
        parser.error("--seed must fit in 64 unsigned bits")
    cfg = RunConfig(model=args.model, suites=tuple(args.suite), samples=args.samples, h=args.h,
                    dt=args.dt, tolerances=dict(args.tol), seed=args.seed,
                    ma_kind=args.ma_kind, out=args.out)
    try:
        report = run(cfg)
    except (UsageError, UnsupportedModelError, OSError) as exc:
        print(f"malab: error: {exc}", file=sys.stderr)
        return 2
    text = report.text(timings=args.timings)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _exports(report, args)
    return 0 if report.passed else 1


def _exports(report, args):
    from .deformation import export_phi
    from .foliation import export_traces
    from .pluripotential import export_spectra

    if args.export_spectra:
        spectra = []
        for name in ("psh", "ma"):
            if name in report.suites:
                spectra += report.suites[name].data.get("spectra", [])
        export_spectra(spectra, args.export_spectra)
    if args.export_traces:
        traces = report.suites.get("foliation")
        export_traces(traces.data.get("traces", []) if traces else [], args.export_traces)
    if args.export_phi:
        d = report.suites.get("deformation")
        export_phi(d.data.get("phi_samples", []) if d else [], args.export_phi)


if __name__ == "__main__":
    sys.exit(main())
