"""``phipart`` command line: estimate, partition, sample, plan, verify-bounds, benchmark.

Exit codes: 0 success, 2 validation error, 3 bound-suite violation.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bounds, harness
from .errors import PhipartError
from .estimator import estimate_divergence
from .io import load_samples, write_report, write_samples
from .partitioner import build_partition
from .phi import FAMILIES
from .synthdata import DistributionSpec, draw

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION = 0, 2, 3

log = logging.getLogger("phipart")


def _common(p: argparse.ArgumentParser, seed=True):
    if seed:
        p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="-", help="output path, '-' for stdout")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="phipart", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate D_phi(P||Q) from two CSV sample files")
    p.add_argument("--p", required=True, type=Path)
    p.add_argument("--q", required=True, type=Path)
    p.add_argument("--m0", required=True, type=int)
    p.add_argument("--phi", default="kl", choices=sorted(FAMILIES))
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--unweighted", action="store_true", help="debug: drop the 1/m cell weight")
    _common(p)

    p = sub.add_parser("partition", help="build the equal-mass partition of a sample file")
    p.add_argument("--samples", required=True, type=Path)
    p.add_argument("--m0", required=True, type=int)
    p.add_argument("--jitter", type=float, default=0.0)
    _common(p)

    p = sub.add_parser("sample", help="draw samples from a JSON distribution spec")
    p.add_argument("--spec", required=True, type=Path)
    p.add_argument("--n", required=True, type=int)
    _common(p)

    p = sub.add_parser("plan", help="sample-size thresholds and m-selection")
    p.add_argument("--m", required=True, type=int)
    p.add_argument("--d", required=True, type=int)
    p.add_argument("--eps", required=True, type=float)
    p.add_argument("--delta", required=True, type=float)
    p.add_argument("--phi", choices=sorted(FAMILIES))
    p.add_argument("--c", type=float, help="tail constant c (enables radius and m-selection)")
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--L1", type=float, default=1.0)
    p.add_argument("--L2", type=float, default=2.0)
    p.add_argument("--C", dest="C_user", type=float, default=1.0)
    p.add_argument("--K3", dest="K3_user", type=float, default=1.0)
    _common(p, seed=False)

    p = sub.add_parser("verify-bounds", help="run a bound-verification suite")
    p.add_argument("--suite", required=True, choices=harness.SUITES)
    p.add_argument("--seeds", type=int, default=100)
    _common(p)

    p = sub.add_parser("benchmark", help="convergence study from a JSON experiment config")
    p.add_argument("--config", required=True, type=Path)
    _common(p)
    return ap


def _cmd_estimate(a):
    res = estimate_divergence(
        load_samples(a.p), load_samples(a.q), a.m0, a.phi,
        weighted=not a.unweighted, jitter=a.jitter, seed=a.seed,
    )
    write_report(a.out, res.to_json())
    return EXIT_OK


def _cmd_partition(a):
    part = build_partition(load_samples(a.samples), a.m0, jitter=a.jitter, seed=a.seed)
    write_report(a.out, part.to_json())
    return EXIT_OK


def _cmd_sample(a):
    spec = DistributionSpec.from_json(json.loads(a.spec.read_text()))
    x = draw(spec, a.n, a.seed)
    if a.out == "-":
        for row in x:
            sys.stdout.write(",".join(repr(float(v)) for v in row) + "\n")
    else:
        write_samples(a.out, x)
    return EXIT_OK


def _cmd_plan(a):
    params = None
    if a.c is not None:
        params = bounds.RegularityParams(c=a.c, alpha=a.alpha, L1=a.L1, L2=a.L2)
    report = bounds.plan(a.m, a.d, a.eps, a.delta, family=a.phi, params=params, C_user=a.C_user, K3_user=a.K3_user)
    write_report(a.out, report.to_json())
    return EXIT_OK


def _cmd_verify(a):
    report = harness.run_bound_suite(a.suite, a.seeds, a.seed)
    write_report(a.out, report)
    for c in report["checks"]:
        if not c["passed"]:
            log.warning("violation: %s observed=%s bound=%s", c["name"], c["observed"], c["bound"])
    return EXIT_OK if report["passed"] else EXIT_VIOLATION


def _cmd_benchmark(a):
    obj = json.loads(a.config.read_text())
    obj.setdefault("base_seed", a.seed)
    config = harness.ExperimentConfig.from_json(obj)
    rows = harness.run_convergence(config, threads=a.threads)
    write_report(a.out, {"config": config.to_json(), "rows": [r.to_json() for r in rows]})
    return EXIT_OK


COMMANDS = {
    "estimate": _cmd_estimate,
    "partition": _cmd_partition,
    "sample": _cmd_sample,
    "plan": _cmd_plan,
    "verify-bounds": _cmd_verify,
    "benchmark": _cmd_benchmark,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except (PhipartError, OSError, json.JSONDecodeError) as exc:
        print(f"phipart: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
