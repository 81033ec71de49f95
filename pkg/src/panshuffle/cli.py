"""Command-line entry points.

Subcommands wrap the library's main capabilities so single checks run without
writing a script. Exit codes: 0 on success, 2 when a requested check fails
(the command ran fine but the asserted property did not hold), 1 on usage
errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import exact as ex
from .baselines import find_selection_threshold
from .distributions import (
    densify,
    dump_pmf_csv,
    family_enumerate,
    from_descriptor,
    sample as draw_from,
)
from .harness import ExperimentSpec, fit_scaling, run_spec
from .mechanisms import PrivacyBudget, ShuffleProtocol, mechanism_from_manifest, threshold_analyzer
from .metrics import infty_to_2_norm_bruteforce, parity_family_norm_bound_sq, tv_distance
from .reductions import (
    LearnerDistinguisher,
    PlantedLearner,
    PlugInParityLearner,
    ShuffleToPanWrapper,
    threshold_distinguisher,
    wrapper_escape_mass,
)
from .rng import make_generator

CHECK_FAILED = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _load_json_arg(text: str) -> dict:
    """Parse an inline JSON object or read one from a file path."""
    text = text.strip()
    if text.startswith("{") or text.startswith("["):
        return json.loads(text)
    return json.loads(Path(text).read_text())


def _cmd_sample(args) -> int:
    desc = _load_json_arg(args.dist)
    dist = from_descriptor(desc)
    if isinstance(dist, list):
        print("descriptor names a whole family; pass one member (set 'ell')", file=sys.stderr)
        return 1
    rng = make_generator(args.seed, "cli-sample")
    points = draw_from(dist, args.n, rng)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write("row," + ",".join(f"x{j}" for j in range(1, points.shape[1] + 1)) + "\n")
            for i, row in enumerate(points):
                fh.write(f"{i}," + ",".join(str(int(v)) for v in row) + "\n")
        print(f"wrote {args.n} samples to {args.out}")
    else:
        for row in points[:20]:
            print("".join("+" if v > 0 else "-" for v in row))
        if args.n > 20:
            print(f"... ({args.n - 20} more rows; use --out to keep them)")
    if args.pmf_out:
        dump_pmf_csv(dist, args.pmf_out)
        print(f"wrote pmf to {args.pmf_out}")
    return 0


def _cmd_tv(args) -> int:
    a = from_descriptor(_load_json_arg(args.dist_a))
    b = from_descriptor(_load_json_arg(args.dist_b))
    if isinstance(a, list) or isinstance(b, list):
        print("tv compares two members, not families", file=sys.stderr)
        return 1
    value = tv_distance(densify(a).probs, densify(b).probs)
    print(f"tv = {value!r}")
    if args.expect is not None:
        gap = abs(value - args.expect)
        ok = gap <= args.tol
        print(f"expected {args.expect!r} (|gap| = {gap:.3e}): {'PASS' if ok else 'FAIL'}")
        return 0 if ok else CHECK_FAILED
    return 0


def _cmd_norm(args) -> int:
    members = [densify(m) for m in family_enumerate(args.d, args.k, args.alpha, args.family)]
    bound = parity_family_norm_bound_sq(args.d, args.k, args.alpha)
    report = infty_to_2_norm_bruteforce(members, bound_sq=bound)
    print(f"family={args.family} d={args.d} k={args.k} alpha={args.alpha}")
    print(f"value_sq = {report.value_sq!r}")
    print(f"bound_sq = {bound!r} (ratio {report.value_sq / bound:.6f})")
    if args.json_out:
        Path(args.json_out).write_text(report.to_json() + "\n")
        print(f"wrote report to {args.json_out}")
    if report.value_sq > bound + 1e-12:
        print("FAIL: value exceeds the closed-form bound")
        return CHECK_FAILED
    return 0


def _cmd_audit(args) -> int:
    mech = mechanism_from_manifest(_load_json_arg(args.mechanism))
    neighbors = _load_json_arg(args.neighbors)
    stream_a = [tuple(x) if isinstance(x, list) else x for x in neighbors["a"]]
    stream_b = [tuple(x) if isinstance(x, list) else x for x in neighbors["b"]]
    eps_grid = [float(e) for e in args.eps.split(",")]
    curve = ex.audit_privacy(mech, (stream_a, stream_b), eps_grid)
    for e, dmax in zip(curve.epsilons, curve.delta_max):
        print(f"epsilon={float(e)!r}  delta_max={float(dmax)!r}")
    if args.out:
        curve.write_csv(args.out)
        print(f"wrote curve to {args.out}")
    if args.max_delta is not None:
        worst = float(curve.delta_max.max())
        ok = worst <= args.max_delta
        print(f"worst delta {worst!r} vs cap {args.max_delta!r}: {'PASS' if ok else 'FAIL'}")
        return 0 if ok else CHECK_FAILED
    return 0


def _cmd_reduce_check(args) -> int:
    n = args.n
    if n % 3 != 0:
        print(f"n must be divisible by 3, got {n}", file=sys.stderr)
        return 1
    randomizer = mechanism_from_manifest({"type": "binary_rr", "flip_p": args.flip_p})
    protocol = ShuffleProtocol(
        randomizer=randomizer,
        analyzer=threshold_analyzer(n // 3),
        n=n,
        budget=PrivacyBudget(epsilon=1.0, delta=0.0, gamma=1.0 / 3.0),
    )
    ref = {0: 1.0 - args.ref_one, 1: args.ref_one}
    wrapper = ShuffleToPanWrapper(protocol=protocol, reference=ref)
    null_law = wrapper.exact_output_distribution(ref)
    null_target = ex.exact_output_distribution(protocol, [ref] * n)
    tv_null = ex.tv_dicts(null_law, null_target)
    inp = {0: 1.0 - args.input_one, 1: args.input_one}
    diluted = {k: 2.0 / 9.0 * inp[k] + 7.0 / 9.0 * ref[k] for k in (0, 1)}
    real_law = wrapper.exact_output_distribution(inp)
    real_target = ex.exact_output_distribution(protocol, [diluted] * n)
    tv_real = ex.tv_dicts(real_law, real_target)
    bound = wrapper_escape_mass(n)
    print(f"n={n}: tv on reference stream = {tv_null!r}")
    print(f"n={n}: tv on shifted stream   = {tv_real!r} (bound {bound!r})")
    ok = tv_null <= 1e-10 and tv_real <= bound + 1e-10
    print("PASS" if ok else "FAIL")
    return 0 if ok else CHECK_FAILED


def _cmd_distinguish(args) -> int:
    from .distributions import ParityIndex

    planted = ParityIndex(tuple(args.planted), 1)
    if args.learner == "plugin":
        learner = PlugInParityLearner(d=args.d, k=args.k)
    else:
        learner = PlantedLearner(index=planted)
    dist = LearnerDistinguisher(
        learner=learner,
        d=args.d,
        alpha=args.alpha,
        epsilon=args.epsilon,
        n_learn=args.n_learn,
        test_phase_scale=args.scale,
    )
    rng = make_generator(args.seed, "cli-distinguish")
    z_p = dist.run_batch(planted, args.trials, rng)
    z_u = dist.run_batch(None, args.trials, rng)
    report = threshold_distinguisher(z_p, z_u, min_samples=min(args.trials, 10_000))
    print(f"test_len={dist.test_len} tau={report.tau!r}")
    print(f"advantage={report.advantage!r} ci=[{report.ci_low!r}, {report.ci_high!r}]")
    if args.min_advantage is not None:
        ok = report.advantage >= args.min_advantage
        print("PASS" if ok else "FAIL")
        return 0 if ok else CHECK_FAILED
    return 0


def _cmd_sweep(args) -> int:
    spec = ExperimentSpec(
        kind="selection_sweep",
        experiment_id=args.experiment_id,
        params={
            "dims": [int(d) for d in args.dims.split(",")],
            "model": args.model,
            "epsilon": args.epsilon,
            "delta": args.delta,
            "alpha": args.alpha,
            "target": args.target,
        },
        trials=args.trials,
        master_seed=args.seed,
    )
    result = run_spec(spec, args.out)
    print(f"wrote {result.csv_path}")
    print(json.dumps(result.summary, indent=2, sort_keys=True))
    return 0


def _cmd_fit(args) -> int:
    try:
        rows = Path(args.csv).read_text().strip().splitlines()
    except OSError as exc:
        print(f"cannot read {args.csv}: {exc}", file=sys.stderr)
        return 1
    if not rows:
        print(f"{args.csv} is empty", file=sys.stderr)
        return 1
    header = rows[0].split(",")
    try:
        xi, yi = header.index(args.x), header.index(args.y)
    except ValueError:
        print(f"columns {args.x!r}/{args.y!r} not in {header}", file=sys.stderr)
        return 1
    xs, ys = [], []
    for line in rows[1:]:
        parts = line.split(",")
        xs.append(float(parts[xi]))
        ys.append(float(parts[yi]))
    fit = fit_scaling(xs, ys)
    print(json.dumps(fit.to_json(), indent=2, sort_keys=True))
    if args.slope_min is not None or args.slope_max is not None:
        lo = args.slope_min if args.slope_min is not None else -np.inf
        hi = args.slope_max if args.slope_max is not None else np.inf
        ok = lo <= fit.slope <= hi
        print("PASS" if ok else "FAIL")
        return 0 if ok else CHECK_FAILED
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="panshuffle", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw samples from a distribution descriptor")
    p.add_argument("--dist", required=True, help="JSON descriptor (inline or a file path)")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path for the samples")
    p.add_argument("--pmf-out", help="CSV path for the dense pmf")
    p.set_defaults(fn=_cmd_sample)

    p = sub.add_parser("tv", help="exact total variation between two members")
    p.add_argument("--dist-a", required=True)
    p.add_argument("--dist-b", required=True)
    p.add_argument("--expect", type=float, help="assert the value (exit 2 on mismatch)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.set_defaults(fn=_cmd_tv)

    p = sub.add_parser("norm", help="brute-force family norm vs the closed-form bound")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--family", choices=("plain", "labeled"), default="plain")
    p.add_argument("--json-out")
    p.set_defaults(fn=_cmd_norm)

    p = sub.add_parser("audit", help="exact privacy curve of a mechanism on a neighbor pair")
    p.add_argument("--mechanism", required=True, help="mechanism manifest JSON")
    p.add_argument("--neighbors", required=True, help='JSON {"a": [...], "b": [...]}')
    p.add_argument("--eps", default="0.5,1.0,2.0", help="comma-separated epsilon grid")
    p.add_argument("--out", help="CSV path for the curve")
    p.add_argument("--max-delta", type=float, help="assert the worst delta (exit 2 on breach)")
    p.set_defaults(fn=_cmd_audit)

    p = sub.add_parser("reduce-check", help="wrapper output-law identities at small n")
    p.add_argument("--n", type=int, default=12, help="cohort size (divisible by 3)")
    p.add_argument("--flip-p", type=float, default=0.3)
    p.add_argument("--ref-one", type=float, default=0.4, help="reference P[x=1]")
    p.add_argument("--input-one", type=float, default=0.9, help="shifted-input P[x=1]")
    p.set_defaults(fn=_cmd_reduce_check)

    p = sub.add_parser("distinguish", help="learner-based two-world distinguisher")
    p.add_argument("--d", type=int, default=10)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--n-learn", type=int, default=0)
    p.add_argument("--scale", type=float, default=24.0)
    p.add_argument("--planted", type=int, nargs="+", default=[1])
    p.add_argument("--learner", choices=("planted", "plugin"), default="planted")
    p.add_argument("--trials", type=int, default=20_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-advantage", type=float)
    p.set_defaults(fn=_cmd_distinguish)

    p = sub.add_parser("sweep", help="selection sample-complexity sweep over dimensions")
    p.add_argument("--dims", default="8,16,32,64,128")
    p.add_argument("--model", choices=("central", "local", "shuffle", "pan"), default="pan")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=1e-6)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--target", type=float, default=0.9)
    p.add_argument("--trials", type=int, default=1000, help="confirmation trials")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--experiment-id", default="selection-sweep")
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("fit", help="fit a log-log scaling line to CSV columns")
    p.add_argument("--csv", required=True)
    p.add_argument("--x", default="d")
    p.add_argument("--y", default="n_star")
    p.add_argument("--slope-min", type=float)
    p.add_argument("--slope-max", type=float)
    p.set_defaults(fn=_cmd_fit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
