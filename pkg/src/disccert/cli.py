"""Batch command-line surface: gen, certify, verify, oracle, experiment.

Results are TSV on stdout with a '#' comment header (version, flags, digest)
so runs are diffable and reproducible from (seed, flags) alone. Progress
heartbeats and wall-clock timings go to stderr, never stdout. Exit codes:
0 success/certified/valid, 1 negative answer, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from . import __version__
from .certifier import (
    certify_discrepancy,
    certify_matrix_gaussian,
    certify_partition,
    default_parameters,
    verify_certificate_bytes,
)
from .certificate import serialize_certificate
from .dyadic import DyadicRational
from .errors import DiscCertError, FormatError
from .gen import GenSpec, gen_gaussian_truncated, gen_partition, gen_wishart
from .instances import (
    FixedPointMatrix,
    PartitionInstance,
    canonical_serialize,
    instance_digest,
    parse_instance,
)
from .oracle import brute_force_disc, empirical_anticoncentration, has_perfect_partition

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DISC_CERT_THREADS", "1")))
    except ValueError:
        return 1


def _heartbeat(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _header(args_echo: str, extra: dict | None = None) -> list[str]:
    lines = [f"# disccert v{__version__}", f"# command: {args_echo}"]
    for key, val in (extra or {}).items():
        lines.append(f"# {key}: {val}")
    return lines


def _echo(argv: list[str]) -> str:
    return "disccert " + " ".join(argv)


def _read(path: str) -> bytes:
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None


def _parse_dyadic(text: str) -> DyadicRational:
    """Accept '1/2^k', 'num/2^k', 'p/q' with q a power of two, or an integer."""
    if "/" in text and not text.split("/", 1)[1].startswith("2^"):
        return DyadicRational.from_fraction(Fraction(text))
    return DyadicRational.decode(text)


# ---------------------------------------------------------------- gen


def cmd_gen(args, argv) -> int:
    beta = _parse_dyadic(args.beta) if args.beta else DyadicRational.zero()
    spec = GenSpec(args.model, args.m, args.n, args.b, beta=beta, seed=args.seed)
    spike = None
    if args.model == "gaussian":
        inst = gen_gaussian_truncated(spec)
    elif args.model == "uniform01":
        inst = gen_partition(spec)
    else:
        inst, spike = gen_wishart(spec)
    data = canonical_serialize(inst)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
    if spike is not None and args.spike_out:
        with open(args.spike_out, "w") as fh:
            fh.write(" ".join(str(v) for v in spike) + "\n")
    _heartbeat(f"generated {args.model} instance, digest {instance_digest(data)[:16]}...")
    return EXIT_OK


# ---------------------------------------------------------------- certify


def cmd_certify(args, argv) -> int:
    data = _read(args.instance)
    inst = parse_instance(data)
    digest = instance_digest(data)
    t0 = time.perf_counter()
    oracle_note = "-"
    if args.mode == "partition":
        if not isinstance(inst, PartitionInstance):
            raise FormatError("partition mode needs a partition instance")
        decision, cert = certify_partition(inst)
        certified = decision == "no-perfect-partition"
        value = cert.value()
        shown = decision
        if args.oracle_check:
            witness = has_perfect_partition(inst)
            agree = not (certified and witness is not None)
            oracle_note = f"perfect_partition={witness is not None} agree={agree}"
    else:
        if not isinstance(inst, FixedPointMatrix):
            raise FormatError(f"{args.mode} mode needs a matrix instance")
        if args.mode == "gaussian":
            params = default_parameters(
                inst.m, inst.n, "gaussian", paper_scale=args.paper_scale
            )
            if params.b != inst.b:
                _heartbeat(
                    f"note: instance has b={inst.b}, derived parameters assume b={params.b}; "
                    "using the instance's b for the correction term"
                )
            value, cert = certify_matrix_gaussian(inst, params)
        else:
            if not args.delta:
                raise FormatError("raw mode needs --delta")
            delta = _parse_dyadic(args.delta)
            value, cert = certify_discrepancy(inst, delta, args.alpha_log2)
        certified = cert.certified
        shown = "certified" if certified else "not-certified"
        if args.oracle_check:
            disc, _ = brute_force_disc(inst)
            sound = value.as_fraction() <= disc.as_fraction()
            oracle_note = f"brute_force_disc={disc} sound={sound}"
    wall = time.perf_counter() - t0
    cert_path = "-"
    if args.cert_out:
        with open(args.cert_out, "wb") as fh:
            fh.write(serialize_certificate(cert))
        cert_path = args.cert_out
    lines = _header(_echo(argv), {"digest": digest})
    lines.append("mode\tdigest\tdelta\tvalue\tdecision\tcert\toracle_check")
    lines.append(
        f"{args.mode}\t{digest[:16]}\t{cert.delta.encode()}\t{value.encode()}"
        f"\t{shown}\t{cert_path}\t{oracle_note}"
    )
    print("\n".join(lines))
    _heartbeat(f"certify wall time: {wall:.3f}s")
    return EXIT_OK if certified else EXIT_NEGATIVE


# ---------------------------------------------------------------- verify


def cmd_verify(args, argv) -> int:
    inst_data = _read(args.instance)
    cert_data = _read(args.cert)
    res = verify_certificate_bytes(inst_data, cert_data)
    lines = _header(_echo(argv))
    lines.append("valid\treason")
    lines.append(f"{'yes' if res.valid else 'no'}\t{res.reason}")
    print("\n".join(lines))
    return EXIT_OK if res.valid else EXIT_NEGATIVE


# ---------------------------------------------------------------- oracle


def cmd_oracle(args, argv) -> int:
    if args.oracle_op == "disc":
        inst = parse_instance(_read(args.instance))
        if not isinstance(inst, FixedPointMatrix):
            raise FormatError("oracle disc needs a matrix instance")
        value, signing = brute_force_disc(inst, n_guard=args.guard)
        print(value)
        _heartbeat("signing: " + " ".join("+" if s > 0 else "-" for s in signing))
        return EXIT_OK
    if args.oracle_op == "partition":
        inst = parse_instance(_read(args.instance))
        if not isinstance(inst, PartitionInstance):
            raise FormatError("oracle partition needs a partition instance")
        witness = has_perfect_partition(inst, n_guard=args.guard)
        if witness is None:
            print("none")
            return EXIT_NEGATIVE
        print("subset: " + " ".join(str(i) for i in sorted(witness)))
        return EXIT_OK
    # anticoncentration spot check
    y = tuple(Fraction(t) for t in args.y.split(","))
    freq = empirical_anticoncentration(
        args.dist, y, Fraction(args.theta), args.b, args.trials, args.seed
    )
    lines = _header(_echo(argv))
    lines.append("dist\ttheta\tb\ttrials\tfrequency")
    lines.append(f"{args.dist}\t{args.theta}\t{args.b}\t{args.trials}\t{freq}")
    print("\n".join(lines))
    return EXIT_OK


# ---------------------------------------------------------------- experiment


def _trial_partition_sweep(task):
    n, b, seed = task
    inst = gen_partition(GenSpec("uniform01", 1, n, b, seed=seed))
    perfect = has_perfect_partition(inst) is not None
    return perfect


def _trial_partition_sweep_cert(task):
    n, b, seed = task
    inst = gen_partition(GenSpec("uniform01", 1, n, b, seed=seed))
    perfect = has_perfect_partition(inst) is not None
    decision, _ = certify_partition(inst)
    return perfect, decision == "no-perfect-partition"

def _trial_completeness_gaussian(task):
    m, n, seed, paper_scale = task
    params = default_parameters(m, n, "gaussian", paper_scale=paper_scale)
    A = gen_gaussian_truncated(GenSpec("gaussian", m, n, params.b, seed=seed))
    value, cert = certify_matrix_gaussian(A, params)
    return cert.certified and value.numerator > 0


def _trial_completeness_partition(task):
    n, b, seed = task
    inst = gen_partition(GenSpec("uniform01", 1, n, b, seed=seed))
    decision, _ = certify_partition(inst)
    oracle_perfect = has_perfect_partition(inst) is not None if n <= 26 else None
    return decision == "no-perfect-partition", oracle_perfect


def _trial_wishart(task):
    model, m, n, b, beta_exp, delta_code, seed = task
    beta = (
        DyadicRational.zero()
        if model == "wishart_null"
        else DyadicRational((1 << beta_exp) - 1, beta_exp)
    )
    mat, _spike = gen_wishart(GenSpec(model, m, n, b, beta=beta, seed=seed))
    delta = DyadicRational.decode(delta_code)
    value, cert = certify_discrepancy(mat, delta)
    return cert.certified


def _run_pool(fn, tasks):
    workers = _threads()
    if workers == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def cmd_experiment(args, argv) -> int:
    if args.experiment == "partition-sweep":
        n, trials = args.n, args.trials
        lo, hi, step = Fraction(args.alpha_min), Fraction(args.alpha_max), Fraction(args.alpha_step)
        if not (0 < lo <= hi and step > 0 and trials > 0 and n >= 2):
            raise FormatError("invalid sweep ranges")
        alphas = []
        a = lo
        while a <= hi:
            alphas.append(a)
            a += step
        lines = _header(_echo(argv), {"seed": args.seed, "trials": trials, "n": n})
        cols = "alpha\tb\ttrials\toracle_perfect_rate"
        if args.with_certifier:
            cols += "\tcertifier_no_perfect_rate"
        lines.append(cols)
        print("\n".join(lines))
        for a in alphas:
            b = max(1, int(a * n + Fraction(1, 2)))
            tasks = [(n, b, args.seed + t) for t in range(trials)]
            if args.with_certifier:
                res = _run_pool(_trial_partition_sweep_cert, tasks)
                perfect = sum(1 for p, _ in res if p)
                certed = sum(1 for _, c in res if c)
                print(f"{a}\t{b}\t{trials}\t{Fraction(perfect, trials)}\t{Fraction(certed, trials)}")
            else:
                res = _run_pool(_trial_partition_sweep, tasks)
                perfect = sum(res)
                print(f"{a}\t{b}\t{trials}\t{Fraction(perfect, trials)}")
            sys.stdout.flush()
            _heartbeat(f"alpha={a} done")
        return EXIT_OK

    if args.experiment == "completeness":
        trials = args.trials
        if trials <= 0:
            raise FormatError("trials must be positive")
        if args.dist == "gaussian":
            m = args.m if args.m else args.n
            tasks = [(m, args.n, args.seed + t, args.paper_scale) for t in range(trials)]
            res = _run_pool(_trial_completeness_gaussian, tasks)
            rate = Fraction(sum(res), trials)
            lines = _header(_echo(argv), {"seed": args.seed})
            lines.append("dist\tm\tn\ttrials\tsuccess_rate")
            lines.append(f"gaussian\t{m}\t{args.n}\t{trials}\t{rate}")
            print("\n".join(lines))
        else:
            if not args.b:
                raise FormatError("uniform01 completeness needs --b")
            tasks = [(args.n, args.b, args.seed + t) for t in range(trials)]
            res = _run_pool(_trial_completeness_partition, tasks)
            rate = Fraction(sum(1 for r, _ in res if r), trials)
            perfect = Fraction(sum(1 for _, p in res if p), trials)
            lines = _header(_echo(argv), {"seed": args.seed})
            lines.append("dist\tn\tb\ttrials\tsuccess_rate\toracle_perfect_rate")
            lines.append(f"uniform01\t{args.n}\t{args.b}\t{trials}\t{rate}\t{perfect}")
            print("\n".join(lines))
        return EXIT_OK

    if args.experiment == "wishart-detect":
        m = args.m if args.m else args.n
        n, trials = args.n, args.trials
        if trials <= 0 or not 1 <= m <= n:
            raise FormatError("invalid wishart ranges")
        params = default_parameters(m, n, "gaussian")
        k = -params.delta.log2()
        # beta close enough to 1 that sqrt(n (1-beta)) falls well below delta
        beta_exp = args.beta_exp if args.beta_exp else 2 * (k + (n - 1).bit_length()) + 4
        b = args.b if args.b else max(params.b, k + (n - 1).bit_length() + 9)
        delta_code = params.delta.encode()
        null_tasks = [("wishart_null", m, n, b, beta_exp, delta_code, args.seed + t) for t in range(trials)]
        planted_tasks = [
            ("wishart_planted", m, n, b, beta_exp, delta_code, args.seed + t) for t in range(trials)
        ]
        null_res = _run_pool(_trial_wishart, null_tasks)
        _heartbeat("null trials done")
        planted_res = _run_pool(_trial_wishart, planted_tasks)
        correct = sum(null_res) + sum(1 for r in planted_res if not r)
        lines = _header(_echo(argv), {"seed": args.seed})
        lines.append("m\tn\tb\tbeta\tdelta\ttrials_each\tnull_certified\tplanted_certified\taccuracy")
        beta_str = f"1-2^-{beta_exp}"
        lines.append(
            f"{m}\t{n}\t{b}\t{beta_str}\t{delta_code}\t{trials}"
            f"\t{sum(null_res)}\t{sum(planted_res)}\t{Fraction(correct, 2 * trials)}"
        )
        print("\n".join(lines))
        return EXIT_OK

    raise FormatError(f"unknown experiment {args.experiment!r}")


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="disccert", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--model", required=True, choices=["gaussian", "uniform01", "wishart_null", "wishart_planted"])
    g.add_argument("--m", type=int, default=1)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--b", type=int, required=True)
    g.add_argument("--beta", default=None, help="spike strength, dyadic (e.g. 3/2^2)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", default=None)
    g.add_argument("--spike-out", default=None)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("certify", help="certify a discrepancy lower bound")
    c.add_argument("--mode", required=True, choices=["gaussian", "partition", "raw"])
    c.add_argument("--instance", required=True)
    c.add_argument("--delta", default=None, help="slab width for raw mode, e.g. 1/2^4")
    c.add_argument("--alpha-log2", type=int, default=None)
    c.add_argument("--paper-scale", action="store_true", help="use the conservative parameter regime")
    c.add_argument("--cert-out", default=None)
    c.add_argument("--oracle-check", action="store_true")
    c.set_defaults(func=cmd_certify)

    v = sub.add_parser("verify", help="re-verify a certificate against its instance")
    v.add_argument("--instance", required=True)
    v.add_argument("--cert", required=True)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="exact brute-force ground truth")
    osub = o.add_subparsers(dest="oracle_op", required=True)
    od = osub.add_parser("disc")
    od.add_argument("--instance", required=True)
    od.add_argument("--guard", type=int, default=25)
    op = osub.add_parser("partition")
    op.add_argument("--instance", required=True)
    op.add_argument("--guard", type=int, default=26)
    oa = osub.add_parser("anticonc")
    oa.add_argument("--dist", required=True, choices=["gaussian", "uniform01"])
    oa.add_argument("--y", required=True, help="comma-separated rational coordinates")
    oa.add_argument("--theta", required=True)
    oa.add_argument("--b", type=int, required=True)
    oa.add_argument("--trials", type=int, required=True)
    oa.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle)

    e = sub.add_parser("experiment", help="deterministic Monte Carlo sweeps")
    e.add_argument("experiment", choices=["partition-sweep", "wishart-detect", "completeness"])
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--m", type=int, default=None)
    e.add_argument("--b", type=int, default=None)
    e.add_argument("--dist", choices=["gaussian", "uniform01"], default="gaussian")
    e.add_argument("--trials", type=int, default=50)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--alpha-min", default="3/5")
    e.add_argument("--alpha-max", default="7/5")
    e.add_argument("--alpha-step", default="1/10")
    e.add_argument("--with-certifier", action="store_true")
    e.add_argument("--beta-exp", type=int, default=None)
    e.add_argument("--paper-scale", action="store_true")
    e.set_defaults(func=cmd_experiment)
    return ap


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, argv)
    except (DiscCertError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
