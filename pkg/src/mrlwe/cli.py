"""Command-line surface for reproducible experiments.

Verbs: params, sample, test, reduce, bench, demo encrypt2d.  Every command is
deterministic given (config, seed), except the wall-clock columns of bench.

Exit codes: 0 success/pass, 1 validation or test failure, 2 usage error,
3 I/O error.  A flat JSON config file (--config, versioned) supplies defaults;
explicit flags override it.  Environment overrides are limited to
MRLWE_OUT_DIR (prefix for relative output paths) and MRLWE_THREADS (recorded
in transcripts; execution is sequential with per-branch derived RNGs, which a
parallel schedule would reproduce).
"""

from __future__ import annotations

import argparse
import json
import os
import statistics
import sys
import time

import numpy as np

from . import reductions, ring, rlwe, sampleio, sigdemo, stats
from .gaussian import GaussianSpec
from .params import (
    RingParams,
    SecurityParams,
    check_theorem_rates,
    find_prime,
    format_params,
    spherical_rate,
    validate,
)
from .seeds import parse_seed, rng_from_seed

CONFIG_VERSION = 1
DEFAULT_SEED = "00" * 32


class UsageError(Exception):
    pass


def _outpath(path: str) -> str:
    base = os.environ.get("MRLWE_OUT_DIR")
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


def _parse_moduli(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(tok) for tok in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad conductor list {text!r}") from exc


def _positive_float(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"{text} is not positive")
    return v


def _ring(args) -> RingParams:
    return RingParams.create(_parse_moduli(args.m), args.q)


# --- verbs ----------------------------------------------------------------------


def cmd_params(args) -> int:
    params = _ring(args)
    report = validate(params)
    print(report)
    if report.valid and args.alpha is not None:
        sec = SecurityParams(
            args.alpha,
            spherical_rate(args.alpha, params.total_degree_n, args.samples),
            args.samples,
        )
        rates = check_theorem_rates(params, sec, c=args.rate_const)
        print(
            f"alpha < sqrt(log n / n): {rates.alpha_below_rate}"
            f" ({sec.alpha:.6g} vs {rates.rate_bound:.6g})"
        )
        print(
            f"alpha*q >= c*sqrt(log n): {rates.alpha_q_large_enough}"
            f" ({rates.alpha_q:.6g} vs {rates.alpha_q_bound:.6g})"
        )
        print(f"xi({args.samples} samples) = {rates.xi:.6g}")
    return 0 if report.valid else 1


def _secret_and_rng(args, params):
    seed = parse_seed(args.seed)
    rng = rng_from_seed(seed, 0)
    secret = rlwe.random_secret(params, rng_from_seed(seed, 1))
    return secret, rng, seed


def cmd_sample(args) -> int:
    params = _ring(args)
    report = validate(params)
    if not report.valid:
        print(report, file=sys.stderr)
        return 1
    secret, rng, _ = _secret_and_rng(args, params)
    psi = GaussianSpec.spherical(params, args.alpha) if args.alpha else None
    if args.dist == "uniform":
        samples = rlwe.sample_uniform_batch(params, rng, args.count, args.frac_bits)
    elif args.dist == "rlwe":
        samples = rlwe.sample_rlwe_batch(secret, psi, params, rng, args.count, args.frac_bits)
    elif args.dist == "hybrid":
        if args.level is None:
            raise UsageError("--dist hybrid needs --level")
        samples = rlwe.sample_hybrid_batch(
            secret, psi, args.level, params, rng, args.count, args.frac_bits
        )
    elif args.dist == "discrete":
        base = rlwe.sample_rlwe_batch(secret, psi, params, rng, args.count, args.frac_bits)
        samples = [rlwe.to_discrete(s, args.p, args.w, params) for s in base]
    else:  # pragma: no cover - argparse choices
        raise UsageError(f"unknown distribution {args.dist}")
    out = _outpath(args.out)
    sampleio.write_samples(out, params, samples)
    print(f"wrote {args.count} {args.dist} samples for {format_params(params)} to {out}")
    return 0


def cmd_test(args) -> int:
    params, f, samples = sampleio.read_samples(args.infile)
    q = params.q
    a_obs = np.array([s.a.coeffs() for s in samples], dtype=np.int64)
    if f == 0:
        b_obs = np.array([s.b.coeffs() for s in samples], dtype=np.int64)
    else:
        b_obs = np.array([np.asarray(s.b, dtype=object) >> f for s in samples], dtype=np.int64)
    verdicts = [
        stats.chi_square_uniform(a_obs, q, args.threshold, name="a-uniform"),
        stats.chi_square_uniform(b_obs, q, args.threshold, name="b-uniform"),
    ]
    payload = json.dumps([json.loads(v.to_json()) for v in verdicts], indent=2)
    print(payload)
    if args.out:
        with open(_outpath(args.out), "w") as fh:
            fh.write(payload + "\n")
    return 0 if all(v.passed for v in verdicts) else 1


def cmd_reduce(args) -> int:
    params = _ring(args)
    report = validate(params)
    if not report.valid:
        print(report, file=sys.stderr)
        return 1
    secret, rng, seed = _secret_and_rng(args, params)
    transcript = reductions.ReductionTranscript(seed_hex=seed.hex())
    transcript.record(
        step="setup",
        mode=args.mode,
        params=format_params(params),
        threads=os.environ.get("MRLWE_THREADS", "1"),
    )
    psi = GaussianSpec.spherical(params, args.alpha) if args.alpha else None
    ok = False
    if args.mode == "search":
        oracle = reductions.planted_exact_qi_solver(args.slot, params)
        draw = lambda c: rlwe.sample_rlwe_batch(secret, None, params, rng, c)
        recovered = reductions.search_from_qi(oracle, draw, params, transcript)
        ok = recovered.s == secret.s
        transcript.record(step="verdict", recovered=ok)
        print(f"search via ideal {args.slot}: recovered secret exactly: {ok}")
    elif args.mode == "wdlwe":
        oracle = reductions.planted_wdlwe_distinguisher(secret, args.slot, params)
        draw = lambda c: rlwe.sample_rlwe_batch(secret, psi, params, rng, c)
        g = reductions.solve_qi_with_wdlwe(oracle, draw, args.slot, params, rng)
        truth = int(secret.s.slots()[args.slot - 1])
        ok = g == truth
        transcript.record(step="verdict", guess=g, truth=truth, recovered=ok)
        print(f"residue at slot {args.slot}: guessed {g}, truth {truth}")
    elif args.mode == "walk":
        oracle = reductions.planted_slot_distinguisher(secret, args.slot, params)
        try:
            level = reductions.hybrid_walk(
                oracle, secret, psi, params, rng, trials=args.trials, transcript=transcript
            )
            ok = level == args.slot
            transcript.record(step="verdict", level=level, expected=args.slot)
            print(f"hybrid walk localized the gap at level {level}")
        except reductions.NoGapFound as exc:
            transcript.record(step="verdict", no_gap=True, profile=exc.profile)
            print("hybrid walk found no separated pair")
    else:  # pragma: no cover - argparse choices
        raise UsageError(f"unknown mode {args.mode}")
    if args.out:
        transcript.dump(_outpath(args.out))
    return 0 if ok else 1


def cmd_bench(args) -> int:
    sizes = [int(tok) for tok in args.sizes.split(",")]
    rows = []
    for n in sizes:
        if n < 2 or n & (n - 1):
            raise UsageError(f"bench sizes must be powers of two, got {n}")
        m = 2 * n
        q = find_prime(1 << 14, m)
        params = RingParams.create((m,), q)
        rng = rng_from_seed(parse_seed(args.seed), n)
        a = ring.random_element(params, rng)
        b = ring.random_element(params, rng)
        equal = ring.mul(a, b) == ring.mul_schoolbook(a, b)  # also warms tables
        t_ntt, t_school = [], []
        for _ in range(args.runs):
            t0 = time.perf_counter()
            ring.mul(a, b)
            t_ntt.append(time.perf_counter() - t0)
        for _ in range(args.runs):
            t0 = time.perf_counter()
            ring.mul_schoolbook(a, b)
            t_school.append(time.perf_counter() - t0)
        med_n = statistics.median(t_ntt)
        med_s = statistics.median(t_school)
        rows.append((n, q, med_n * 1e3, med_s * 1e3, med_s / med_n, equal))
    header = "n,q,ntt_ms,schoolbook_ms,speedup,equal"
    lines = [header] + [
        f"{n},{q},{tn:.4f},{ts:.4f},{sp:.2f},{int(eq)}" for n, q, tn, ts, sp, eq in rows
    ]
    text = "\n".join(lines)
    print(text)
    if args.out:
        with open(_outpath(args.out), "w") as fh:
            fh.write(text + "\n")
    return 0


def cmd_demo_encrypt2d(args) -> int:
    img = sigdemo.read_pgm(args.image)
    h, w = img.shape
    params = sigdemo.demo_params(w, h, q=args.q)
    rng = rng_from_seed(parse_seed(args.seed), 0)
    key = sigdemo.keygen(params, t=args.t, rng=rng_from_seed(parse_seed(args.seed), 1))
    kernel = sigdemo.KERNELS[args.kernel]
    kimg = np.zeros((h, w), dtype=np.int64)
    kimg[: kernel.shape[0], : kernel.shape[1]] = kernel
    ct_img = sigdemo.encrypt(sigdemo.image_to_element(params, img), key, rng)
    ct_ker = sigdemo.encrypt(sigdemo.image_to_element(params, kimg), key, rng)
    ct_out = sigdemo.mul_ct(ct_img, ct_ker)
    dec = sigdemo.element_to_image(params, sigdemo.decrypt(ct_out, key), key.t)
    oracle = sigdemo.negacyclic_convolve_2d(img % key.t, kimg, key.t)
    exact = bool(np.array_equal(dec, oracle))
    out = _outpath(args.out)
    sigdemo.write_pgm(out, dec % 256)
    print(
        f"{format_params(params)}: encrypted {args.kernel} filter on {w}x{h} image -> {out}"
    )
    print(f"noise budget after multiply: {ct_out.noise_bits:.2f} bits")
    print(f"matches plaintext negacyclic convolution mod {key.t}: {exact}")
    return 0 if exact else 1


# --- parser -----------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="mrlwe", description=__doc__)
    top.add_argument("--config", help="flat JSON config supplying flag defaults")
    sub = top.add_subparsers(dest="command", required=True)

    def common_ring(p):
        p.add_argument("--m", required=True, help="conductors, e.g. 8,8")
        p.add_argument("--q", type=int, required=True, help="prime modulus")

    p = sub.add_parser("params", help="validate parameters and rate constraints")
    common_ring(p)
    p.add_argument("--alpha", type=_positive_float)
    p.add_argument("--samples", type=int, default=1)
    p.add_argument("--rate-const", type=float, default=1.0)
    p.set_defaults(fn=cmd_params)

    p = sub.add_parser("sample", help="generate a sample stream (MRLW file)")
    common_ring(p)
    p.add_argument("--dist", choices=["rlwe", "uniform", "hybrid", "discrete"], required=True)
    p.add_argument("--alpha", type=_positive_float)
    p.add_argument("--level", type=int)
    p.add_argument("--count", type=int, default=1000)
    p.add_argument("--frac-bits", type=int, default=rlwe.F_DEFAULT)
    p.add_argument("--p", type=int, default=2, help="discretization scale")
    p.add_argument("--w", type=int, default=0, help="discretization coset label")
    p.add_argument("--seed", default=DEFAULT_SEED, help="32-byte hex seed")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("test", help="run uniformity verdicts against a stream")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--threshold", type=float, default=stats.DEFAULT_P_THRESHOLD)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_test)

    p = sub.add_parser("reduce", help="drive a reduction with planted oracles")
    common_ring(p)
    p.add_argument("--mode", choices=["search", "wdlwe", "walk"], required=True)
    p.add_argument("--alpha", type=_positive_float)
    p.add_argument("--slot", type=int, default=1, help="1-based prime-ideal index")
    p.add_argument("--trials", type=int, default=40)
    p.add_argument("--seed", default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("bench", help="NTT vs schoolbook multiplication timings")
    p.add_argument("--sizes", default="16,256,4096")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--seed", default=DEFAULT_SEED)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("demo", help="demo applications")
    demo_sub = p.add_subparsers(dest="demo_command", required=True)
    p2 = demo_sub.add_parser("encrypt2d", help="encrypted 2D negacyclic filtering")
    p2.add_argument("--image", required=True, help="input PGM (P5)")
    p2.add_argument("--kernel", choices=sorted(sigdemo.KERNELS), default="blur3")
    p2.add_argument("--out", default="filtered.pgm")
    p2.add_argument("--t", type=int, default=sigdemo.DEFAULT_T)
    p2.add_argument("--q", type=int)
    p2.add_argument("--seed", default=DEFAULT_SEED)
    p2.set_defaults(fn=cmd_demo_encrypt2d)

    return top


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    try:
        path = argv[idx + 1]
    except IndexError as exc:
        raise UsageError("--config needs a path") from exc
    with open(path) as fh:
        cfg = json.load(fh)
    if cfg.pop("version", CONFIG_VERSION) != CONFIG_VERSION:
        raise UsageError("unsupported config version")
    parser.set_defaults(**cfg)
    return argv[:idx] + argv[idx + 2 :]


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError,) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
