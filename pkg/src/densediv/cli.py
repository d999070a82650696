"""Command line interface: ``dense <subcommand>``.

Every experiment gets a subcommand that emits one result document as CSV or
JSON (stdout by default).  Progress and diagnostics go to stderr only, so
stdout always stays machine-readable.  Exit codes: 0 success, 1 runtime
failure (capacity, cache integrity, selftest mismatch), 2 usage or domain
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction

from . import experiments, sieve
from .arithmetic import carmichael, divisors, euler_phi, factorize
from .density import max_divisor_ratio
from .errors import CacheIntegrityError, CapacityError
from .experiments import (
    OmegaProfile,
    ScanResult,
    ThetaProfile,
    Witness,
    recount_pure,
    reverify_witnesses,
)

#: how parameter values are typed when parsing emitted documents back.
PARAM_TYPES = {
    "mode": str,
    "target": str,
    "u": Fraction,
    "h": int,
    "c": Fraction,
    "T": int,
    "y": int,
    "z": int,
    "g": Fraction,
    "eps": Fraction,
    "window_lo": int,
    "window_hi": int,
    "reference_bound": float,
    "a": int,
    "b": int,
    "w_over_log_w": float,
    "D": int,
    "phi_D": int,
    "decay_exponent": Fraction,
}

_SELFTEST_X = 2000


def _render_param(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


def _parse_param(key: str, raw):
    kind = PARAM_TYPES.get(key, str)
    if kind is Fraction:
        return Fraction(str(raw))
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    return str(raw)


# --- emitters / parsers -----------------------------------------------------


def scan_result_to_json(r: ScanResult) -> str:
    doc = {
        "type": "scan_result",
        "experiment_id": r.experiment_id,
        "x": r.x,
        "parameters": {k: _render_param(v) for k, v in sorted(r.parameters.items())},
        "total": r.total,
        "hits": r.hits,
        "fraction": {
            "num": r.fraction.numerator,
            "den": r.fraction.denominator,
            "decimal": r.fraction_decimal,
        },
        "elapsed_ms": r.elapsed_ms,
        "witnesses": [{"n": w.n, "hit": w.hit} for w in r.witnesses],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_scan_result_json(text: str) -> ScanResult:
    doc = json.loads(text)
    if doc.get("type") != "scan_result":
        raise ValueError(f"not a scan_result document: {doc.get('type')!r}")
    params = {k: _parse_param(k, v) for k, v in doc["parameters"].items()}
    wits = tuple(Witness(int(w["n"]), bool(w["hit"])) for w in doc["witnesses"])
    return ScanResult(
        doc["experiment_id"], int(doc["x"]), params, int(doc["total"]),
        int(doc["hits"]), wits, float(doc["elapsed_ms"]),
    )


_FIXED_COLS = ("experiment_id", "x", "total", "hits",
               "fraction_num", "fraction_den", "fraction_decimal",
               "elapsed_ms", "witnesses")


def scan_result_to_csv(r: ScanResult) -> str:
    keys = sorted(r.parameters)
    header = ["experiment_id", "x", *keys, "total", "hits",
              "fraction_num", "fraction_den", "fraction_decimal",
              "elapsed_ms", "witnesses"]
    wit_cell = ";".join(("+" if w.hit else "-") + str(w.n) for w in r.witnesses)
    row = [r.experiment_id, str(r.x)]
    for k in keys:
        v = r.parameters[k]
        row.append(str(v) if not isinstance(v, float) else repr(v))
    row += [str(r.total), str(r.hits),
            str(r.fraction.numerator), str(r.fraction.denominator),
            r.fraction_decimal, repr(r.elapsed_ms), wit_cell]
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    w.writerow(row)
    return buf.getvalue()


def parse_scan_result_csv(text: str) -> ScanResult:
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2:
        raise ValueError("csv document needs a header and one row")
    header, row = rows[0], rows[1]
    rec = dict(zip(header, row))
    param_keys = [k for k in header if k not in _FIXED_COLS]
    params = {k: _parse_param(k, rec[k]) for k in param_keys}
    wits = []
    if rec["witnesses"]:
        for tok in rec["witnesses"].split(";"):
            wits.append(Witness(int(tok[1:]), tok[0] == "+"))
    return ScanResult(
        rec["experiment_id"], int(rec["x"]), params, int(rec["total"]),
        int(rec["hits"]), tuple(wits), float(rec["elapsed_ms"]),
    )


def theta_profile_to_json(t: ThetaProfile) -> str:
    doc = {
        "type": "theta_profile",
        "x": t.x,
        "prime_count": t.prime_count,
        "grid": [{"c": str(c), "qualifying": q} for c, q in t.grid],
        "elapsed_ms": t.elapsed_ms,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_theta_profile_json(text: str) -> ThetaProfile:
    doc = json.loads(text)
    if doc.get("type") != "theta_profile":
        raise ValueError(f"not a theta_profile document: {doc.get('type')!r}")
    grid = tuple((Fraction(e["c"]), int(e["qualifying"])) for e in doc["grid"])
    return ThetaProfile(int(doc["x"]), int(doc["prime_count"]), grid, float(doc["elapsed_ms"]))


def theta_profile_to_csv(t: ThetaProfile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["x", "prime_count", "c", "qualifying", "elapsed_ms"])
    for c, q in t.grid:
        w.writerow([t.x, t.prime_count, str(c), q, repr(t.elapsed_ms)])
    return buf.getvalue()


def parse_theta_profile_csv(text: str) -> ThetaProfile:
    rows = list(csv.reader(io.StringIO(text)))
    grid = []
    x = prime_count = 0
    elapsed = 0.0
    for rec in rows[1:]:
        x, prime_count = int(rec[0]), int(rec[1])
        grid.append((Fraction(rec[2]), int(rec[3])))
        elapsed = float(rec[4])
    return ThetaProfile(x, prime_count, tuple(grid), elapsed)


def omega_profile_to_json(o: OmegaProfile) -> str:
    doc = {
        "type": "omega_profile",
        "x": o.x,
        "count": o.count,
        "omega_mean": o.omega_mean,
        "omega_median": o.omega_median,
        "omega_deciles": list(o.omega_deciles),
        "ratio_count": o.ratio_count,
        "ratio_mean": o.ratio_mean,
        "ratio_median": o.ratio_median,
        "ratio_deciles": list(o.ratio_deciles),
        "reference_half_loglog_sq": o.reference_half_loglog_sq,
        "elapsed_ms": o.elapsed_ms,
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_omega_profile_json(text: str) -> OmegaProfile:
    doc = json.loads(text)
    if doc.get("type") != "omega_profile":
        raise ValueError(f"not an omega_profile document: {doc.get('type')!r}")
    return OmegaProfile(
        int(doc["x"]), int(doc["count"]), float(doc["omega_mean"]),
        float(doc["omega_median"]), tuple(float(v) for v in doc["omega_deciles"]),
        int(doc["ratio_count"]), float(doc["ratio_mean"]), float(doc["ratio_median"]),
        tuple(float(v) for v in doc["ratio_deciles"]),
        float(doc["reference_half_loglog_sq"]), float(doc["elapsed_ms"]),
    )


def omega_profile_to_csv(o: OmegaProfile) -> str:
    header = (["x", "count", "omega_mean", "omega_median"]
              + [f"omega_d{k}0" for k in range(1, 10)]
              + ["ratio_count", "ratio_mean", "ratio_median"]
              + [f"ratio_d{k}0" for k in range(1, 10)]
              + ["reference_half_loglog_sq", "elapsed_ms"])
    row = ([o.x, o.count, repr(o.omega_mean), repr(o.omega_median)]
           + [repr(v) for v in o.omega_deciles]
           + [o.ratio_count, repr(o.ratio_mean), repr(o.ratio_median)]
           + [repr(v) for v in o.ratio_deciles]
           + [repr(o.reference_half_loglog_sq), repr(o.elapsed_ms)])
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    w.writerow(row)
    return buf.getvalue()


def parse_omega_profile_csv(text: str) -> OmegaProfile:
    rows = list(csv.reader(io.StringIO(text)))
    rec = dict(zip(rows[0], rows[1]))
    return OmegaProfile(
        int(rec["x"]), int(rec["count"]), float(rec["omega_mean"]),
        float(rec["omega_median"]),
        tuple(float(rec[f"omega_d{k}0"]) for k in range(1, 10)),
        int(rec["ratio_count"]), float(rec["ratio_mean"]), float(rec["ratio_median"]),
        tuple(float(rec[f"ratio_d{k}0"]) for k in range(1, 10)),
        float(rec["reference_half_loglog_sq"]), float(rec["elapsed_ms"]),
    )


# --- argument plumbing ------------------------------------------------------


def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {s!r} ({exc})")


def _add_common(p: argparse.ArgumentParser, sieved: bool = True) -> None:
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", default="-", help="output path, - for stdout")
    p.add_argument("--progress", action="store_true", help="progress lines on stderr")
    p.add_argument("--selftest", action="store_true",
                   help="run at tiny x and cross-check against the exact route")
    if sieved:
        p.add_argument("--segment-length", type=int, default=None)
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--cache-dir", default=None,
                       help="segment cache directory (default: $DENSE_CACHE_DIR)")


def _cache_dir(args) -> str | None:
    explicit = getattr(args, "cache_dir", None)
    return explicit if explicit is not None else os.environ.get("DENSE_CACHE_DIR")


def _progress_cb(args):
    if not getattr(args, "progress", False):
        return None

    def cb(done, total):
        print(f"progress: {done}/{total} segments", file=sys.stderr)

    return cb


def _emit(args, text: str) -> None:
    if args.output == "-":
        sys.stdout.write(text)
    else:
        with open(args.output, "w") as fh:
            fh.write(text)


def _sieve_kwargs(args):
    return dict(
        segment_length=getattr(args, "segment_length", None),
        workers=getattr(args, "workers", 1),
        cache_dir=_cache_dir(args),
        progress=_progress_cb(args),
    )


def _finish_scan(args, res: ScanResult) -> int:
    if args.selftest:
        check_x = res.x
        total, hits = recount_pure(res.experiment_id, check_x, res.parameters)
        bad = reverify_witnesses(res)
        if (total, hits) != (res.total, res.hits) or bad:
            print(
                f"selftest FAILED for {res.experiment_id}: scan {res.hits}/{res.total}, "
                f"exact {hits}/{total}, bad witnesses {[w.n for w in bad]}",
                file=sys.stderr,
            )
            return 1
        print(f"selftest ok: {res.experiment_id} x={res.x} hits={res.hits}/{res.total}",
              file=sys.stderr)
    text = scan_result_to_json(res) if args.format == "json" else scan_result_to_csv(res)
    _emit(args, text)
    return 0


# --- subcommand handlers ----------------------------------------------------


def _cmd_phi(args) -> int:
    n = args.n
    f = factorize(n)
    phi = euler_phi(f)
    lam = carmichael(f)
    doc = {
        "type": "phi_info",
        "n": n,
        "phi": phi,
        "lambda": lam,
        "divisors": list(divisors(f)),
        "max_divisor_ratio": str(max_divisor_ratio(f)),
        "max_divisor_ratio_phi": str(max_divisor_ratio(factorize(phi))),
        "max_divisor_ratio_lambda": str(max_divisor_ratio(factorize(lam))),
    }
    if args.selftest:
        limit = min(n, 400)
        for m in range(1, limit + 1):
            bphi = sum(1 for a in range(1, m + 1) if math.gcd(a, m) == 1)
            if bphi != euler_phi(factorize(m)):
                print(f"selftest FAILED: phi({m})", file=sys.stderr)
                return 1
            blam = 1
            for a in range(1, m + 1):
                if math.gcd(a, m) == 1:
                    order, acc = 1, a % m
                    while acc != 1 % m:
                        acc = acc * a % m
                        order += 1
                    blam = math.lcm(blam, order)
            if blam != carmichael(factorize(m)):
                print(f"selftest FAILED: lambda({m})", file=sys.stderr)
                return 1
        print(f"selftest ok: phi/lambda agree with unit-group brute force to {limit}",
              file=sys.stderr)
    if args.format == "json":
        _emit(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf)
        keys = ["n", "phi", "lambda", "divisors", "max_divisor_ratio",
                "max_divisor_ratio_phi", "max_divisor_ratio_lambda"]
        w.writerow(keys)
        w.writerow([doc["n"], doc["phi"], doc["lambda"],
                    ";".join(map(str, doc["divisors"])), doc["max_divisor_ratio"],
                    doc["max_divisor_ratio_phi"], doc["max_divisor_ratio_lambda"]])
        _emit(args, buf.getvalue())
    return 0


def _cmd_scan_density(args) -> int:
    if (args.h is None) != (args.c is None):
        print("error: --h and --c must be given together", file=sys.stderr)
        return 2
    x = _SELFTEST_X if args.selftest else args.x
    interval = None if args.h is None else (args.h, args.c)
    res = experiments.scan_density(x, args.u, interval, args.target, **_sieve_kwargs(args))
    return _finish_scan(args, res)


def _cmd_full_range(args) -> int:
    x = _SELFTEST_X if args.selftest else args.x
    res = experiments.scan_full_range_density(x, args.h, **_sieve_kwargs(args))
    return _finish_scan(args, res)


def _cmd_count_b(args) -> int:
    x = _SELFTEST_X if args.selftest else args.x
    res = experiments.count_B(x, args.y, args.z, **_sieve_kwargs(args))
    return _finish_scan(args, res)


def _cmd_nondense(args) -> int:
    x = _SELFTEST_X if args.selftest else args.x
    res = experiments.nondense_scan(x, args.c, **_sieve_kwargs(args))
    return _finish_scan(args, res)


def _cmd_prime_gap(args) -> int:
    x = _SELFTEST_X if args.selftest else args.x
    res = experiments.phi_prime_gap_scan(x, args.g, args.eps, **_sieve_kwargs(args))
    return _finish_scan(args, res)


def _cmd_shifted_prime(args) -> int:
    w = _SELFTEST_X if args.selftest else args.w
    res = experiments.shifted_prime_scan(w, args.a, args.b, progress=_progress_cb(args))
    return _finish_scan(args, res)


def _cmd_landau(args) -> int:
    x = _SELFTEST_X if args.selftest else args.x
    res = experiments.landau_scan(x, args.d, progress=_progress_cb(args))
    return _finish_scan(args, res)


def _cmd_phi_ratio(args) -> int:
    x = _SELFTEST_X if args.selftest else args.x
    res = experiments.phi_ratio_small(x, args.eps, **_sieve_kwargs(args))
    return _finish_scan(args, res)


def _cmd_theta(args) -> int:
    from .arithmetic import is_prime, largest_prime_factor

    x = _SELFTEST_X if args.selftest else args.x
    grid = [Fraction(tok) for tok in args.grid.split(",") if tok.strip()]
    prof = experiments.theta_profile(x, grid, progress=_progress_cb(args))
    if args.selftest:
        for c, q in prof.grid:
            brute = 0
            for p in range(2, x + 1):
                if is_prime(p):
                    t = largest_prime_factor(p - 1) if p > 2 else 0
                    if t > 0 and t ** c.denominator > p ** c.numerator:
                        brute += 1
            if brute != q:
                print(f"selftest FAILED: theta c={c}: scan {q}, exact {brute}",
                      file=sys.stderr)
                return 1
        print(f"selftest ok: theta_profile x={x} over {len(prof.grid)} grid points",
              file=sys.stderr)
    text = theta_profile_to_json(prof) if args.format == "json" else theta_profile_to_csv(prof)
    _emit(args, text)
    return 0


def _cmd_omega(args) -> int:
    x = _SELFTEST_X if args.selftest else args.x
    prof = experiments.omega_phi_profile(x, **_sieve_kwargs(args))
    if args.selftest:
        from .arithmetic import factorize as fz

        brute_counts = {}
        for n in range(1, x + 1):
            om = fz(euler_phi(fz(n))).big_omega
            brute_counts[om] = brute_counts.get(om, 0) + 1
        mean = sum(k * v for k, v in brute_counts.items()) / x
        if abs(mean - prof.omega_mean) > 1e-9:
            print(f"selftest FAILED: omega mean scan {prof.omega_mean}, exact {mean}",
                  file=sys.stderr)
            return 1
        print(f"selftest ok: omega_phi_profile x={x} mean={prof.omega_mean:.6f}",
              file=sys.stderr)
    text = omega_profile_to_json(prof) if args.format == "json" else omega_profile_to_csv(prof)
    _emit(args, text)
    return 0


def _cmd_sieve(args) -> int:
    limit = (_SELFTEST_X + 1) if args.selftest else args.limit
    if args.selftest:
        from .arithmetic import factorize as fz

        seg = sieve.build_segment(1, 1001)
        for n in range(1, 1001):
            f = fz(n)
            i = n - 1
            spf = f.factors[0][0] if f.factors else 0
            if (seg.phi[i], seg.lam[i], seg.spf[i]) != (euler_phi(f), carmichael(f), spf):
                print(f"selftest FAILED: sieve row n={n}", file=sys.stderr)
                return 1
        print("selftest ok: sieve matches exact phi/lambda/spf to 1000", file=sys.stderr)
    cfg = sieve.SieveConfig(
        limit=limit,
        segment_length=args.segment_length or sieve.DEFAULT_SEGMENT_LENGTH,
        worker_count=args.workers,
        cache_dir=_cache_dir(args),
    )
    summary = sieve.iterate_segments(cfg, None, progress=_progress_cb(args))
    doc = {
        "type": "sieve_summary",
        "limit": summary.limit,
        "segment_length": summary.segment_length,
        "segment_count": summary.segment_count,
        "built": summary.built,
        "from_cache": summary.from_cache,
        "elapsed_ms": summary.elapsed_ms,
    }
    if args.format == "json":
        _emit(args, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(list(doc.keys())[1:])
        w.writerow([doc[k] for k in list(doc.keys())[1:]])
        _emit(args, buf.getvalue())
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dense",
        description="dense divisors of phi and lambda: exact predicates and scans",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phi", help="phi, lambda and divisor structure of one n")
    p.add_argument("--n", type=int, required=True)
    _add_common(p, sieved=False)
    p.set_defaults(fn=_cmd_phi)

    p = sub.add_parser("scan-density", help="count n <= x with u-dense phi/lambda")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--u", type=_frac, required=True)
    p.add_argument("--h", type=int, default=None, help="interval start (with --c)")
    p.add_argument("--c", type=_frac, default=None, help="interval end exponent (with --h)")
    p.add_argument("--target", choices=("phi", "lambda", "both"), default="both")
    _add_common(p)
    p.set_defaults(fn=_cmd_scan_density)

    p = sub.add_parser("full-range", help="count n with phi,lambda dense on the whole useful range")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--h", type=int, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_full_range)

    p = sub.add_parser("count-b", help="B(x, y, z): phi(n) has a divisor in (y, z]")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--y", type=int, required=True)
    p.add_argument("--z", type=int, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_count_b)

    p = sub.add_parser("nondense", help="count n where neither phi nor lambda is floor(x^c)-dense")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--c", type=_frac, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_nondense)

    p = sub.add_parser("theta-profile", help="primes with P+(p-1) > p^c over a grid of c")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--grid", default="1/2,11/20,3/5,13/20,7/10",
                   help="comma separated rational exponents")
    _add_common(p, sieved=False)
    p.set_defaults(fn=_cmd_theta)

    p = sub.add_parser("prime-gap", help="phi(n) missing any prime factor in (x^g, x^(g(1+eps))]")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--g", type=_frac, required=True)
    p.add_argument("--eps", type=_frac, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_prime_gap)

    p = sub.add_parser("shifted-prime", help="primes p <= w with p-1 missing factors in (a, b]")
    p.add_argument("--w", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    _add_common(p, sieved=False)
    p.set_defaults(fn=_cmd_shifted_prime)

    p = sub.add_parser("omega-profile", help="distribution of Omega(phi(n))")
    p.add_argument("--x", type=int, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_omega)

    p = sub.add_parser("landau", help="count n with no prime factor = 1 (mod D)")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--d", "--D", dest="d", type=int, required=True)
    _add_common(p, sieved=False)
    p.set_defaults(fn=_cmd_landau)

    p = sub.add_parser("phi-ratio", help="count n with phi(n) <= eps * n")
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--eps", type=_frac, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_phi_ratio)

    p = sub.add_parser("sieve", help="build (and optionally cache) phi/lambda/spf segments")
    p.add_argument("--limit", type=int, required=True)
    _add_common(p)
    p.set_defaults(fn=_cmd_sieve)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (CapacityError, CacheIntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
