"""Command-line entry point: ``wepe {gen-lut,encode,analyze,verify,bench}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
import zlib

import numpy as np

from . import analysis, checks
from .bench import run_bench
from .config import ConfigError, RunConfig, load_config
from .encoder import encode_grid, grid_coords, make_projection, project
from .lut import build_lut, write_field, write_lut
from .surrogate import finetune_encodings, ft_grid

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _grid(text: str) -> tuple[int, int]:
    try:
        h, w = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like HxW, got {text!r}")
    if h < 1 or w < 1:
        raise argparse.ArgumentTypeError("grid dimensions must be >= 1")
    return h, w


def _run_config(args) -> RunConfig:
    rc = load_config(args.config)
    mode = getattr(args, "mode", None)
    if mode:
        rc = RunConfig(mode, rc.encoder, rc.surrogate)
    grid = getattr(args, "grid", None)
    if grid:
        rc = RunConfig(rc.mode, rc.encoder.replace(grid_h=grid[0], grid_w=grid[1]), rc.surrogate)
    seed = getattr(args, "seed", None)
    if seed is not None:
        rc = RunConfig(rc.mode, rc.encoder.replace(proj_seed=seed), rc.surrogate)
    return rc


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _field_and_encodings(rc: RunConfig, projected: bool):
    enc = rc.encoder
    if rc.mode == "finetune":
        f = ft_grid(rc.surrogate, enc.grid_h, enc.grid_w)
        if projected:
            return finetune_encodings(f, make_projection(enc.proj_dim, enc.proj_seed))
        return f
    f = encode_grid(enc)
    if projected:
        return project(f, make_projection(enc.proj_dim, enc.proj_seed), enc)
    return f


def cmd_gen_lut(args) -> int:
    if args.res < 2:
        raise UsageError("--res must be >= 2")
    rc = _run_config(args)
    t0 = time.perf_counter()
    table = build_lut(rc.active, args.res, workers=args.threads)
    elapsed = time.perf_counter() - t0
    size = write_lut(table, args.out)
    crc = zlib.crc32(np.ascontiguousarray(table.data, dtype="<f4").tobytes())
    print(f"res={table.resolution} mode={table.mode} bytes={size} "
          f"data_bytes={table.nbytes} crc32={crc:08x} build_s={elapsed:.3f}")
    return EXIT_OK


def cmd_encode(args) -> int:
    rc = _run_config(args)
    h, w = rc.encoder.grid_h, rc.encoder.grid_w
    values = _field_and_encodings(rc, args.project)
    if args.format == "bin":
        if not args.out:
            raise UsageError("--format bin needs --out")
        write_field(args.out, values, rc.active)
        return EXIT_OK
    u, v = grid_coords(h, w)
    if args.format == "json":
        rows = [{"i": i, "j": j, "u": float(u[i, j]), "v": float(v[i, j]),
                 "values": values[i, j].tolist()} for i in range(h) for j in range(w)]
        _emit(json.dumps({"mode": rc.mode, "grid": [h, w], "rows": rows}) + "\n", args.out)
        return EXIT_OK
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    k = values.shape[-1]
    prefix = "e" if args.project else "f"
    wr.writerow(["i", "j", "u", "v"] + [f"{prefix}{c + (0 if args.project else 1)}" for c in range(k)])
    for i in range(h):
        for j in range(w):
            wr.writerow([i, j, repr(float(u[i, j])), repr(float(v[i, j]))]
                        + [repr(float(x)) for x in values[i, j]])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_analyze(args) -> int:
    rc = _run_config(args)
    enc = rc.encoder
    h, w = enc.grid_h, enc.grid_w
    if args.report == "decay":
        e = _field_and_encodings(rc, projected=True)
        rep = analysis.distance_decay_report(e, h, w, content_seed=args.content_seed)
        if args.format == "csv":
            buf = io.StringIO()
            wr = csv.writer(buf, lineterminator="\n")
            wr.writerow(["bin", "center", "count", "mean"])
            for b in range(analysis.N_BINS):
                m = rep.bin_means[b]
                wr.writerow([b, rep.bin_centers[b], int(rep.bin_counts[b]),
                             "" if np.isnan(m) else repr(float(m))])
            _emit(buf.getvalue(), args.out)
            return EXIT_OK
        doc = rep.to_dict()
    elif args.report == "correlation":
        doc = {"rho": analysis.dissimilarity_correlation(_field_and_encodings(rc, False))}
    elif args.report == "stats":
        doc = vars(analysis.feature_stats(_field_and_encodings(rc, False)))
    elif args.report == "attenuation":
        doc = analysis.local_attenuation_check(enc, seed=args.seed or 0).to_dict()
    else:  # sensitivity sweep over alpha_u = alpha_v
        doc = {"rows": []}
        for a in (0.2, 0.4, 0.6, 0.8, 1.0, 1.2):
            f = encode_grid(enc.replace(alpha_u=a, alpha_v=a))
            st = analysis.feature_stats(f)
            doc["rows"].append({"alpha": a, "rho": analysis.dissimilarity_correlation(f),
                                "mean_abs": st.mean_abs, "sat_frac": st.sat_frac,
                                "zero_frac": st.zero_frac})
    if args.format == "csv" and args.report != "decay":
        raise UsageError("csv output is only available for the decay report")
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    results = checks.run_suite(args.suite)
    failed = [r["id"] for r in results if not r["passed"]]
    if args.json:
        print(json.dumps({"suite": args.suite, "passed": not failed, "results": results}, indent=2))
    else:
        for r in results:
            print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['id']:<28} {r['detail']}")
        if failed:
            print("failed: " + ", ".join(failed))
    return EXIT_FAIL if failed else EXIT_OK


def cmd_bench(args) -> int:
    if args.res < 2:
        raise UsageError("--res must be >= 2")
    rc = _run_config(args)
    rep = run_bench(rc.encoder, res=args.res, n_points=args.n_points, repeats=args.repeats,
                    seed=args.seed or 0, threads=args.threads, compare_m=args.compare_m)
    if args.json:
        print(json.dumps(rep.to_dict(), indent=2))
    else:
        print(f"points={rep.n_points} M,N={rep.trunc_m_n} res={rep.resolution} threads={rep.threads}")
        print(f"direct {rep.direct_ns_per_eval:10.1f} ns/eval")
        print(f"lut    {rep.lut_ns_per_query:10.1f} ns/query")
        print(f"speedup {rep.speedup:.1f}x")
        if rep.decoupling_ratio is not None:
            print(f"lut time ratio M={args.compare_m} vs M={rep.trunc_m_n[0]}: {rep.decoupling_ratio:.3f}")
    if rep.decoupled is False:
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wepe", description="Weierstrass elliptic positional encoding tools")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, grid=True, mode=True):
        sp.add_argument("--config", help="JSON config with mode/lattice/encoder/surrogate sections")
        sp.add_argument("--seed", type=int, default=None, help="projection seed override")
        if grid:
            sp.add_argument("--grid", type=_grid, help="patch grid HxW")
        if mode:
            sp.add_argument("--mode", choices=["pretrain", "finetune"])

    sp = sub.add_parser("gen-lut", help="precompute and write a lookup table")
    common(sp, grid=False)
    sp.add_argument("--res", type=int, default=256)
    sp.add_argument("--out", required=True)
    sp.add_argument("--threads", type=int, default=1)
    sp.set_defaults(func=cmd_gen_lut)

    sp = sub.add_parser("encode", help="emit the feature field or projected encodings")
    common(sp)
    sp.add_argument("--format", choices=["csv", "json", "bin"], default="csv")
    sp.add_argument("--project", action="store_true", help="emit d-dimensional encodings")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("analyze", help="distance decay, correlation, stats, attenuation")
    common(sp)
    sp.add_argument("--report", choices=["decay", "correlation", "stats", "attenuation", "sensitivity"],
                    default="decay")
    sp.add_argument("--format", choices=["json", "csv"], default="json")
    sp.add_argument("--content-seed", type=int, default=None,
                    help="fuse N(0, I) content features drawn with this seed (decay report)")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("verify", help="run invariant suites")
    sp.add_argument("--suite", choices=sorted(checks.SUITES) + ["all"], default="all")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("bench", help="direct evaluation vs LUT query timing")
    common(sp, grid=False, mode=False)
    sp.add_argument("--res", type=int, default=256)
    sp.add_argument("--n-points", type=int, default=100_000)
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("--compare-m", type=int, default=None,
                    help="also time a LUT built with M=N=this value")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"wepe {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"wepe {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
