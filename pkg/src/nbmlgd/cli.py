"""Command-line interface.

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 truncated
results (a point stopped at ``max_frames`` before ``min_block_errors``),
4 selftest failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import pathlib
import sys
from dataclasses import asdict

from . import metrics, sim
from .code import AlistError, format_alist, generate_regular, load_alist, save_alist
from .field import GF2m

log = logging.getLogger("nbmlgd")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_TRUNCATED, EXIT_SELFTEST = 0, 1, 2, 3, 4


def _common(p: argparse.ArgumentParser):
    p.add_argument("--spec", help="experiment file (TOML)")
    p.add_argument("--seed", type=int, help="override the master seed")
    p.add_argument("--workers", type=int, default=1, help="worker processes (default 1)")
    p.add_argument("--out-dir", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--trace", action="store_true", help="dump per-iteration decisions of failed frames")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nbmlgd", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="Monte-Carlo BLER / iteration simulation")
    _common(p)

    p = sub.add_parser("compare", help="per-SNR iteration gain and BLER ratio of two result sets")
    _common(p)
    p.add_argument("results", nargs="+", help="one or two result files (.json or .csv)")
    p.add_argument("--a", dest="variant_a", help="variant label taken as 'a'")
    p.add_argument("--b", dest="variant_b", help="variant label taken as 'b'")

    p = sub.add_parser("predict", help="closed-form operation counts for a regular code")
    _common(p)
    for name in ("N", "M", "gamma", "rho", "r"):
        p.add_argument(f"--{name}", type=int)

    p = sub.add_parser("genmatrix", help="generate a regular parity-check matrix as alist")
    _common(p)
    for name in ("N", "gamma", "rho", "r"):
        p.add_argument(f"--{name}", type=int)
    p.add_argument("-o", "--output", help="alist path (default <out-dir>/H.alist or stdout)")

    p = sub.add_parser("selftest", help="quick invariant checks")
    _common(p)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except (sim.ConfigError, AlistError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG if isinstance(e, sim.ConfigError) else EXIT_IO
    except OSError as e:
        print(f"I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


def _load_spec(args) -> sim.ExperimentSpec:
    if not args.spec:
        raise sim.ConfigError("--spec is required")
    spec = sim.ExperimentSpec.from_toml(args.spec)
    if args.seed is not None:
        spec.seed = args.seed
    return spec


def cmd_run(args) -> int:
    spec = _load_spec(args)
    if args.workers < 1:
        raise sim.ConfigError("--workers must be >= 1")
    out_dir = pathlib.Path(args.out_dir or "results")

    def progress(row):
        log.info("%s %.2f dB: %d/%d errors, avg iter %.3f", row.variant, row.snr_db,
                 row.block_errors, row.frames, row.avg_iterations)

    rows, traces = sim.run(spec, workers=args.workers, trace=args.trace, progress=progress)
    for p in sim.emit(rows, out_dir, args.format, spec, traces if args.trace else None):
        print(p)
    truncated = [r for r in rows if r.truncated]
    for r in truncated:
        print(f"warning: {r.variant} at {r.snr_db} dB stopped at {r.frames} frames with "
              f"{r.block_errors} < {spec.min_block_errors} block errors", file=sys.stderr)
    return EXIT_TRUNCATED if truncated else EXIT_OK


def _pick(rows, label, which):
    labels = sorted({r.variant for r in rows})
    if label is None:
        if len(labels) != 1:
            raise sim.ConfigError(f"result set has variants {labels}; choose one with --{which}")
        label = labels[0]
    picked = [r for r in rows if r.variant == label]
    if not picked:
        raise sim.ConfigError(f"no rows for variant {label!r} (have {labels})")
    return picked


def cmd_compare(args) -> int:
    if len(args.results) > 2:
        raise sim.ConfigError("compare takes one or two result files")
    rows_a, _ = sim.load_results(args.results[0])
    rows_b = sim.load_results(args.results[1])[0] if len(args.results) == 2 else rows_a
    rep = sim.compare(_pick(rows_a, args.variant_a, "a"), _pick(rows_b, args.variant_b, "b"))
    text = (json.dumps([asdict(r) for r in rep], indent=2) + "\n" if args.format == "json"
            else sim.comparison_to_csv(rep))
    _write_or_print(text, args.out_dir, f"comparison.{args.format}")
    return EXIT_OK


def _code_params(args, keys):
    vals = {k: getattr(args, k, None) for k in keys}
    if args.spec and any(v is None for v in vals.values()):
        spec = _load_spec(args)
        c = spec.code
        if c.alist is not None:
            H = load_alist(c.alist)
            reg = H.regularity
            if reg is None:
                raise sim.ConfigError("closed-form counts need a regular code")
            known = dict(N=H.N, M=H.M, gamma=reg[0], rho=reg[1], r=H.field.r)
        else:
            known = dict(N=c.N, M=c.N * c.gamma // c.rho, gamma=c.gamma, rho=c.rho, r=c.r)
        for k in keys:
            if vals[k] is None:
                vals[k] = known[k]
    missing = [k for k, v in vals.items() if v is None]
    if missing:
        raise sim.ConfigError(f"missing code parameters: {', '.join('--' + m for m in missing)}")
    return vals


_PREDICT_ROWS = [("ISRB", False), ("IISRB", False), ("IISRB", True),
                 ("EIHRB", False), ("IEIHRB", False), ("IEIHRB", True), ("IHRB", False)]


def cmd_predict(args) -> int:
    p = _code_params(args, ("N", "M", "gamma", "rho", "r"))
    records = []
    for variant, rs in _PREDICT_ROWS:
        name = ("RS-" if rs else "") + variant
        for phase in ("init", "iteration"):
            if variant == "IHRB" and phase == "init":
                continue
            c = metrics.predict(variant, phase, reselection=rs, **p)
            records.append({"variant": name, "phase": phase, **c.as_dict()})
    if args.format == "json":
        text = json.dumps({"code": p, "counts": records, "eihrb_init_ia_candidates":
                           metrics.eihrb_init_ia_candidates(p["N"], p["r"])}, indent=2) + "\n"
    else:
        cols = ["variant", "phase", *metrics.OPS]
        text = ",".join(cols) + "\n" + "".join(",".join(str(r[c]) for c in cols) + "\n" for r in records)
    _write_or_print(text, args.out_dir, f"complexity.{args.format}")
    return EXIT_OK


def cmd_genmatrix(args) -> int:
    p = _code_params(args, ("N", "gamma", "rho", "r"))
    seed = args.seed
    if seed is None:
        seed = _load_spec(args).code.seed if args.spec else 1
    H = generate_regular(p["N"], p["gamma"], p["rho"], GF2m(p["r"]), seed=seed)
    target = args.output or (str(pathlib.Path(args.out_dir) / "H.alist") if args.out_dir else None)
    if target is None:
        sys.stdout.write(format_alist(H))
    else:
        pathlib.Path(target).parent.mkdir(parents=True, exist_ok=True)
        save_alist(H, target)
        print(target)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .selftest import run_selftest
    return EXIT_OK if run_selftest() else EXIT_SELFTEST


def _write_or_print(text, out_dir, name):
    if out_dir:
        d = pathlib.Path(out_dir)
        d.mkdir(parents=True, exist_ok=True)
        (d / name).write_text(text)
        print(d / name)
    else:
        sys.stdout.write(text)


_COMMANDS = {"run": cmd_run, "compare": cmd_compare, "predict": cmd_predict,
             "genmatrix": cmd_genmatrix, "selftest": cmd_selftest}


if __name__ == "__main__":
    sys.exit(main())
