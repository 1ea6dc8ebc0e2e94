"""Command-line interface: ``mitbench generate | run | report``.

Exit codes: 0 success, 1 usage error, 2 invalid configuration or input,
3 runtime failure (results written so far are kept).
"""

import argparse
import os
import sys

from . import config as config_mod
from .benchmark import cell_circuits, run_volumetric
from .circuit import dumps as dump_circuit
from .errors import ConfigError, InvalidInputError, MitbenchError, SamplingExhaustedError
from .kernels import BACKEND
from .report import FORMATS, ReportSpec, load_results, write_manifest, write_results

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _formats(text):
    fmts = tuple(f.strip() for f in text.split(",") if f.strip())
    if not fmts or any(f not in FORMATS for f in fmts):
        raise argparse.ArgumentTypeError(f"choose from {','.join(FORMATS)}")
    return fmts


def _nonneg(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser():
    p = _Parser(prog="mitbench", description="Volumetric benchmarking of quantum error mitigation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write the benchmark circuits of a config")
    g.add_argument("--config", required=True, help="YAML configuration file")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--seed", type=_nonneg, help="override the config seed")

    r = sub.add_parser("run", help="run the volumetric benchmark")
    r.add_argument("--config", required=True, help="YAML configuration file")
    r.add_argument("--out", required=True, help="output directory")
    r.add_argument("--seed", type=_nonneg, help="override the config seed")
    r.add_argument("--threads", type=_positive, default=1, help="worker threads (default 1)")
    r.add_argument("--formats", type=_formats, default=FORMATS, help="comma list of json,csv,svg")

    rep = sub.add_parser("report", help="re-render outputs from a stored results.json")
    rep.add_argument("results", help="results.json file or the directory holding it")
    rep.add_argument("--out", help="output directory (default: next to the results)")
    rep.add_argument("--formats", type=_formats, default=("csv", "svg"), help="comma list of json,csv,svg")
    return p


def _load(args):
    cfg = config_mod.load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def cmd_generate(args):
    cfg = _load(args)
    out = os.path.join(args.out, "circuits")
    os.makedirs(out, exist_ok=True)
    paths = []
    failed = []
    for n, d in cfg.grid:
        try:
            circuits = cell_circuits(cfg, n, d)
        except SamplingExhaustedError as exc:
            failed.append(f"n={n} d={d}: {exc}")
            continue
        for i, c in enumerate(circuits):
            path = os.path.join(out, f"{cfg.circuit_class.label}_n{n}_d{d}_c{i}.txt")
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(dump_circuit(c))
            paths.append(path)
    cfg_path = os.path.join(args.out, "config.yaml")
    config_mod.save_config(cfg, cfg_path)
    write_manifest(args.out, [cfg_path] + paths)
    print(f"wrote {len(paths)} circuits to {out}")
    for msg in failed:
        print(f"error: {msg}", file=sys.stderr)
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_run(args):
    cfg = _load(args)
    os.makedirs(args.out, exist_ok=True)
    cfg_path = os.path.join(args.out, "config.yaml")
    config_mod.save_config(cfg, cfg_path)
    grids = run_volumetric(cfg, threads=args.threads)
    paths = write_results(grids, ReportSpec(args.out, args.formats), cfg.to_dict())
    write_manifest(args.out, [cfg_path] + paths)
    for g in grids:
        ok = [c for c in g.cells.values() if c.summary.get("status") == "ok"]
        good = sum(1 for c in ok if c.summary["median"] <= 1.0)
        failed = sum(c.summary.get("n_failed", 0) for c in g.cells.values())
        print(f"{g.circuit_class.label} {g.method}: median ε ≤ 1 in {good}/{len(g.cells)} cells"
              + (f", {failed} failed circuit runs" if failed else ""))
    print(f"wrote {len(paths)} files to {args.out} (kernels: {BACKEND})")
    cell_errors = [(k, c.error) for g in grids[:1] for k, c in sorted(g.cells.items()) if c.error]
    for (n, d), err in cell_errors:
        print(f"error: cell n={n} d={d}: {err}", file=sys.stderr)
    return EXIT_RUNTIME if cell_errors else EXIT_OK


def cmd_report(args):
    path = args.results
    if os.path.isdir(path):
        path = os.path.join(path, "results.json")
    if not os.path.exists(path):
        raise InvalidInputError(f"no results file at {path}")
    doc, grids = load_results(path)
    out = args.out or os.path.dirname(os.path.abspath(path))
    paths = write_results(grids, ReportSpec(out, args.formats), doc.get("config"))
    print(f"wrote {len(paths)} files to {out}")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "run": cmd_run, "report": cmd_report}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidInputError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (MitbenchError, OSError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
