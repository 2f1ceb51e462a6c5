"""Command-line entry point: ``infolaw <command> [flags]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import confusion as cf
from . import distance as ds
from .bits import BitString, strings_of_length, strings_up_to
from .compressor import CompressorError, get_compressor
from .enumerator import (ConditionNotEnumeratedError, MalformedTableError, ResourceLimitError,
                         build_table, k_cond, load_table, save_table)
from .machine import UnknownMachineError, get_machine

log = logging.getLogger("infolaw")

EXIT_CODES = {
    "error": 1,
    "usage": 2,
    "unknown_machine": 3,
    "missing_file": 4,
    "malformed_input": 5,
    "insufficient_data": 6,
    "resource_limit": 7,
    "compressor_failure": 8,
    "one_sided_bound": 9,
}

EPILOG = "exit codes: " + ", ".join(f"{v}={k}" for k, v in sorted(EXIT_CODES.items(), key=lambda kv: kv[1]))


class CliError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


@dataclass
class RunConfig:
    machine: str = "UPM-1"
    max_len: int = 22
    budget: int = 4096
    max_output: int = 8
    node_cap: int = 10**8
    domain_bits: int = 4
    exact_length: bool = False
    domain_file: str | None = None
    compressor: str = "lz78b"
    lam: float = 1.0
    measure: str = "gprime"
    distance: str = "dmax"
    normalized: bool = False
    cache: str | None = None
    out: str = "."
    seed: int = 0
    workers: int = 1

    # never echoed into outputs: they must not change a single output byte
    UNECHOED = ("workers", "out")

    def echo(self) -> dict:
        return {k: v for k, v in asdict(self).items() if k not in self.UNECHOED}

    @property
    def cache_path(self) -> str:
        return self.cache or os.path.join(
            self.out, f"table_{self.machine}_L{self.max_len}_T{self.budget}.csv")

    def domain(self) -> list[BitString]:
        if self.domain_file:
            with open(self.domain_file, encoding="utf-8") as fh:
                items = [BitString.parse(line) for line in fh if line.strip() and not line.startswith("#")]
            return sorted(set(items), key=BitString.sort_key)
        if self.exact_length:
            return strings_of_length(self.domain_bits)
        return strings_up_to(self.domain_bits)


def _read_config_file(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                key, _, value = line.partition("=")
                out[key.strip().replace("-", "_")] = value.strip()
    return out


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        for key, value in _read_config_file(args.config).items():
            if key == "lambda":
                key = "lam"
            if not hasattr(cfg, key) or key == "UNECHOED":
                raise CliError("usage", f"unknown config key {key!r}")
            default = getattr(cfg, key)
            if isinstance(default, bool):
                setattr(cfg, key, value.lower() in ("1", "true", "yes"))
            elif isinstance(default, int):
                setattr(cfg, key, int(value))
            elif isinstance(default, float):
                setattr(cfg, key, float(value))
            else:
                setattr(cfg, key, value)
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)
    get_machine(cfg.machine)
    return cfg


# -- output helpers ------------------------------------------------------------------

def _write(path: str, text: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _write_report(cfg: RunConfig, name: str, command: str, result: dict, extra: dict | None = None) -> str:
    doc = {"command": command, "config": cfg.echo(), **(extra or {}), "result": result}
    return _write(os.path.join(cfg.out, name), json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load_table(cfg: RunConfig):
    path = cfg.cache_path
    if not os.path.exists(path):
        raise CliError("missing_file", f"no complexity table at {path}; run 'infolaw enumerate' first")
    return load_table(path)


def _need_file(path: str | None, what: str) -> str:
    if not path:
        raise CliError("usage", f"{what} file is required")
    if not os.path.exists(path):
        raise CliError("missing_file", f"{what} file {path} does not exist")
    return path


# -- commands --------------------------------------------------------------------------

def cmd_enumerate(cfg: RunConfig, args) -> str:
    table = build_table(cfg.machine, cfg.domain(), cfg.max_len, cfg.budget, cfg.max_output,
                        cfg.node_cap, cfg.workers)
    path = cfg.cache_path
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    save_table(table, path)
    return path


def cmd_kc(cfg: RunConfig, args) -> str:
    table = _load_table(cfg)
    k = k_cond(table, BitString.parse(args.x), BitString.parse(args.condition))
    return str(k) if k is not None else f">{table.max_len}"


def cmd_dist(cfg: RunConfig, args) -> str:
    domain = cfg.domain()
    kind = cfg.distance
    if kind in ("dsum", "dmax"):
        m = ds.info_matrix(_load_table(cfg), domain, kind, cfg.normalized)
    elif kind in ("emax", "esum"):
        m = ds.compression_matrix(get_compressor(cfg.compressor), domain, "dmax" if kind == "emax" else "dsum")
    elif kind == "ncd":
        m = ds.ncd_matrix(get_compressor(cfg.compressor), domain)
    elif kind == "hamming":
        m = ds.hamming_matrix(domain)
    elif kind == "euclid":
        m = ds.euclid_matrix(domain)
    elif kind == "hamming_adm":
        m = ds.admissible_hamming_matrix(domain)
    elif kind == "discrete":
        m = ds.discrete_matrix(domain)
    else:
        raise CliError("usage", f"unknown distance {kind!r}")
    m.params = {**m.params, "config": cfg.echo()}
    suffix = "_norm" if cfg.normalized and kind in ("dsum", "dmax") else ""
    return _write(os.path.join(cfg.out, f"dist_{kind}{suffix}.csv"), ds.dumps_matrix(m))


def cmd_confusion(cfg: RunConfig, args) -> str:
    if args.source == "synth":
        d = ds.load_matrix(_need_file(args.distances, "distance matrix"))
        m = cf.synth_confusion(d, cfg.lam)
    else:
        m = cf.k_confusion(_load_table(cfg), cfg.domain())
    m.meta["config"] = cfg.echo()
    return _write(os.path.join(cfg.out, f"confusion_{args.source}.csv"), cf.dumps_confusion(m))


def cmd_law(cfg: RunConfig, args) -> str:
    m = cf.load_confusion(_need_file(args.matrix, "confusion matrix"))
    d = ds.load_matrix(_need_file(args.distances, "distance matrix"))
    report = cf.law_verify(m, d, cfg.measure)
    return _write_report(cfg, f"law_{cfg.measure}_{d.name}.json", "law", report.to_dict(),
                         {"inputs": {"matrix": args.matrix, "distances": args.distances}})


def cmd_fit(cfg: RunConfig, args) -> str:
    path = _need_file(args.pairs, "pairs")
    try:
        with open(path, encoding="utf-8") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#")) if r]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        d = np.array([float(r[0]) for r in rows])
        g = np.array([float(r[1]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise CliError("malformed_input", f"pairs file {path}: {exc}") from None
    report = cf.fit_models(d, g)
    return _write_report(cfg, "fit.json", "fit", report.to_dict(), {"inputs": {"pairs": path}})


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def cmd_check(cfg: RunConfig, args) -> str:
    path = _need_file(args.metric, "metric")
    m = ds.load_matrix(path)
    report = ds.check_admissible(m)
    _write_report(cfg, f"check_{m.name or 'metric'}.json", "check", report.to_dict(),
                  {"inputs": {"metric": path}})
    return f"normalized_ok={str(report.normalized_ok).lower()}"


def cmd_invariance(cfg: RunConfig, args) -> str:
    tables = []
    for machine, cache in (("UPM-1", args.cache1), ("UPM-2", args.cache2)):
        if cache:
            tables.append(load_table(_need_file(cache, "complexity table")))
        else:
            tables.append(build_table(machine, cfg.domain(), cfg.max_len, cfg.budget,
                                      cfg.max_output, cfg.node_cap, cfg.workers))
    report = ds.invariance_gap(*tables)
    _write_report(cfg, "invariance.json", "invariance", report.to_dict())
    return f"max_gap={report.max_gap} compared={report.compared}"


COMMANDS = {
    "enumerate": (cmd_enumerate, "enumerate halting programs and write a complexity table"),
    "kc": (cmd_kc, "look up K(x) or K(x|condition) in a cached table"),
    "dist": (cmd_dist, "write a distance matrix over the domain"),
    "confusion": (cmd_confusion, "write a confusion matrix (synthetic or from K)"),
    "law": (cmd_law, "fit ln G or ln G' against a distance"),
    "fit": (cmd_fit, "compare exponential / gaussian / power decay on (d, g) pairs"),
    "check": (cmd_check, "check metric axioms and normalization of a distance matrix"),
    "invariance": (cmd_invariance, "compare UPM-1 and UPM-2 complexity tables"),
}


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", help="key=value file overriding defaults (flags override it)")
    g.add_argument("--machine", help="UPM-1 (default) or UPM-2")
    g.add_argument("--max-len", dest="max_len", type=int, help="program length limit L (22)")
    g.add_argument("--budget", type=int, help="step budget T (4096)")
    g.add_argument("--max-output", dest="max_output", type=int, help="longest tabulated output (8)")
    g.add_argument("--node-cap", dest="node_cap", type=int, help="program-tree node cap (1e8)")
    g.add_argument("--domain-bits", dest="domain_bits", type=int, help="domain: all strings up to n bits (4)")
    g.add_argument("--exact-length", dest="exact_length", action="store_true", default=None,
                   help="domain: only strings of exactly --domain-bits bits")
    g.add_argument("--domain-file", dest="domain_file", help="domain: one bit string per line")
    g.add_argument("--compressor", help="lz78b (default) or path to a plugin executable")
    g.add_argument("--lambda", dest="lam", type=float, help="synthetic confusion decay rate (1.0)")
    g.add_argument("--measure", choices=["g", "gprime"], help="confusability measure (gprime)")
    g.add_argument("--distance", choices=["dsum", "dmax", "hamming", "euclid", "ncd", "emax", "esum",
                                          "hamming_adm", "discrete"], help="distance kind (dmax)")
    g.add_argument("--normalized", action="store_true", default=None,
                   help="subtract the smaller self-distance (information distances only)")
    g.add_argument("--cache", help="complexity table path")
    g.add_argument("--out", help="output directory (.)")
    g.add_argument("--workers", type=int, help="enumeration worker processes (1)")
    g.add_argument("--seed", type=int, help="random seed (0)")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="infolaw", description=__doc__, epilog=EPILOG)
    sub = parser.add_subparsers(dest="command", required=True)
    parsers = {name: sub.add_parser(name, parents=[common], help=text, description=text, epilog=EPILOG)
               for name, (_, text) in COMMANDS.items()}
    parsers["kc"].add_argument("x", help="output bit string, e.g. b0101 ('b' alone is empty)")
    parsers["kc"].add_argument("condition", nargs="?", default="b", help="condition bit string (b)")
    parsers["confusion"].add_argument("--source", choices=["synth", "ktable"], default="synth")
    parsers["confusion"].add_argument("--distances", help="distance matrix CSV (synth source)")
    parsers["law"].add_argument("--matrix", help="confusion matrix CSV")
    parsers["law"].add_argument("--distances", help="distance matrix CSV")
    parsers["fit"].add_argument("--pairs", help="CSV of d,g rows")
    parsers["check"].add_argument("--metric", help="distance matrix CSV")
    parsers["invariance"].add_argument("--cache1", help="UPM-1 table (enumerated if omitted)")
    parsers["invariance"].add_argument("--cache2", help="UPM-2 table (enumerated if omitted)")
    return parser


def _classify(exc: BaseException) -> str:
    if isinstance(exc, CliError):
        return exc.kind
    if isinstance(exc, UnknownMachineError):
        return "unknown_machine"
    if isinstance(exc, FileNotFoundError):
        return "missing_file"
    if isinstance(exc, ResourceLimitError):
        return "resource_limit"
    if isinstance(exc, CompressorError):
        return "compressor_failure"
    if isinstance(exc, ds.OneSidedBoundError):
        return "one_sided_bound"
    if isinstance(exc, cf.InsufficientDataError):
        return "insufficient_data"
    if isinstance(exc, (MalformedTableError, ds.MalformedMatrixError, cf.MalformedConfusionError,
                        ConditionNotEnumeratedError, KeyError, ValueError)):
        return "malformed_input"
    return "error"


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        print(COMMANDS[args.command][0](cfg, args))
    except Exception as exc:  # every failure becomes one machine-readable line
        kind = _classify(exc)
        if kind == "error":
            log.debug("unexpected failure", exc_info=True)
        message = str(exc.args[0]) if isinstance(exc, KeyError) and exc.args else str(exc)
        print(json.dumps({"error": kind, "exit": EXIT_CODES[kind], "message": message}), file=sys.stderr)
        return EXIT_CODES[kind]
    return 0


if __name__ == "__main__":
    sys.exit(main())
