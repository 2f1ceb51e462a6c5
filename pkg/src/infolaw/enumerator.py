"""Exact bounded Kolmogorov complexity by exhaustive program enumeration.

``K_{L,T}(y|x)`` is the length of the shortest program of at most ``L`` bits
that halts within ``T`` steps on input ``x`` with output ``y``. A missing
entry means "no such program", i.e. ``K_{L,T}(y|x) > L`` -- an upper-bound
statement, never "unknown".
"""

from __future__ import annotations

import csv
import io
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import _kernel
from .bits import EMPTY, BitString, as_bits, delta_encode, gamma_encode, strings_up_to
from .machine import JNZ, UnknownMachineError, encode_condition, get_machine

log = logging.getLogger(__name__)

FORMAT_VERSION = "kctable-1"
DEFAULT_MAX_LEN = 22
DEFAULT_BUDGET = 4096
DEFAULT_MAX_OUTPUT = 8
DEFAULT_NODE_CAP = 10**8


class ResourceLimitError(RuntimeError):
    pass


class ConditionNotEnumeratedError(KeyError):
    pass


class MalformedTableError(ValueError):
    pass


@dataclass
class ComplexityTable:
    machine_id: str
    max_len: int
    budget: int
    max_output: int
    entries: dict[tuple[BitString, BitString], int] = field(default_factory=dict)
    # condition -> {program length: number of halting programs}
    histograms: dict[BitString, dict[int, int]] = field(default_factory=dict)
    # only filled when enumerated with collect_programs=True; not persisted
    programs: dict[BitString, list[BitString]] = field(default_factory=dict, compare=False, repr=False)

    @property
    def conditions(self) -> list[BitString]:
        return sorted(self.histograms, key=BitString.sort_key)

    @property
    def table_id(self) -> str:
        return f"{self.machine_id}/L{self.max_len}/T{self.budget}"

    def outputs(self, condition=EMPTY) -> dict[BitString, int]:
        condition = self._require(condition)
        return {y: k for (x, y), k in self.entries.items() if x == condition}

    def _require(self, condition) -> BitString:
        condition = as_bits(condition)
        if condition not in self.histograms:
            raise ConditionNotEnumeratedError(f"condition {condition.text} not enumerated in {self.table_id}")
        return condition

    def merge(self, other: "ComplexityTable") -> None:
        if (other.machine_id, other.max_len, other.budget, other.max_output) != (
                self.machine_id, self.max_len, self.budget, self.max_output):
            raise ValueError("cannot merge tables with different machine or bounds")
        for key, k in other.entries.items():
            if k < self.entries.get(key, k + 1):
                self.entries[key] = k
        for cond, hist in other.histograms.items():
            self.histograms[cond] = dict(hist)
        self.programs.update(other.programs)


@lru_cache(maxsize=None)
def instruction_choices(machine_id: str, max_len: int):
    """Every complete instruction encoding of at most ``max_len`` bits.

    Returns parallel arrays (op, arg, cost, code) sorted by (cost, code).
    """
    spec = get_machine(machine_id)
    operand = gamma_encode if spec.jump_operand_code == "gamma" else delta_encode
    rows = []
    for code, op in enumerate(spec.opcode_table):
        if op != JNZ:
            if max_len >= 3:
                rows.append((3, code, op, 0))
            continue
        d = 1
        while True:
            tail = operand(d)
            cost = 3 + len(tail)
            if cost > max_len:
                break
            rows.append((cost, (code << len(tail)) | tail.to_int(), op, d))
            d += 1
    rows.sort()
    cost, code, op, arg = (np.array(col, dtype=np.int64) for col in zip(*rows)) if rows else (
        np.zeros(0, dtype=np.int64),) * 4
    return op, arg, cost, code


def _explore(machine_id, condition_bits, max_len, budget, max_output, forced, node_cap, collect):
    ops, args, costs, codes = instruction_choices(machine_id, max_len)
    tape = np.array([int(c) for c in encode_condition(BitString(condition_bits)).bits], dtype=np.int64)
    best, hist, pv, pl, n, nodes, capped = _kernel.explore(
        ops, args, costs, codes, tape, max_len, budget, max_output,
        np.array(forced, dtype=np.int64), node_cap, collect)
    return best, hist, pv[:n].copy(), pl[:n].copy(), nodes, capped


def _run_task(task):
    machine_id, condition_bits, max_len, budget, max_output, firsts, node_cap, collect = task
    best = np.full(1 << (max_output + 1), _kernel.INF, dtype=np.int64)
    hist = np.zeros(max_len + 1, dtype=np.int64)
    vals, lens = [], []
    nodes = 0
    for k in firsts:
        b, h, pv, pl, nd, capped = _explore(machine_id, condition_bits, max_len, budget,
                                           max_output, [k], node_cap - nodes, collect)
        nodes += nd
        if capped:
            return condition_bits, best, hist, vals, lens, nodes, True
        np.minimum(best, b, out=best)
        hist += h
        vals.append(pv)
        lens.append(pl)
    return condition_bits, best, hist, vals, lens, nodes, False


def _decode_best(best: np.ndarray, max_output: int) -> dict[BitString, int]:
    out = {}
    for key in np.flatnonzero(best < _kernel.INF):
        n = int(key).bit_length() - 1
        out[BitString.from_int(int(key) - (1 << n), n)] = int(best[key])
    return out


def enumerate_programs(machine, condition=EMPTY, max_len: int = DEFAULT_MAX_LEN,
                       budget: int = DEFAULT_BUDGET, max_output: int = DEFAULT_MAX_OUTPUT,
                       node_cap: int = DEFAULT_NODE_CAP, workers: int = 1,
                       collect_programs: bool = False) -> ComplexityTable:
    """Enumerate every halting program for one condition; see :func:`build_table`."""
    return build_table(machine, [condition], max_len, budget, max_output, node_cap,
                       workers, collect_programs)


def build_table(machine, conditions: Iterable | None = None, max_len: int = DEFAULT_MAX_LEN,
                budget: int = DEFAULT_BUDGET, max_output: int = DEFAULT_MAX_OUTPUT,
                node_cap: int = DEFAULT_NODE_CAP, workers: int = 1,
                collect_programs: bool = False) -> ComplexityTable:
    """Exact ``K_{L,T}(y|x)`` for every condition ``x`` and every output ``y``
    of at most ``max_output`` bits.

    The per-condition program tree is split by first instruction and the
    pieces are min-combined in a fixed order, so the result does not depend
    on ``workers``. Raises :class:`ResourceLimitError` if more than
    ``node_cap`` tree nodes are needed for one condition.
    """
    spec = get_machine(machine)
    if max_len < 0 or budget < 1 or not 0 <= max_output <= 60 or max_len > 62:
        raise ValueError("need 0 <= max_len <= 62, budget >= 1, 0 <= max_output <= 60")
    conditions = strings_up_to(5) if conditions is None else [as_bits(c) for c in conditions]
    conditions = sorted(set(conditions), key=BitString.sort_key)
    table = ComplexityTable(spec.machine_id, max_len, budget, max_output)
    nchoice = len(instruction_choices(spec.machine_id, max_len)[0])
    workers = max(1, int(workers))

    tasks = []
    for cond in conditions:
        groups = [list(range(i, nchoice, workers)) for i in range(workers)]
        for g in groups:
            tasks.append((spec.machine_id, cond.bits, max_len, budget, max_output, g,
                          node_cap, collect_programs))

    if workers == 1:
        results = map(_run_task, tasks)
    else:
        _kernel_warmup()
        pool = ProcessPoolExecutor(max_workers=workers)
        results = pool.map(_run_task, tasks)

    merged: dict[str, list] = {}
    try:
        for cond_bits, best, hist, vals, lens, nodes, capped in results:
            acc = merged.setdefault(cond_bits, [None, None, [], [], 0])
            acc[0] = best if acc[0] is None else np.minimum(acc[0], best)
            acc[1] = hist if acc[1] is None else acc[1] + hist
            acc[2].extend(vals)
            acc[3].extend(lens)
            acc[4] += nodes
            if capped or acc[4] > node_cap:
                raise ResourceLimitError(
                    f"program tree for condition b{cond_bits} exceeds node cap {node_cap}")
    finally:
        if workers > 1:
            pool.shutdown(cancel_futures=True)

    for cond in conditions:
        best, hist, vals, lens, nodes = merged[cond.bits]
        for y, k in _decode_best(best, max_output).items():
            table.entries[(cond, y)] = k
        table.histograms[cond] = {int(n): int(c) for n, c in enumerate(hist) if c}
        if collect_programs:
            v = np.concatenate(vals) if vals else np.zeros(0, np.int64)
            n = np.concatenate(lens) if lens else np.zeros(0, np.int64)
            order = np.lexsort((v, n))
            table.programs[cond] = [BitString.from_int(int(v[i]), int(n[i])) for i in order]
        log.debug("enumerated %s | %s: %d nodes, %d halting programs",
                  spec.machine_id, cond.text, nodes, sum(table.histograms[cond].values()))
    return table


def _kernel_warmup():
    # compile (or load from cache) once in the parent before worker processes fork
    _explore("UPM-1", "", 3, 1, 0, [], 10, False)


def program_arrays(table: ComplexityTable, condition=EMPTY) -> tuple[np.ndarray, np.ndarray]:
    condition = table._require(condition)
    progs = table.programs.get(condition)
    if progs is None:
        raise ValueError("table was built without collect_programs=True")
    return (np.array([p.to_int() for p in progs], dtype=np.int64),
            np.array([len(p) for p in progs], dtype=np.int64))


def is_prefix_free(values: np.ndarray, lengths: np.ndarray) -> bool:
    """Check a set of (value, length) codewords for the prefix property.

    Left-aligned to a common width and sorted, a prefix of any codeword
    sorts immediately before some word it prefixes, so comparing neighbours
    is enough. Duplicates count as violations.
    """
    if len(values) < 2:
        return True
    width = int(lengths.max())
    aligned = values << (width - lengths)
    order = np.lexsort((lengths, aligned))
    v, n = values[order], lengths[order]
    shorter = n[:-1] <= n[1:]
    head = v[1:] >> (n[1:] - n[:-1]).clip(min=0)
    return not np.any(shorter & (head == v[:-1]))


def k_plain(table: ComplexityTable, x) -> int | None:
    return k_cond(table, x, EMPTY)


def k_cond(table: ComplexityTable, y, x) -> int | None:
    """``K_{L,T}(y|x)``, or ``None`` when it exceeds the table's length limit."""
    x = table._require(x)
    y = as_bits(y)
    if len(y) > table.max_output:
        raise ValueError(f"output {y.text} longer than the table's max_output={table.max_output}")
    return table.entries.get((x, y))


def kraft_sum(table: ComplexityTable, condition=EMPTY) -> float:
    hist = table.histograms.get(as_bits(condition), {})
    return sum(c * 2.0 ** -n for n, c in hist.items())


def counting_check(table: ComplexityTable, n: int, condition=EMPTY) -> tuple[int, int, bool]:
    """How many outputs have ``K_{L,T} < n``; there must be fewer than ``2**n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    count = sum(1 for k in table.outputs(condition).values() if k < n)
    return count, 2**n, count < 2**n


def monotonicity_violations(coarse: ComplexityTable, fine: ComplexityTable) -> list:
    """Keys where the larger-bounds table reports a larger (or no) K.

    Only keys the finer table could hold are compared. Should always be empty.
    """
    bad = []
    for (x, y), k in sorted(coarse.entries.items(), key=_entry_order):
        if x not in fine.histograms or len(y) > fine.max_output:
            continue
        k_fine = fine.entries.get((x, y))
        if k_fine is None or k_fine > k:
            bad.append(((x, y), k, k_fine))
    return bad


def _entry_order(item):
    (x, y), _ = item
    return x.sort_key(), y.sort_key()


# -- persistence ---------------------------------------------------------------

def dumps_table(table: ComplexityTable) -> str:
    buf = io.StringIO()
    buf.write(f"# format={FORMAT_VERSION}\n")
    buf.write(f"# machine_id={table.machine_id}\n")
    buf.write(f"# L={table.max_len}\n")
    buf.write(f"# T={table.budget}\n")
    buf.write(f"# max_output={table.max_output}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["condition", "output", "K"])
    rows = sorted(table.entries.items(), key=_entry_order)
    for (x, y), k in rows:
        writer.writerow([x.text, y.text, k])
    buf.write("#HIST\n")
    writer.writerow(["condition", "length", "count"])
    nhist = 0
    for cond in table.conditions:
        for n, c in sorted(table.histograms[cond].items()):
            writer.writerow([cond.text, n, c])
            nhist += 1
        if not table.histograms[cond]:
            writer.writerow([cond.text, 0, 0])
            nhist += 1
    buf.write(f"#END rows={len(rows)} hist={nhist}\n")
    return buf.getvalue()


def save_table(table: ComplexityTable, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_table(table))
    os.replace(tmp, path)


def loads_table(text: str) -> ComplexityTable:
    meta: dict[str, str] = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines) and lines[i].startswith("# "):
        key, _, value = lines[i][2:].partition("=")
        meta[key.strip()] = value.strip()
        i += 1
    if meta.get("format") != FORMAT_VERSION:
        raise MalformedTableError(f"unsupported table format {meta.get('format')!r}")
    try:
        get_machine(meta["machine_id"])
        table = ComplexityTable(meta["machine_id"], int(meta["L"]), int(meta["T"]),
                                int(meta["max_output"]))
    except UnknownMachineError:
        raise
    except (KeyError, ValueError) as exc:
        raise MalformedTableError(f"bad table header: {exc}") from None

    if not lines or not lines[-1].startswith("#END "):
        raise MalformedTableError("table file is truncated (no #END trailer)")
    try:
        trailer = dict(f.split("=") for f in lines[-1][5:].split())
        n_rows, n_hist = int(trailer["rows"]), int(trailer["hist"])
        body = lines[i:-1]
        split = body.index("#HIST")
        entry_rows = list(csv.reader(body[1:split]))
        hist_rows = list(csv.reader(body[split + 2:]))
        if body[0] != "condition,output,K" or len(entry_rows) != n_rows or len(hist_rows) != n_hist:
            raise ValueError("row count mismatch")
        for x, y, k in entry_rows:
            table.entries[(BitString.parse(x), BitString.parse(y))] = int(k)
        for x, n, c in hist_rows:
            hist = table.histograms.setdefault(BitString.parse(x), {})
            if int(c):
                hist[int(n)] = int(c)
    except ValueError as exc:
        raise MalformedTableError(f"malformed table body: {exc}") from None
    return table


def load_table(path) -> ComplexityTable:
    with open(path, encoding="utf-8") as fh:
        return loads_table(fh.read())
