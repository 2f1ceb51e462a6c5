"""Exit criteria. Each test prints one PASS/FAIL line; see the terminal summary.

The full-scale artifacts (L=22, T=4096 tables, the L+2 / 4T refinement, the
distance and confusion files and law reports) are produced once through the
CLI with one worker and once with eight, and the criteria read the
single-worker run.
"""

import json
import math
import os
import time

import numpy as np
import pytest

from infolaw.bits import BitString, strings_of_length, strings_up_to
from infolaw.cli import main
from infolaw.confusion import (DistributionSpec, SingularFitError, fit_models, g_sandwich,
                               gprime_matrix, k_confusion, law_verify, shannon_fano)
from infolaw.distance import info_matrix, load_matrix
from infolaw.enumerator import (build_table, counting_check, is_prefix_free, k_plain, kraft_sum,
                                load_table, monotonicity_violations, program_arrays)

from acceptance_log import record
from oracles import brute_force

L, T = 22, 4096
LN2 = math.log(2)


def _pipeline(out, workers):
    """Every CLI run behind criteria 1-7; returns {step: exit code}."""
    o = "."
    w = ["--workers", str(workers), "--out", o]
    hyper = ["--domain-bits", "4", "--exact-length"]
    steps = {
        "c1 enumerate": ["enumerate", "--domain-bits", "0", "--cache", f"{o}/plain.csv", *w],
        "c3 enumerate": ["enumerate", "--domain-bits", "4", *w],
        "c5 enumerate": ["enumerate", "--domain-bits", "4", "--max-len", str(L + 2),
                         "--budget", str(4 * T), *w],
        "c3 dsum": ["dist", "--distance", "dsum", "--domain-bits", "4", *w],
        "c3 dmax": ["dist", "--distance", "dmax", "--domain-bits", "4", *w],
        "c6 confusion": ["confusion", "--source", "ktable", *hyper, *w],
        "c6 dmax": ["dist", "--distance", "dmax", *hyper, "--cache", f"{o}/table_UPM-1_L22_T4096.csv",
                    "--out", f"{o}/c6"],
        "c6 law": ["law", "--matrix", f"{o}/confusion_ktable.csv", "--distances", f"{o}/c6/dist_dmax.csv",
                   "--measure", "gprime", "--out", f"{o}/c6"],
        "c7 hamming": ["dist", "--distance", "hamming", *hyper, "--out", f"{o}/c7"],
        "c7 confusion": ["confusion", "--source", "synth", "--distances", f"{o}/c7/dist_hamming.csv",
                         "--lambda", "0.5", "--out", f"{o}/c7"],
        "c7 law": ["law", "--matrix", f"{o}/c7/confusion_synth.csv", "--distances",
                   f"{o}/c7/dist_hamming.csv", "--measure", "gprime", "--out", f"{o}/c7"],
    }
    codes, times = {}, {}
    # run inside the output dir so recorded input paths match across runs
    here = os.getcwd()
    os.chdir(out)
    try:
        for name, argv in steps.items():
            t0 = time.perf_counter()
            codes[name] = main(argv)
            times[name] = time.perf_counter() - t0
    finally:
        os.chdir(here)
    return codes, times


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    out = {}
    for workers in (1, 8):
        d = tmp_path_factory.mktemp(f"workers{workers}")
        codes, times = _pipeline(d, workers)
        out[workers] = (d, codes, times)
    return out


@pytest.fixture(scope="module")
def run1(runs):
    return runs[1]


def test_c01_prefix_free_and_kraft(run1):
    d, codes, times = run1
    t0 = time.perf_counter()
    table = build_table("UPM-1", [""], L, T, collect_programs=True)
    elapsed = time.perf_counter() - t0
    values, lengths = program_arrays(table)
    prefix_free = is_prefix_free(values, lengths)
    kraft = kraft_sum(table)
    cached = load_table(d / "plain.csv")
    ok = (prefix_free and kraft <= 1 and kraft_sum(cached) == kraft and codes["c1 enumerate"] == 0
          and max(elapsed, times["c1 enumerate"]) < 300)
    assert record(1, "prefix-free + Kraft", ok,
                  f"{len(values)} halting programs, prefix_free={prefix_free}, kraft={kraft:.6f}, "
                  f"{elapsed:.1f}s (cli {times['c1 enumerate']:.1f}s)")


def test_c02_oracle_regression(run1):
    d, _, _ = run1
    table = load_table(d / "plain.csv")
    oracle, _ = brute_force("UPM-1", BitString(), 6, 100)
    got = {x: k_plain(table, x) for x in ("", "0", "1")}
    frozen = {"": 3, "0": 6, "1": 6}
    ok = got == frozen and {x.bits: k for x, k in oracle.items()} == frozen
    assert record(2, "oracle regression", ok, f"K = {got}")


def test_c03_sum_max_chain(run1):
    d, codes, _ = run1
    s = load_matrix(d / "dist_dsum.csv").values
    m = load_matrix(d / "dist_dmax.csv").values
    n = len(s)
    held = int(np.sum((m <= s) & (s <= 2 * m)))
    ok = held == n * n and n == len(strings_up_to(4)) and codes["c3 dsum"] == codes["c3 dmax"] == 0
    assert record(3, "d_max <= d_sum <= 2 d_max", ok, f"{held}/{n * n} ordered pairs")


def test_c04_incompressibility_counting(run1):
    d, _, _ = run1
    table = load_table(d / "plain.csv")
    rows = [counting_check(table, n) for n in range(1, 9)]
    ok = all(r[2] for r in rows)
    assert record(4, "incompressibility counting", ok,
                  ", ".join(f"n={n}:{c}<{b}" for n, (c, b, _) in enumerate(rows, 1)))


def test_c05_upper_semicomputable(run1):
    d, codes, _ = run1
    coarse = load_table(d / f"table_UPM-1_L{L}_T{T}.csv")
    fine = load_table(d / f"table_UPM-1_L{L + 2}_T{4 * T}.csv")
    bad = monotonicity_violations(coarse, fine)
    ok = not bad and codes["c5 enumerate"] == 0 and len(coarse.entries) > 0
    assert record(5, "re-enumeration never increases K", ok,
                  f"{len(coarse.entries)} keys compared, {len(bad)} violations")


def test_c06_k_confusion_law(run1):
    d, codes, _ = run1
    table = load_table(d / f"table_UPM-1_L{L}_T{T}.csv")
    items = strings_of_length(4)
    m = k_confusion(table, items)
    dmax = info_matrix(table, items, "dmax")
    iu = np.triu_indices(len(items), 1)
    x, y = -dmax.values[iu], np.log(gprime_matrix(m)[iu])
    with np.errstate(invalid="ignore", divide="ignore"):
        r = float(np.corrcoef(x, y)[0, 1]) if np.ptp(x) and np.ptp(y) else math.nan
    try:
        slope = law_verify(m, dmax, "gprime").slope
    except SingularFitError:
        slope = math.nan
    violations = g_sandwich(m).violations
    ok = r >= 0.95 and violations == 0 and -LN2 * 1.25 <= slope <= -LN2 * 0.75
    distinct = sorted(set(dmax.values[iu].tolist()))
    assert record(6, "ln G' vs -d_max on k_confusion", ok,
                  f"r={r}, slope={slope}, G'<=G violations={violations}, "
                  f"distinct off-diagonal d_max values={distinct}, cli law exit={codes['c6 law']}")


def test_c07_exact_synthetic_law(run1):
    d, codes, _ = run1
    result = json.loads((d / "c7" / "law_gprime_hamming.json").read_text())["result"]
    ok = (abs(result["slope"] + 0.5 * LN2) <= 1e-9 and result["r2"] >= 1 - 1e-9
          and codes["c7 law"] == 0)
    assert record(7, "exact synthetic law", ok,
                  f"slope={result['slope']!r} (target {-0.5 * LN2!r}), R2={result['r2']!r}")


def test_c08_model_recovery():
    d = np.arange(1, 11, dtype=float)
    laws = {
        "exponential": np.exp(-0.5 * d),
        "gaussian": np.exp(-0.1 * d**2),
        "power": d**-2.0,
    }
    lines, ok = [], True
    for truth, g in laws.items():
        rep = fit_models(d, g)
        own = rep.rss[truth]
        margin = min(rep.rss[m] for m in rep.rss if m != truth) / own if own > 0 else math.inf
        ok &= rep.winner == truth and margin >= 10
        lines.append(f"{truth}->{rep.winner} (margin {margin:.3g})")
    b_hat = fit_models(d, laws["exponential"]).params["exponential"]["B"]
    ok &= abs(b_hat - 0.5) <= 0.05 * 0.5
    assert record(8, "model recovery", ok, "; ".join(lines) + f"; B={b_hat:.12g}")


def test_c09_shannon_fano_band():
    violations = 0
    for seed in range(100):
        n = int(np.random.default_rng(seed).integers(1, 65))
        rep = shannon_fano(DistributionSpec.random(n, seed))
        violations += not (rep.kraft <= 1 and rep.entropy <= rep.expected_length < rep.entropy + 1)
    assert record(9, "Shannon-Fano band", violations == 0, f"{violations} violations in 100 distributions")


def test_c10_worker_determinism(runs):
    d1, codes1, _ = runs[1]
    d8, codes8, _ = runs[8]
    files1 = sorted(p.relative_to(d1) for p in d1.rglob("*") if p.is_file())
    files8 = sorted(p.relative_to(d8) for p in d8.rglob("*") if p.is_file())
    same = [f for f in files1 if f in files8 and (d1 / f).read_bytes() == (d8 / f).read_bytes()]
    ok = files1 == files8 and len(same) == len(files1) and codes1 == codes8 and files1
    assert record(10, "workers 1 vs 8 byte-identical", bool(ok),
                  f"{len(same)}/{len(files1)} files identical: {', '.join(map(str, files1))}")
