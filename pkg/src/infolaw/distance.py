"""Information distances, baseline distances and admissibility checks."""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .bits import BitString, as_bits
from .compressor import Compressor, cond_approx, ncd
from .enumerator import ComplexityTable, k_cond


class OneSidedBoundError(LookupError):
    """A needed ``K(y|x)`` is absent from a table, so only ``K > L`` is known."""


class DomainMismatchError(ValueError):
    pass


class MalformedMatrixError(ValueError):
    pass


@dataclass
class DistanceMatrix:
    domain: list[BitString]
    values: np.ndarray
    name: str
    params: dict = field(default_factory=dict)
    source: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = len(self.domain)
        if self.values.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got shape {self.values.shape}")

    def __len__(self):
        return len(self.domain)

    def index(self, x) -> int:
        return self.domain.index(as_bits(x))

    def __call__(self, a, b) -> float:
        return float(self.values[self.index(a), self.index(b)])

    def pairs(self):
        """Unordered off-diagonal index pairs (i < j) in domain order."""
        n = len(self.domain)
        return [(i, j) for i in range(n) for j in range(i + 1, n)]


# -- conditional complexity sources --------------------------------------------

def conditional(source, y, x) -> float:
    """``K(y|x)`` from an enumerated table or a compressor."""
    if isinstance(source, Compressor):
        return float(cond_approx(source, y, x))
    k = k_cond(source, y, x)
    if k is None:
        raise OneSidedBoundError(
            f"K({as_bits(y).text}|{as_bits(x).text}) > {source.max_len} in {source.table_id}; "
            "only a one-sided bound is known")
    return float(k)


def source_name(source) -> str:
    return source.name if isinstance(source, Compressor) else source.table_id


def conditional_matrix(source, domain) -> np.ndarray:
    """``out[i, j] = K(domain[j] | domain[i])``."""
    domain = [as_bits(x) for x in domain]
    return np.array([[conditional(source, b, a) for b in domain] for a in domain])


def d_sum(source, a, b) -> float:
    return conditional(source, b, a) + conditional(source, a, b)


def d_max(source, a, b) -> float:
    return max(conditional(source, b, a), conditional(source, a, b))


def _normalize(values: np.ndarray) -> np.ndarray:
    diag = np.diag(values)
    return np.maximum(values - np.minimum.outer(diag, diag), 0.0)


def info_matrix(source, domain, kind: str = "dmax", normalized: bool = False) -> DistanceMatrix:
    """D_sum or D_max over ``domain``.

    With ``normalized`` each entry is reduced by the smaller of the two
    self-distances and clamped at zero, which zeroes the diagonal.
    """
    domain = [as_bits(x) for x in domain]
    k = conditional_matrix(source, domain)
    if kind == "dsum":
        values = k + k.T
    elif kind == "dmax":
        values = np.maximum(k, k.T)
    else:
        raise ValueError(f"unknown information distance {kind!r}")
    if normalized:
        values = _normalize(values)
    return DistanceMatrix(domain, values, kind, {"normalized": normalized}, source_name(source))


# -- baseline distances --------------------------------------------------------

def hamming(x, y) -> int:
    x, y = as_bits(x), as_bits(y)
    if len(x) != len(y):
        raise ValueError(f"hamming distance needs equal lengths, got {len(x)} and {len(y)}")
    return sum(a != b for a, b in zip(x.bits, y.bits))


def euclid_bits(x, y) -> float:
    return math.sqrt(hamming(x, y))


def _pairwise(domain, fn, name, params=None, source="") -> DistanceMatrix:
    domain = [as_bits(x) for x in domain]
    values = [[fn(a, b) for b in domain] for a in domain]
    return DistanceMatrix(domain, np.array(values, dtype=float), name, params or {}, source)


def hamming_matrix(domain) -> DistanceMatrix:
    return _pairwise(domain, hamming, "hamming")


def euclid_matrix(domain) -> DistanceMatrix:
    return _pairwise(domain, euclid_bits, "euclid")


def discrete_matrix(domain) -> DistanceMatrix:
    return _pairwise(domain, lambda a, b: float(a != b), "discrete")


def admissible_hamming_shift(n: int) -> int:
    return 2 * math.ceil(math.log2(n + 1)) + 1


def admissible_hamming_matrix(domain) -> DistanceMatrix:
    """Hamming distance shifted by ``2*ceil(log2(n+1)) + 1`` off the diagonal."""
    domain = [as_bits(x) for x in domain]
    lengths = {len(x) for x in domain}
    if len(lengths) > 1:
        raise ValueError("shifted Hamming distance needs equal-length items")
    shift = admissible_hamming_shift(lengths.pop() if lengths else 0)
    return _pairwise(domain, lambda a, b: hamming(a, b) + shift if a != b else 0.0,
                     "hamming_adm", {"shift": shift})


def ncd_matrix(h: Compressor, domain) -> DistanceMatrix:
    return _pairwise(domain, lambda a, b: ncd(h, a, b), "ncd", source=h.name)


def compression_matrix(h: Compressor, domain, kind: str = "dmax") -> DistanceMatrix:
    m = info_matrix(h, domain, kind)
    m.name = {"dmax": "emax", "dsum": "esum"}[kind]
    return m


# -- axioms ----------------------------------------------------------------------

@dataclass
class AdmissibilityReport:
    identity_ok: bool
    symmetry_ok: bool
    triangle_ok: bool
    triangle_violation_count: int
    worst_triangle_slack: float
    triangle_violations: list  # (x, z, via y, slack), worst first, at most 100
    normalization_sums: dict
    normalized_ok: bool
    normalization_note: str = "finite-domain lower bound of the normalization sum"

    def to_dict(self) -> dict:
        return {
            "identity_ok": self.identity_ok,
            "symmetry_ok": self.symmetry_ok,
            "triangle_ok": self.triangle_ok,
            "triangle_violation_count": self.triangle_violation_count,
            "worst_triangle_slack": self.worst_triangle_slack,
            "triangle_violations": [[x.text, z.text, y.text, s] for x, z, y, s in self.triangle_violations],
            "normalization_sums": {k.text: v for k, v in self.normalization_sums.items()},
            "normalized_ok": self.normalized_ok,
            "normalization_note": self.normalization_note,
        }


def triangle_slack(values: np.ndarray) -> np.ndarray:
    """``s[i, j, k] = D[i, k] - D[i, j] - D[j, k]``; positive means a violation."""
    return values[:, None, :] - values[:, :, None] - values[None, :, :]


def check_admissible(m: DistanceMatrix, tol: float = 1e-12, keep: int = 100) -> AdmissibilityReport:
    d = m.values
    n = len(m)
    off = ~np.eye(n, dtype=bool)
    identity_ok = bool(np.all(np.abs(np.diag(d)) <= tol) and np.all(d[off] > tol))
    symmetry_ok = bool(np.allclose(d, d.T, rtol=0, atol=tol))

    violations = []
    count = 0
    worst = -math.inf
    for j in range(n):  # one intermediate point at a time keeps memory at O(n^2)
        slack = d - d[:, j][:, None] - d[j, :][None, :]
        if n:
            worst = max(worst, float(slack.max()))
        bad = np.argwhere(slack > tol)
        count += len(bad)
        violations.extend((float(slack[i, k]), i, k, j) for i, k in bad)
    violations.sort(key=lambda v: (-v[0], v[1], v[2], v[3]))
    violations = [(m.domain[i], m.domain[k], m.domain[j], s) for s, i, k, j in violations[:keep]]

    sums = {m.domain[i]: float(np.sum(np.exp2(-d[i][off[i]]))) for i in range(n)}
    return AdmissibilityReport(
        identity_ok=identity_ok,
        symmetry_ok=symmetry_ok,
        triangle_ok=count == 0,
        triangle_violation_count=count,
        worst_triangle_slack=worst if n else 0.0,
        triangle_violations=violations,
        normalization_sums=sums,
        normalized_ok=all(s <= 1 + tol for s in sums.values()),
    )


def minorization(dmax: DistanceMatrix, dprime: DistanceMatrix):
    """Smallest ``c`` with ``Dmax <= D' + c`` on all off-diagonal pairs, and its witness."""
    if dmax.domain != dprime.domain:
        raise DomainMismatchError("distance matrices are over different domains")
    n = len(dmax)
    if n < 2:
        return 0.0, None
    gap = dmax.values - dprime.values
    gap[np.eye(n, dtype=bool)] = -np.inf
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return float(gap[i, j]), (dmax.domain[i], dmax.domain[j])


def conditional_triangle_slack(table: ComplexityTable, domain):
    """Worst ``K(x|z) - K(x|y) - K(y|z)`` over all triples, with its witness (x, y, z)."""
    domain = [as_bits(x) for x in domain]
    k = conditional_matrix(table, domain)  # k[z, x] = K(x|z)
    # s[z, y, x] = K(x|z) - K(y|z) - K(x|y)
    s = triangle_slack(k)
    z, y, x = np.unravel_index(int(np.argmax(s)), s.shape)
    return float(s[z, y, x]), (domain[x], domain[y], domain[z])


@dataclass
class InvarianceReport:
    machines: tuple[str, str]
    compared: int
    max_gap: int | None
    histogram: dict[int, int]
    witness: tuple | None
    only_first: list
    only_second: list

    def to_dict(self) -> dict:
        return {
            "machines": list(self.machines),
            "compared": self.compared,
            "max_gap": self.max_gap,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "witness": None if self.witness is None else [b.text for b in self.witness],
            "only_first": [[x.text, y.text] for x, y in self.only_first],
            "only_second": [[x.text, y.text] for x, y in self.only_second],
        }


def invariance_gap(t1: ComplexityTable, t2: ComplexityTable) -> InvarianceReport:
    """Per-key ``|K1 - K2|`` over the keys both tables hold."""
    order = lambda key: (key[0].sort_key(), key[1].sort_key())  # noqa: E731
    shared = sorted(set(t1.entries) & set(t2.entries), key=order)
    gaps = Counter()
    worst, witness = None, None
    for key in shared:
        g = abs(t1.entries[key] - t2.entries[key])
        gaps[g] += 1
        if worst is None or g > worst:
            worst, witness = g, key
    if not shared:
        warnings.warn("tables share no (condition, output) keys; nothing to compare")
    return InvarianceReport(
        (t1.machine_id, t2.machine_id), len(shared), worst, dict(gaps), witness,
        sorted(set(t1.entries) - set(t2.entries), key=order),
        sorted(set(t2.entries) - set(t1.entries), key=order),
    )


# -- CSV ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def dumps_matrix(m: DistanceMatrix) -> str:
    buf = io.StringIO()
    buf.write(f"# name={m.name}\n")
    buf.write(f"# params={json.dumps(m.params, sort_keys=True)}\n")
    buf.write(f"# source={m.source}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([x.text for x in m.domain])
    for row in m.values:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def loads_matrix(text: str) -> DistanceMatrix:
    meta = {}
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif line.strip():
            rows.append(line)
    if not rows:
        raise MalformedMatrixError("distance matrix file has no header row")
    try:
        parsed = list(csv.reader(rows))
        domain = [BitString.parse(x) for x in parsed[0]]
        values = np.array([[float(v) for v in r] for r in parsed[1:]], dtype=float)
        if values.size == 0:
            values = values.reshape(len(domain), len(domain))
        params = json.loads(meta.get("params") or "{}")
        return DistanceMatrix(domain, values, meta.get("name", ""), params, meta.get("source", ""))
    except ValueError as exc:
        raise MalformedMatrixError(f"malformed distance matrix: {exc}") from None


def save_matrix(m: DistanceMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_matrix(m))


def load_matrix(path) -> DistanceMatrix:
    with open(path, encoding="utf-8") as fh:
        return loads_matrix(fh.read())
