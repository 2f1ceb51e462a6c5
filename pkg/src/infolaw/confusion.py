"""Confusability measures and checks of the exponential generalization law.

Items, stimuli and responses are identified: row ``a`` of a
:class:`ConfusionMatrix` is the response distribution ``P(. | a)`` when item
``a`` is presented.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .bits import BitString, as_bits, strings_up_to
from .distance import DistanceMatrix
from .enumerator import ComplexityTable, k_cond

ROW_TOL = 1e-12
RSS_TIE = 1e-12


class InsufficientDataError(ValueError):
    pass


class SingularFitError(InsufficientDataError):
    pass


class MalformedConfusionError(ValueError):
    pass


@dataclass
class ConfusionMatrix:
    """Row-stochastic ``probs[i, j] = P(domain[j] | domain[i])``."""

    domain: list[BitString]
    probs: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.domain = [as_bits(x) for x in self.domain]
        self.probs = np.asarray(self.probs, dtype=float)
        n = len(self.domain)
        if self.probs.shape != (n, n):
            raise ValueError(f"expected a {n}x{n} matrix, got shape {self.probs.shape}")
        if n and not (np.all(self.probs > 0) and np.all(self.probs <= 1)):
            raise ValueError("confusion probabilities must lie in (0, 1]")
        if n and np.max(np.abs(self.probs.sum(axis=1) - 1)) > ROW_TOL:
            raise ValueError("confusion matrix rows must sum to 1")

    def __len__(self):
        return len(self.domain)

    def index(self, x) -> int:
        return self.domain.index(as_bits(x))

    def p(self, b, a) -> float:
        """``P(b | a)``."""
        return float(self.probs[self.index(a), self.index(b)])


@dataclass
class DistributionSpec:
    outcomes: list[BitString]
    probs: np.ndarray
    generator: dict = field(default_factory=dict)

    def __post_init__(self):
        self.outcomes = [as_bits(x) for x in self.outcomes]
        self.probs = np.asarray(self.probs, dtype=float)
        if len(self.outcomes) != len(self.probs) or not len(self.probs):
            raise ValueError("need one probability per outcome and at least one outcome")
        if np.any(self.probs <= 0) or abs(self.probs.sum() - 1) > ROW_TOL:
            raise ValueError("probabilities must be positive and sum to 1")

    @classmethod
    def uniform(cls, outcomes) -> "DistributionSpec":
        outcomes = list(outcomes)
        return cls(outcomes, np.full(len(outcomes), 1 / len(outcomes)), {"kind": "uniform"})

    @classmethod
    def point_mass(cls, outcome) -> "DistributionSpec":
        return cls([outcome], np.ones(1), {"kind": "point"})

    @classmethod
    def random(cls, n: int, seed: int = 0) -> "DistributionSpec":
        """Flat-Dirichlet distribution over the first ``n`` strings in shortlex order."""
        rng = np.random.default_rng(seed)
        p = rng.dirichlet(np.ones(n))
        p = np.maximum(p, np.finfo(float).tiny)
        outcomes = strings_up_to(max(n - 1, 0).bit_length())[:n]
        return cls(outcomes, p / p.sum(), {"kind": "dirichlet", "n": n, "seed": seed})


# -- coding ----------------------------------------------------------------------

def entropy(dist: DistributionSpec) -> float:
    p = dist.probs
    return float(-np.sum(p * np.log2(p)))


@dataclass
class ShannonFanoReport:
    lengths: list[int]
    kraft: float
    expected_length: float
    entropy: float

    @property
    def ok(self) -> bool:
        return self.kraft <= 1 and self.entropy <= self.expected_length < self.entropy + 1


def shannon_fano_length(p: float) -> int:
    length = math.ceil(-math.log2(p))
    # guard against log2 rounding just above an integer
    while length > 0 and 2.0 ** -(length - 1) <= p:
        length -= 1
    return length


def shannon_fano(dist: DistributionSpec) -> ShannonFanoReport:
    lengths = [shannon_fano_length(float(p)) for p in dist.probs]
    kraft = math.fsum(2.0 ** -n for n in lengths)
    expected = math.fsum(float(p) * n for p, n in zip(dist.probs, lengths))
    return ShannonFanoReport(lengths, kraft, expected, entropy(dist))


# -- confusability measures ------------------------------------------------------------

def _four(m: ConfusionMatrix, a, b):
    i, j = m.index(a), m.index(b)
    p = m.probs
    vals = p[i, j], p[j, i], p[i, i], p[j, j]
    if min(vals) <= 0:
        raise ValueError("confusability measures need positive entries")
    return vals


def g_measure(m: ConfusionMatrix, a, b) -> float:
    """Shepard's generalization measure: geometric mean of the two confusions
    over geometric mean of the two correct responses."""
    ba, ab, aa, bb = _four(m, a, b)
    return math.sqrt(ab * ba / (aa * bb))


def g_prime(m: ConfusionMatrix, a, b) -> float:
    ba, ab, aa, bb = _four(m, a, b)
    return min(ba, ab) / max(aa, bb)


def g_matrix(m: ConfusionMatrix) -> np.ndarray:
    p = m.probs
    d = np.diag(p)
    return np.sqrt(p * p.T / np.outer(d, d))


def gprime_matrix(m: ConfusionMatrix) -> np.ndarray:
    p = m.probs
    d = np.diag(p)
    return np.minimum(p, p.T) / np.maximum.outer(d, d)


@dataclass
class SandwichReport:
    pairs: int
    violations: int  # pairs with G' > G
    c1: float  # max G'/G, at most 1
    c2: float  # smallest constant with G <= c2 * sqrt(G')
    c2_witness: tuple | None

    def to_dict(self):
        d = asdict(self)
        d["c2_witness"] = None if self.c2_witness is None else [x.text for x in self.c2_witness]
        return d


def g_sandwich(m: ConfusionMatrix, rtol: float = 1e-12) -> SandwichReport:
    n = len(m)
    g, gp = g_matrix(m), gprime_matrix(m)
    iu = np.triu_indices(n, 1)
    if not len(iu[0]):
        return SandwichReport(0, 0, 1.0, 1.0, None)
    gv, gpv = g[iu], gp[iu]
    ratio = gv / np.sqrt(gpv)
    k = int(np.argmax(ratio))
    return SandwichReport(
        pairs=len(gv),
        violations=int(np.sum(gpv > gv * (1 + rtol))),
        c1=float(np.max(gpv / gv)),
        c2=float(ratio[k]),
        c2_witness=(m.domain[iu[0][k]], m.domain[iu[1][k]]),
    )


# -- confusion models ------------------------------------------------------------

def synth_confusion(d: DistanceMatrix, lam: float) -> ConfusionMatrix:
    """``P(b|a)`` proportional to ``2**(-lam * D(a, b))``."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    v = d.values
    if not np.allclose(v, v.T, rtol=0, atol=1e-12) or np.any(np.diag(v) != 0):
        raise ValueError("synthetic confusion needs a symmetric distance with zero diagonal")
    # subtract the row minimum before exponentiating to stay clear of underflow
    expo = -lam * v
    w = np.exp2(expo - expo.max(axis=1, keepdims=True))
    probs = w / w.sum(axis=1, keepdims=True)
    meta = {"generator": "synth", "distance": d.name, "lambda": lam, "source": d.source}
    return ConfusionMatrix(d.domain, probs, meta)


def k_weights(table: ComplexityTable, domain) -> np.ndarray:
    """Unnormalized rows ``2**-K(b|a)``; each row sums to at most 1 (Kraft)."""
    domain = [as_bits(x) for x in domain]
    k = np.empty((len(domain), len(domain)))
    for i, a in enumerate(domain):
        for j, b in enumerate(domain):
            kv = k_cond(table, b, a)
            if kv is None:
                raise KeyError(f"K({b.text}|{a.text}) is absent from {table.table_id}")
            k[i, j] = kv
    return np.exp2(-k)


def k_confusion(table: ComplexityTable, domain) -> ConfusionMatrix:
    domain = [as_bits(x) for x in domain]
    w = k_weights(table, domain)
    probs = w / w.sum(axis=1, keepdims=True)
    return ConfusionMatrix(domain, probs, {"generator": "ktable", "table": table.table_id})


# -- law fitting -------------------------------------------------------------------

@dataclass
class LawReport:
    measure: str
    distance: str
    pairs: int
    slope: float
    intercept: float
    r: float
    r2: float
    residual_min: float
    residual_max: float

    @property
    def A(self) -> float:
        return math.exp(self.intercept)

    @property
    def B(self) -> float:
        return -self.slope

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(A=self.A, B=self.B)
        return d


def _line_fit(x: np.ndarray, y: np.ndarray):
    """Least squares ``y = intercept + slope * x``; returns (slope, intercept, residuals)."""
    if len(x) < 2:
        raise InsufficientDataError(f"need at least 2 points, got {len(x)}")
    if np.ptp(x) == 0:
        raise SingularFitError("all regressor values are equal; slope is undefined")
    design = np.column_stack([np.ones_like(x), x])
    (intercept, slope), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(slope), float(intercept), y - (intercept + slope * x)


def law_verify(m: ConfusionMatrix, d: DistanceMatrix, measure: str = "gprime") -> LawReport:
    """Regress ``ln measure(a, b)`` on ``D(a, b)`` over unordered pairs ``a != b``."""
    if m.domain != d.domain:
        raise ValueError("confusion and distance matrices are over different domains")
    values = {"g": g_matrix, "gprime": gprime_matrix}[measure](m)
    n = len(m)
    iu = np.triu_indices(n, 1)
    x, y = d.values[iu], np.log(values[iu])
    if len(x) < 2:
        raise InsufficientDataError(f"law fit needs at least 2 item pairs, got {len(x)}")
    slope, intercept, resid = _line_fit(x, y)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot > 0:
        r2 = 1 - float(np.sum(resid**2)) / ss_tot
        r = float(np.corrcoef(x, y)[0, 1])
    else:  # flat response: correlation undefined
        r2 = r = math.nan
    return LawReport(measure, d.name, len(x), slope, intercept, r, r2,
                     float(resid.min()), float(resid.max()))


MODELS = ("exponential", "gaussian", "power")


@dataclass
class FitReport:
    params: dict  # model -> {"A": .., "B": ..} (power: {"A": .., "c": ..})
    rss: dict
    winner: str

    def to_dict(self):
        return asdict(self)


def fit_models(d, g) -> FitReport:
    """Fit exponential, Gaussian and power-law decay to (distance, confusability).

    Each is a straight line in log space; RSS is measured there. Ties within
    ``1e-12`` go to the earlier model in ``MODELS``.
    """
    d = np.asarray(d, dtype=float)
    g = np.asarray(g, dtype=float)
    if d.shape != g.shape or d.ndim != 1:
        raise ValueError("distances and confusabilities must be matching 1-d sequences")
    if np.any(g <= 0) or np.any(g > 1):
        raise ValueError("confusabilities must lie in (0, 1]")
    if np.any(d <= 0):
        raise ValueError("distances must be positive (the power law needs ln d)")
    y = np.log(g)
    params, rss = {}, {}
    for name, x, key in (("exponential", d, "B"), ("gaussian", d**2, "B"), ("power", np.log(d), "c")):
        slope, intercept, resid = _line_fit(x, y)
        params[name] = {"A": math.exp(intercept), key: -slope}
        rss[name] = float(np.sum(resid**2))
    best = min(rss.values())
    winner = next(name for name in MODELS if rss[name] <= best + RSS_TIE)
    return FitReport(params, rss, winner)


# -- bounds ------------------------------------------------------------------------

def _k_or_inf(table, y, x) -> float:
    k = k_cond(table, y, x)
    return math.inf if k is None else float(k)


def randomness_fraction(dist: DistributionSpec, table: ComplexityTable, c: float = 0.0) -> float:
    """Probability mass of outcomes ``x`` with ``-log2 P(x) <= K(x) + c``."""
    mass = 0.0
    for x, p in zip(dist.outcomes, dist.probs):
        if -math.log2(p) <= _k_or_inf(table, x, BitString()) + c:
            mass += p
    return float(mass)


@dataclass
class BoundsReport:
    c_upper: float
    c_upper_witness: tuple | None
    lower_fraction: dict

    def to_dict(self):
        return {
            "c_upper": self.c_upper,
            "c_upper_witness": None if self.c_upper_witness is None else [x.text for x in self.c_upper_witness],
            "lower_fraction": {k.text: v for k, v in self.lower_fraction.items()},
        }


def bounds_constant(m: ConfusionMatrix, table: ComplexityTable) -> BoundsReport:
    """Empirical constants for ``2**-K(b|a) <= P(b|a) <= 2**(c - K(b|a))``.

    ``c_upper`` is the smallest ``c`` making the upper bound hold for every
    pair; ``lower_fraction[a]`` is the ``P(.|a)`` mass where the lower bound holds.
    """
    best, witness = -math.inf, None
    lower = {}
    for i, a in enumerate(m.domain):
        held = 0.0
        for j, b in enumerate(m.domain):
            p = float(m.probs[i, j])
            k = _k_or_inf(table, b, a)
            slack = math.log2(p) + k
            if slack > best:
                best, witness = slack, (a, b)
            if 2.0 ** -k <= p:
                held += p
        lower[a] = held
    return BoundsReport(best, witness, lower)


# -- files ---------------------------------------------------------------------------

def dumps_confusion(m: ConfusionMatrix) -> str:
    buf = io.StringIO()
    for key in sorted(m.meta):
        buf.write(f"# {key}={json.dumps(m.meta[key])}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([x.text for x in m.domain])
    for row in m.probs:
        w.writerow([format(float(v), ".17g") for v in row])
    return buf.getvalue()


def loads_confusion(text: str) -> ConfusionMatrix:
    meta, rows = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            try:
                meta[key] = json.loads(value)
            except ValueError:
                meta[key] = value
        elif line.strip():
            rows.append(line)
    if not rows:
        raise MalformedConfusionError("confusion matrix file has no header row")
    try:
        parsed = list(csv.reader(rows))
        domain = [BitString.parse(x) for x in parsed[0]]
        probs = np.array([[float(v) for v in r] for r in parsed[1:]], dtype=float)
        return ConfusionMatrix(domain, probs, meta)
    except ValueError as exc:
        raise MalformedConfusionError(f"malformed confusion matrix: {exc}") from None


def save_confusion(m: ConfusionMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_confusion(m))


def load_confusion(path) -> ConfusionMatrix:
    with open(path, encoding="utf-8") as fh:
        return loads_confusion(fh.read())
