"""
Analysis service: failure-rate curves from conditional failure tables,
threshold crossings and resource estimates.
"""
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize, special, stats

from ..errors import AnalysisError
from ..models.code412 import pitch

logger = logging.getLogger(__name__)

DEFAULT_TRUNCATION = {1: 6, 2: 10, 3: 21}
RI_COLUMNS = ['level', 'i', 'trials', 'failures']
CURVE_COLUMNS = ['level', 'p', 'pfail', 'plo', 'phi']
# floor used when taking logs of zero-valued curve points
LOG_FLOOR = 1e-300


def wilson_interval(failures: int, trials: int, z: float = 2.0) -> Tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    phat = failures / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class RiEntry:
    i: int
    trials: int
    failures: int
    r: float
    sigma: float
    wilson: bool = False


@dataclass
class RiTable:
    """Conditional failure fractions r_i for one level."""
    level: int
    locations: int
    entries: Dict[int, RiEntry] = field(default_factory=dict)
    i_max: Optional[int] = None

    def __post_init__(self):
        if self.i_max is None:
            self.i_max = DEFAULT_TRUNCATION.get(self.level, max(self.entries, default=0))

    @classmethod
    def from_counts(cls, level: int, locations: int, rows: Iterable[Tuple[int, int, int]],
                    i_max: Optional[int] = None, wilson_min_failures: int = 10) -> 'RiTable':
        """Build a table from (i, trials, failures) rows, merging repeats by sum."""
        totals: Dict[int, List[int]] = {}
        for i, trials, failures in rows:
            acc = totals.setdefault(int(i), [0, 0])
            acc[0] += int(trials)
            acc[1] += int(failures)
        entries = {}
        for i, (trials, failures) in sorted(totals.items()):
            if trials <= 0 or not 0 <= failures <= trials:
                raise AnalysisError(f'level {level}: row i={i} has {failures} failures in {trials} trials')
            r = failures / trials
            if failures < wilson_min_failures:
                lo, hi = wilson_interval(failures, trials)
                sigma = (hi - lo) / 4.0
                use_wilson = True
            else:
                sigma = math.sqrt(r * (1 - r) / trials)
                use_wilson = False
            entries[i] = RiEntry(i, trials, failures, r, sigma, use_wilson)
        table = cls(level, int(locations), entries, i_max)
        table.validate()
        if any(e.wilson for e in entries.values()):
            logger.info('level %d: Wilson interval used for i=%s', level,
                        [e.i for e in entries.values() if e.wilson])
        return table

    def validate(self) -> None:
        if self.locations < 1:
            raise AnalysisError(f'level {self.level}: location count must be positive')
        if self.i_max > self.locations:
            raise AnalysisError(f'level {self.level}: i_max={self.i_max} exceeds N={self.locations}')
        missing = [i for i in range(1, self.i_max + 1) if i not in self.entries]
        if missing:
            raise AnalysisError(f'level {self.level}: missing r_i rows for i={missing}')
        zero = self.entries.get(0)
        if zero is not None and zero.failures:
            raise AnalysisError(f'level {self.level}: r_0 must be 0, found {zero.failures} failures')

    def r(self) -> np.ndarray:
        return np.array([self.entries[i].r if i in self.entries else 0.0 for i in range(self.i_max + 1)])

    def sigma(self) -> np.ndarray:
        return np.array([self.entries[i].sigma if i in self.entries else 0.0 for i in range(self.i_max + 1)])

    @property
    def wilson_rows(self) -> List[int]:
        return [e.i for e in self.entries.values() if e.wilson]


@dataclass
class CurvePoint:
    p: float
    pfail: float
    plo: float
    phi: float
    tail_warning: bool = False


@dataclass
class FailureCurve:
    level: int
    points: List[CurvePoint] = field(default_factory=list)

    @property
    def p(self) -> np.ndarray:
        return np.array([pt.p for pt in self.points])

    @property
    def pfail(self) -> np.ndarray:
        return np.array([pt.pfail for pt in self.points])

    @property
    def plo(self) -> np.ndarray:
        return np.array([pt.plo for pt in self.points])

    @property
    def phi(self) -> np.ndarray:
        return np.array([pt.phi for pt in self.points])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([(self.level, pt.p, pt.pfail, pt.plo, pt.phi) for pt in self.points],
                            columns=CURVE_COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame, level: Optional[int] = None) -> 'FailureCurve':
        if level is not None:
            frame = frame[frame['level'] == level]
        if frame.empty:
            raise AnalysisError('curve has no points')
        frame = frame.sort_values('p')
        return cls(int(frame['level'].iloc[0]),
                   [CurvePoint(float(r.p), float(r.pfail), float(r.plo), float(r.phi))
                    for r in frame.itertuples()])


@dataclass
class CrossingResult:
    status: str  # 'crossing', 'none' or 'degenerate'
    p_star: Optional[float] = None
    lo: Optional[float] = None
    hi: Optional[float] = None
    message: str = ''

    def to_dict(self) -> dict:
        return {'status': self.status, 'p_star': self.p_star, 'lo': self.lo, 'hi': self.hi,
                'message': self.message}


@dataclass
class ResourceEstimate:
    p: float
    target: float
    level: Optional[int]
    qubits_per_block: Optional[int]
    pfail: Optional[float]
    max_p: Dict[int, Optional[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {'p': self.p, 'target': self.target, 'level': self.level,
                'qubits_per_block': self.qubits_per_block, 'pfail': self.pfail,
                'max_p': {str(k): v for k, v in self.max_p.items()}}


def log_binomial_weights(n: int, p: float, i_max: int) -> np.ndarray:
    """log[C(N, i) p^i (1-p)^(N-i)] for i = 0..i_max."""
    i = np.arange(i_max + 1, dtype=float)
    log_choose = special.gammaln(n + 1) - special.gammaln(i + 1) - special.gammaln(n - i + 1)
    return log_choose + i * math.log(p) + (n - i) * math.log1p(-p)


def expand_failure_rate(table: RiTable, p: float, tail_warning_fraction: float = 0.01) -> CurvePoint:
    """Truncated binomial expansion of the failure rate with a first-order 2-sigma band."""
    if not 0.0 < p < 1.0:
        raise AnalysisError(f'p must lie strictly between 0 and 1, got {p}')
    weights = np.exp(log_binomial_weights(table.locations, p, table.i_max))
    r, sigma = table.r(), table.sigma()
    pfail = float(np.dot(weights, r))
    band = float(np.dot(weights, 2.0 * sigma))
    plo = min(max(0.0, pfail - band), pfail)
    phi = max(min(1.0, pfail + band), pfail)

    # probability of more than i_max faults bounds the dropped terms
    tail = float(stats.binom.sf(table.i_max, table.locations, p))
    warn = pfail > 0 and tail > tail_warning_fraction * pfail
    if warn:
        logger.warning('level %d at p=%.3g: truncation tail %.3g exceeds %.3g of P_fail=%.3g',
                       table.level, p, tail, tail_warning_fraction, pfail)
    return CurvePoint(p, min(pfail, 1.0), plo, phi, warn)


def _log(values: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(values, LOG_FLOOR))


def _first_crossing(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> Optional[float]:
    """Log-log interpolated p where a - b first changes sign."""
    lp = np.log(p)
    diff = _log(a) - _log(b)
    for k in range(len(diff)):
        if diff[k] == 0.0:
            return float(p[k])
        if k + 1 < len(diff) and diff[k] * diff[k + 1] < 0:
            t = diff[k] / (diff[k] - diff[k + 1])
            return float(math.exp(lp[k] + t * (lp[k + 1] - lp[k])))
    return None


def _on_common_grid(a: FailureCurve, b: FailureCurve) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
    pa, pb = a.p, b.p
    lo, hi = max(pa.min(), pb.min()), min(pa.max(), pb.max())
    if lo >= hi:
        raise AnalysisError(f'curves for levels {a.level} and {b.level} do not overlap in p')
    grid = np.unique(np.concatenate([pa[(pa >= lo) & (pa <= hi)], pb[(pb >= lo) & (pb <= hi)]]))
    lg = np.log(grid)

    def resample(curve: FailureCurve, values: np.ndarray) -> np.ndarray:
        return np.exp(np.interp(lg, np.log(curve.p), _log(values)))

    series = {
        'a': resample(a, a.pfail), 'a_lo': resample(a, a.plo), 'a_hi': resample(a, a.phi),
        'b': resample(b, b.pfail), 'b_lo': resample(b, b.plo), 'b_hi': resample(b, b.phi),
    }
    return grid, series


def crossing_estimate(a: FailureCurve, b: FailureCurve) -> CrossingResult:
    """Where two curves cross, with the interval given by crossing their band envelopes."""
    grid, s = _on_common_grid(a, b)
    if np.allclose(_log(s['a']), _log(s['b']), rtol=0.0, atol=1e-12):
        return CrossingResult('degenerate', message='curves coincide: no unique crossing')
    p_star = _first_crossing(grid, s['a'], s['b'])
    if p_star is None:
        return CrossingResult('none', message=f'no crossing in [{grid[0]:.3g}, {grid[-1]:.3g}]')
    ends = [x for x in (_first_crossing(grid, s['a_lo'], s['b_hi']),
                        _first_crossing(grid, s['a_hi'], s['b_lo'])) if x is not None]
    lo = min(ends + [p_star])
    hi = max(ends + [p_star])
    return CrossingResult('crossing', p_star, lo, hi)


def slope_estimate(curve: FailureCurve, p_min: float, p_max: float) -> float:
    """Least-squares slope of log P_fail against log p over [p_min, p_max]."""
    p, pfail = curve.p, curve.pfail
    mask = (p >= p_min) & (p <= p_max) & (pfail > 0)
    if mask.sum() < 3:
        raise AnalysisError(f'need at least 3 nonzero points in [{p_min:g}, {p_max:g}], found {int(mask.sum())}')
    slope, _ = np.polyfit(np.log(p[mask]), np.log(pfail[mask]), 1)
    return float(slope)


class AnalysisService:
    """Service class for curve expansion, crossings and the CSV tables behind them."""

    def __init__(self, tail_warning_fraction: float = 0.01, wilson_min_failures: int = 10,
                 truncation: Optional[Mapping[int, int]] = None):
        self.tail_warning_fraction = tail_warning_fraction
        self.wilson_min_failures = wilson_min_failures
        self.truncation = dict(truncation or DEFAULT_TRUNCATION)

    # Tables

    def table_from_frame(self, frame: pd.DataFrame, level: int, locations: int,
                         i_max: Optional[int] = None) -> RiTable:
        rows = frame[frame['level'] == level]
        if rows.empty:
            raise AnalysisError(f'no r_i rows for level {level}')
        if i_max is None:
            i_max = self.truncation.get(level, int(rows['i'].max()))
        return RiTable.from_counts(level, locations, rows[['i', 'trials', 'failures']].itertuples(index=False),
                                   i_max, self.wilson_min_failures)

    @staticmethod
    def read_ri_frame(paths: Sequence[str]) -> pd.DataFrame:
        frames = []
        for path in paths:
            if not os.path.exists(path):
                raise AnalysisError(f'r_i table not found: {path}')
            frame = pd.read_csv(path)
            missing = set(RI_COLUMNS) - set(frame.columns)
            if missing:
                raise AnalysisError(f'{path}: missing columns {sorted(missing)}')
            frames.append(frame[RI_COLUMNS])
        return pd.concat(frames, ignore_index=True)

    @staticmethod
    def append_ri_row(path: str, level: int, i: int, trials: int, failures: int) -> None:
        row = pd.DataFrame([(level, i, trials, failures)], columns=RI_COLUMNS)
        row.to_csv(path, mode='a', header=not os.path.exists(path), index=False)

    # Curves

    def expand(self, table: RiTable, p: float) -> CurvePoint:
        return expand_failure_rate(table, p, self.tail_warning_fraction)

    def curve(self, table: RiTable, grid: Sequence[float]) -> FailureCurve:
        curve = FailureCurve(table.level, [self.expand(table, float(p)) for p in grid])
        warned = [pt.p for pt in curve.points if pt.tail_warning]
        if warned:
            logger.warning('level %d: truncation unreliable for p >= %.3g', table.level, min(warned))
        return curve

    @staticmethod
    def write_curve(path: str, curve: FailureCurve) -> str:
        curve.to_frame().to_csv(path, index=False, float_format='%.12g')
        return path

    @staticmethod
    def read_curve(path: str, level: Optional[int] = None) -> FailureCurve:
        if not os.path.exists(path):
            raise AnalysisError(f'curve file not found: {path}')
        return FailureCurve.from_frame(pd.read_csv(path), level)

    def crossings(self, curves: Sequence[FailureCurve]) -> List[Tuple[int, int, CrossingResult]]:
        ordered = sorted(curves, key=lambda c: c.level)
        return [(a.level, b.level, crossing_estimate(a, b)) for a, b in zip(ordered, ordered[1:])]

    # Resources

    def resource_estimate(self, tables: Mapping[int, RiTable], p: float, target: float) -> ResourceEstimate:
        """Smallest level meeting ``target`` at ``p``, and each level's largest admissible p."""
        if not 0.0 < target < 1.0:
            raise AnalysisError('target failure rate must lie in (0, 1)')
        estimate = ResourceEstimate(p, target, None, None, None)
        for level in sorted(tables):
            pfail = self.expand(tables[level], p).pfail
            if estimate.level is None and pfail <= target:
                estimate.level = level
                estimate.qubits_per_block = pitch(level)
                estimate.pfail = pfail
            estimate.max_p[level] = self._max_p(tables[level], target)
        return estimate

    def _max_p(self, table: RiTable, target: float, p_min: float = 1e-12, p_max: float = 1e-2) -> Optional[float]:
        def gap(log_p: float) -> float:
            point = expand_failure_rate(table, math.exp(log_p), tail_warning_fraction=math.inf)
            return math.log(max(point.pfail, LOG_FLOOR)) - math.log(target)

        lo, hi = math.log(p_min), math.log(p_max)
        if gap(lo) > 0:
            return None
        if gap(hi) <= 0:
            return p_max
        return math.exp(optimize.brentq(gap, lo, hi, xtol=1e-10))
