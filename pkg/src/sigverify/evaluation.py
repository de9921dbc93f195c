"""FAR / FRR / EER from verification scores, plus report and ROC CSV output.

Convention: a signature is accepted when ``score >= threshold``; genuine
signatures should score high.  Rates are percentages.
"""

import csv
import io
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

REPORT_HEADER = (
    "signer_id",
    "mode",
    "eer_pct",
    "eer_threshold",
    "far_at_zero_pct",
    "frr_at_zero_pct",
    "n_genuine",
    "n_forgery",
)
ROC_HEADER = ("signer_id", "threshold", "far_pct", "frr_pct")


@dataclass(frozen=True)
class ScoreSet:
    genuine: np.ndarray
    forgery: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.genuine, dtype=np.float64).ravel()
        f = np.asarray(self.forgery, dtype=np.float64).ravel()
        if g.size == 0 or f.size == 0:
            raise ValueError("ScoreSet needs at least one genuine and one forgery score")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(f))):
            raise ValueError("scores must be finite")
        object.__setattr__(self, "genuine", g)
        object.__setattr__(self, "forgery", f)


@dataclass(frozen=True)
class RatePoint:
    threshold: float
    far: float
    frr: float


def far_frr_at(s: ScoreSet, threshold: float):
    far = 100.0 * np.count_nonzero(s.forgery >= threshold) / s.forgery.size
    frr = 100.0 * np.count_nonzero(s.genuine < threshold) / s.genuine.size
    return float(far), float(frr)


def _rate_curve(s: ScoreSet):
    """FAR and FRR at every distinct score used as the threshold."""
    thr = np.unique(np.concatenate([s.genuine, s.forgery]))
    g = np.sort(s.genuine)
    f = np.sort(s.forgery)
    far = 100.0 * (f.size - np.searchsorted(f, thr, side="left")) / f.size
    frr = 100.0 * np.searchsorted(g, thr, side="left") / g.size
    return thr, far, frr


def compute_eer(s: ScoreSet):
    """Equal error rate (percent) and the threshold where it occurs.

    FAR - FRR is non-increasing in the threshold.  The EER is read off where
    it reaches zero, interpolating linearly between the two neighbouring
    thresholds when it jumps across zero.  If it is zero over a run of
    thresholds, the threshold reported is the middle of that run.  Past the
    largest score, ``max + 1`` stands in for the everything-rejected threshold.
    """
    thr, far, frr = _rate_curve(s)
    thr = np.append(thr, thr[-1] + 1.0)
    far = np.append(far, 0.0)
    frr = np.append(frr, 100.0)
    diff = far - frr
    zero = np.flatnonzero(diff == 0.0)
    if zero.size:
        lo, hi = zero[0], zero[-1]
        return float(far[lo]), float(0.5 * (thr[lo] + thr[hi]))
    j = int(np.argmax(diff < 0.0))  # first negative; diff[0] = 100 - 0 > 0
    i = j - 1
    t = diff[i] / (diff[i] - diff[j])
    eer = far[i] + t * (far[j] - far[i])
    return float(eer), float(thr[i] + t * (thr[j] - thr[i]))


def roc_points(s: ScoreSet) -> list:
    thr, far, frr = _rate_curve(s)
    pts = [RatePoint(-np.inf, 100.0, 0.0)]
    pts.extend(RatePoint(float(t), float(a), float(r)) for t, a, r in zip(thr, far, frr))
    pts.append(RatePoint(np.inf, 0.0, 100.0))
    return pts


@dataclass(frozen=True)
class SignerResult:
    signer_id: str
    eer: float
    eer_threshold: float
    far_at_zero: float
    frr_at_zero: float
    n_genuine: int
    n_forgery: int
    roc: tuple = field(default=(), repr=False, compare=False)


def evaluate_scores(signer_id: str, s: ScoreSet) -> SignerResult:
    eer, thr = compute_eer(s)
    far0, frr0 = far_frr_at(s, 0.0)
    return SignerResult(
        signer_id, eer, thr, far0, frr0, int(s.genuine.size), int(s.forgery.size), tuple(roc_points(s))
    )


@dataclass(frozen=True)
class EvalReport:
    signers: tuple
    mean_eer: float
    correct_rate: float
    mode: str = ""
    config: dict = field(default_factory=dict, compare=False)

    def table_rows(self) -> list:
        """Rows in the (Signer, EER %, FAR %, FRR %) layout, rates at threshold zero."""
        return [(r.signer_id, fmt_pct(r.eer), fmt_pct(r.far_at_zero), fmt_pct(r.frr_at_zero)) for r in self.signers]

    def summary_line(self) -> str:
        return f"mean_EER={fmt_pct(self.mean_eer)}% correct_rate={fmt_pct(self.correct_rate)}%"


def aggregate(results, mode: str = "", config: dict | None = None) -> EvalReport:
    results = tuple(sorted(results, key=lambda r: r.signer_id))
    if not results:
        raise ValueError("aggregate needs at least one signer")
    mean_eer = float(np.mean([r.eer for r in results]))
    return EvalReport(results, mean_eer, 100.0 - mean_eer, mode, dict(config or {}))


def fmt_pct(value: float) -> str:
    """Two decimals, half-up, from the shortest repr of ``value``."""
    return str(Decimal(repr(float(value))).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _fmt_threshold(value: float) -> str:
    if np.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(float(value))


def report_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(REPORT_HEADER)
    for r in report.signers:
        w.writerow(
            [
                r.signer_id,
                report.mode,
                fmt_pct(r.eer),
                _fmt_threshold(r.eer_threshold),
                fmt_pct(r.far_at_zero),
                fmt_pct(r.frr_at_zero),
                r.n_genuine,
                r.n_forgery,
            ]
        )
    return buf.getvalue()


def roc_csv(report: EvalReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROC_HEADER)
    for r in report.signers:
        for p in r.roc:
            w.writerow([r.signer_id, _fmt_threshold(p.threshold), fmt_pct(p.far), fmt_pct(p.frr)])
    return buf.getvalue()
