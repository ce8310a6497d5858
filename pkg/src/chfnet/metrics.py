"""Goodness-of-fit metrics for measured vs predicted CHF.

All functions take two equal-length 1-D sequences, ``measured`` first.
"""
import json
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ValidationError


def _pair(measured, predicted, min_len=1):
    m = np.asarray(measured, dtype=np.float64).reshape(-1)
    p = np.asarray(predicted, dtype=np.float64).reshape(-1)
    if m.shape != p.shape:
        raise ValidationError(f"length mismatch: {m.size} measured vs {p.size} predicted")
    if m.size < min_len:
        raise ValidationError(f"need at least {min_len} samples, got {m.size}")
    return m, p


def nrmse(measured, predicted):
    """Root of the squared error summed over N - 1, divided by the measured mean.

    The N - 1 divisor is intentional; it is not the textbook RMSE.
    """
    m, p = _pair(measured, predicted, 2)
    mean = m.mean()
    if mean == 0:
        raise ValidationError("NRMSE undefined: measured mean is zero")
    return float(np.sqrt(np.sum((m - p) ** 2) / (m.size - 1)) / mean)


def mae(measured, predicted):
    m, p = _pair(measured, predicted)
    return float(np.mean(np.abs(m - p)))


def nse(measured, predicted):
    """Nash-Sutcliffe efficiency, unclamped (negative when worse than the mean)."""
    m, p = _pair(measured, predicted, 2)
    sst = np.sum((m - m.mean()) ** 2)
    if sst == 0:
        raise ValidationError("NSE undefined: measured series is constant")
    return float(1.0 - np.sum((m - p) ** 2) / sst)


def r2(measured, predicted):
    """Squared Pearson correlation between the two series."""
    m, p = _pair(measured, predicted, 2)
    dm = m - m.mean()
    dp = p - p.mean()
    smm = np.sum(dm * dm)
    spp = np.sum(dp * dp)
    if smm == 0 or spp == 0:
        raise ValidationError("R2 undefined: a series is constant")
    r = np.sum(dm * dp) / np.sqrt(smm * spp)
    return float(min(r * r, 1.0))


@dataclass(frozen=True)
class MetricsReport:
    nrmse: float
    mae: float
    r2: float
    nse: float
    n: int

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def evaluate(measured, predicted):
    m, p = _pair(measured, predicted, 2)
    return MetricsReport(nrmse(m, p), mae(m, p), r2(m, p), nse(m, p), int(m.size))


_COLS = ("nrmse", "mae", "r2", "nse")
_HEAD = ("NRMSE", "MAE", "R^2", "NSE")


def format_table(rows):
    """Aligned text table: one line per model, train block then test block.

    ``rows`` is a sequence of ``(model_name, train_report, test_report)``.
    """
    rows = list(rows)
    name_w = max([len("Model")] + [len(r[0]) for r in rows])
    cell = 10
    block = cell * 4
    lines = [
        f"{'':{name_w}}  {'Training':^{block}}  {'Testing':^{block}}",
        f"{'Model':{name_w}}  " + "".join(f"{h:>{cell}}" for h in _HEAD) + "  "
        + "".join(f"{h:>{cell}}" for h in _HEAD),
    ]
    for name, tr, te in rows:
        fmt = lambda rep: "".join(
            f"{getattr(rep, c):>{cell}.4f}" for c in _COLS)
        lines.append(f"{name:{name_w}}  {fmt(tr)}  {fmt(te)}")
    return "\n".join(lines) + "\n"
