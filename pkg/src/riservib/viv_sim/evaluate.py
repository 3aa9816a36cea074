"""Per-cluster prediction error bookkeeping.

A case counts as a large displacement error when predicted/measured maximum
displacement falls outside [1/1.5, 1.5]; as a large frequency error when the
dominant frequencies differ by more than 0.03 Hz.
"""
from __future__ import annotations

from dataclasses import dataclass

DISP_FACTOR = 1.5
FREQ_TOL = 0.03  # Hz
_EPS = 1e-9      # m, below this a measured displacement counts as zero


@dataclass(frozen=True)
class ClusterErrorRow:
    cluster: int
    n_cases: int
    pct_disp_error: float
    pct_freq_error: float
    n_undefined_ratio: int  # measured ~0 while prediction is not


def evaluate_predictions(pairs) -> list[ClusterErrorRow]:
    """``pairs``: iterables of (SimResult, ResponseStats, cluster label).

    Mirrors the published prediction-evaluation table: one row per cluster
    with the percentage of large displacement / frequency errors.
    """
    if not pairs:
        raise ValueError("no prediction/measurement pairs")
    by_cluster: dict[int, list] = {}
    for sim, stats, label in pairs:
        by_cluster.setdefault(int(label), []).append((sim, stats))

    rows = []
    for cluster in sorted(by_cluster):
        cases = by_cluster[cluster]
        n = len(cases)
        n_disp = 0
        n_freq = 0
        n_undef = 0
        for sim, stats in cases:
            pred = sim.max_disp_std_cf
            meas = stats.ydisp_max
            if meas <= _EPS:
                if pred > _EPS:
                    n_disp += 1   # ratio undefined: counted as a large error
                    n_undef += 1
            else:
                ratio = pred / meas
                if ratio > DISP_FACTOR or ratio < 1.0 / DISP_FACTOR:
                    n_disp += 1
            if abs(sim.dominant_freq_main - stats.freq_dom) > FREQ_TOL:
                n_freq += 1
        rows.append(ClusterErrorRow(cluster, n, 100.0 * n_disp / n,
                                    100.0 * n_freq / n, n_undef))
    return rows
