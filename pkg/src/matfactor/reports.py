"""Delimited report files for Monte-Carlo campaigns and fits.

Every writer renders numbers with ``repr`` (shortest round-trip decimals) so
a rerun with the same seed produces byte-identical files.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .evaluation import NormalitySummary
from .simulation import McReport


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else _fmt(cell) for cell in row])


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_matrix_csv(path, matrix, row_labels, col_labels, corner="id") -> None:
    matrix = np.asarray(matrix)
    rows = [[str(label)] + [matrix[i, j] for j in range(matrix.shape[1])]
            for i, label in enumerate(row_labels)]
    write_csv(path, [corner] + [str(c) for c in col_labels], rows)


def rank_frequency_rows(report: McReport) -> list[list]:
    """tab0/tab1-shaped rows: one row per (method, rank pair) plus 'other'.

    Columns for the out-of-scope alpha-weighted baselines are left empty so
    exports line up with the published table layout.
    """
    rows = []
    for method in report.methods:
        freqs = report.rank_frequencies(method)
        for pair, freq in freqs.items():
            rows.append([method, pair[0], pair[1], freq, "", "", ""])
    return rows


def write_mc_report(report: McReport, out_dir) -> list[Path]:
    """Write the full set of campaign files; returns the paths written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    freq_path = out_dir / "rank_frequencies.csv"
    write_csv(
        freq_path,
        ["method", "rank_rows", "rank_cols", "frequency",
         "alpha_minus1", "alpha_0", "alpha_plus1"],
        rank_frequency_rows(report),
    )
    written.append(freq_path)

    err_path = out_dir / "errors.csv"
    rows = []
    for method in report.methods:
        s = report.summary(method)
        rows.append([
            method,
            report.config.n_rows, report.config.n_cols, report.config.n_periods,
            s["d_row_mean"], s["d_row_sd"],
            s["d_col_mean"], s["d_col_sd"],
            s["factor_mean"], s["factor_sd"],
        ])
    write_csv(
        err_path,
        ["method", "a", "b", "T",
         "d_row_mean", "d_row_sd", "d_col_mean", "d_col_sd",
         "factor_mean", "factor_sd"],
        rows,
    )
    written.append(err_path)

    box_path = out_dir / "boxplot_data.csv"
    rows = []
    for method in report.methods:
        acc = report.results[method]
        for rep_idx, (dr, dc, fm) in enumerate(zip(acc.d_row, acc.d_col, acc.factor_mean)):
            rows.append([method, rep_idx, dr, dc, fm])
    write_csv(
        box_path,
        ["method", "replication", "d_row", "d_col", "factor_error_mean"],
        rows,
    )
    written.append(box_path)

    draws_path = out_dir / "loading_error_draws.csv"
    rows = []
    for method in report.methods:
        draws = report.loading_draws(method)
        for rep_idx in range(draws.shape[0]):
            rows.append([method, rep_idx] + list(draws[rep_idx]))
    n_coords = report.loading_draws(report.methods[0]).shape[1] if rows else 0
    write_csv(
        draws_path,
        ["method", "replication"] + [f"coord_{i + 1}" for i in range(n_coords)],
        rows,
    )
    written.append(draws_path)

    meta_path = out_dir / "report.json"
    payload = {
        "config": asdict(report.config),
        "methods": list(report.methods),
        "failures": [
            {"replication": rep, "method": method, "error": message}
            for rep, method, message in report.failures
        ],
        "rank_frequencies": {
            method: {f"{pair[0]},{pair[1]}": freq
                     for pair, freq in report.rank_frequencies(method).items()}
            for method in report.methods
        },
        "summary": {method: report.summary(method) for method in report.methods},
    }
    write_json(meta_path, payload)
    written.append(meta_path)
    return written


def write_qq_tables(summary: NormalitySummary, out_dir, prefix="qq") -> list[Path]:
    """Two-column QQ tables (theoretical, empirical), one file per coordinate."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    n_coords = summary.standardized.shape[1]
    for coord in range(n_coords):
        path = out_dir / f"{prefix}_coord_{coord + 1}.csv"
        rows = zip(summary.theoretical_quantiles, summary.standardized[:, coord])
        write_csv(path, ["theoretical_quantile", "empirical_quantile"], rows)
        written.append(path)
    moments_path = out_dir / f"{prefix}_moments.csv"
    rows = [
        [coord + 1, summary.mean[coord], summary.sd[coord],
         summary.skewness[coord], summary.excess_kurtosis[coord]]
        for coord in range(n_coords)
    ]
    write_csv(moments_path, ["coordinate", "mean", "sd", "skewness", "excess_kurtosis"], rows)
    written.append(moments_path)
    return written
