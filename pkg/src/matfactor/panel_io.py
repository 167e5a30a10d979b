"""Long-format panel files and per-column series transforms.

A panel file is a CSV with header ``t,row_id,col_id,value``: one record per
observed cell, 1-based integer time index, free-form string identifiers.
Missing cells are simply absent, or carry the literal token ``NA``.  Row and
column orderings follow first appearance unless explicit orderings are
supplied.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import (
    DuplicateCell,
    InconsistentVocabulary,
    NonPositiveForLog,
    ParseError,
)
from .panel import MaskedSeries

HEADER = ("t", "row_id", "col_id", "value")
NA_TOKEN = "NA"

TRANSFORMS = ("none", "diff", "logdiff", "logdiff2")
_TRANSFORM_ORDER = {"none": 0, "diff": 1, "logdiff": 1, "logdiff2": 2}


def load_panel(
    path,
    row_order: list[str] | None = None,
    col_order: list[str] | None = None,
) -> tuple[MaskedSeries, list[str], list[str]]:
    """Read a long-format panel file.

    Returns the masked series plus the row and column identifier orderings
    (first-appearance order, or the explicit orderings when given).
    """
    records = []
    max_t = 0
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(1, "empty file; header row is mandatory") from None
        if [h.strip() for h in header] != list(HEADER):
            raise ParseError(1, f"expected header {','.join(HEADER)}, got {','.join(header)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != 4:
                raise ParseError(lineno, f"expected 4 fields, got {len(row)}")
            t_raw, row_id, col_id, value_raw = (field.strip() for field in row)
            try:
                t = int(t_raw)
            except ValueError:
                raise ParseError(lineno, f"time index {t_raw!r} is not an integer") from None
            if t < 1:
                raise ParseError(lineno, f"time index must be >= 1, got {t}")
            if value_raw == NA_TOKEN:
                value = None
            else:
                try:
                    value = float(value_raw)
                except ValueError:
                    raise ParseError(lineno, f"value {value_raw!r} is not a number") from None
                if not np.isfinite(value):
                    raise ParseError(lineno, f"value {value_raw!r} is not finite")
            records.append((t, row_id, col_id, value))
            max_t = max(max_t, t)
    if not records:
        raise ParseError(2, "file contains no records")

    row_ids = _vocabulary([rec[1] for rec in records], row_order, "row")
    col_ids = _vocabulary([rec[2] for rec in records], col_order, "column")
    row_index = {rid: i for i, rid in enumerate(row_ids)}
    col_index = {cid: j for j, cid in enumerate(col_ids)}

    values = np.zeros((max_t, len(row_ids), len(col_ids)))
    mask = np.zeros((max_t, len(row_ids), len(col_ids)), dtype=np.uint8)
    seen = set()
    for t, row_id, col_id, value in records:
        i, j = row_index[row_id], col_index[col_id]
        if (t, i, j) in seen:
            raise DuplicateCell(t, row_id, col_id)
        seen.add((t, i, j))
        if value is not None:
            values[t - 1, i, j] = value
            mask[t - 1, i, j] = 1
    return MaskedSeries(values, mask), row_ids, col_ids


def _vocabulary(seen_ids, explicit, kind: str) -> list[str]:
    if explicit is None:
        out = []
        known = set()
        for item in seen_ids:
            if item not in known:
                known.add(item)
                out.append(item)
        return out
    allowed = set(explicit)
    if len(allowed) != len(explicit):
        raise InconsistentVocabulary(f"duplicate entries in explicit {kind} ordering")
    stray = sorted(set(seen_ids) - allowed)
    if stray:
        raise InconsistentVocabulary(
            f"{kind} identifiers {stray} not present in the explicit ordering"
        )
    return list(explicit)


def save_panel(path, series: MaskedSeries, row_ids=None, col_ids=None, na="explicit") -> None:
    """Write a panel in long format.

    With ``na="explicit"`` (default) unobserved cells are written as the NA
    token, so every cell appears once and first-appearance order on reload
    matches the in-memory order for any mask.  ``na="omit"`` drops unobserved
    cells for compactness.  Values are rendered with ``repr`` (shortest
    round-trip representation), making save/load an identity on observed
    values and output byte-stable.
    """
    if na not in ("explicit", "omit"):
        raise ValueError(f"na must be 'explicit' or 'omit', got {na!r}")
    t_len, a, b = series.shape
    row_ids = row_ids if row_ids is not None else [f"r{i}" for i in range(a)]
    col_ids = col_ids if col_ids is not None else [f"c{j}" for j in range(b)]
    if len(row_ids) != a or len(col_ids) != b:
        raise InconsistentVocabulary(
            f"orderings of lengths ({len(row_ids)}, {len(col_ids)}) do not match panel ({a}, {b})"
        )
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        for t in range(t_len):
            for i in range(a):
                for j in range(b):
                    if series.mask[t, i, j]:
                        writer.writerow(
                            [t + 1, row_ids[i], col_ids[j], repr(float(series.values[t, i, j]))]
                        )
                    elif na == "explicit":
                        writer.writerow([t + 1, row_ids[i], col_ids[j], NA_TOKEN])


def transform_series(series: MaskedSeries, transforms) -> MaskedSeries:
    """Apply per-column transforms along time.

    ``transforms`` is a sequence of codes (one per column) from
    ``{"none", "diff", "logdiff", "logdiff2"}``: identity, first difference,
    first difference of logs, second difference of logs.  Differencing
    windows propagate missingness (an output cell is observed only when its
    whole input window is observed) and every column is shifted onto a
    common time axis shortened by the maximum difference order.
    """
    t_len, a, b = series.shape
    transforms = list(transforms)
    if len(transforms) != b:
        raise ValueError(f"need one transform per column ({b}), got {len(transforms)}")
    unknown = [tr for tr in transforms if tr not in TRANSFORMS]
    if unknown:
        raise ValueError(f"unknown transforms {unknown}; valid: {TRANSFORMS}")
    max_order = max(_TRANSFORM_ORDER[tr] for tr in transforms)
    if t_len <= max_order:
        raise ValueError(
            f"series length {t_len} too short for transforms of order {max_order}"
        )
    new_len = t_len - max_order
    values = np.zeros((new_len, a, b))
    mask = np.zeros((new_len, a, b), dtype=np.uint8)
    for j, code in enumerate(transforms):
        col_vals = series.values[:, :, j]
        col_mask = series.mask[:, :, j].astype(bool)
        if code in ("logdiff", "logdiff2"):
            bad = col_mask & (col_vals <= 0)
            if bad.any():
                t_bad, i_bad = np.argwhere(bad)[0]
                raise NonPositiveForLog(
                    int(t_bad) + 1, int(i_bad), j, float(col_vals[t_bad, i_bad])
                )
            work = np.where(col_mask, np.log(np.where(col_mask, col_vals, 1.0)), 0.0)
        else:
            work = np.where(col_mask, col_vals, 0.0)
        order = _TRANSFORM_ORDER[code]
        if order == 0:
            out_vals = work[max_order:]
            out_mask = col_mask[max_order:]
        elif order == 1:
            out_vals = work[1:] - work[:-1]
            out_mask = col_mask[1:] & col_mask[:-1]
            out_vals = out_vals[max_order - 1 :]
            out_mask = out_mask[max_order - 1 :]
        else:
            out_vals = work[2:] - 2.0 * work[1:-1] + work[:-2]
            out_mask = col_mask[2:] & col_mask[1:-1] & col_mask[:-2]
        values[:, :, j] = np.where(out_mask, out_vals, 0.0)
        mask[:, :, j] = out_mask
    return MaskedSeries(values, mask)
