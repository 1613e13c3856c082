"""Binning of continuous values into categorical intervals."""

from typing import List, Optional, Sequence

import numpy as np

from tabgen.errors import ContractError


def _as_float_array(values: Sequence[Optional[float]]) -> np.ndarray:
    return np.array([np.nan if v is None else float(v) for v in values], dtype=np.float64)


def discretize(values: Sequence[Optional[float]], edges: Sequence[float]) -> List[int]:
    """
    Map values to half-open bins; absent values go to the missing category.

    Bin ``i`` holds ``edges[i-1] <= v < edges[i]``; values below the first edge
    land in bin 0, values at or above the last edge in bin ``len(edges)``.
    The missing category is always the final index, ``len(edges) + 1``.

    Args:
        values: Reals, with None or NaN for absent values
        edges: Strictly increasing bin edges (at least one)

    Returns:
        Category index per value

    Raises:
        ContractError: If edges are empty or not strictly increasing

    Example:
        >>> discretize([1.0, 5.0, None], [2.0, 4.0])
        [0, 2, 3]
    """
    edges_arr = np.asarray(edges, dtype=np.float64)
    if edges_arr.size < 1:
        raise ContractError("discretize: at least one edge is required")
    if np.any(np.diff(edges_arr) <= 0):
        raise ContractError("discretize: edges must be strictly increasing")

    arr = values if isinstance(values, np.ndarray) else _as_float_array(values)
    arr = np.asarray(arr, dtype=np.float64)
    bins = np.searchsorted(edges_arr, arr, side="right")
    bins = np.where(np.isnan(arr), edges_arr.size + 1, bins)
    return bins.astype(np.int64).tolist()


def quantile_edges(values: np.ndarray, n_bins: int) -> List[float]:
    """
    Edges splitting the observed values into ``n_bins`` quantile bins.

    Duplicate quantiles are collapsed, so fewer bins may result for
    low-cardinality data. A constant column yields a single edge at its value.

    Args:
        values: Observed values (NaN ignored)
        n_bins: Requested number of value bins (>= 2)

    Returns:
        Strictly increasing list of edges
    """
    if n_bins < 2:
        raise ContractError(f"quantile_edges: need at least 2 bins, got {n_bins}")
    observed = np.asarray(values, dtype=np.float64)
    observed = observed[~np.isnan(observed)]
    if observed.size == 0:
        return [0.0]
    qs = np.linspace(0.0, 1.0, n_bins + 1)[1:-1]
    edges = np.unique(np.quantile(observed, qs))
    # an edge at the minimum would leave bin 0 empty
    edges = edges[edges > observed.min()] if edges.size > 1 else edges
    if edges.size == 0:
        edges = np.array([observed.min()])
    return [float(e) for e in edges]


def bin_labels(edges: Sequence[float]) -> List[str]:
    """Human-readable interval labels, one per value bin."""
    fmt = "{:.6g}".format
    labels = [f"<{fmt(edges[0])}"]
    labels += [f"[{fmt(lo)},{fmt(hi)})" for lo, hi in zip(edges, edges[1:])]
    labels.append(f">={fmt(edges[-1])}")
    return labels


def bin_midpoints(edges: Sequence[float], values: np.ndarray) -> List[float]:
    """
    Representative value per bin.

    Interior bins use the interval centre. The two open-ended bins use the
    centre between the edge and the most extreme observed value; when nothing
    lies beyond the edge the edge itself is used.

    Args:
        edges: Bin edges
        values: Observed values the edges were fitted on (NaN ignored)

    Returns:
        One midpoint per value bin
    """
    observed = np.asarray(values, dtype=np.float64)
    observed = observed[~np.isnan(observed)]
    lo_edge, hi_edge = float(edges[0]), float(edges[-1])
    low = float(observed.min()) if observed.size else lo_edge
    high = float(observed.max()) if observed.size else hi_edge
    mids = [(min(low, lo_edge) + lo_edge) / 2.0]
    mids += [(float(a) + float(b)) / 2.0 for a, b in zip(edges, edges[1:])]
    mids.append((hi_edge + max(high, hi_edge)) / 2.0)
    return mids
