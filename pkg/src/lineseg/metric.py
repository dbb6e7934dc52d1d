"""Connectivity-based line extraction accuracy.

Credit is counted in connectivity units: a ground-truth line whose component
set is G holds |G| - 1 consecutive connections plus one beginning-of-line
unit. For each ground-truth line, recall sums (|E_i n G| - 1) / (|G| - 1)
over the extracted lines E_i that intersect G, and precision divides the same
numerator by sum(|E_i| - 1); splitting a line lowers recall, absorbing
foreign components lowers precision. Scores are exact rationals
(fractions.Fraction); reports serialize them as floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .raster import Component
from .validation import check_label_image

__all__ = [
    "EvalReport",
    "LineScore",
    "LineSets",
    "MetricConfig",
    "SCHEMA_VERSION",
    "assign_components",
    "build_line_sets",
    "evaluate",
    "line_precision",
    "line_recall",
]

SCHEMA_VERSION = 1

_ZERO = Fraction(0)
_ONE = Fraction(1)


@dataclass(frozen=True)
class MetricConfig:
    averaging: str = "macro"  # headline aggregate; both modes always reported
    singleton_policy: str = "beginning_of_line"  # or "exclude"
    count_unassigned_in_ei: bool = False

    def __post_init__(self) -> None:
        if self.averaging not in ("macro", "micro"):
            raise ValueError(f"averaging must be macro or micro, got {self.averaging!r}")
        if self.singleton_policy not in ("beginning_of_line", "exclude"):
            raise ValueError(f"unknown singleton_policy {self.singleton_policy!r}")


@dataclass(frozen=True)
class LineSets:
    """Component-id sets per line: ground-truth G, extracted E_i, and the
    components matched to no ground-truth mask (excluded from scoring)."""

    ground_truth: dict[int, frozenset[int]]
    extracted: dict[int, frozenset[int]]
    unassigned: frozenset[int]


@dataclass(frozen=True)
class LineScore:
    line_id: int
    recall: Fraction | None
    precision: Fraction | None
    f_measure: Fraction | None
    gt_size: int
    intersecting_lines: tuple[tuple[int, int, int], ...]  # (extracted id, |E n G|, |E|)
    excluded: bool = False
    excluded_reason: str | None = None


@dataclass(frozen=True)
class EvalReport:
    per_line: tuple[LineScore, ...]
    aggregate_recall: Fraction
    aggregate_precision: Fraction
    aggregate_f: Fraction
    averaging: str
    aggregates: dict  # both averaging modes
    params: dict

    def to_dict(self) -> dict:
        """JSON-ready report (floats, schema and parameter provenance)."""
        from . import __version__

        return {
            "schema_version": SCHEMA_VERSION,
            "tool_version": __version__,
            "averaging": self.averaging,
            "aggregate_recall": float(self.aggregate_recall),
            "aggregate_precision": float(self.aggregate_precision),
            "aggregate_f": float(self.aggregate_f),
            "aggregates": {
                mode: {k: float(v) for k, v in vals.items()}
                for mode, vals in self.aggregates.items()
            },
            "per_line": [
                {
                    "line_id": s.line_id,
                    "recall": None if s.recall is None else float(s.recall),
                    "precision": None if s.precision is None else float(s.precision),
                    "f_measure": None if s.f_measure is None else float(s.f_measure),
                    "gt_size": s.gt_size,
                    "intersecting_lines": [list(t) for t in s.intersecting_lines],
                    "excluded": s.excluded,
                    "excluded_reason": s.excluded_reason,
                }
                for s in self.per_line
            ],
            "params": self.params,
        }


def assign_components(
    components: Iterable[Component], masks
) -> dict[int, int | None]:
    """Map each component to the mask label covering most of its pixels.

    Zero overlap maps to None; ties break toward the smaller label id.
    """
    masks = check_label_image(masks)
    h, w = masks.shape
    out: dict[int, int | None] = {}
    for comp in components:
        xs, ys = comp.pixels[:, 0], comp.pixels[:, 1]
        if xs.min() < 0 or ys.min() < 0 or xs.max() >= w or ys.max() >= h:
            raise ValueError(
                f"component {comp.id} exceeds mask dimensions {w}x{h}"
            )
        vals = masks[ys, xs]
        vals = vals[vals > 0]
        if vals.size == 0:
            out[comp.id] = None
            continue
        counts = np.bincount(vals)
        out[comp.id] = int(np.argmax(counts))  # argmax returns the first (= smallest) id
    return out


def _intersecting(G: frozenset, Es: Iterable[frozenset]) -> list[frozenset]:
    return [E for E in Es if E & G]


def line_recall(G, Es) -> Fraction:
    """Eq.-verbatim recall for |G| >= 2; beginning-of-line convention for
    singleton lines (1 iff some extracted line contains the component)."""
    G = frozenset(G)
    if not G:
        raise ValueError("ground-truth line must contain at least one component")
    inter = _intersecting(G, map(frozenset, Es))
    if len(G) == 1:
        return _ONE if inter else _ZERO
    return sum((Fraction(len(E & G) - 1, len(G) - 1) for E in inter), _ZERO)


def line_precision(G, Es) -> Fraction:
    """Eq.-verbatim precision for |G| >= 2. Empty-denominator cases: exact
    singleton extraction scores 1, anything else 0. A containing line larger
    than a singleton G scores 1 / (|E_i| - 1) (beginning-of-line numerator)."""
    G = frozenset(G)
    if not G:
        raise ValueError("ground-truth line must contain at least one component")
    inter = _intersecting(G, map(frozenset, Es))
    if not inter:
        return _ZERO
    if len(G) == 1:
        if any(E == G for E in inter):
            return _ONE
        return Fraction(1, sum(len(E) - 1 for E in inter))
    num = sum(len(E & G) - 1 for E in inter)
    den = sum(len(E) - 1 for E in inter)
    if den == 0:
        return _ZERO  # only stray singleton overlaps; nothing correctly connected
    return Fraction(num, den)


def _f_measure(p: Fraction, r: Fraction) -> Fraction:
    return 2 * p * r / (p + r) if p + r > 0 else _ZERO


def _micro_terms(G: frozenset, inter: list[frozenset]) -> tuple[int, int, int, int]:
    """Additive (recall num, recall den, precision num, precision den)."""
    if len(G) == 1:
        if not inter:
            return 0, 1, 0, 0
        if any(E == G for E in inter):
            return 1, 1, 1, 1
        return 1, 1, 1, sum(len(E) - 1 for E in inter)
    rn = sum(len(E & G) - 1 for E in inter)
    rd = len(G) - 1
    pd = sum(len(E) - 1 for E in inter)
    return rn, rd, rn, pd


def build_line_sets(
    components: Iterable[Component], gt_masks, extracted_masks, cfg: MetricConfig
) -> LineSets:
    """Assign components to both mask rasters and materialize the line sets."""
    components = list(components)
    gt_masks = check_label_image(gt_masks)
    extracted_masks = check_label_image(extracted_masks)
    if gt_masks.shape != extracted_masks.shape:
        raise ValueError(
            f"mask rasters must share dimensions: {gt_masks.shape} vs {extracted_masks.shape}"
        )
    gt_assign = assign_components(components, gt_masks)
    ex_assign = assign_components(components, extracted_masks)

    ground_truth: dict[int, set[int]] = {
        int(l): set() for l in np.unique(gt_masks) if l > 0
    }
    for cid, line in gt_assign.items():
        if line is not None:
            ground_truth[line].add(cid)
    unassigned = frozenset(cid for cid, line in gt_assign.items() if line is None)

    extracted: dict[int, set[int]] = {}
    for cid, line in ex_assign.items():
        if line is None:
            continue  # missed components never contribute to any E_i
        if not cfg.count_unassigned_in_ei and cid in unassigned:
            continue
        extracted.setdefault(line, set()).add(cid)

    return LineSets(
        ground_truth={k: frozenset(v) for k, v in sorted(ground_truth.items())},
        extracted={k: frozenset(v) for k, v in sorted(extracted.items())},
        unassigned=unassigned,
    )


def score_line_sets(sets: LineSets, cfg: MetricConfig) -> list[LineScore]:
    scores = []
    for line_id, G in sets.ground_truth.items():
        if not G:
            scores.append(
                LineScore(line_id, None, None, None, 0, (), True, "no_components")
            )
            continue
        if len(G) == 1 and cfg.singleton_policy == "exclude":
            inter = _inter_records(G, sets.extracted)
            scores.append(
                LineScore(line_id, None, None, None, 1, inter, True, "singleton_excluded")
            )
            continue
        r = line_recall(G, sets.extracted.values())
        p = line_precision(G, sets.extracted.values())
        scores.append(
            LineScore(
                line_id=line_id,
                recall=r,
                precision=p,
                f_measure=_f_measure(p, r),
                gt_size=len(G),
                intersecting_lines=_inter_records(G, sets.extracted),
            )
        )
    return scores


def _inter_records(G: frozenset, extracted: Mapping[int, frozenset]):
    return tuple(
        (eid, len(E & G), len(E)) for eid, E in extracted.items() if E & G
    )


def _aggregate(sets: LineSets, scores: list[LineScore]) -> dict[str, dict[str, Fraction]]:
    included = [s for s in scores if not s.excluded]
    if not included:
        zero = {"recall": _ZERO, "precision": _ZERO, "f_measure": _ZERO}
        return {"macro": dict(zero), "micro": dict(zero)}
    macro_r = sum((s.recall for s in included), _ZERO) / len(included)
    macro_p = sum((s.precision for s in included), _ZERO) / len(included)
    rn = rd = pn = pd = 0
    for score in included:
        G = sets.ground_truth[score.line_id]
        inter = _intersecting(G, sets.extracted.values())
        t = _micro_terms(G, inter)
        rn, rd, pn, pd = rn + t[0], rd + t[1], pn + t[2], pd + t[3]
    micro_r = Fraction(rn, rd) if rd else _ZERO
    micro_p = Fraction(pn, pd) if pd else _ZERO
    return {
        "macro": {"recall": macro_r, "precision": macro_p, "f_measure": _f_measure(macro_p, macro_r)},
        "micro": {"recall": micro_r, "precision": micro_p, "f_measure": _f_measure(micro_p, micro_r)},
    }


def evaluate(
    components: Iterable[Component],
    gt_masks,
    extracted_masks,
    cfg: MetricConfig | None = None,
) -> EvalReport:
    """Score extracted line masks against ground truth.

    Builds the line sets via majority-overlap assignment, scores every
    ground-truth line, and aggregates with both macro (unweighted per-line
    mean) and micro (summed numerators/denominators) averaging; the headline
    aggregate follows ``cfg.averaging``.
    """
    cfg = cfg or MetricConfig()
    sets = build_line_sets(components, gt_masks, extracted_masks, cfg)
    if not sets.ground_truth:
        raise ValueError("ground truth contains no lines")
    scores = score_line_sets(sets, cfg)
    aggregates = _aggregate(sets, scores)
    headline = aggregates[cfg.averaging]
    return EvalReport(
        per_line=tuple(scores),
        aggregate_recall=headline["recall"],
        aggregate_precision=headline["precision"],
        aggregate_f=headline["f_measure"],
        averaging=cfg.averaging,
        aggregates=aggregates,
        params={
            "averaging": cfg.averaging,
            "singleton_policy": cfg.singleton_policy,
            "count_unassigned_in_ei": cfg.count_unassigned_in_ei,
            "assignment": "majority_overlap_smallest_id",
        },
    )
