"""Detection-path counts, conditional states, fringe scans and visibility."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .errors import QiupWarning
from .modes import Band
from .plan import CircuitPlan, run_plan
from .state import BiphotonState


@dataclass(frozen=True)
class CountResult:
    """Expectation values of the H and V number operators at a detection path."""

    n_h: float
    n_v: float


@dataclass(frozen=True)
class VisibilityResult:
    value: float
    phi_at_max: float


@dataclass(frozen=True)
class FringeScan:
    """Sampled (phi, counts) records for one detection path.

    ``phis`` must be strictly increasing; fringe analysis additionally assumes
    they cover a full period within [0, 2pi).
    """

    phis: tuple[float, ...]
    records: tuple[CountResult, ...]
    detect_path: str

    def __post_init__(self) -> None:
        if len(self.phis) != len(self.records):
            raise ValueError("phis and records must have equal length")
        if any(b <= a for a, b in zip(self.phis, self.phis[1:])):
            raise ValueError("scan grid must be strictly increasing")

    def column(self, channel: str) -> np.ndarray:
        if channel == "h":
            return np.array([r.n_h for r in self.records])
        if channel == "v":
            return np.array([r.n_v for r in self.records])
        raise ValueError(f"unknown channel {channel!r} (use 'h' or 'v')")


def counts(state: BiphotonState, path: str, band: Band) -> CountResult:
    """Incoherent H/V squared-amplitude sums for the band photon at ``path``."""
    n_h, n_v = state.counts_at(path, band)
    return CountResult(n_h, n_v)


def counts_by_path(state: BiphotonState, band: Band) -> dict[str, CountResult]:
    """Counts of the ``band`` photon on every occupied path."""
    return {
        path: counts(state, path, band)
        for path in sorted(state.paths_present())
        if state.path_occupied(path, band)
    }


def conditional_state(state: BiphotonState, path: str, band: Band) -> BiphotonState:
    """Entries whose ``band`` photon propagates along ``path``, unrenormalized."""
    return state.restrict_to(path, band)


def fringe_scan(
    plan: CircuitPlan,
    sweep: str,
    grid: Iterable[float],
    *,
    merge_enabled: bool = True,
    bs_convention: str = "symmetric",
) -> FringeScan:
    """Evaluate the plan's detect-path counts over a parameter grid.

    Grid points are independent (safe to parallelize); results are assembled
    in grid order.  The swept name must be a free parameter of the plan and
    every other free parameter must already be bound.
    """
    phis: list[float] = []
    records: list[CountResult] = []
    for value in grid:
        bound = plan.bind({sweep: float(value)})
        state = run_plan(
            bound, merge_enabled=merge_enabled, bs_convention=bs_convention
        )
        phis.append(float(value))
        records.append(counts(state, plan.detect_path, plan.detect_band))
    return FringeScan(tuple(phis), tuple(records), plan.detect_path)


def visibility(
    values: Sequence[float], phis: Sequence[float] | None = None
) -> VisibilityResult:
    """(max - min) / (max + min) of a scanned channel.

    ``phi_at_max`` is the grid point of the maximum (ties resolve to the
    smallest phi); when no grid is supplied the index of the maximum is
    reported instead.  An all-zero channel has visibility 0 by convention.
    """
    if len(values) == 0:
        raise ValueError("visibility needs at least one value")
    arr = np.asarray(values, dtype=float)
    if np.any(arr < 0):
        raise ValueError("count values must be nonnegative")
    top, bottom = float(arr.max()), float(arr.min())
    arg = int(arr.argmax())
    phi_at_max = float(phis[arg]) if phis is not None else float(arg)
    if top + bottom == 0.0:
        warnings.warn("all-zero channel, visibility undefined; reporting 0",
                      QiupWarning, stacklevel=2)
        return VisibilityResult(0.0, phi_at_max)
    return VisibilityResult((top - bottom) / (top + bottom), phi_at_max)


def format_scan_csv(scan: FringeScan) -> str:
    """Scan CSV: header ``phi,n_h,n_v``, 17 significant digits, LF endings."""
    lines = ["phi,n_h,n_v"]
    for phi, rec in zip(scan.phis, scan.records):
        lines.append(f"{phi:.17g},{rec.n_h:.17g},{rec.n_v:.17g}")
    return "\n".join(lines) + "\n"


def write_scan_csv(scan: FringeScan, stream: IO[str]) -> None:
    stream.write(format_scan_csv(scan))
