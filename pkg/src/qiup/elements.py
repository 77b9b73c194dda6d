"""Optical elements as pure state transformations.

Wave plates, one- and two-input beamsplitters, dichroic mirrors, phase
shifters, beam preparation and the indistinguishability merge.  Every element
returns a new state and preserves ``norm_sq`` (the merge included, as long as
its relabelings are injective on the occupied support).
"""
from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PreparationConflictError, QiupWarning
from .modes import IDLER_SHIFT, SIGNAL_SHIFT, Band, Polarization, intern_path
from .state import BiphotonState
from . import backend

SQRT_HALF = 1.0 / math.sqrt(2.0)
TWO_PI = 2.0 * math.pi

#: Beamsplitter conventions: mode on in_a maps to col-0, in_b to col-1 of a
#: 2x2 matrix over (out_a, out_b).
BS_CONVENTIONS = {
    "symmetric": np.array([[1.0, 1.0j], [1.0j, 1.0]]) * SQRT_HALF,
    "hadamard": np.array([[1.0, 1.0], [1.0, -1.0]]) * SQRT_HALF,
}


class WavePlateKind(enum.Enum):
    HWP = "hwp"
    QWP = "qwp"


@dataclass(frozen=True)
class WavePlateSetting:
    kind: WavePlateKind
    fast_axis_angle: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "fast_axis_angle", self.fast_axis_angle % math.pi)

    def matrix(self) -> np.ndarray:
        if self.kind is WavePlateKind.HWP:
            return hwp_matrix(self.fast_axis_angle)
        return qwp_matrix(self.fast_axis_angle)


class PreparationOrder(enum.Enum):
    HWP_THEN_QWP = "hwp_then_qwp"
    QWP_THEN_HWP = "qwp_then_hwp"


@dataclass(frozen=True)
class PreparationSpec:
    """Map a vertically polarized beam to alpha|H> + beta e^{i rel_phase}|V>."""

    alpha: float
    beta: float
    rel_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("preparation amplitudes must be nonnegative")
        if abs(self.alpha**2 + self.beta**2 - 1.0) > 1e-10:
            raise ValueError(
                f"alpha^2 + beta^2 must be 1, got {self.alpha**2 + self.beta**2!r}"
            )


@dataclass(frozen=True)
class MergeRule:
    """Drop the source tag of modes matching (path, pol, band)."""

    path: str
    pol: Polarization
    band: Band


def hwp_matrix(h: float) -> np.ndarray:
    """Half-wave plate with fast axis at angle ``h``: det -1, unitary."""
    c, s = math.cos(2.0 * h), math.sin(2.0 * h)
    return np.array([[c, -s], [-s, -c]], dtype=complex)


def qwp_matrix(q: float) -> np.ndarray:
    """Quarter-wave plate with fast axis at angle ``q`` (unitary form)."""
    c, s = math.cos(2.0 * q), math.sin(2.0 * q)
    return np.array([[1j - c, s], [s, 1j + c]], dtype=complex) * SQRT_HALF


def apply_waveplate(
    state: BiphotonState,
    path: str,
    setting: WavePlateSetting,
    band: Band | None = None,
) -> BiphotonState:
    return state.apply_pol_unitary(path, setting.matrix(), band)


def waveplates_to_preparation(
    h: float, q: float, order: PreparationOrder = PreparationOrder.HWP_THEN_QWP
) -> PreparationSpec:
    """Preparation realized by a wave-plate pair acting on a |V> beam.

    The global phase is discarded; when the H amplitude vanishes the relative
    phase is reported as 0 by convention.
    """
    if order is PreparationOrder.HWP_THEN_QWP:
        composed = qwp_matrix(q) @ hwp_matrix(h)
    else:
        composed = hwp_matrix(h) @ qwp_matrix(q)
    c_h, c_v = composed @ np.array([0.0, 1.0])
    alpha, beta = abs(c_h), abs(c_v)
    if alpha > 1e-12:
        rel_phase = (cmath.phase(c_v) - cmath.phase(c_h)) % TWO_PI
    else:
        rel_phase = 0.0
    return PreparationSpec(alpha=alpha, beta=beta, rel_phase=rel_phase)


def prepare_beam(
    state: BiphotonState, path: str, band: Band, spec: PreparationSpec
) -> BiphotonState:
    """Turn each |V> amplitude at (path, band) into the prepared superposition.

    The targeted beam must be purely vertical (the emission convention); an
    existing H occupation raises :class:`PreparationConflictError`.
    """
    nh, _ = state.counts_at(path, band)
    if nh > 0.0:
        raise PreparationConflictError(
            f"path {path!r} ({band}) already carries a horizontal component"
        )
    bv = spec.beta * cmath.exp(1j * spec.rel_phase)
    # Unitary completion of the V column (alpha, beta e^{i rel_phase}); the H
    # column never acts because the precondition rules out H occupation.
    u = np.array([[bv.conjugate(), spec.alpha], [-spec.alpha, bv]])
    return state.apply_pol_unitary(path, u, band)


def apply_bs_single(
    state: BiphotonState,
    in_path: str,
    out_t: str,
    out_r: str,
    convention: str = "symmetric",
) -> BiphotonState:
    """Split every mode on ``in_path`` onto (out_t, out_r), both bands."""
    if out_t == out_r:
        raise ValueError("beamsplitter outputs must be distinct")
    if not state.path_occupied(in_path):
        warnings.warn(
            f"beamsplitter input path {in_path!r} is unoccupied; no-op",
            QiupWarning,
            stacklevel=2,
        )
        return state
    m = BS_CONVENTIONS[convention]
    return state._map_slots(
        None,
        backend.kernels.slot_bs2,
        intern_path(in_path),
        -1,
        intern_path(out_t),
        intern_path(out_r),
        complex(m[0, 0]),
        complex(m[1, 0]),
        complex(m[0, 1]),
        complex(m[1, 1]),
    )


def apply_bs_dual(
    state: BiphotonState,
    in_a: str,
    in_b: str,
    out_a: str,
    out_b: str,
    convention: str = "symmetric",
) -> BiphotonState:
    """Two-input beamsplitter over (in_a, in_b) -> (out_a, out_b), both bands."""
    if out_a == out_b:
        raise ValueError("beamsplitter outputs must be distinct")
    m = BS_CONVENTIONS[convention]
    return state._map_slots(
        None,
        backend.kernels.slot_bs2,
        intern_path(in_a),
        intern_path(in_b),
        intern_path(out_a),
        intern_path(out_b),
        complex(m[0, 0]),
        complex(m[1, 0]),
        complex(m[0, 1]),
        complex(m[1, 1]),
    )


def apply_dichroic(
    state: BiphotonState, in_path: str, signal_out: str, idler_out: str
) -> BiphotonState:
    """Route by band: signal modes to ``signal_out``, idler modes to ``idler_out``."""
    if signal_out == idler_out:
        raise ValueError("dichroic outputs must be distinct paths")
    out = state.relabel_path(in_path, signal_out, band=Band.SIGNAL)
    return out.relabel_path(in_path, idler_out, band=Band.IDLER)


def apply_phase(
    state: BiphotonState, path: str, phi: float, band: Band | None = None
) -> BiphotonState:
    """Multiply each matching photon's amplitude by e^{i phi}.

    An entry whose two photons both match picks up the factor twice.
    """
    factor = cmath.exp(1j * phi)
    return state._map_slots(
        band, backend.kernels.slot_phase, intern_path(path), factor
    )


def apply_merge(state: BiphotonState, rules: list[MergeRule]) -> BiphotonState:
    """Drop source tags on every mode matching a rule; collisions sum."""
    entries = state._entries
    eps = state.prune_epsilon
    for rule in rules:
        shift = SIGNAL_SHIFT if rule.band is Band.SIGNAL else IDLER_SHIFT
        entries = backend.kernels.slot_retag(
            entries, shift, intern_path(rule.path), rule.pol.value, 0, eps
        )
    return BiphotonState._wrap(entries, eps)
