"""Pure-Python state kernels.

Every kernel takes a sparse amplitude map ``dict[int, complex]`` keyed by
packed mode pairs (see :mod:`qiup.modes`) and returns a new dict; inputs are
never mutated.  ``shift`` selects the slot a kernel acts on: 32 for the
signal mode, 0 for the idler mode.  Amplitudes whose magnitude ends up at or
below ``eps`` are dropped.

The compiled backend (``_ckernels``) mirrors these functions one for one.
"""
from __future__ import annotations

MODE_MASK = 0xFFFFFFFF
PATH_SHIFT = 3
TAG_MASK = 0x3


def norm_sq(entries: dict) -> float:
    total = 0.0
    for amp in entries.values():
        total += amp.real * amp.real + amp.imag * amp.imag
    return total


def _pruned(accum: dict, eps: float) -> dict:
    eps2 = eps * eps
    return {
        k: a for k, a in accum.items()
        if a.real * a.real + a.imag * a.imag > eps2
    }


def prune(entries: dict, eps: float) -> dict:
    return _pruned(entries, eps)


def path_slots(entries: dict, path_idx: int) -> int:
    """Occupancy bitmask for a path: bit 0 = signal slot, bit 1 = idler slot."""
    mask = 0
    for key in entries:
        if ((key >> 32) & MODE_MASK) >> PATH_SHIFT == path_idx:
            mask |= 1
        if (key & MODE_MASK) >> PATH_SHIFT == path_idx:
            mask |= 2
        if mask == 3:
            break
    return mask


def slot_unitary(entries: dict, shift: int, path_idx: int,
                 u00: complex, u01: complex, u10: complex, u11: complex,
                 eps: float) -> dict:
    out: dict = {}
    get = out.get
    pol_bit = 1 << shift
    for key, amp in entries.items():
        mode = (key >> shift) & MODE_MASK
        if mode >> PATH_SHIFT != path_idx:
            out[key] = get(key, 0j) + amp
            continue
        kh = key & ~pol_bit
        kv = kh | pol_bit
        if mode & 1:
            ah = u01 * amp
            av = u11 * amp
        else:
            ah = u00 * amp
            av = u10 * amp
        out[kh] = get(kh, 0j) + ah
        out[kv] = get(kv, 0j) + av
    return _pruned(out, eps)


def slot_bs2(entries: dict, shift: int, in_a: int, in_b: int,
             out_a: int, out_b: int,
             m_aa: complex, m_ba: complex, m_ab: complex, m_bb: complex,
             eps: float) -> dict:
    """Two-port routing: path in_a -> m_aa*out_a + m_ba*out_b, in_b likewise.

    ``in_b`` may be -1 for a single-input splitter.
    """
    out: dict = {}
    get = out.get
    rest_mask = (1 << PATH_SHIFT) - 1
    slot_clear = ~(MODE_MASK << shift)
    for key, amp in entries.items():
        mode = (key >> shift) & MODE_MASK
        path = mode >> PATH_SHIFT
        if path == in_a:
            ca, cb = m_aa * amp, m_ba * amp
        elif path == in_b:
            ca, cb = m_ab * amp, m_bb * amp
        else:
            out[key] = get(key, 0j) + amp
            continue
        rest = mode & rest_mask
        base = key & slot_clear
        ka = base | (((out_a << PATH_SHIFT) | rest) << shift)
        kb = base | (((out_b << PATH_SHIFT) | rest) << shift)
        out[ka] = get(ka, 0j) + ca
        out[kb] = get(kb, 0j) + cb
    return _pruned(out, eps)


def slot_relabel(entries: dict, shift: int, from_idx: int, to_idx: int,
                 pol_filter: int, eps: float) -> dict:
    """Re-key modes from one path to another; pol_filter is 0, 1 or -1 (any)."""
    out: dict = {}
    get = out.get
    rest_mask = (1 << PATH_SHIFT) - 1
    slot_clear = ~(MODE_MASK << shift)
    for key, amp in entries.items():
        mode = (key >> shift) & MODE_MASK
        if mode >> PATH_SHIFT == from_idx and (pol_filter < 0 or (mode & 1) == pol_filter):
            new_mode = (to_idx << PATH_SHIFT) | (mode & rest_mask)
            key = (key & slot_clear) | (new_mode << shift)
        out[key] = get(key, 0j) + amp
    return _pruned(out, eps)


def slot_retag(entries: dict, shift: int, path_idx: int, pol_code: int,
               new_tag: int, eps: float) -> dict:
    out: dict = {}
    get = out.get
    tag_clear = ~(TAG_MASK << (shift + 1))
    for key, amp in entries.items():
        mode = (key >> shift) & MODE_MASK
        if mode >> PATH_SHIFT == path_idx and (mode & 1) == pol_code:
            key = (key & tag_clear) | (new_tag << (shift + 1))
        out[key] = get(key, 0j) + amp
    return _pruned(out, eps)


def slot_phase(entries: dict, shift: int, path_idx: int, factor: complex,
               eps: float) -> dict:
    out: dict = {}
    for key, amp in entries.items():
        mode = (key >> shift) & MODE_MASK
        if mode >> PATH_SHIFT == path_idx:
            amp = factor * amp
        out[key] = amp
    return _pruned(out, eps)


def slot_select(entries: dict, shift: int, path_idx: int) -> dict:
    return {
        key: amp
        for key, amp in entries.items()
        if ((key >> shift) & MODE_MASK) >> PATH_SHIFT == path_idx
    }


def slot_counts(entries: dict, shift: int, path_idx: int) -> tuple:
    nh = 0.0
    nv = 0.0
    for key, amp in entries.items():
        mode = (key >> shift) & MODE_MASK
        if mode >> PATH_SHIFT != path_idx:
            continue
        p = amp.real * amp.real + amp.imag * amp.imag
        if mode & 1:
            nv += p
        else:
            nh += p
    return nh, nv
