# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled state kernels; a one-for-one mirror of ``pykernels``."""

DEF MODE_MASK = 0xFFFFFFFFULL
DEF PATH_SHIFT = 3
DEF TAG_MASK = 0x3ULL


def norm_sq(dict entries):
    cdef double total = 0.0
    cdef double complex amp
    for amp_obj in entries.values():
        amp = amp_obj
        total += amp.real * amp.real + amp.imag * amp.imag
    return total


def prune(dict entries, double eps):
    cdef dict out = {}
    cdef double complex amp
    for key_obj, amp_obj in entries.items():
        amp = amp_obj
        if amp.real * amp.real + amp.imag * amp.imag > eps * eps:
            out[key_obj] = amp_obj
    return out


def path_slots(dict entries, long long path_idx):
    cdef int mask = 0
    cdef unsigned long long key
    for key_obj in entries:
        key = key_obj
        if <long long>(((key >> 32) & MODE_MASK) >> PATH_SHIFT) == path_idx:
            mask |= 1
        if <long long>((key & MODE_MASK) >> PATH_SHIFT) == path_idx:
            mask |= 2
        if mask == 3:
            break
    return mask


cdef dict _pruned(dict accum, double eps):
    cdef dict out = {}
    cdef double complex amp
    cdef double eps2 = eps * eps
    for key_obj, amp_obj in accum.items():
        amp = amp_obj
        if amp.real * amp.real + amp.imag * amp.imag > eps2:
            out[key_obj] = amp_obj
    return out


cdef inline void _accum(dict out, object key, double complex value):
    cur = out.get(key)
    if cur is None:
        out[key] = value
    else:
        out[key] = <double complex>cur + value


def slot_unitary(dict entries, int shift, long long path_idx,
                 double complex u00, double complex u01,
                 double complex u10, double complex u11,
                 double eps):
    cdef dict out = {}
    cdef unsigned long long key, mode, kh, kv, pol_bit
    cdef double complex amp
    pol_bit = 1ULL << shift
    for key_obj, amp_obj in entries.items():
        key = key_obj
        amp = amp_obj
        mode = (key >> shift) & MODE_MASK
        if <long long>(mode >> PATH_SHIFT) != path_idx:
            _accum(out, key_obj, amp)
            continue
        kh = key & ~pol_bit
        kv = kh | pol_bit
        if mode & 1ULL:
            _accum(out, kh, u01 * amp)
            _accum(out, kv, u11 * amp)
        else:
            _accum(out, kh, u00 * amp)
            _accum(out, kv, u10 * amp)
    return _pruned(out, eps)


def slot_bs2(dict entries, int shift, long long in_a, long long in_b,
             long long out_a, long long out_b,
             double complex m_aa, double complex m_ba,
             double complex m_ab, double complex m_bb,
             double eps):
    cdef dict out = {}
    cdef unsigned long long key, mode, rest, base, ka, kb
    cdef long long path
    cdef double complex amp, ca, cb
    cdef unsigned long long rest_mask = (1ULL << PATH_SHIFT) - 1ULL
    cdef unsigned long long slot_clear = ~((<unsigned long long>MODE_MASK) << shift)
    for key_obj, amp_obj in entries.items():
        key = key_obj
        amp = amp_obj
        mode = (key >> shift) & MODE_MASK
        path = <long long>(mode >> PATH_SHIFT)
        if path == in_a:
            ca = m_aa * amp
            cb = m_ba * amp
        elif path == in_b:
            ca = m_ab * amp
            cb = m_bb * amp
        else:
            _accum(out, key_obj, amp)
            continue
        rest = mode & rest_mask
        base = key & slot_clear
        ka = base | (((<unsigned long long>out_a << PATH_SHIFT) | rest) << shift)
        kb = base | (((<unsigned long long>out_b << PATH_SHIFT) | rest) << shift)
        _accum(out, ka, ca)
        _accum(out, kb, cb)
    return _pruned(out, eps)


def slot_relabel(dict entries, int shift, long long from_idx, long long to_idx,
                 int pol_filter, double eps):
    cdef dict out = {}
    cdef unsigned long long key, mode, new_mode
    cdef double complex amp
    cdef unsigned long long rest_mask = (1ULL << PATH_SHIFT) - 1ULL
    cdef unsigned long long slot_clear = ~((<unsigned long long>MODE_MASK) << shift)
    for key_obj, amp_obj in entries.items():
        key = key_obj
        amp = amp_obj
        mode = (key >> shift) & MODE_MASK
        if <long long>(mode >> PATH_SHIFT) == from_idx and (
                pol_filter < 0 or <int>(mode & 1ULL) == pol_filter):
            new_mode = (<unsigned long long>to_idx << PATH_SHIFT) | (mode & rest_mask)
            key = (key & slot_clear) | (new_mode << shift)
            _accum(out, key, amp)
        else:
            _accum(out, key_obj, amp)
    return _pruned(out, eps)


def slot_retag(dict entries, int shift, long long path_idx, int pol_code,
               int new_tag, double eps):
    cdef dict out = {}
    cdef unsigned long long key, mode
    cdef double complex amp
    cdef unsigned long long tag_clear = ~((<unsigned long long>TAG_MASK) << (shift + 1))
    for key_obj, amp_obj in entries.items():
        key = key_obj
        amp = amp_obj
        mode = (key >> shift) & MODE_MASK
        if <long long>(mode >> PATH_SHIFT) == path_idx and <int>(mode & 1ULL) == pol_code:
            key = (key & tag_clear) | (<unsigned long long>new_tag << (shift + 1))
            _accum(out, key, amp)
        else:
            _accum(out, key_obj, amp)
    return _pruned(out, eps)


def slot_phase(dict entries, int shift, long long path_idx,
               double complex factor, double eps):
    cdef dict out = {}
    cdef unsigned long long key, mode
    cdef double complex amp
    for key_obj, amp_obj in entries.items():
        key = key_obj
        amp = amp_obj
        mode = (key >> shift) & MODE_MASK
        if <long long>(mode >> PATH_SHIFT) == path_idx:
            out[key_obj] = factor * amp
        else:
            out[key_obj] = amp_obj
    return _pruned(out, eps)


def slot_select(dict entries, int shift, long long path_idx):
    cdef dict out = {}
    cdef unsigned long long key
    for key_obj, amp_obj in entries.items():
        key = key_obj
        if <long long>(((key >> shift) & MODE_MASK) >> PATH_SHIFT) == path_idx:
            out[key_obj] = amp_obj
    return out


def slot_counts(dict entries, int shift, long long path_idx):
    cdef double nh = 0.0
    cdef double nv = 0.0
    cdef unsigned long long key, mode
    cdef double complex amp
    cdef double p
    for key_obj, amp_obj in entries.items():
        key = key_obj
        mode = (key >> shift) & MODE_MASK
        if <long long>(mode >> PATH_SHIFT) != path_idx:
            continue
        amp = amp_obj
        p = amp.real * amp.real + amp.imag * amp.imag
        if mode & 1ULL:
            nv += p
        else:
            nh += p
    return nh, nv
