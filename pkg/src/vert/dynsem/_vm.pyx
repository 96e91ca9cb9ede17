# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: the bytecode simulator loop and n-gram packing."""
import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t, uint8_t

cnp.import_array()

DEF MAX_SETTLE = 16

cdef inline uint64_t _mask(int64_t w) noexcept nogil:
    if w >= 64:
        return <uint64_t>0xFFFFFFFFFFFFFFFF
    return (<uint64_t>1 << w) - 1


cdef void _exec(const int64_t[:, ::1] code, uint64_t[::1] regs, uint64_t[::1] nxt) noexcept nogil:
    cdef Py_ssize_t pc = 0
    cdef Py_ssize_t n = code.shape[0]
    cdef int64_t op, d, a, b, c
    cdef uint64_t x, y
    while pc < n:
        op = code[pc, 0]
        d = code[pc, 1]
        a = code[pc, 2]
        b = code[pc, 3]
        c = code[pc, 4]
        pc += 1
        if op == 0:
            regs[d] = regs[a]
        elif op == 1:
            regs[d] = regs[a] == 0
        elif op == 2:
            regs[d] = regs[a] != 0
        elif op == 3:
            regs[d] = (~regs[a]) & _mask(c)
        elif op == 4:
            regs[d] = (<uint64_t>0 - regs[a]) & _mask(c)
        elif op == 5:
            regs[d] = regs[a] & regs[b]
        elif op == 6:
            regs[d] = regs[a] | regs[b]
        elif op == 7:
            regs[d] = regs[a] ^ regs[b]
        elif op == 8:
            regs[d] = (regs[a] + regs[b]) & _mask(c)
        elif op == 9:
            regs[d] = (regs[a] - regs[b]) & _mask(c)
        elif op == 10:
            regs[d] = regs[a] == regs[b]
        elif op == 11:
            regs[d] = regs[a] != regs[b]
        elif op == 12:
            regs[d] = regs[a] < regs[b]
        elif op == 13:
            regs[d] = regs[a] <= regs[b]
        elif op == 14:
            regs[d] = regs[a] > regs[b]
        elif op == 15:
            regs[d] = regs[a] >= regs[b]
        elif op == 16:
            regs[d] = (regs[a] != 0) and (regs[b] != 0)
        elif op == 17:
            regs[d] = (regs[a] != 0) or (regs[b] != 0)
        elif op == 18:
            y = regs[b]
            regs[d] = (regs[a] >> y) & 1 if y < 64 else 0
        elif op == 19:
            regs[d] = regs[b] if regs[a] != 0 else regs[c]
        elif op == 20:
            regs[d] = regs[a] & _mask(c)
        elif op == 21:
            if regs[a] == 0:
                pc = b
        elif op == 22:
            pc = a
        elif op == 23:
            nxt[d] = regs[a] & _mask(c)
        elif op == 24:
            x = regs[a] & _mask(c)
            regs[d] = x
            nxt[d] = x


cdef int _settle(const int64_t[:, ::1] comb, uint64_t[::1] regs, uint64_t[::1] nxt,
                 uint64_t[::1] snap, Py_ssize_t nsig) noexcept nogil:
    cdef int it
    cdef Py_ssize_t i
    cdef bint changed
    if comb.shape[0] == 0:
        return 0
    for it in range(MAX_SETTLE):
        for i in range(nsig):
            snap[i] = regs[i]
        _exec(comb, regs, nxt)
        changed = False
        for i in range(nsig):
            if regs[i] != snap[i]:
                changed = True
                break
        if not changed:
            return 0
    return -1


def run_sim(const int64_t[:, ::1] comb, const int64_t[:, ::1] seq, init,
            Py_ssize_t nsig, const uint64_t[:, ::1] stim, const int64_t[::1] in_slots):
    """Simulate ``stim.shape[0]`` cycles; returns (pre, post, status).

    status is 0 on success and -1 when combinational logic failed to settle
    (the returned arrays are then partial).
    """
    cdef Py_ssize_t cycles = stim.shape[0]
    cdef Py_ssize_t n_in = in_slots.shape[0]
    cdef cnp.ndarray[cnp.uint64_t, ndim=1] regs_a = np.array(init, dtype=np.uint64, copy=True)
    cdef uint64_t[::1] regs = regs_a
    cdef uint64_t[::1] nxt = np.zeros(regs_a.shape[0], dtype=np.uint64)
    cdef uint64_t[::1] snap = np.zeros(max(nsig, 1), dtype=np.uint64)
    pre_a = np.zeros((cycles, nsig), dtype=np.uint64)
    post_a = np.zeros((cycles, nsig), dtype=np.uint64)
    cdef uint64_t[:, ::1] pre = pre_a
    cdef uint64_t[:, ::1] post = post_a
    cdef Py_ssize_t cyc, i
    cdef int status = 0
    cdef bint has_seq = seq.shape[0] > 0
    with nogil:
        for cyc in range(cycles):
            for i in range(n_in):
                regs[in_slots[i]] = stim[cyc, i]
            if _settle(comb, regs, nxt, snap, nsig) != 0:
                status = -1
                break
            for i in range(nsig):
                pre[cyc, i] = regs[i]
            if has_seq:
                for i in range(nsig):
                    nxt[i] = regs[i]
                _exec(seq, regs, nxt)
                for i in range(nsig):
                    regs[i] = nxt[i]
                if _settle(comb, regs, nxt, snap, nsig) != 0:
                    status = -1
                    break
            for i in range(nsig):
                post[cyc, i] = regs[i]
    return pre_a, post_a, status


def pack_grams(const uint8_t[::1] data, Py_ssize_t n):
    """Every n-gram (n <= 16) of ``data`` packed big-endian into (hi, lo) words."""
    cdef Py_ssize_t L = data.shape[0]
    cdef Py_ssize_t count = L - n + 1 if L >= n else 0
    hi_a = np.zeros(count, dtype=np.uint64)
    lo_a = np.zeros(count, dtype=np.uint64)
    cdef uint64_t[::1] hi = hi_a
    cdef uint64_t[::1] lo = lo_a
    cdef Py_ssize_t i, j
    cdef uint64_t h, l
    cdef Py_ssize_t n_hi = n - 8 if n > 8 else 0
    cdef Py_ssize_t n_lo = n - n_hi
    with nogil:
        for i in range(count):
            h = 0
            for j in range(n_hi):
                h = (h << 8) | data[i + j]
            l = 0
            for j in range(n_lo):
                l = (l << 8) | data[i + n_hi + j]
            hi[i] = h
            lo[i] = l
    return hi_a, lo_a
