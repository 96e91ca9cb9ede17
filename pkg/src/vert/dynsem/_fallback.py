"""Pure-Python versions of the compiled kernels in ``_vm.pyx``.

Same signatures and results; used when the extension is not built.
"""
from __future__ import annotations

import numpy as np

MAX_SETTLE = 16
_M64 = (1 << 64) - 1


def _mask(w):
    return _M64 if w >= 64 else (1 << w) - 1


def _exec(code, regs, nxt):
    pc = 0
    n = len(code)
    while pc < n:
        op, d, a, b, c = code[pc]
        pc += 1
        if op == 0:
            regs[d] = regs[a]
        elif op == 1:
            regs[d] = int(regs[a] == 0)
        elif op == 2:
            regs[d] = int(regs[a] != 0)
        elif op == 3:
            regs[d] = ~regs[a] & _mask(c)
        elif op == 4:
            regs[d] = -regs[a] & _mask(c)
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
            regs[d] = int(regs[a] == regs[b])
        elif op == 11:
            regs[d] = int(regs[a] != regs[b])
        elif op == 12:
            regs[d] = int(regs[a] < regs[b])
        elif op == 13:
            regs[d] = int(regs[a] <= regs[b])
        elif op == 14:
            regs[d] = int(regs[a] > regs[b])
        elif op == 15:
            regs[d] = int(regs[a] >= regs[b])
        elif op == 16:
            regs[d] = int(regs[a] != 0 and regs[b] != 0)
        elif op == 17:
            regs[d] = int(regs[a] != 0 or regs[b] != 0)
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


def _settle(comb, regs, nxt, nsig):
    if not comb:
        return 0
    for _ in range(MAX_SETTLE):
        snap = regs[:nsig]
        _exec(comb, regs, nxt)
        if regs[:nsig] == snap:
            return 0
    return -1


def run_sim(comb, seq, init, nsig, stim, in_slots):
    comb = [tuple(int(x) for x in row) for row in np.asarray(comb)]
    seq = [tuple(int(x) for x in row) for row in np.asarray(seq)]
    regs = [int(x) for x in np.asarray(init)]
    nxt = [0] * len(regs)
    slots = [int(x) for x in np.asarray(in_slots)]
    stim_rows = np.asarray(stim).tolist()
    cycles = len(stim_rows)
    pre = np.zeros((cycles, nsig), dtype=np.uint64)
    post = np.zeros((cycles, nsig), dtype=np.uint64)
    status = 0
    for cyc in range(cycles):
        row = stim_rows[cyc]
        for j, s in enumerate(slots):
            regs[s] = int(row[j])
        if _settle(comb, regs, nxt, nsig) != 0:
            status = -1
            break
        pre[cyc] = regs[:nsig]
        if seq:
            nxt[:nsig] = regs[:nsig]
            _exec(seq, regs, nxt)
            regs[:nsig] = nxt[:nsig]
            if _settle(comb, regs, nxt, nsig) != 0:
                status = -1
                break
        post[cyc] = regs[:nsig]
    return pre, post, status


def pack_grams(data, n):
    """Every n-gram (n <= 16) of ``data`` packed big-endian into (hi, lo) words."""
    buf = np.frombuffer(bytes(data), dtype=np.uint8)
    count = len(buf) - n + 1 if len(buf) >= n else 0
    hi = np.zeros(count, dtype=np.uint64)
    lo = np.zeros(count, dtype=np.uint64)
    if count == 0:
        return hi, lo
    n_hi = max(n - 8, 0)
    wide = buf.astype(np.uint64)
    for j in range(n_hi):
        hi = (hi << np.uint64(8)) | wide[j : j + count]
    for j in range(n_hi, n):
        lo = (lo << np.uint64(8)) | wide[j : j + count]
    return hi, lo
