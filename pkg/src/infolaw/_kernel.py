"""Compiled depth-first exploration of the demand-driven program tree.

Forking happens per decoded instruction rather than per bit: every way of
completing the next instruction (7 plain opcodes, or JNZ with each operand
value that still fits in the length limit) is a child. This visits exactly
the same halting leaves as bit-level forking. Machine state is snapshotted
per depth, so no prefix is ever re-executed.
"""

import numpy as np
from numba import njit

# opcode numbering shared with machine.py
HALT, OUT0, OUT1, READ, INC, DEC, JNZ, SWP = range(8)

INF = np.int64(1 << 40)


@njit(cache=True)
def _grow(arr, n):
    out = np.empty(max(2 * arr.shape[0], 1024), dtype=arr.dtype)
    out[:n] = arr[:n]
    return out


@njit(cache=True)
def explore(ops, args, costs, codes, tape, max_len, budget, max_out,
            forced, node_cap, collect):
    """Explore all halting programs of at most ``max_len`` bits.

    ``forced[d]`` pins the choice index at depth ``d``; a leaf reached before
    the pinned depths run out is kept only if the unused pins are all 0, so
    that disjoint pinned subtrees partition the leaves exactly.

    Returns (best, hist, prog_vals, prog_lens, n_progs, nodes, capped) where
    ``best[(1 << n) | v]`` is the shortest halting length producing the
    n-bit output with value v.
    """
    nchoice = ops.shape[0]
    nforced = forced.shape[0]
    depth_max = max_len // 3 + 2

    best = np.full(1 << (max_out + 1), INF, dtype=np.int64)
    hist = np.zeros(max_len + 1, dtype=np.int64)
    prog_vals = np.empty(1024 if collect else 0, dtype=np.int64)
    prog_lens = np.empty(1024 if collect else 0, dtype=np.int64)
    n_progs = 0
    nodes = 0

    s_a = np.zeros(depth_max, dtype=np.int64)
    s_b = np.zeros(depth_max, dtype=np.int64)
    s_head = np.zeros(depth_max, dtype=np.int64)
    s_steps = np.zeros(depth_max, dtype=np.int64)
    s_olen = np.zeros(depth_max, dtype=np.int64)
    s_oval = np.zeros(depth_max, dtype=np.int64)
    s_used = np.zeros(depth_max, dtype=np.int64)
    s_prog = np.zeros(depth_max, dtype=np.int64)
    nxt = np.zeros(depth_max, dtype=np.int64)
    stop = np.zeros(depth_max, dtype=np.int64)
    i_op = np.zeros(depth_max, dtype=np.int64)
    i_arg = np.zeros(depth_max, dtype=np.int64)

    tape_len = tape.shape[0]

    d = 0
    if nforced > 0:
        nxt[0] = forced[0]
        stop[0] = forced[0] + 1
    else:
        nxt[0] = 0
        stop[0] = nchoice

    while d >= 0:
        k = nxt[d]
        if k >= stop[d]:
            d -= 1
            continue
        nxt[d] = k + 1
        used = s_used[d] + costs[k]
        if used > max_len:
            if nforced <= d:
                # choices are sorted by cost; nothing further fits either
                nxt[d] = stop[d]
            continue

        nodes += 1
        if nodes > node_cap:
            return best, hist, prog_vals, prog_lens, n_progs, nodes, True

        i_op[d] = ops[k]
        i_arg[d] = args[k]
        a = s_a[d]
        b = s_b[d]
        head = s_head[d]
        steps = s_steps[d]
        olen = s_olen[d]
        oval = s_oval[d]
        prog = (s_prog[d] << costs[k]) | codes[k]

        ip = d
        while True:
            if ip == d + 1:
                e = d + 1
                s_a[e] = a
                s_b[e] = b
                s_head[e] = head
                s_steps[e] = steps
                s_olen[e] = olen
                s_oval[e] = oval
                s_used[e] = used
                s_prog[e] = prog
                if e < nforced:
                    nxt[e] = forced[e]
                    stop[e] = forced[e] + 1
                else:
                    nxt[e] = 0
                    stop[e] = nchoice
                d = e
                break
            if steps >= budget:
                break
            steps += 1
            op = i_op[ip]
            if op == HALT:
                keep = True
                for j in range(d + 1, nforced):
                    if forced[j] != 0:
                        keep = False
                        break
                if keep:
                    hist[used] += 1
                    if olen <= max_out:
                        key = (np.int64(1) << olen) | oval
                        if used < best[key]:
                            best[key] = used
                    if collect:
                        if n_progs == prog_vals.shape[0]:
                            prog_vals = _grow(prog_vals, n_progs)
                            prog_lens = _grow(prog_lens, n_progs)
                        prog_vals[n_progs] = prog
                        prog_lens[n_progs] = used
                        n_progs += 1
                break
            elif op == OUT0 or op == OUT1:
                if olen < max_out:
                    oval = 2 * oval + (1 if op == OUT1 else 0)
                olen += 1
            elif op == READ:
                if head >= tape_len:
                    break
                a = 2 * a + tape[head]
                head += 1
            elif op == INC:
                a += 1
            elif op == DEC:
                if a > 0:
                    a -= 1
            elif op == JNZ:
                if a != 0:
                    if ip - i_arg[ip] < 0:
                        break
                    ip -= i_arg[ip]
                    continue
            else:  # SWP
                t = a
                a = b
                b = t
            ip += 1

    return best, hist, prog_vals, prog_lens, n_progs, nodes, False
