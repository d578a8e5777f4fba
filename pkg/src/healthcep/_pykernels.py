"""Pure-Python reference kernels.

Same signatures as the compiled ``_ckernels`` module.  Interval arrays are
int64 numpy arrays of half-open ``[start, end)`` bounds in epoch seconds.
"""

import numpy as np

_I64 = np.int64


def _pack(starts, ends):
    return np.asarray(starts, dtype=_I64), np.asarray(ends, dtype=_I64)


def normalize(starts, ends):
    """Sort and merge overlapping or touching intervals."""
    n = len(starts)
    if n == 0:
        return _pack([], [])
    order = sorted(range(n), key=lambda i: (int(starts[i]), int(ends[i])))
    out_s = []
    out_e = []
    cur_s = int(starts[order[0]])
    cur_e = int(ends[order[0]])
    for i in order[1:]:
        s = int(starts[i])
        e = int(ends[i])
        if s <= cur_e:
            if e > cur_e:
                cur_e = e
        else:
            out_s.append(cur_s)
            out_e.append(cur_e)
            cur_s, cur_e = s, e
    out_s.append(cur_s)
    out_e.append(cur_e)
    return _pack(out_s, out_e)


def intersect(a_s, a_e, b_s, b_e):
    out_s = []
    out_e = []
    i = j = 0
    na, nb = len(a_s), len(b_s)
    while i < na and j < nb:
        lo = max(int(a_s[i]), int(b_s[j]))
        hi = min(int(a_e[i]), int(b_e[j]))
        if lo < hi:
            out_s.append(lo)
            out_e.append(hi)
        if a_e[i] < b_e[j]:
            i += 1
        else:
            j += 1
    return _pack(out_s, out_e)


def union(a_s, a_e, b_s, b_e):
    out_s = []
    out_e = []
    i = j = 0
    na, nb = len(a_s), len(b_s)
    while i < na or j < nb:
        if j >= nb or (i < na and a_s[i] <= b_s[j]):
            s, e = int(a_s[i]), int(a_e[i])
            i += 1
        else:
            s, e = int(b_s[j]), int(b_e[j])
            j += 1
        if out_e and s <= out_e[-1]:
            if e > out_e[-1]:
                out_e[-1] = e
        else:
            out_s.append(s)
            out_e.append(e)
    return _pack(out_s, out_e)


def complement(starts, ends, lo, hi):
    """Complement of a canonical set within ``[lo, hi)``."""
    out_s = []
    out_e = []
    cur = int(lo)
    hi = int(hi)
    for k in range(len(starts)):
        s, e = int(starts[k]), int(ends[k])
        if e <= cur:
            continue
        if s >= hi:
            break
        if s > cur:
            out_s.append(cur)
            out_e.append(s)
        cur = e
    if cur < hi:
        out_s.append(cur)
        out_e.append(hi)
    return _pack(out_s, out_e)


def hold_runs(times, mask, cap):
    """Intervals where a sample-and-hold boolean signal is true.

    Sample ``i`` holds over ``[t_i, min(t_{i+1}, t_i + cap))``; the last
    sample holds for ``cap``.  ``times`` must be sorted.
    """
    out_s = []
    out_e = []
    n = len(times)
    cap = int(cap)
    for i in range(n):
        if not mask[i]:
            continue
        t = int(times[i])
        end = t + cap
        if i + 1 < n and int(times[i + 1]) < end:
            end = int(times[i + 1])
        if end <= t:
            continue
        if out_e and t <= out_e[-1]:
            if end > out_e[-1]:
                out_e[-1] = end
        else:
            out_s.append(t)
            out_e.append(end)
    return _pack(out_s, out_e)


def trailing_median(times, values, window):
    """Median of the values with timestamps in ``[t_i - window, t_i)``.

    NaN where that window holds no samples.
    """
    import bisect

    n = len(times)
    out = np.full(n, np.nan)
    ordered = []
    lo = 0
    window = int(window)
    for i in range(n):
        t = int(times[i])
        while lo < i and int(times[lo]) < t - window:
            del ordered[bisect.bisect_left(ordered, float(values[lo]))]
            lo += 1
        m = len(ordered)
        if m:
            if m % 2:
                out[i] = ordered[m // 2]
            else:
                out[i] = 0.5 * (ordered[m // 2 - 1] + ordered[m // 2])
        bisect.insort(ordered, float(values[i]))
    return out
