"""Hot numeric kernels, JIT-compiled with numba when available.

Every kernel is written as a plain loop-style function that numba can
compile in nopython mode. At import time each one is wrapped with
``@njit(cache=True)`` unless numba is missing or the environment variable
``PHYSIOBENCH_NO_NUMBA=1`` is set, in which case the pure-Python/numpy
fallback runs as-is. The undecorated originals stay importable with a
``_py`` suffix so the two paths can be compared directly (see
``benchmarks/bench_kernels.py`` and ``tests/test_kernels.py``).
"""

import os

import numpy as np

NUMBA_ENABLED = False
if os.environ.get("PHYSIOBENCH_NO_NUMBA", "0") != "1":
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is an optional extra
        pass


def _sampen_counts(x, m, r):
    """Template-match pair counts for sample entropy (Richman-Moorman).

    Returns (B, A): the number of ordered pairs i<j of length-m templates
    within Chebyshev distance r, and the same for length m+1. Both counts
    run over the first n-m templates so that A/B is a proper conditional
    probability.
    """
    n = x.shape[0]
    nt = n - m
    b = 0
    a = 0
    for i in range(nt - 1):
        for j in range(i + 1, nt):
            d = 0.0
            for k in range(m):
                dk = abs(x[i + k] - x[j + k])
                if dk > d:
                    d = dk
            if d <= r:
                b += 1
                if abs(x[i + m] - x[j + m]) <= r:
                    a += 1
    return b, a


def _apen_phi(x, m, r):
    """phi(m) = mean over i of ln(C_i), self-matches included (ApEn)."""
    n = x.shape[0]
    nt = n - m + 1
    acc = 0.0
    for i in range(nt):
        c = 0
        for j in range(nt):
            d = 0.0
            for k in range(m):
                dk = abs(x[i + k] - x[j + k])
                if dk > d:
                    d = dk
            if d <= r:
                c += 1
        acc += np.log(c / nt)
    return acc / nt


def _lz76_complexity(s):
    """Kaspar-Schuster LZ76 phrase count of a 0/1 integer sequence."""
    n = s.shape[0]
    c = 1
    l = 1
    i = 0
    k = 1
    kmax = 1
    while True:
        if s[i + k - 1] == s[l + k - 1]:
            k += 1
            if l + k > n:
                c += 1
                break
        else:
            if k > kmax:
                kmax = k
            i += 1
            if i == l:
                c += 1
                l += kmax
                if l + 1 > n:
                    break
                i = 0
                k = 1
                kmax = 1
            else:
                k = 1
    return c


def _higuchi_lengths(x, kmax):
    """Mean normalized curve length L(k) for k = 1..kmax (Higuchi FD)."""
    n = x.shape[0]
    out = np.empty(kmax)
    for k in range(1, kmax + 1):
        acc = 0.0
        for m in range(k):
            nm = (n - 1 - m) // k
            if nm < 1:
                continue
            lm = 0.0
            for i in range(1, nm + 1):
                lm += abs(x[m + i * k] - x[m + (i - 1) * k])
            lm = lm * (n - 1) / (nm * k * k)
            acc += lm
        out[k - 1] = acc / k
    return out


def _dfa_segment_variances(profile, scale, order):
    """Detrended variance of each non-overlapping segment at one scale.

    Segments are taken from the start and again from the end of the
    profile (2*Ns values). Detrending is a least-squares polynomial fit of
    the given order (only 0 and 1 are used here), solved via the normal
    equations on the index axis.
    """
    n = profile.shape[0]
    ns = n // scale
    out = np.empty(2 * ns)
    t = np.arange(scale).astype(np.float64)
    tm = t.mean()
    den = ((t - tm) ** 2).sum()
    for v in range(ns):
        for rev in range(2):
            if rev == 0:
                seg = profile[v * scale:(v + 1) * scale]
            else:
                seg = profile[n - (v + 1) * scale:n - v * scale]
            ym = seg.mean()
            if order == 0:
                resid = seg - ym
            else:
                slope = 0.0
                for k in range(scale):
                    slope += (t[k] - tm) * (seg[k] - ym)
                slope /= den
                resid = seg - (ym + slope * (t - tm))
            acc = 0.0
            for k in range(scale):
                acc += resid[k] * resid[k]
            out[rev * ns + v] = acc / scale
    return out


def _recurrence_matrix(emb, radius):
    """Boolean Euclidean-distance recurrence matrix of embedded vectors."""
    n = emb.shape[0]
    m = emb.shape[1]
    r2 = radius * radius
    out = np.zeros((n, n), dtype=np.bool_)
    for i in range(n):
        out[i, i] = True
        for j in range(i + 1, n):
            d = 0.0
            for k in range(m):
                dk = emb[i, k] - emb[j, k]
                d += dk * dk
            if d <= r2:
                out[i, j] = True
                out[j, i] = True
    return out


def _diag_line_stats(rec, lmin):
    """Diagonal line statistics of a recurrence matrix.

    Returns (recurrent_points, points_on_lines, line_count, line_len_sum)
    where lines are maximal diagonal runs of length >= lmin, counted over
    every diagonal of the full matrix including the main one.
    """
    n = rec.shape[0]
    total = 0
    on_lines = 0
    line_count = 0
    line_sum = 0
    for d in range(-(n - 1), n):
        if d >= 0:
            i0, j0 = 0, d
        else:
            i0, j0 = -d, 0
        run = 0
        length = n - abs(d)
        for t in range(length):
            if rec[i0 + t, j0 + t]:
                total += 1
                run += 1
            else:
                if run >= lmin:
                    on_lines += run
                    line_count += 1
                    line_sum += run
                run = 0
        if run >= lmin:
            on_lines += run
            line_count += 1
            line_sum += run
    return total, on_lines, line_count, line_sum


def _white_vertical_stats(rec):
    """(run_count, run_length_sum, run_max) of vertical non-recurrent runs."""
    n = rec.shape[0]
    count = 0
    total = 0
    vmax = 0
    for j in range(n):
        run = 0
        for i in range(n):
            if not rec[i, j]:
                run += 1
            else:
                if run > 0:
                    count += 1
                    total += run
                    if run > vmax:
                        vmax = run
                run = 0
        if run > 0:
            count += 1
            total += run
            if run > vmax:
                vmax = run
    return count, total, vmax


def _peak_threshold_scan(det, cand, refractory, backsearch_factor,
                         threshold_frac, backsearch_frac, qrs_seed):
    """Adaptive-threshold scan over candidate maxima of a detection envelope.

    det: detection envelope; cand: sorted candidate indices (local maxima);
    qrs_seed: initial QRS-height estimates (per-second envelope maxima).
    Maintains running medians of the last 8 QRS and noise peak heights and
    accepts a candidate when it exceeds noise + threshold_frac * (qrs -
    noise). A candidate inside the refractory window of the last accepted
    peak is ignored. When the gap since the last peak exceeds
    backsearch_factor times the median RR, the largest skipped candidate
    above backsearch_frac of the threshold is accepted retroactively.
    Returns (accepted_indices, count).
    """
    nc = cand.shape[0]
    accepted = np.empty(nc, dtype=np.int64)
    if nc == 0:
        return accepted, 0
    na = 0
    qrs_buf = np.empty(8)
    noise_buf = np.zeros(8)
    rr_buf = np.empty(8)
    n_qrs = 0
    n_noise = 0
    n_rr = 0

    ns = qrs_seed.shape[0]
    for i in range(8):
        qrs_buf[i] = qrs_seed[i % ns]

    last_skipped = -1
    last_skipped_val = 0.0
    for ci in range(nc):
        idx = cand[ci]
        val = det[idx]
        qrs_med = np.median(qrs_buf)
        noise_med = np.median(noise_buf)
        thr = noise_med + threshold_frac * (qrs_med - noise_med)
        if na > 0 and idx - accepted[na - 1] < refractory:
            continue
        if val > thr:
            accepted[na] = idx
            na += 1
            qrs_buf[n_qrs % 8] = val
            n_qrs += 1
            if na > 1:
                rr_buf[n_rr % 8] = accepted[na - 1] - accepted[na - 2]
                n_rr += 1
            last_skipped = -1
        else:
            noise_buf[n_noise % 8] = val
            n_noise += 1
            if last_skipped < 0 or val > last_skipped_val:
                last_skipped = idx
                last_skipped_val = val
            if n_rr > 0 and na > 0:
                rr_med = np.median(rr_buf[:min(n_rr, 8)])
                if (idx - accepted[na - 1] > backsearch_factor * rr_med
                        and last_skipped - accepted[na - 1] >= refractory
                        and last_skipped_val > backsearch_frac * thr):
                    accepted[na] = last_skipped
                    na += 1
                    qrs_buf[n_qrs % 8] = last_skipped_val
                    n_qrs += 1
                    rr_buf[n_rr % 8] = accepted[na - 1] - accepted[na - 2]
                    n_rr += 1
                    last_skipped = -1
    return accepted, na


# pure-Python originals, always importable for comparison
sampen_counts_py = _sampen_counts
apen_phi_py = _apen_phi
lz76_complexity_py = _lz76_complexity
higuchi_lengths_py = _higuchi_lengths
dfa_segment_variances_py = _dfa_segment_variances
recurrence_matrix_py = _recurrence_matrix
diag_line_stats_py = _diag_line_stats
white_vertical_stats_py = _white_vertical_stats
peak_threshold_scan_py = _peak_threshold_scan

if NUMBA_ENABLED:
    _jit = njit(cache=True)
    sampen_counts = _jit(_sampen_counts)
    apen_phi = _jit(_apen_phi)
    lz76_complexity = _jit(_lz76_complexity)
    higuchi_lengths = _jit(_higuchi_lengths)
    dfa_segment_variances = _jit(_dfa_segment_variances)
    recurrence_matrix = _jit(_recurrence_matrix)
    diag_line_stats = _jit(_diag_line_stats)
    white_vertical_stats = _jit(_white_vertical_stats)
    peak_threshold_scan = _jit(_peak_threshold_scan)
else:
    sampen_counts = _sampen_counts
    apen_phi = _apen_phi
    lz76_complexity = _lz76_complexity
    higuchi_lengths = _higuchi_lengths
    dfa_segment_variances = _dfa_segment_variances
    recurrence_matrix = _recurrence_matrix
    diag_line_stats = _diag_line_stats
    white_vertical_stats = _white_vertical_stats
    peak_threshold_scan = _peak_threshold_scan
