"""Hot numeric loops with two interchangeable backends.

Each kernel exists twice: a scalar-loop version compiled with numba's
``njit`` and a vectorized numpy version.  Both implement the same
algorithm step for step, so they agree to rounding error.  The module
picks one at import time:

* numba backend when numba imports and ``SIGVERIFY_DISABLE_NUMBA`` is unset
* numpy backend otherwise

``BACKEND`` names the active choice.  The ``*_numba`` and ``*_numpy``
names stay importable regardless so tests and benchmarks can compare them.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_OFF = ("1", "true", "yes", "on")

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get("SIGVERIFY_DISABLE_NUMBA", "").strip().lower() not in _OFF
BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(fn):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(fn)
    return fn


# ---------------------------------------------------------------------------
# single-level DWT analysis / synthesis


def _analysis_loop(ext, lo, hi, n_out):
    L = lo.shape[0]
    approx = np.empty(n_out)
    detail = np.empty(n_out)
    for i in range(n_out):
        # odd-phase sample of the 'valid' convolution over the extended signal
        base = 2 * i + L
        sa = 0.0
        sd = 0.0
        for j in range(L):
            v = ext[base - j]
            sa += lo[j] * v
            sd += hi[j] * v
        approx[i] = sa
        detail[i] = sd
    return approx, detail


def analysis_numpy(ext, lo, hi, n_out):
    L = lo.shape[0]
    windows = np.lib.stride_tricks.sliding_window_view(ext, L)[1::2][:n_out]
    return windows @ lo[::-1], windows @ hi[::-1]


def _synthesis_loop(approx, detail, lo_r, hi_r, n):
    L = lo_r.shape[0]
    out = np.zeros(n)
    shift = L - 2
    for i in range(approx.shape[0]):
        a = approx[i]
        d = detail[i]
        for j in range(L):
            k = 2 * i + j - shift
            if 0 <= k < n:
                out[k] += a * lo_r[j] + d * hi_r[j]
    return out


def synthesis_numpy(approx, detail, lo_r, hi_r, n):
    L = lo_r.shape[0]
    m = approx.shape[0]
    up_a = np.zeros(2 * m - 1)
    up_d = np.zeros(2 * m - 1)
    up_a[::2] = approx
    up_d[::2] = detail
    full = np.convolve(up_a, lo_r) + np.convolve(up_d, hi_r)
    return full[L - 2:L - 2 + n].copy()


# ---------------------------------------------------------------------------
# cyclic Jacobi eigen-solver for symmetric matrices


def _jacobi_loop(a, tol, max_sweeps):
    a = a.copy()
    d = a.shape[0]
    v = np.eye(d)
    scale = 0.0
    for p in range(d):
        for q in range(d):
            scale += a[p, q] * a[p, q]
    scale = np.sqrt(scale)
    sweeps = 0
    converged = False
    while sweeps <= max_sweeps:
        off = 0.0
        for p in range(d):
            for q in range(p + 1, d):
                off += 2.0 * a[p, q] * a[p, q]
        if np.sqrt(off) <= tol * scale:
            converged = True
            break
        if sweeps == max_sweeps:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for k in range(d):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(d):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(d):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
        sweeps += 1
    w = np.empty(d)
    for i in range(d):
        w[i] = a[i, i]
    return w, v, sweeps, converged


def jacobi_numpy(a, tol, max_sweeps):
    a = np.array(a, dtype=np.float64, copy=True)
    d = a.shape[0]
    v = np.eye(d)
    scale = np.sqrt(np.sum(a * a))
    iu = np.triu_indices(d, 1)
    sweeps = 0
    converged = False
    while sweeps <= max_sweeps:
        if np.sqrt(2.0 * np.sum(a[iu] ** 2)) <= tol * scale:
            converged = True
            break
        if sweeps == max_sweeps:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                cp = a[:, p].copy()
                cq = a[:, q]
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp = a[p, :].copy()
                rq = a[q, :]
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        sweeps += 1
    return np.diag(a).copy(), v, sweeps, converged


# ---------------------------------------------------------------------------
# simplified SMO over a precomputed kernel matrix

_MINSTD_A = 48271
_MINSTD_M = 2147483647


def _smo_bias(K, y, alpha, C, eps):
    m = y.shape[0]
    total = 0.0
    n_free = 0
    lower = -np.inf
    upper = np.inf
    for i in range(m):
        g = 0.0
        for j in range(m):
            g += alpha[j] * y[j] * K[j, i]
        if eps < alpha[i] < C - eps:
            total += y[i] - g
            n_free += 1
        elif alpha[i] <= eps:
            # y_i (g + b) >= 1
            if y[i] > 0:
                lower = max(lower, 1.0 - g)
            else:
                upper = min(upper, -1.0 - g)
        else:
            # y_i (g + b) <= 1
            if y[i] > 0:
                upper = min(upper, 1.0 - g)
            else:
                lower = max(lower, -1.0 - g)
    if n_free > 0:
        return total / n_free
    if np.isinf(lower) and np.isinf(upper):
        return 0.0
    if np.isinf(lower):
        return upper
    if np.isinf(upper):
        return lower
    return 0.5 * (lower + upper)


def _smo_max_violation(K, y, alpha, b, C, eps):
    m = y.shape[0]
    worst = 0.0
    for i in range(m):
        f = b
        for j in range(m):
            f += alpha[j] * y[j] * K[j, i]
        r = y[i] * f - 1.0
        if alpha[i] <= eps:
            v = -r
        elif alpha[i] >= C - eps:
            v = r
        else:
            v = abs(r)
        if v > worst:
            worst = v
    return worst


def _smo_loop(K, y, C, tol, max_passes, max_sweeps, seed):
    m = y.shape[0]
    alpha = np.zeros(m)
    b = 0.0
    eps = 1e-12 * C
    state = seed % (_MINSTD_M - 1) + 1
    sweeps = 0
    violation = np.inf
    while True:
        passes = 0
        while passes < max_passes and sweeps < max_sweeps:
            changed = 0
            for i in range(m):
                fi = b
                for k in range(m):
                    fi += alpha[k] * y[k] * K[k, i]
                ei = fi - y[i]
                ri = ei * y[i]
                if not ((ri < -tol and alpha[i] < C) or (ri > tol and alpha[i] > 0.0)):
                    continue
                state = (state * _MINSTD_A) % _MINSTD_M
                start = state % (m - 1)
                for t in range(m - 1):
                    j = (start + t) % (m - 1)
                    if j >= i:
                        j += 1
                    fj = b
                    for k in range(m):
                        fj += alpha[k] * y[k] * K[k, j]
                    ej = fj - y[j]
                    ai_old = alpha[i]
                    aj_old = alpha[j]
                    if y[i] != y[j]:
                        lo = max(0.0, aj_old - ai_old)
                        hi = min(C, C + aj_old - ai_old)
                    else:
                        lo = max(0.0, ai_old + aj_old - C)
                        hi = min(C, ai_old + aj_old)
                    if hi - lo < eps:
                        continue
                    eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
                    if eta >= 0.0:
                        continue
                    aj = aj_old - y[j] * (ei - ej) / eta
                    if aj > hi:
                        aj = hi
                    elif aj < lo:
                        aj = lo
                    if abs(aj - aj_old) < 1e-10 * (aj + aj_old + 1e-10):
                        continue
                    # rounding can push ai a few ulp outside the box
                    ai = min(max(ai_old + y[i] * y[j] * (aj_old - aj), 0.0), C)
                    dai = ai - ai_old
                    daj = aj - aj_old
                    b1 = b - ei - y[i] * dai * K[i, i] - y[j] * daj * K[i, j]
                    b2 = b - ej - y[i] * dai * K[i, j] - y[j] * daj * K[j, j]
                    alpha[i] = ai
                    alpha[j] = aj
                    if 0.0 < ai < C:
                        b = b1
                    elif 0.0 < aj < C:
                        b = b2
                    else:
                        b = 0.5 * (b1 + b2)
                    changed += 1
                    break
            sweeps += 1
            if changed == 0:
                passes += 1
            else:
                passes = 0
        b = _smo_bias(K, y, alpha, C, eps)
        violation = _smo_max_violation(K, y, alpha, b, C, eps)
        if violation <= tol or sweeps >= max_sweeps:
            break
    return alpha, b, sweeps, violation


def smo_numpy(K, y, C, tol, max_passes, max_sweeps, seed):
    m = y.shape[0]
    alpha = np.zeros(m)
    b = 0.0
    eps = 1e-12 * C
    state = seed % (_MINSTD_M - 1) + 1
    sweeps = 0

    def bias():
        g = (alpha * y) @ K
        free = (alpha > eps) & (alpha < C - eps)
        if free.any():
            return float(np.mean(y[free] - g[free]))
        at_zero = alpha <= eps
        lo_mask = (at_zero & (y > 0)) | (~at_zero & (y < 0))
        lower = np.max(np.where(y[lo_mask] > 0, 1.0 - g[lo_mask], -1.0 - g[lo_mask]), initial=-np.inf)
        up_mask = ~lo_mask
        upper = np.min(np.where(y[up_mask] > 0, 1.0 - g[up_mask], -1.0 - g[up_mask]), initial=np.inf)
        if np.isinf(lower) and np.isinf(upper):
            return 0.0
        if np.isinf(lower):
            return float(upper)
        if np.isinf(upper):
            return float(lower)
        return 0.5 * float(lower + upper)

    def max_violation(b):
        r = y * ((alpha * y) @ K + b) - 1.0
        v = np.where(alpha <= eps, -r, np.where(alpha >= C - eps, r, np.abs(r)))
        return float(max(v.max(), 0.0))

    while True:
        passes = 0
        while passes < max_passes and sweeps < max_sweeps:
            changed = 0
            for i in range(m):
                ei = float(np.dot(alpha * y, K[:, i])) + b - y[i]
                ri = ei * y[i]
                if not ((ri < -tol and alpha[i] < C) or (ri > tol and alpha[i] > 0.0)):
                    continue
                state = (state * _MINSTD_A) % _MINSTD_M
                start = state % (m - 1)
                for t in range(m - 1):
                    j = (start + t) % (m - 1)
                    if j >= i:
                        j += 1
                    ej = float(np.dot(alpha * y, K[:, j])) + b - y[j]
                    ai_old = alpha[i]
                    aj_old = alpha[j]
                    if y[i] != y[j]:
                        lo, hi = max(0.0, aj_old - ai_old), min(C, C + aj_old - ai_old)
                    else:
                        lo, hi = max(0.0, ai_old + aj_old - C), min(C, ai_old + aj_old)
                    if hi - lo < eps:
                        continue
                    eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
                    if eta >= 0.0:
                        continue
                    aj = min(max(aj_old - y[j] * (ei - ej) / eta, lo), hi)
                    if abs(aj - aj_old) < 1e-10 * (aj + aj_old + 1e-10):
                        continue
                    # rounding can push ai a few ulp outside the box
                    ai = min(max(ai_old + y[i] * y[j] * (aj_old - aj), 0.0), C)
                    dai, daj = ai - ai_old, aj - aj_old
                    b1 = b - ei - y[i] * dai * K[i, i] - y[j] * daj * K[i, j]
                    b2 = b - ej - y[i] * dai * K[i, j] - y[j] * daj * K[j, j]
                    alpha[i] = ai
                    alpha[j] = aj
                    if 0.0 < ai < C:
                        b = b1
                    elif 0.0 < aj < C:
                        b = b2
                    else:
                        b = 0.5 * (b1 + b2)
                    changed += 1
                    break
            sweeps += 1
            passes = passes + 1 if changed == 0 else 0
        b = bias()
        violation = max_violation(b)
        if violation <= tol or sweeps >= max_sweeps:
            break
    return alpha, b, sweeps, violation


analysis_numba = _njit(_analysis_loop)
synthesis_numba = _njit(_synthesis_loop)
jacobi_numba = _njit(_jacobi_loop)
if HAVE_NUMBA:
    _smo_bias = numba.njit(cache=True)(_smo_bias)
    _smo_max_violation = numba.njit(cache=True)(_smo_max_violation)
smo_numba = _njit(_smo_loop)

if USE_NUMBA:
    analysis, synthesis, jacobi, smo = analysis_numba, synthesis_numba, jacobi_numba, smo_numba
else:
    analysis, synthesis, jacobi, smo = analysis_numpy, synthesis_numpy, jacobi_numpy, smo_numpy
