# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Expression-for-expression mirror of ``_kernels_py`` (see its docstring
for the draw-order contract).  Both backends pull variates from the same
numpy bit-generator C interface, so given one seed they produce
bit-identical traces; keep every formula's arithmetic ordering in sync
with the Python reference and build with FMA contraction disabled.
"""

from libc.math cimport isinf
from libc.string cimport memset

from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    binomial_t,
    random_binomial,
    random_standard_exponential,
    random_standard_uniform,
)

import numpy as np

BACKEND_NAME = "compiled"

DEF POP_LIMIT = 2305843009213693952  # 1 << 61


cdef bitgen_t *_state(object bitgen):
    return <bitgen_t *> PyCapsule_GetPointer(bitgen.capsule, "BitGenerator")


cdef inline Py_ssize_t _cdf_locate(const double[::1] cdf, double u) noexcept:
    # first index with cdf[idx] > u, matching np.searchsorted(side="right")
    cdef Py_ssize_t lo = 0, hi = cdf.shape[0], mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


def run_chain(
    object bitgen,
    double lam, double alpha_f, double alpha_r,
    double w, double b, double eps, double eta, double eta_c,
    int deg_kind, long long deg_a, double deg_p,
    const long long[::1] deg_values, const double[::1] deg_cdf,
    long long x0, long long y0, double horizon,
    double[::1] t_out, unsigned char[::1] wake_out, unsigned char[::1] tag_out,
    long long[::1] off_out, long long[::1] x_out, long long[::1] y_out,
):
    """Degree-model event loop.  Returns (n_events, extinct, hit_cap)."""
    cdef bitgen_t *rng = _state(bitgen)
    cdef binomial_t binom
    memset(&binom, 0, sizeof(binomial_t))  # same start state as a fresh Generator
    cdef Py_ssize_t cap = t_out.shape[0]
    cdef long long x = x0, y = y0, s, deg, xi
    cdef double t = 0.0, dt, beta, om, q, u_d
    cdef double p_thin = eta * eta_c
    cdef Py_ssize_t n = 0
    cdef bint extinct = False, horizon_reached = False, wake_x, tag_fake

    while n < cap:
        s = x + y
        dt = random_standard_exponential(rng) / (lam * (<double> s))
        if t + dt > horizon:
            horizon_reached = True
            break
        t = t + dt
        beta = (<double> x) / (<double> s)
        wake_x = random_standard_uniform(rng) < beta
        if b == 0.0:
            om = (w + eps) if beta > 0.0 else eps
        else:
            om = w * beta / (beta + b * (1.0 - beta)) + eps
        q = (alpha_f if wake_x else alpha_r) * om
        tag_fake = random_standard_uniform(rng) < q
        if deg_kind == 0:
            deg = deg_a
        elif deg_kind == 1:
            deg = random_binomial(rng, deg_p, deg_a, &binom)
        else:
            u_d = random_standard_uniform(rng)
            deg = deg_values[_cdf_locate(deg_cdf, u_d)]
        xi = random_binomial(rng, p_thin if tag_fake else eta, deg, &binom)
        if wake_x:
            x -= 1
        else:
            y -= 1
        if tag_fake:
            x += xi
        else:
            y += xi
        t_out[n] = t
        wake_out[n] = wake_x
        tag_out[n] = tag_fake
        off_out[n] = xi
        x_out[n] = x
        y_out[n] = y
        n += 1
        if x + y == 0:
            extinct = True
            break
        if x + y > POP_LIMIT:
            raise RuntimeError("population exceeded the supported range")

    cdef bint hit_cap = (n == cap and not extinct and not horizon_reached
                         and not isinf(horizon))
    return n, extinct, hit_cap


def run_coupled(
    object bitgen,
    double lam, double alpha_f, double alpha_r,
    double w1, double b1, double w2, double b2, double eps, double eta,
    int deg_kind, long long deg_a, double deg_p,
    const long long[::1] deg_values, const double[::1] deg_cdf,
    long long x0, long long y0, double horizon,
    double[::1] t_out,
    unsigned char[::1] wake1_out, unsigned char[::1] tag1_out,
    unsigned char[::1] wake2_out, unsigned char[::1] tag2_out,
    long long[::1] off_out,
    long long[::1] x1_out, long long[::1] y1_out,
    long long[::1] x2_out, long long[::1] y2_out,
):
    """Shared-randomness run of two policies; see the Python reference."""
    cdef bitgen_t *rng = _state(bitgen)
    cdef binomial_t binom
    memset(&binom, 0, sizeof(binomial_t))
    cdef Py_ssize_t cap = t_out.shape[0]
    cdef long long x1 = x0, y1 = y0, x2 = x0, y2 = y0, s, deg, xi
    cdef double t = 0.0, dt, beta1, beta2, om1, om2, q1, q2, u_w, u_a, u_b, u_d
    cdef Py_ssize_t n = 0
    cdef long long violation = -1
    cdef bint extinct = False, horizon_reached = False
    cdef bint wake1, wake2, tag1, tag2

    while n < cap:
        s = x1 + y1
        dt = random_standard_exponential(rng) / (lam * (<double> s))
        if t + dt > horizon:
            horizon_reached = True
            break
        t = t + dt
        beta1 = (<double> x1) / (<double> s)
        beta2 = (<double> x2) / (<double> s)
        u_w = random_standard_uniform(rng)
        wake1 = u_w < beta1
        wake2 = u_w < beta2
        if b1 == 0.0:
            om1 = (w1 + eps) if beta1 > 0.0 else eps
        else:
            om1 = w1 * beta1 / (beta1 + b1 * (1.0 - beta1)) + eps
        if b2 == 0.0:
            om2 = (w2 + eps) if beta2 > 0.0 else eps
        else:
            om2 = w2 * beta2 / (beta2 + b2 * (1.0 - beta2)) + eps
        q1 = (alpha_f if wake1 else alpha_r) * om1
        q2 = (alpha_f if wake2 else alpha_r) * om2
        u_a = random_standard_uniform(rng)
        u_b = random_standard_uniform(rng)
        if q2 > q1:
            violation = n
            break
        tag1 = u_a < q1
        tag2 = tag1 and (u_b * q1 < q2)
        if deg_kind == 0:
            deg = deg_a
        elif deg_kind == 1:
            deg = random_binomial(rng, deg_p, deg_a, &binom)
        else:
            u_d = random_standard_uniform(rng)
            deg = deg_values[_cdf_locate(deg_cdf, u_d)]
        xi = random_binomial(rng, eta, deg, &binom)
        if wake1:
            x1 -= 1
        else:
            y1 -= 1
        if tag1:
            x1 += xi
        else:
            y1 += xi
        if wake2:
            x2 -= 1
        else:
            y2 -= 1
        if tag2:
            x2 += xi
        else:
            y2 += xi
        t_out[n] = t
        wake1_out[n] = wake1
        tag1_out[n] = tag1
        wake2_out[n] = wake2
        tag2_out[n] = tag2
        off_out[n] = xi
        x1_out[n] = x1
        y1_out[n] = y1
        x2_out[n] = x2
        y2_out[n] = y2
        n += 1
        if x1 < x2 or y1 > y2 or x1 + y1 != x2 + y2:
            violation = n - 1
            break
        if x1 + y1 == 0:
            extinct = True
            break
        if x1 + y1 > POP_LIMIT:
            raise RuntimeError("population exceeded the supported range")

    cdef bint hit_cap = (n == cap and not extinct and not horizon_reached
                         and violation < 0 and not isinf(horizon))
    return n, extinct, hit_cap, violation


def run_network(
    object bitgen,
    const long long[::1] indptr, const int[::1] indices,
    double lam, double alpha_f, double alpha_r,
    double w, double b, double eps, double eta, double eta_c,
    const int[::1] x_init, const int[::1] y_init, double horizon,
    double[::1] t_out, unsigned char[::1] wake_out, unsigned char[::1] tag_out,
    long long[::1] off_out, long long[::1] x_out, long long[::1] y_out,
    int[::1] x_pool, int[::1] y_pool,
):
    """Graph event loop; see the Python reference for semantics."""
    cdef bitgen_t *rng = _state(bitgen)
    cdef Py_ssize_t cap = t_out.shape[0]
    cdef Py_ssize_t pool_cap = x_pool.shape[0]
    cdef Py_ssize_t nx = x_init.shape[0], ny = y_init.shape[0]
    cdef Py_ssize_t i, idx, lo, hi
    cdef long long holder, s, deg, xi
    cdef double t = 0.0, dt, beta, om, q, u_p, p_off
    cdef double p_thin = eta * eta_c
    cdef Py_ssize_t n = 0
    cdef bint extinct = False, horizon_reached = False, overflow = False
    cdef bint wake_x, tag_fake

    for i in range(nx):
        x_pool[i] = x_init[i]
    for i in range(ny):
        y_pool[i] = y_init[i]

    while n < cap:
        s = nx + ny
        dt = random_standard_exponential(rng) / (lam * (<double> s))
        if t + dt > horizon:
            horizon_reached = True
            break
        t = t + dt
        beta = (<double> nx) / (<double> s)
        wake_x = random_standard_uniform(rng) < beta
        u_p = random_standard_uniform(rng)
        if wake_x:
            idx = <Py_ssize_t> (u_p * (<double> nx))
            if idx >= nx:
                idx = nx - 1
            holder = x_pool[idx]
            x_pool[idx] = x_pool[nx - 1]
            nx -= 1
        else:
            idx = <Py_ssize_t> (u_p * (<double> ny))
            if idx >= ny:
                idx = ny - 1
            holder = y_pool[idx]
            y_pool[idx] = y_pool[ny - 1]
            ny -= 1
        if b == 0.0:
            om = (w + eps) if beta > 0.0 else eps
        else:
            om = w * beta / (beta + b * (1.0 - beta)) + eps
        q = (alpha_f if wake_x else alpha_r) * om
        tag_fake = random_standard_uniform(rng) < q
        p_off = p_thin if tag_fake else eta
        lo = indptr[holder]
        hi = indptr[holder + 1]
        xi = 0
        if tag_fake:
            for i in range(lo, hi):
                if random_standard_uniform(rng) < p_off:
                    if nx + xi >= pool_cap:
                        overflow = True
                        break
                    x_pool[nx + xi] = indices[i]
                    xi += 1
            if not overflow:
                nx += xi
        else:
            for i in range(lo, hi):
                if random_standard_uniform(rng) < p_off:
                    if ny + xi >= pool_cap:
                        overflow = True
                        break
                    y_pool[ny + xi] = indices[i]
                    xi += 1
            if not overflow:
                ny += xi
        if overflow:
            break
        t_out[n] = t
        wake_out[n] = wake_x
        tag_out[n] = tag_fake
        off_out[n] = xi
        x_out[n] = nx
        y_out[n] = ny
        n += 1
        if nx + ny == 0:
            extinct = True
            break

    cdef bint hit_cap = (n == cap and not extinct and not horizon_reached
                         and not overflow and not isinf(horizon))
    return n, extinct, hit_cap, overflow
