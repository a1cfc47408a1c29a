"""Pure Python simulation kernels (reference backend).

These loops define the package's random-draw contract: for a given bit
generator state every kernel draws the same variates in the same order
as the compiled backend, so traces are bit-identical across backends.
Any change here must be mirrored in ``_kernels.pyx`` expression for
expression — including the exact arithmetic ordering inside formulas.

Per-event draw order, chain kernel:
  1. standard exponential (holding time)
  2. uniform (waker type)
  3. uniform (tag decision)
  4. degree draw (binomial kind: one binomial; empirical kind: one
     uniform located in the degree CDF; constant kind: nothing)
  5. binomial (offspring among contacts)

Coupled kernel: exponential, shared waker uniform, two tag uniforms,
degree draw, shared offspring binomial.

Network kernel: exponential, waker-type uniform, holder-pick uniform,
tag uniform, then one uniform per out-neighbor of the holder.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

# Population guard: beyond this total the int64 event columns and the
# float fraction arithmetic would start losing exactness.
_POP_LIMIT = 1 << 61


def run_chain(
    bitgen,
    lam, alpha_f, alpha_r, w, b, eps, eta, eta_c,
    deg_kind, deg_a, deg_p, deg_values, deg_cdf,
    x0, y0, horizon,
    t_out, wake_out, tag_out, off_out, x_out, y_out,
):
    """Degree-model event loop.  Returns (n_events, extinct, hit_cap)."""
    gen = np.random.Generator(bitgen)
    cap = t_out.shape[0]
    x = int(x0)
    y = int(y0)
    t = 0.0
    n = 0
    extinct = False
    horizon_reached = False
    p_thin = eta * eta_c

    while n < cap:
        s = x + y
        dt = gen.standard_exponential() / (lam * s)
        if t + dt > horizon:
            horizon_reached = True
            break
        t = t + dt
        beta = x / s
        wake_x = gen.random() < beta
        if b == 0.0:
            om = (w + eps) if beta > 0.0 else eps
        else:
            om = w * beta / (beta + b * (1.0 - beta)) + eps
        q = (alpha_f if wake_x else alpha_r) * om
        tag_fake = gen.random() < q
        if deg_kind == 0:
            deg = deg_a
        elif deg_kind == 1:
            deg = int(gen.binomial(deg_a, deg_p))
        else:
            u_d = gen.random()
            deg = int(deg_values[np.searchsorted(deg_cdf, u_d, side="right")])
        xi = int(gen.binomial(deg, p_thin if tag_fake else eta))
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
        if x + y > _POP_LIMIT:
            raise RuntimeError("population exceeded the supported range")

    hit_cap = n == cap and not extinct and not horizon_reached and not math.isinf(horizon)
    return n, extinct, hit_cap


def run_coupled(
    bitgen,
    lam, alpha_f, alpha_r, w1, b1, w2, b2, eps, eta,
    deg_kind, deg_a, deg_p, deg_values, deg_cdf,
    x0, y0, horizon,
    t_out, wake1_out, tag1_out, wake2_out, tag2_out, off_out,
    x1_out, y1_out, x2_out, y2_out,
):
    """Two policies driven by one randomness source.

    Policy 1 must warn at least as aggressively as policy 2; the joint
    construction then keeps system 1's fake-tagged count above system 2's
    (and real-tagged below) at every event.  Returns
    (n_events, extinct, hit_cap, violation_index) with
    violation_index = -1 when the ordering held throughout.
    """
    gen = np.random.Generator(bitgen)
    cap = t_out.shape[0]
    x1 = int(x0)
    y1 = int(y0)
    x2 = int(x0)
    y2 = int(y0)
    t = 0.0
    n = 0
    extinct = False
    horizon_reached = False
    violation = -1

    while n < cap:
        s = x1 + y1  # equals x2 + y2: both systems share every offspring draw
        dt = gen.standard_exponential() / (lam * s)
        if t + dt > horizon:
            horizon_reached = True
            break
        t = t + dt
        beta1 = x1 / s
        beta2 = x2 / s
        u_w = gen.random()
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
        u_a = gen.random()
        u_b = gen.random()
        if q2 > q1:
            violation = n
            break
        tag1 = u_a < q1
        tag2 = tag1 and (u_b * q1 < q2)
        if deg_kind == 0:
            deg = deg_a
        elif deg_kind == 1:
            deg = int(gen.binomial(deg_a, deg_p))
        else:
            u_d = gen.random()
            deg = int(deg_values[np.searchsorted(deg_cdf, u_d, side="right")])
        xi = int(gen.binomial(deg, eta))
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
        if x1 + y1 > _POP_LIMIT:
            raise RuntimeError("population exceeded the supported range")

    hit_cap = (n == cap and not extinct and not horizon_reached
               and violation < 0 and not math.isinf(horizon))
    return n, extinct, hit_cap, violation


def run_network(
    bitgen,
    indptr, indices,
    lam, alpha_f, alpha_r, w, b, eps, eta, eta_c,
    x_init, y_init, horizon,
    t_out, wake_out, tag_out, off_out, x_out, y_out,
    x_pool, y_pool,
):
    """Event loop on an explicit graph: copies live at concrete nodes.

    A waking copy is removed from its pool; each out-neighbor of its node
    independently receives a copy (thinned when the share was tagged
    fake).  Returns (n_events, extinct, hit_cap, pool_overflow).
    """
    gen = np.random.Generator(bitgen)
    cap = t_out.shape[0]
    pool_cap = x_pool.shape[0]
    nx = x_init.shape[0]
    ny = y_init.shape[0]
    x_pool[:nx] = x_init
    y_pool[:ny] = y_init
    t = 0.0
    n = 0
    extinct = False
    horizon_reached = False
    overflow = False
    p_thin = eta * eta_c

    while n < cap:
        s = nx + ny
        dt = gen.standard_exponential() / (lam * s)
        if t + dt > horizon:
            horizon_reached = True
            break
        t = t + dt
        beta = nx / s
        wake_x = gen.random() < beta
        u_p = gen.random()
        if wake_x:
            idx = int(u_p * nx)
            if idx >= nx:
                idx = nx - 1
            holder = int(x_pool[idx])
            x_pool[idx] = x_pool[nx - 1]
            nx -= 1
        else:
            idx = int(u_p * ny)
            if idx >= ny:
                idx = ny - 1
            holder = int(y_pool[idx])
            y_pool[idx] = y_pool[ny - 1]
            ny -= 1
        if b == 0.0:
            om = (w + eps) if beta > 0.0 else eps
        else:
            om = w * beta / (beta + b * (1.0 - beta)) + eps
        q = (alpha_f if wake_x else alpha_r) * om
        tag_fake = gen.random() < q
        p_off = p_thin if tag_fake else eta
        lo = int(indptr[holder])
        hi = int(indptr[holder + 1])
        deg = hi - lo
        if deg > 0:
            reached = indices[lo:hi][gen.random(deg) < p_off]
            xi = int(reached.shape[0])
        else:
            reached = None
            xi = 0
        if xi > 0:
            if tag_fake:
                if nx + xi > pool_cap:
                    overflow = True
                    break
                x_pool[nx:nx + xi] = reached
                nx += xi
            else:
                if ny + xi > pool_cap:
                    overflow = True
                    break
                y_pool[ny:ny + xi] = reached
                ny += xi
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

    hit_cap = (n == cap and not extinct and not horizon_reached
               and not overflow and not math.isinf(horizon))
    return n, extinct, hit_cap, overflow
