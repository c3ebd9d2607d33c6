"""Numba ``@njit`` implementations of the hot kernels.

Same call surface as :mod:`memop.kernels.numpy_impl`; compiled lazily with
on-disk caching.  ``fastmath`` is restricted to reduction/elementwise
helpers so the blow-up guards keep exact IEEE comparison semantics.
"""

import cmath
import math

import numpy as np
from numba import njit

NAME = "numba"

FAST = {"cache": True, "fastmath": True}
EXACT = {"cache": True}


# ---------------------------------------------------------------------------
# Quadrature weights and the history integral
# ---------------------------------------------------------------------------


@njit(**EXACT)
def _weights(n, dt):
    # Composite Simpson; 3/8 rule on the trailing three intervals when the
    # count is odd; trapezoid for a single interval.
    w = np.zeros(n + 1)
    if n == 0:
        return w
    if n == 1:
        w[0] = 0.5 * dt
        w[1] = 0.5 * dt
        return w
    m = n if n % 2 == 0 else n - 3
    if m > 0:
        w[0] += dt / 3.0
        w[m] += dt / 3.0
        for j in range(1, m, 2):
            w[j] += 4.0 * dt / 3.0
        for j in range(2, m, 2):
            w[j] += 2.0 * dt / 3.0
    if n % 2 == 1:
        w[m] += 3.0 * dt / 8.0
        w[m + 1] += 9.0 * dt / 8.0
        w[m + 2] += 9.0 * dt / 8.0
        w[n] += 3.0 * dt / 8.0
    return w


@njit(**EXACT)
def _matrix_cos_2x2(m, out):
    # cos(M) = cos(mu)cos(delta) I - sin(mu) sinc(delta) (M - mu I),
    # delta^2 = ((m00 - m11)/2)^2 + m01 m10 (Cayley-Hamilton, branch-free)
    mu = 0.5 * (m[0, 0] + m[1, 1])
    d2 = 0.25 * (m[0, 0] - m[1, 1]) ** 2 + m[0, 1] * m[1, 0]
    delta = cmath.sqrt(d2)
    if abs(delta) < 1e-6:
        sinc = 1.0 - d2 / 6.0
        cos_d = 1.0 - d2 / 2.0
    else:
        sinc = cmath.sin(delta) / delta
        cos_d = cmath.cos(delta)
    head = cmath.cos(mu) * cos_d
    tail = cmath.sin(mu) * sinc
    out[0, 0] = head - tail * (m[0, 0] - mu)
    out[0, 1] = -tail * m[0, 1]
    out[1, 0] = -tail * m[1, 0]
    out[1, 1] = head - tail * (m[1, 1] - mu)


@njit(**EXACT)
def history_integral_raw(kind_id, params, g_stack, dt):
    m = g_stack.shape[0] - 1
    n = g_stack.shape[1]
    out = np.zeros((n, n), np.complex128)
    if m == 0:
        return out
    w = _weights(m, dt)
    if kind_id == 0:  # toy: -cos_m(0.25 G(t-s)G(t-s)) G(s), spectral cosine
        prod = np.empty((n, n), np.complex128)
        kmat = np.empty((n, n), np.complex128)
        for j in range(m + 1):
            gh = g_stack[m - j]
            for a in range(n):
                for b in range(n):
                    s = 0.0 + 0.0j
                    for k in range(n):
                        s += gh[a, k] * gh[k, b]
                    prod[a, b] = 0.25 * s
            _matrix_cos_2x2(prod, kmat)
            gs = g_stack[j]
            for a in range(n):
                for b in range(n):
                    s = 0.0 + 0.0j
                    for k in range(n):
                        s += kmat[a, k] * gs[k, b]
                    out[a, b] -= w[j] * s
        return out
    # dyson: -i c^2 G(t-s) G(s)
    for j in range(m + 1):
        gh = g_stack[m - j]
        gs = g_stack[j]
        for a in range(n):
            for b in range(n):
                s = 0.0 + 0.0j
                for k in range(n):
                    s += gh[a, k] * gs[k, b]
                out[a, b] += w[j] * s
    factor = -1j * params[1] * params[1]
    for a in range(n):
        for b in range(n):
            out[a, b] *= factor
    return out


# ---------------------------------------------------------------------------
# LSTM primitives
# ---------------------------------------------------------------------------


@njit(**FAST)
def _gates_raw(wx, wh, b, x, h, raw):
    rows = wx.shape[0]
    nin = wx.shape[1]
    nh = wh.shape[1]
    for r in range(rows):
        s = b[r]
        for k in range(nin):
            s += wx[r, k] * x[k]
        for k in range(nh):
            s += wh[r, k] * h[k]
        raw[r] = s


@njit(**FAST)
def _gates_activate(raw, hs):
    # in place: sigmoid on i/f/o blocks, tanh on the cell block
    for r in range(hs):
        raw[r] = 0.5 * (math.tanh(0.5 * raw[r]) + 1.0)
    for r in range(hs, 2 * hs):
        raw[r] = 0.5 * (math.tanh(0.5 * raw[r]) + 1.0)
    for r in range(2 * hs, 3 * hs):
        raw[r] = math.tanh(raw[r])
    for r in range(3 * hs, 4 * hs):
        raw[r] = 0.5 * (math.tanh(0.5 * raw[r]) + 1.0)


@njit(**FAST)
def _wt_vec(w, a, out):
    # out = w.T @ a with row-contiguous access
    rows = w.shape[0]
    cols = w.shape[1]
    for k in range(cols):
        out[k] = 0.0
    for r in range(rows):
        ar = a[r]
        for k in range(cols):
            out[k] += ar * w[r, k]


@njit(**FAST)
def _outer_acc(acc, a, v):
    rows = acc.shape[0]
    cols = acc.shape[1]
    for r in range(rows):
        ar = a[r]
        for k in range(cols):
            acc[r, k] += ar * v[k]


@njit(**FAST)
def _head_apply(hw, hb, h, y):
    for r in range(hw.shape[0]):
        s = hb[r]
        for k in range(hw.shape[1]):
            s += hw[r, k] * h[k]
        y[r] = s


@njit(**EXACT)
def seq_forward_infer(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq):
    t_len = x_seq.shape[0]
    hs = wh0.shape[1]
    width = hb.size
    out = np.empty((t_len, width))
    h0 = np.zeros(hs)
    c0 = np.zeros(hs)
    h1 = np.zeros(hs)
    c1 = np.zeros(hs)
    raw0 = np.empty(4 * hs)
    raw1 = np.empty(4 * hs)
    for t in range(t_len):
        _gates_raw(wx0, wh0, b0, x_seq[t], h0, raw0)
        _gates_activate(raw0, hs)
        for r in range(hs):
            c0[r] = raw0[hs + r] * c0[r] + raw0[r] * raw0[2 * hs + r]
            h0[r] = raw0[3 * hs + r] * math.tanh(c0[r])
        _gates_raw(wx1, wh1, b1, h0, h1, raw1)
        _gates_activate(raw1, hs)
        for r in range(hs):
            c1[r] = raw1[hs + r] * c1[r] + raw1[r] * raw1[2 * hs + r]
            h1[r] = raw1[3 * hs + r] * math.tanh(c1[r])
        _head_apply(hw, hb, h1, out[t])
    return out, h0, c0, h1, c1


@njit(**EXACT)
def seq_forward_train(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq):
    t_len = x_seq.shape[0]
    hs = wh0.shape[1]
    width = hb.size
    out = np.empty((t_len, width))
    gates0 = np.empty((t_len, 4 * hs))
    gates1 = np.empty((t_len, 4 * hs))
    cs0 = np.empty((t_len, hs))
    cs1 = np.empty((t_len, hs))
    tcs0 = np.empty((t_len, hs))
    tcs1 = np.empty((t_len, hs))
    hs0 = np.empty((t_len, hs))
    hs1 = np.empty((t_len, hs))
    h0 = np.zeros(hs)
    c0 = np.zeros(hs)
    h1 = np.zeros(hs)
    c1 = np.zeros(hs)
    for t in range(t_len):
        _gates_raw(wx0, wh0, b0, x_seq[t], h0, gates0[t])
        _gates_activate(gates0[t], hs)
        for r in range(hs):
            c0[r] = gates0[t, hs + r] * c0[r] + gates0[t, r] * gates0[t, 2 * hs + r]
            tcs0[t, r] = math.tanh(c0[r])
            h0[r] = gates0[t, 3 * hs + r] * tcs0[t, r]
            cs0[t, r] = c0[r]
            hs0[t, r] = h0[r]
        _gates_raw(wx1, wh1, b1, h0, h1, gates1[t])
        _gates_activate(gates1[t], hs)
        for r in range(hs):
            c1[r] = gates1[t, hs + r] * c1[r] + gates1[t, r] * gates1[t, 2 * hs + r]
            tcs1[t, r] = math.tanh(c1[r])
            h1[r] = gates1[t, 3 * hs + r] * tcs1[t, r]
            cs1[t, r] = c1[r]
            hs1[t, r] = h1[r]
        _head_apply(hw, hb, h1, out[t])
    return out, gates0, cs0, tcs0, hs0, gates1, cs1, tcs1, hs1


@njit(**EXACT)
def _layer_backward(wx, wh, x_in, gates, cs, tcs, hs_arr, dh_direct, dwx, dwh, db, dx):
    t_len = hs_arr.shape[0]
    h_size = hs_arr.shape[1]
    dc_next = np.zeros(h_size)
    dh_next = np.zeros(h_size)
    da = np.empty(4 * h_size)
    for t in range(t_len - 1, -1, -1):
        for r in range(h_size):
            i = gates[t, r]
            f = gates[t, h_size + r]
            g = gates[t, 2 * h_size + r]
            o = gates[t, 3 * h_size + r]
            tc = tcs[t, r]
            c_prev = cs[t - 1, r] if t > 0 else 0.0
            dh_r = dh_direct[t, r] + dh_next[r]
            dc = dc_next[r] + dh_r * o * (1.0 - tc * tc)
            da[r] = dc * g * i * (1.0 - i)
            da[h_size + r] = dc * c_prev * f * (1.0 - f)
            da[2 * h_size + r] = dc * i * (1.0 - g * g)
            da[3 * h_size + r] = dh_r * tc * o * (1.0 - o)
            dc_next[r] = dc * f
            db[r] += da[r]
            db[h_size + r] += da[h_size + r]
            db[2 * h_size + r] += da[2 * h_size + r]
            db[3 * h_size + r] += da[3 * h_size + r]
        _outer_acc(dwx, da, x_in[t])
        if t > 0:
            _outer_acc(dwh, da, hs_arr[t - 1])
        _wt_vec(wx, da, dx[t])
        _wt_vec(wh, da, dh_next)


@njit(**EXACT)
def seq_backward(
    wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq,
    gates0, cs0, tcs0, hs0, gates1, cs1, tcs1, hs1, dy,
):
    t_len = x_seq.shape[0]
    hs = wh0.shape[1]
    dwx0 = np.zeros_like(wx0)
    dwh0 = np.zeros_like(wh0)
    db0 = np.zeros(4 * hs)
    dwx1 = np.zeros_like(wx1)
    dwh1 = np.zeros_like(wh1)
    db1 = np.zeros(4 * hs)
    dhw = np.zeros_like(hw)
    dhb = np.zeros(hb.size)
    dh1_direct = np.empty((t_len, hs))
    for t in range(t_len):
        _outer_acc(dhw, dy[t], hs1[t])
        for r in range(hb.size):
            dhb[r] += dy[t, r]
        _wt_vec(hw, dy[t], dh1_direct[t])
    dh0_direct = np.empty((t_len, hs))
    _layer_backward(
        wx1, wh1, hs0, gates1, cs1, tcs1, hs1, dh1_direct, dwx1, dwh1, db1, dh0_direct
    )
    dx_unused = np.empty((t_len, x_seq.shape[1]))
    _layer_backward(
        wx0, wh0, x_seq, gates0, cs0, tcs0, hs0, dh0_direct, dwx0, dwh0, db0, dx_unused
    )
    return dwx0, dwh0, db0, dwx1, dwh1, db1, dhw, dhb


@njit(**EXACT)
def seq_grad(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq, y_tgt, k_train):
    t_len = y_tgt.shape[0]
    width = y_tgt.shape[1]
    fwd = seq_forward_train(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq)
    out = fwd[0]
    n_tr = k_train + 1
    loss_tr = 0.0
    loss_val = 0.0
    dy = np.zeros((t_len, width))
    scale = 2.0 / (n_tr * width)
    for t in range(t_len):
        for r in range(width):
            d = out[t, r] - y_tgt[t, r]
            if t < n_tr:
                loss_tr += d * d
                dy[t, r] = scale * d
            else:
                loss_val += d * d
    loss_tr /= n_tr * width
    if n_tr < t_len:
        loss_val /= (t_len - n_tr) * width
    grads = seq_backward(
        wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq,
        fwd[1], fwd[2], fwd[3], fwd[4], fwd[5], fwd[6], fwd[7], fwd[8], dy,
    )
    return (loss_tr, loss_val) + grads


@njit(**EXACT)
def _cell_pair(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x, h0, c0, h1, c1, raw0, raw1, y):
    hs = wh0.shape[1]
    _gates_raw(wx0, wh0, b0, x, h0, raw0)
    _gates_activate(raw0, hs)
    for r in range(hs):
        c0[r] = raw0[hs + r] * c0[r] + raw0[r] * raw0[2 * hs + r]
        h0[r] = raw0[3 * hs + r] * math.tanh(c0[r])
    _gates_raw(wx1, wh1, b1, h0, h1, raw1)
    _gates_activate(raw1, hs)
    for r in range(hs):
        c1[r] = raw1[hs + r] * c1[r] + raw1[r] * raw1[2 * hs + r]
        h1[r] = raw1[3 * hs + r] * math.tanh(c1[r])
    _head_apply(hw, hb, h1, y)


@njit(**EXACT)
def cell_advance(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x, h0, c0, h1, c1):
    raw0 = np.empty(4 * wh0.shape[1])
    raw1 = np.empty(4 * wh1.shape[1])
    y = np.empty(hb.size)
    _cell_pair(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x, h0, c0, h1, c1, raw0, raw1, y)
    return y


# ---------------------------------------------------------------------------
# Recursive extrapolation driver (model-in-the-loop stepping)
# ---------------------------------------------------------------------------


@njit(**EXACT)
def _streaming_kernel(kind_id, params, t, g, out):
    n = g.shape[0]
    if kind_id == 0:
        a11 = -params[3] * math.exp(-((t - params[0]) ** 2) / params[2])
        a22 = params[3] * math.exp(-((t - params[1]) ** 2) / params[2])
        for b in range(n):
            out[0, b] = -1j * (a11 * g[0, b] + g[1, b])
            out[1, b] = -1j * (g[0, b] + a22 * g[1, b])
    else:
        f = -1j * params[0]
        for a in range(n):
            for b in range(n):
                out[a, b] = f * g[a, b]


@njit(**EXACT)
def _state_ok(g, bound):
    n = g.shape[0]
    for a in range(n):
        for b in range(n):
            re = g[a, b].real
            im = g[a, b].imag
            if not (-bound < re < bound and -bound < im < bound):
                return False
    return True


@njit(**EXACT)
def extrap_drive(
    wx0, wh0, b0, wx1, wh1, b1, hw, hb,
    h0, c0, h1, c1,
    kind_id, params, dt, t_start, stepper_id,
    g_cur, d0, d1, d2, n_new, guard,
):
    """Advance n_new steps feeding each new state back through the model.

    stepper_id: 0 = forward Euler, 1 = third-order Adams-Bashforth (d0..d2
    hold the derivative history, most recent first).  States h*/c* are
    updated in place.  Returns (new states, model integrals, status,
    steps completed); status 1 means the guard tripped.
    """
    n = g_cur.shape[0]
    nn = n * n
    width = 2 * nn
    g_new = np.zeros((n_new, n, n), np.complex128)
    i_new = np.zeros((n_new, n, n), np.complex128)
    raw0 = np.empty(4 * wh0.shape[1])
    raw1 = np.empty(4 * wh1.shape[1])
    x = np.empty(width)
    y = np.empty(width)
    fterm = np.empty((n, n), np.complex128)
    g = g_cur.copy()
    dm0 = d0.copy()
    dm1 = d1.copy()
    dm2 = d2.copy()
    status = 0
    done = 0
    for m in range(n_new):
        t_next = t_start + (m + 1) * dt
        gn = np.empty((n, n), np.complex128)
        if stepper_id == 1:
            for a in range(n):
                for b in range(n):
                    gn[a, b] = g[a, b] + dt * (
                        23.0 * dm0[a, b] - 16.0 * dm1[a, b] + 5.0 * dm2[a, b]
                    ) / 12.0
        else:
            for a in range(n):
                for b in range(n):
                    gn[a, b] = g[a, b] + dt * dm0[a, b]
        g_new[m] = gn
        if not _state_ok(gn, guard):
            status = 1
            break
        for a in range(n):
            for b in range(n):
                x[a * n + b] = gn[a, b].real
                x[nn + a * n + b] = gn[a, b].imag
        _cell_pair(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x, h0, c0, h1, c1, raw0, raw1, y)
        ihat = np.empty((n, n), np.complex128)
        for a in range(n):
            for b in range(n):
                ihat[a, b] = complex(y[a * n + b], y[nn + a * n + b])
        i_new[m] = ihat
        _streaming_kernel(kind_id, params, t_next, gn, fterm)
        dm2 = dm1
        dm1 = dm0
        dm0 = fterm + ihat
        g = gn
        done = m + 1
    return g_new, i_new, status, done
