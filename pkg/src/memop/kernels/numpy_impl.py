"""Pure-numpy implementations of the hot kernels.

Reference semantics for the numba backend; selected with
``MEMOP_BACKEND=numpy``.  Vectorized where it pays (history quadrature),
plain per-step loops elsewhere.
"""

import numpy as np

from ..numerics import composite_weights, matrix_cos_stack

NAME = "numpy"


def _sigmoid(x):
    # tanh form avoids exp overflow for large |x|
    return 0.5 * (np.tanh(0.5 * x) + 1.0)


# ---------------------------------------------------------------------------
# History quadrature
# ---------------------------------------------------------------------------


def history_integral_raw(kind_id, params, g_stack, dt):
    """Memory integral at the last grid point of ``g_stack``.

    ``g_stack`` holds G(0) .. G(m dt); returns the Simpson-weighted sum of
    the kernel integrand over lag s = 0 .. m dt (zero matrix for m = 0).
    """
    m = g_stack.shape[0] - 1
    n = g_stack.shape[1]
    if m == 0:
        return np.zeros((n, n), dtype=np.complex128)
    w = composite_weights(m, dt)
    g_rev = g_stack[::-1]  # g_rev[j] = G((m - j) dt)
    if kind_id == 0:  # toy: -cos_m(0.25 G(t-s)G(t-s)) G(s), spectral cosine
        kmat = matrix_cos_stack(0.25 * (g_rev @ g_rev))
        terms = kmat @ g_stack
        return -np.tensordot(w, terms, axes=1)
    # dyson: -i c^2 G(t-s) G(s)
    prod = g_rev @ g_stack
    return (-1j * params[1] ** 2) * np.tensordot(w, prod, axes=1)


# ---------------------------------------------------------------------------
# Stacked LSTM (2 layers) + linear head
# ---------------------------------------------------------------------------


def _cell(wx, wh, b, x, h_prev, c_prev):
    hs = wh.shape[1]
    raw = wx @ x + wh @ h_prev + b
    i = _sigmoid(raw[0:hs])
    f = _sigmoid(raw[hs : 2 * hs])
    g = np.tanh(raw[2 * hs : 3 * hs])
    o = _sigmoid(raw[3 * hs : 4 * hs])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    gates = np.concatenate([i, f, g, o])
    return h, c, tc, gates


def seq_forward_infer(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq):
    """Run the stack over a sequence; returns outputs and final states."""
    t_len = x_seq.shape[0]
    hs = wh0.shape[1]
    out = np.empty((t_len, hb.size))
    h0 = np.zeros(hs)
    c0 = np.zeros(hs)
    h1 = np.zeros(hs)
    c1 = np.zeros(hs)
    for t in range(t_len):
        h0, c0, _, _ = _cell(wx0, wh0, b0, x_seq[t], h0, c0)
        h1, c1, _, _ = _cell(wx1, wh1, b1, h0, h1, c1)
        out[t] = hw @ h1 + hb
    return out, h0, c0, h1, c1


def seq_forward_train(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq):
    """Forward pass keeping per-step activations for backprop."""
    t_len = x_seq.shape[0]
    hs = wh0.shape[1]
    out = np.empty((t_len, hb.size))
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
        h0, c0, tc0, g0 = _cell(wx0, wh0, b0, x_seq[t], h0, c0)
        h1, c1, tc1, g1 = _cell(wx1, wh1, b1, h0, h1, c1)
        gates0[t] = g0
        gates1[t] = g1
        cs0[t] = c0
        cs1[t] = c1
        tcs0[t] = tc0
        tcs1[t] = tc1
        hs0[t] = h0
        hs1[t] = h1
        out[t] = hw @ h1 + hb
    return out, gates0, cs0, tcs0, hs0, gates1, cs1, tcs1, hs1


def _layer_backward(wx, wh, x_in, gates, cs, tcs, hs, dh_direct):
    """BPTT through one LSTM layer; returns parameter grads and input grads."""
    t_len, h_size = hs.shape
    dwx = np.zeros_like(wx)
    dwh = np.zeros_like(wh)
    db = np.zeros(4 * h_size)
    dx = np.zeros_like(x_in)
    dh_next = np.zeros(h_size)
    dc_next = np.zeros(h_size)
    for t in range(t_len - 1, -1, -1):
        i = gates[t, 0:h_size]
        f = gates[t, h_size : 2 * h_size]
        g = gates[t, 2 * h_size : 3 * h_size]
        o = gates[t, 3 * h_size : 4 * h_size]
        tc = tcs[t]
        c_prev = cs[t - 1] if t > 0 else np.zeros(h_size)
        h_prev = hs[t - 1] if t > 0 else np.zeros(h_size)
        dh = dh_direct[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        da = np.empty(4 * h_size)
        da[0:h_size] = dc * g * i * (1.0 - i)
        da[h_size : 2 * h_size] = dc * c_prev * f * (1.0 - f)
        da[2 * h_size : 3 * h_size] = dc * i * (1.0 - g * g)
        da[3 * h_size : 4 * h_size] = dh * tc * o * (1.0 - o)
        dwx += np.outer(da, x_in[t])
        dwh += np.outer(da, h_prev)
        db += da
        dx[t] = wx.T @ da
        dh_next = wh.T @ da
        dc_next = dc * f
    return dwx, dwh, db, dx


def seq_backward(
    wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq,
    gates0, cs0, tcs0, hs0, gates1, cs1, tcs1, hs1, dy,
):
    """Exact gradients of a per-step output loss w.r.t. every parameter."""
    dhw = dy.T @ hs1
    dhb = dy.sum(axis=0)
    dh1_direct = dy @ hw
    dwx1, dwh1, db1, dh0_direct = _layer_backward(
        wx1, wh1, hs0, gates1, cs1, tcs1, hs1, dh1_direct
    )
    dwx0, dwh0, db0, _ = _layer_backward(
        wx0, wh0, x_seq, gates0, cs0, tcs0, hs0, dh0_direct
    )
    return dwx0, dwh0, db0, dwx1, dwh1, db1, dhw, dhb


def seq_grad(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq, y_tgt, k_train):
    """Fused forward + backward for the mean-squared sequence loss.

    The loss is averaged over time steps 0..k_train and output entries;
    steps past k_train contribute only to the reported validation loss.
    """
    t_len, width = y_tgt.shape
    fwd = seq_forward_train(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq)
    out = fwd[0]
    diff = out - y_tgt
    n_tr = k_train + 1
    loss_tr = float(np.sum(diff[:n_tr] ** 2) / (n_tr * width))
    if n_tr < t_len:
        loss_val = float(np.sum(diff[n_tr:] ** 2) / ((t_len - n_tr) * width))
    else:
        loss_val = 0.0
    dy = np.zeros_like(diff)
    dy[:n_tr] = (2.0 / (n_tr * width)) * diff[:n_tr]
    grads = seq_backward(
        wx0, wh0, b0, wx1, wh1, b1, hw, hb, x_seq, *fwd[1:], dy
    )
    return (loss_tr, loss_val) + grads


def cell_advance(wx0, wh0, b0, wx1, wh1, b1, hw, hb, x, h0, c0, h1, c1):
    """One recurrent step; the four state vectors are updated in place."""
    nh0, nc0, _, _ = _cell(wx0, wh0, b0, x, h0, c0)
    nh1, nc1, _, _ = _cell(wx1, wh1, b1, nh0, h1, c1)
    h0[:] = nh0
    c0[:] = nc0
    h1[:] = nh1
    c1[:] = nc1
    return hw @ h1 + hb
