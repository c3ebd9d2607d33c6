"""Two-layer LSTM with a linear head, exact BPTT, Adam, cosine schedule.

Parameters live in plain float64 numpy arrays.  Each layer packs its four
gate blocks (input, forget, cell, output) into ``w_x (4H, in)``,
``w_h (4H, H)`` and ``b (4H,)``; per-gate views are exposed as properties.
The heavy sequence passes run on the selected compute backend.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .backend import kernels


@dataclass(eq=False)
class LstmLayerParams:
    w_x: np.ndarray
    w_h: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        hs = self.hidden_size
        if self.w_x.shape[0] != 4 * hs or self.b.shape != (4 * hs,):
            raise ValueError("inconsistent gate-block shapes")

    @property
    def hidden_size(self):
        return self.w_h.shape[1]

    @property
    def input_size(self):
        return self.w_x.shape[1]

    # per-gate views in the order the blocks are packed
    @property
    def w_ii(self):
        return self.w_x[0 : self.hidden_size]

    @property
    def w_if(self):
        return self.w_x[self.hidden_size : 2 * self.hidden_size]

    @property
    def w_ig(self):
        return self.w_x[2 * self.hidden_size : 3 * self.hidden_size]

    @property
    def w_io(self):
        return self.w_x[3 * self.hidden_size : 4 * self.hidden_size]

    @property
    def w_hi(self):
        return self.w_h[0 : self.hidden_size]

    @property
    def w_hf(self):
        return self.w_h[self.hidden_size : 2 * self.hidden_size]

    @property
    def w_hg(self):
        return self.w_h[2 * self.hidden_size : 3 * self.hidden_size]

    @property
    def w_ho(self):
        return self.w_h[3 * self.hidden_size : 4 * self.hidden_size]

    @property
    def b_i(self):
        return self.b[0 : self.hidden_size]

    @property
    def b_f(self):
        return self.b[self.hidden_size : 2 * self.hidden_size]

    @property
    def b_g(self):
        return self.b[2 * self.hidden_size : 3 * self.hidden_size]

    @property
    def b_o(self):
        return self.b[3 * self.hidden_size : 4 * self.hidden_size]


@dataclass(eq=False)
class RnnModel:
    layers: list
    head_w: np.ndarray
    head_b: np.ndarray
    input_size: int
    hidden_size: int
    output_size: int
    seed: int

    def __post_init__(self):
        if len(self.layers) != 2:
            raise ValueError("exactly two LSTM layers are supported")
        if self.layers[0].input_size != self.input_size:
            raise ValueError("layer 0 input width mismatch")
        if self.layers[1].input_size != self.hidden_size:
            raise ValueError("layer chaining mismatch")
        if self.head_w.shape != (self.output_size, self.hidden_size):
            raise ValueError("head shape mismatch")
        if self.input_size != self.output_size:
            raise ValueError("input and output widths must match")

    def param_tensors(self):
        """Ordered (name, array) pairs covering every trainable tensor."""
        pairs = []
        for idx, layer in enumerate(self.layers):
            pairs.append((f"lstm{idx}.w_x", layer.w_x))
            pairs.append((f"lstm{idx}.w_h", layer.w_h))
            pairs.append((f"lstm{idx}.b", layer.b))
        pairs.append(("head.w", self.head_w))
        pairs.append(("head.b", self.head_b))
        return pairs

    def packed(self):
        """Raw arrays in kernel call order."""
        l0, l1 = self.layers
        return (
            l0.w_x, l0.w_h, l0.b,
            l1.w_x, l1.w_h, l1.b,
            self.head_w, self.head_b,
        )

    def copy(self):
        layers = [
            LstmLayerParams(l.w_x.copy(), l.w_h.copy(), l.b.copy())
            for l in self.layers
        ]
        return RnnModel(
            layers=layers,
            head_w=self.head_w.copy(),
            head_b=self.head_b.copy(),
            input_size=self.input_size,
            hidden_size=self.hidden_size,
            output_size=self.output_size,
            seed=self.seed,
        )


def init_model(input_size, hidden_size, seed, output_size=None, num_layers=2):
    """Seeded uniform init on [-1/sqrt(H), 1/sqrt(H)]; forget bias offset +1.

    Draw order is fixed (layer 0 w_x, w_h, b; layer 1; head) so a seed pins
    every parameter bit-for-bit.
    """
    if num_layers != 2:
        raise ValueError("exactly two LSTM layers are supported")
    if output_size is None:
        output_size = input_size
    rng = np.random.default_rng([seed, 0])
    k = 1.0 / math.sqrt(hidden_size)
    layers = []
    in_size = input_size
    for _ in range(num_layers):
        w_x = rng.uniform(-k, k, (4 * hidden_size, in_size))
        w_h = rng.uniform(-k, k, (4 * hidden_size, hidden_size))
        b = rng.uniform(-k, k, 4 * hidden_size)
        b[hidden_size : 2 * hidden_size] += 1.0  # forget-gate stabilizer
        layers.append(LstmLayerParams(w_x, w_h, b))
        in_size = hidden_size
    head_w = rng.uniform(-k, k, (output_size, hidden_size))
    head_b = rng.uniform(-k, k, output_size)
    return RnnModel(
        layers=layers,
        head_w=head_w,
        head_b=head_b,
        input_size=input_size,
        hidden_size=hidden_size,
        output_size=output_size,
        seed=seed,
    )


@dataclass(eq=False)
class LstmState:
    h: list
    c: list


def zero_state(model):
    hs = model.hidden_size
    return LstmState(
        h=[np.zeros(hs) for _ in model.layers],
        c=[np.zeros(hs) for _ in model.layers],
    )


def lstm_cell_forward(x, state, params):
    """Single-cell reference step: (h, c, cache) from one input vector.

    ``state`` is the (h_prev, c_prev) pair for this layer.  Kept in plain
    numpy as the independently checkable counterpart of the backend
    sequence kernels.
    """
    h_prev, c_prev = state
    x = np.asarray(x, float)
    if x.shape != (params.input_size,):
        raise ValueError("input width mismatch")
    hs = params.hidden_size

    def sigmoid(v):
        return 0.5 * (np.tanh(0.5 * v) + 1.0)

    raw = params.w_x @ x + params.w_h @ h_prev + params.b
    i = sigmoid(raw[0:hs])
    f = sigmoid(raw[hs : 2 * hs])
    g = np.tanh(raw[2 * hs : 3 * hs])
    o = sigmoid(raw[3 * hs : 4 * hs])
    c = f * c_prev + i * g
    h = o * np.tanh(c)
    cache = {"x": x, "h_prev": h_prev, "c_prev": c_prev, "i": i, "f": f,
             "g": g, "o": o, "c": c}
    return h, c, cache


def forward_sequence(model, inputs):
    """Sequence-to-sequence forward; returns outputs and backprop caches."""
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    if inputs.ndim != 2 or inputs.shape[1] != model.input_size:
        raise ValueError(
            f"inputs must be (T, {model.input_size}), got {inputs.shape}"
        )
    res = kernels().seq_forward_train(*model.packed(), inputs)
    return res[0], (inputs,) + tuple(res[1:])


def forward_outputs(model, inputs):
    """Forward pass without caches; also returns the final layer states."""
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    out, h0, c0, h1, c1 = kernels().seq_forward_infer(*model.packed(), inputs)
    return out, (h0, c0, h1, c1)


def backward_sequence(model, caches, out_grads):
    """Exact BPTT gradients for the given per-step output gradients."""
    inputs = caches[0]
    out_grads = np.ascontiguousarray(out_grads, dtype=np.float64)
    if out_grads.shape[0] != inputs.shape[0]:
        raise ValueError("output-gradient length does not match cached pass")
    grads = kernels().seq_backward(*model.packed(), inputs, *caches[1:], out_grads)
    return list(grads)


def grad_sequence(model, inputs, targets, k_train=None):
    """Losses and parameter gradients of the sequence MSE in one call."""
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    if inputs.shape[0] != targets.shape[0]:
        raise ValueError("inputs and targets must share the time axis")
    if k_train is None:
        k_train = inputs.shape[0] - 1
    res = kernels().seq_grad(*model.packed(), inputs, targets, k_train)
    return res[0], res[1], list(res[2:])


def mse_loss(pred, target):
    """Mean over all time steps and vector entries of the squared error."""
    pred = np.asarray(pred, float)
    target = np.asarray(target, float)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch: {pred.shape} vs {target.shape}")
    return float(np.mean((pred - target) ** 2))


def cosine_lr(epoch, total_epochs, lr0):
    """Cosine decay from lr0 at epoch 0 to 0 at epoch == total_epochs."""
    if not 0 <= epoch <= total_epochs:
        raise ValueError("epoch out of range")
    return lr0 * (1.0 + math.cos(math.pi * epoch / total_epochs)) / 2.0


def clip_gradients(grads, max_norm):
    """Global-norm clip applied in place; returns the pre-clip norm."""
    total = 0.0
    for g in grads:
        total += float(np.sum(g * g))
    norm = math.sqrt(total)
    if max_norm is not None and norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for g in grads:
            g *= scale
    return norm


@dataclass(eq=False)
class AdamState:
    m: list
    v: list
    step_count: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(model):
    return AdamState(
        m=[np.zeros_like(arr) for _, arr in model.param_tensors()],
        v=[np.zeros_like(arr) for _, arr in model.param_tensors()],
    )


def adam_step(model, grads, opt, lr):
    """Bias-corrected Adam update applied in place to the model tensors."""
    tensors = [arr for _, arr in model.param_tensors()]
    if len(grads) != len(tensors):
        raise ValueError("gradient list does not match parameter tensors")
    opt.step_count += 1
    t = opt.step_count
    bc1 = 1.0 - opt.beta1**t
    bc2 = 1.0 - opt.beta2**t
    for theta, g, m, v in zip(tensors, grads, opt.m, opt.v):
        if theta.shape != g.shape:
            raise ValueError("gradient shape mismatch")
        m *= opt.beta1
        m += (1.0 - opt.beta1) * g
        v *= opt.beta2
        v += (1.0 - opt.beta2) * (g * g)
        theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + opt.eps)
