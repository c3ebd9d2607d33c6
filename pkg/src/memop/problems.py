"""The two concrete IDE instances behind one uniform interface.

Both problems are written in the canonical form

    dG/dt = F(G, t) + I(t),     I(t) = integral_0^t K(G(t-s), s) G(s) ds

where F is the memoryless streaming term and I is the memory (collision)
integral that the network learns.

Toy model (2x2):   F = A(t) G with a Gaussian-bump symmetric A(t); memory
                   integrand  -cos(0.25 G(t-s)G(t-s)) G(s) with the SPECTRAL
                   (matrix-function) cosine.  Both choices are forced by
                   stability: the entrywise-cosine reading and/or a positive
                   memory term produce finite-time blow-up for in-scope
                   parameters, while the matrix cosine with the standard
                   memory-kernel minus (dG/dt = A G - int K G) stays bounded
                   and oscillatory over the full horizons used here.
Dyson (1x1):       F = -i h G; integrand -i c^2 G(t-s) G(s).  The -i comes
                   from moving i d/dt to the right-hand side, and is folded
                   into the learned target so one solver serves both.
"""

import cmath
from dataclasses import dataclass

import numpy as np

from .numerics import bessel_j1, matrix_cos

KIND_TOY = 0
KIND_DYSON = 1


@dataclass(frozen=True)
class ToyParams:
    alpha1: float
    alpha2: float
    sigma: float
    beta: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class DysonParams:
    h: float
    c: float

    def __post_init__(self):
        if self.c == 0:
            raise ValueError("c must be nonzero")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    kind: str  # "toy" | "dyson"
    dim: int
    g0: np.ndarray
    toy: ToyParams | None = None
    dyson: DysonParams | None = None

    def __post_init__(self):
        if self.kind == "toy":
            if self.toy is None or self.dyson is not None:
                raise ValueError("toy spec requires exactly the toy block")
        elif self.kind == "dyson":
            if self.dyson is None or self.toy is not None:
                raise ValueError("dyson spec requires exactly the dyson block")
        else:
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if self.g0.shape != (self.dim, self.dim):
            raise ValueError("g0 shape does not match dim")

    @property
    def kind_id(self):
        return KIND_TOY if self.kind == "toy" else KIND_DYSON

    @property
    def params_vec(self):
        """Parameter vector handed to the compute kernels."""
        if self.kind == "toy":
            p = self.toy
            return np.array([p.alpha1, p.alpha2, p.sigma, p.beta])
        return np.array([self.dyson.h, self.dyson.c])


def toy_problem(params, g0=None):
    """Toy-model spec; default initial condition i * I2."""
    if g0 is None:
        g0 = 1j * np.eye(2, dtype=np.complex128)
    return ProblemSpec(kind="toy", dim=2, g0=np.asarray(g0, np.complex128), toy=params)


def dyson_problem(params, g0=None):
    """Dyson spec; default initial condition -i (scalar)."""
    if g0 is None:
        g0 = np.array([[-1j]], dtype=np.complex128)
    return ProblemSpec(
        kind="dyson", dim=1, g0=np.asarray(g0, np.complex128), dyson=params
    )


def toy_a_matrix(params, t):
    """The time-dependent coefficient of the toy streaming term."""
    p = params
    return -1j * np.array(
        [
            [-p.beta * np.exp(-((t - p.alpha1) ** 2) / p.sigma), 1.0],
            [1.0, p.beta * np.exp(-((t - p.alpha2) ** 2) / p.sigma)],
        ],
        dtype=np.complex128,
    )


def streaming(spec, t, g):
    """Memoryless part of dG/dt at time t."""
    g = np.asarray(g, np.complex128)
    if g.shape != (spec.dim, spec.dim):
        raise ValueError(f"state shape {g.shape} does not match dim {spec.dim}")
    if spec.kind == "toy":
        return toy_a_matrix(spec.toy, t) @ g
    return (-1j * spec.dyson.h) * g


def kernel_term(spec, g_hist_at, g_s):
    """Integrand of the memory integral at one lag.

    ``g_hist_at`` is G(t - s) and ``g_s`` is G(s).
    """
    g_hist_at = np.asarray(g_hist_at, np.complex128)
    g_s = np.asarray(g_s, np.complex128)
    shape = (spec.dim, spec.dim)
    if g_hist_at.shape != shape or g_s.shape != shape:
        raise ValueError("kernel_term arguments do not match problem dim")
    if spec.kind == "toy":
        return -(matrix_cos(0.25 * (g_hist_at @ g_hist_at)) @ g_s)
    return (-1j * spec.dyson.c**2) * (g_hist_at @ g_s)


def dyson_analytic(params, t):
    """Closed-form Dyson solution -i e^{-iht} J1(2ct)/(ct).

    The removable singularity at t = 0 is replaced by its limit value 1.
    """
    if t < 0:
        raise ValueError("t must be non-negative")
    z = 2.0 * params.c * t
    if abs(z) < 1e-6:
        ratio = 1.0
    else:
        ratio = 2.0 * bessel_j1(z) / z
    return -1j * cmath.exp(-1j * params.h * t) * ratio
