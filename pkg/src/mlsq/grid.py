"""Sampled functions on the torus [0, L)^d and their quadrature norms.

The torus has integer period ``L`` and ``n`` samples per unit length, so the
unit cubes ``u + [0, 1)^d`` are exact blocks of ``n^d`` samples and the
modulations ``exp(2 pi i l.y)`` with integer ``l`` are ``L``-periodic.
Integrals are rectangle-rule sums ``h^d * sum(...)`` with ``h = 1/n``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .exponents import Exponent

__all__ = [
    "TorusGrid",
    "SampledFunction",
    "lp_norm",
    "weak_lp_norm",
    "distribution_function",
    "make_trig_poly",
    "random_trig_poly",
    "spectrum",
    "measured_bandlimit",
    "translate",
    "scale_arg",
    "to_bytes",
    "from_bytes",
    "to_csv",
]


@dataclass(frozen=True)
class TorusGrid:
    d: int
    L: int
    n: int

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ValueError("dimension must be positive")
        if self.L < 2:
            raise ValueError("period L must be an integer >= 2")
        if self.n < 1 or self.n & (self.n - 1):
            raise ValueError("points per unit must be a power of two")

    @property
    def N(self) -> int:
        return self.L * self.n

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def cell(self) -> float:
        """Quadrature weight h^d."""
        return self.h ** self.d

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N ** self.d

    @property
    def volume(self) -> int:
        return self.L ** self.d

    def axis(self) -> np.ndarray:
        return np.arange(self.N) * self.h

    def coords(self) -> list:
        """Per-axis coordinate arrays broadcast to ``shape`` (``ij`` indexing)."""
        return np.meshgrid(*([self.axis()] * self.d), indexing="ij")


@dataclass(frozen=True, eq=False)
class SampledFunction:
    grid: TorusGrid
    values: np.ndarray
    bandlimit: Optional[int] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.size != self.grid.size:
            raise ValueError(f"expected {self.grid.size} samples, got {vals.size}")
        vals = vals.reshape(self.grid.shape).copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def with_values(self, values, bandlimit: Optional[int] = None) -> "SampledFunction":
        return SampledFunction(self.grid, values, bandlimit)

    def __add__(self, other: "SampledFunction") -> "SampledFunction":
        _same_grid(self, other)
        return self.with_values(self.values + other.values)

    def __mul__(self, c) -> "SampledFunction":
        if isinstance(c, SampledFunction):
            _same_grid(self, c)
            return self.with_values(self.values * c.values)
        return self.with_values(self.values * c, self.bandlimit)

    __rmul__ = __mul__

    def abs(self) -> "SampledFunction":
        return self.with_values(np.abs(self.values))

    def conj(self) -> "SampledFunction":
        return self.with_values(np.conj(self.values), self.bandlimit)


def _same_grid(*fs: SampledFunction) -> TorusGrid:
    grid = fs[0].grid
    for f in fs[1:]:
        if f.grid != grid:
            raise ValueError(f"grid mismatch: {f.grid} vs {grid}")
    return grid


def _abs(f) -> np.ndarray:
    vals = f.values if isinstance(f, SampledFunction) else np.asarray(f)
    return np.abs(vals)


def lp_norm(f: SampledFunction, p) -> float:
    """Rectangle-rule L^p norm over one period; sup of samples for p = inf."""
    p = Exponent.of(p)
    if p < 1:
        raise ValueError(f"lp_norm needs p >= 1, got {p}")
    a = _abs(f)
    if p.infinite:
        return float(a.max())
    pf = float(p)
    if pf == 1.0:
        return float(f.grid.cell * a.sum())
    if pf == 2.0:
        return float(np.sqrt(f.grid.cell * np.sum(a * a)))
    return float((f.grid.cell * np.sum(a ** pf)) ** (1.0 / pf))


def weak_lp_norm(f: SampledFunction, p) -> float:
    """sup_alpha alpha * |{|f| > alpha}|^(1/p), taken over the jump points.

    For a step function the supremum is approached as alpha increases to a
    sample magnitude m_k, where the level set has measure k * h^d.
    """
    p = Exponent.of(p)
    if p.infinite:
        raise ValueError("weak norm at p = inf is the sup norm; use lp_norm")
    if p < 1:
        raise ValueError(f"weak_lp_norm needs p >= 1, got {p}")
    mags = np.sort(_abs(f).ravel())[::-1]
    k = np.arange(1, mags.size + 1)
    return float(np.max(mags * (k * f.grid.cell) ** (1.0 / float(p))))


def distribution_function(f: SampledFunction, s: float) -> float:
    """Measure of {|f| > s}."""
    if s < 0:
        raise ValueError("level must be nonnegative")
    return float(f.grid.cell * np.count_nonzero(_abs(f) > s))


def _signed(k: np.ndarray, N: int) -> np.ndarray:
    return np.where(k > N // 2, k - N, k)


def make_trig_poly(grid: TorusGrid, coefficients: Mapping) -> SampledFunction:
    """Samples of x -> sum_k c_k exp(2 pi i k.x / L).

    Keys are integer index vectors ``k`` (frequency ``k/L``); an int is
    accepted for d = 1.  Every ``|k_a|`` must be at most ``N/2 - 1``.
    """
    N = grid.N
    limit = N // 2 - 1
    spec = np.zeros(grid.shape, dtype=complex)
    band = 0
    for key, c in coefficients.items():
        k = (key,) if np.isscalar(key) else tuple(key)
        if len(k) != grid.d:
            raise ValueError(f"frequency {key} has wrong dimension")
        if any(abs(int(ka)) > limit for ka in k):
            raise ValueError(f"frequency {key} aliases: |k| must be <= {limit}")
        band = max(band, max(abs(int(ka)) for ka in k))
        spec[tuple(int(ka) % N for ka in k)] += c
    vals = np.fft.ifftn(spec) * grid.size
    return SampledFunction(grid, vals, bandlimit=band)


def random_trig_poly(
    grid: TorusGrid,
    bandlimit: int,
    rng: np.random.Generator,
    real: bool = False,
    decay: float = 0.0,
) -> SampledFunction:
    """Random trig polynomial with all index frequencies ``|k_a| <= bandlimit``.

    Coefficients are standard complex normals damped by ``(1 + |k|^2)^(-decay/2)``.
    With ``real=True`` the spectrum is made Hermitian.
    """
    ks = np.arange(-bandlimit, bandlimit + 1)
    mesh = np.meshgrid(*([ks] * grid.d), indexing="ij")
    flat = np.stack([m.ravel() for m in mesh], axis=1)
    coeffs = rng.standard_normal(len(flat)) + 1j * rng.standard_normal(len(flat))
    weight = (1.0 + np.sum(flat.astype(float) ** 2, axis=1)) ** (-decay / 2.0)
    coeffs = coeffs * weight
    table = {tuple(int(x) for x in k): c for k, c in zip(flat, coeffs)}
    if real:
        table = {k: 0.5 * (c + np.conj(table[tuple(-x for x in k)])) for k, c in table.items()}
    f = make_trig_poly(grid, table)
    if real:
        f = f.with_values(f.values.real, f.bandlimit)
    return f


def spectrum(f: SampledFunction) -> np.ndarray:
    """Fourier coefficients c_k with f = sum c_k exp(2 pi i k.x/L), FFT order."""
    return np.fft.fftn(f.values) / f.grid.size


def measured_bandlimit(f: SampledFunction, rtol: float = 1e-12) -> int:
    c = np.abs(spectrum(f))
    top = c.max()
    if top == 0:
        return 0
    idx = np.nonzero(c > rtol * top)
    return int(max(np.abs(_signed(i, f.grid.N)).max() for i in idx))


def translate(f: SampledFunction, shift: Sequence[int]) -> SampledFunction:
    """x -> f(x - shift * h); ``shift`` counts samples per axis."""
    shift = (shift,) if np.isscalar(shift) else tuple(shift)
    if len(shift) != f.grid.d:
        raise ValueError("shift has wrong dimension")
    return f.with_values(np.roll(f.values, shift, axis=tuple(range(f.grid.d))), f.bandlimit)


def scale_arg(f: SampledFunction, theta: int) -> SampledFunction:
    """x -> f(theta * x) with torus wraparound; exact sample relabelling."""
    if int(theta) != theta or theta == 0:
        raise ValueError(f"scale_arg needs a nonzero integer, got {theta}")
    theta = int(theta)
    idx = (np.arange(f.grid.N) * theta) % f.grid.N
    vals = f.values
    for axis in range(f.grid.d):
        vals = np.take(vals, idx, axis=axis)
    band = None if f.bandlimit is None else f.bandlimit * abs(theta)
    return f.with_values(vals, band)


_HEADER = struct.Struct("<qqq")


def to_bytes(f: SampledFunction) -> bytes:
    """Header ``<qqq`` (d, L, n), then row-major (re, im) pairs as ``<f8``."""
    body = np.ascontiguousarray(f.values, dtype="<c16").tobytes()
    return _HEADER.pack(f.grid.d, f.grid.L, f.grid.n) + body


def from_bytes(blob: bytes) -> SampledFunction:
    d, L, n = _HEADER.unpack_from(blob)
    grid = TorusGrid(d, L, n)
    vals = np.frombuffer(blob, dtype="<c16", offset=_HEADER.size)
    if vals.size != grid.size:
        raise ValueError(f"payload holds {vals.size} samples, header implies {grid.size}")
    return SampledFunction(grid, vals.reshape(grid.shape))


def to_csv(f: SampledFunction) -> str:
    """Columns x1..xd, re, im; one row per sample in row-major order."""
    grid = f.grid
    cols = [c.ravel() for c in grid.coords()]
    head = ",".join([f"x{a + 1}" for a in range(grid.d)] + ["re", "im"])
    lines = [head]
    for i, v in enumerate(f.values.ravel()):
        xs = [repr(float(c[i])) for c in cols]
        lines.append(",".join(xs + [repr(float(v.real)), repr(float(v.imag))]))
    return "\n".join(lines) + "\n"
