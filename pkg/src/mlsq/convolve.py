"""The multilinear convolution f⊗g(x) = ∫ f_1(x - θ_1 y) ... f_m(x - θ_m y) g(y) dy.

``mconv`` is the direct rectangle-rule sum over the torus lattice, with
x - θ_i y evaluated by exact index arithmetic.  ``mconv_spectral`` evaluates
the m = 2 case from discrete Fourier coefficients through the symbol
ĝ(θ_1 ξ_1 + θ_2 ξ_2) and serves as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .exponents import Exponent, Regime, RegimeLabel, classify_regime, dual, holder_exponent
from .grid import SampledFunction, TorusGrid, _same_grid, lp_norm, measured_bandlimit, spectrum, weak_lp_norm

__all__ = [
    "ThetaVector",
    "YoungCheckResult",
    "product_matrix",
    "mconv",
    "mconv_spectral",
    "young_constant",
    "young_check",
]


@dataclass(frozen=True)
class ThetaVector:
    """Distinct nonzero dilation parameters θ_1, ..., θ_m."""

    entries: tuple

    def __init__(self, entries: Sequence) -> None:
        vals = tuple(Fraction(e) for e in entries)
        if not vals:
            raise ValueError("θ needs at least one entry")
        if any(v == 0 for v in vals):
            raise ValueError(f"θ entries must be nonzero: {vals}")
        if len(set(vals)) != len(vals):
            raise ValueError(f"θ entries must be pairwise distinct: {vals}")
        object.__setattr__(self, "entries", vals)

    @property
    def m(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def denominator(self) -> int:
        return math.lcm(*(e.denominator for e in self.entries))

    def integer(self) -> tuple:
        """Integer entries; raises when some θ is not on the lattice."""
        if self.denominator != 1:
            raise ValueError(
                f"θ = {[str(e) for e in self.entries]} is not integral; rescale with integerize()"
            )
        return tuple(int(e) for e in self.entries)

    def integerize(self) -> tuple:
        """Return (D·θ, D) with D the common denominator.

        Substituting y = D y' gives f⊗g for θ equal to (D·θ)⊗g_D with
        g_D(y') = D^d g(D y'), so rational θ reduce to integer θ once g is
        sampled on a grid refined by D.
        """
        D = self.denominator
        return ThetaVector([e * D for e in self.entries]), D

    def as_list(self) -> list:
        return [str(e) if e.denominator != 1 else int(e) for e in self.entries]


def _as_theta(theta) -> ThetaVector:
    return theta if isinstance(theta, ThetaVector) else ThetaVector(theta)


def _shift_index(grid: TorusGrid, theta: int) -> np.ndarray:
    """Flat index of x - θ y for every (x, y) pair, shape (N^d, N^d)."""
    N, d = grid.N, grid.d
    k = np.arange(N)
    per_axis = (k[:, None] - theta * k[None, :]) % N
    if d == 1:
        return per_axis
    idx = np.zeros((1, 1), dtype=np.int64)
    for _ in range(d):
        idx = (idx[:, None, :, None] * N + per_axis[None, :, None, :]).reshape(
            idx.shape[0] * N, idx.shape[1] * N
        )
    return idx


def product_matrix(fs: Sequence[SampledFunction], theta) -> np.ndarray:
    """G[x, y] = prod_i f_i(x - θ_i y) over flat grid indices."""
    theta = _as_theta(theta)
    grid = _same_grid(*fs)
    if theta.m != len(fs):
        raise ValueError(f"θ has {theta.m} entries for {len(fs)} functions")
    out = None
    for f, t in zip(fs, theta.integer()):
        term = f.values.ravel()[_shift_index(grid, t)]
        out = term if out is None else out * term
    return out


def mconv(fs: Sequence[SampledFunction], g: SampledFunction, theta) -> SampledFunction:
    """h^d · Σ_y prod_i f_i(x - θ_i y) g(y) at every grid point x."""
    grid = _same_grid(*fs, g)
    G = product_matrix(fs, theta)
    vals = grid.cell * (G @ g.values.ravel())
    return SampledFunction(grid, vals.reshape(grid.shape))


def _support(c: np.ndarray, rtol: float) -> np.ndarray:
    top = np.abs(c).max()
    if top == 0:
        return np.zeros((0,), dtype=np.int64)
    return np.flatnonzero(np.abs(c) > rtol * top)


def mconv_spectral(
    f1: SampledFunction, f2: SampledFunction, g: SampledFunction, theta, rtol: float = 1e-14
) -> SampledFunction:
    """Σ_{k1,k2} c1(k1) c2(k2) · L^d ĉ_g(θ1 k1 + θ2 k2) · exp(2πi (k1 + k2)·x / L).

    Rejects inputs whose spectra would alias: both the output frequency
    k1 + k2 and the symbol argument θ1 k1 + θ2 k2 must stay below Nyquist.
    """
    theta = _as_theta(theta)
    if theta.m != 2:
        raise ValueError("mconv_spectral handles m = 2 only")
    t1, t2 = theta.integer()
    grid = _same_grid(f1, f2, g)
    N, d = grid.N, grid.d
    nyq = N // 2
    b1 = f1.bandlimit if f1.bandlimit is not None else measured_bandlimit(f1)
    b2 = f2.bandlimit if f2.bandlimit is not None else measured_bandlimit(f2)
    if b1 + b2 >= nyq or abs(t1) * b1 + abs(t2) * b2 >= nyq:
        raise ValueError(
            f"aliasing: bandlimits ({b1}, {b2}) with θ = ({t1}, {t2}) reach Nyquist {nyq}"
        )
    c1, c2 = spectrum(f1).ravel(), spectrum(f2).ravel()
    ghat = np.fft.fftn(g.values).ravel() * grid.cell  # torus transform at k/L
    s1, s2 = _support(c1, rtol), _support(c2, rtol)
    if s1.size == 0 or s2.size == 0:
        return SampledFunction(grid, np.zeros(grid.shape))
    k1 = np.stack(np.unravel_index(s1, grid.shape), axis=1)
    k2 = np.stack(np.unravel_index(s2, grid.shape), axis=1)
    k1 = np.where(k1 > nyq, k1 - N, k1)
    k2 = np.where(k2 > nyq, k2 - N, k2)
    sym = (t1 * k1[:, None, :] + t2 * k2[None, :, :]) % N
    outk = (k1[:, None, :] + k2[None, :, :]) % N
    sym_flat = np.ravel_multi_index(tuple(sym[..., a] for a in range(d)), grid.shape)
    out_flat = np.ravel_multi_index(tuple(outk[..., a] for a in range(d)), grid.shape)
    weights = c1[s1][:, None] * c2[s2][None, :] * ghat[sym_flat]
    coeff = np.zeros(grid.size, dtype=complex)
    np.add.at(coeff, out_flat.ravel(), weights.ravel())
    vals = np.fft.ifftn(coeff.reshape(grid.shape)) * grid.size
    return SampledFunction(grid, vals)


@dataclass
class YoungCheckResult:
    lhs: float
    f_factor: float
    g_factor: float
    g_norm: str
    constant: float
    constant_kind: str
    ratio: float
    passed: bool
    regime: RegimeLabel
    tolerance: float
    extra: dict = field(default_factory=dict)

    @property
    def rhs(self) -> float:
        return self.constant * self.f_factor * self.g_factor

    def as_dict(self) -> dict:
        out = {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "f_factor": self.f_factor,
            "g_factor": self.g_factor,
            "g_norm": self.g_norm,
            "constant": self.constant,
            "constant_kind": self.constant_kind,
            "ratio": self.ratio,
            "pass": self.passed,
            "regime": self.regime.tag.value,
            "q": None if self.regime.q is None else str(self.regime.q),
            "tolerance": self.tolerance,
        }
        out.update(self.extra)
        return out


def young_constant(theta, ps: Sequence, r, d: int = 1) -> tuple:
    """Explicit constant for the exponent tuple, as (value, kind, detail).

    kind is ``p=1`` when sum 1/p_i = 1 (q = r):  prod |θ_i|^(-d/(p_i r')).
    kind is ``vertex`` at a q = 1 vertex (two coordinates carry 1 and 1/r',
    or 1 and 1 when r = inf, the rest are 0):  |θ_a - θ_b|^(-d/r') for the
    two carrying coordinates a, b.  The remaining m - 2 functions enter
    through their sup norms.  Otherwise ``empirical`` with value 1.
    """
    theta = _as_theta(theta)
    ps = [Exponent.of(p) for p in ps]
    r = Exponent.of(r)
    rp = dual(r)
    recips = [p.reciprocal for p in ps]
    total = sum(recips, Fraction(0))
    if total == 1:
        expo = [float(x) / float(rp) for x in recips]
        val = math.prod(abs(float(t)) ** (-d * e) for t, e in zip(theta, expo))
        return val, "p=1", {}
    if total == 1 + rp.reciprocal:
        nonzero = [i for i, x in enumerate(recips) if x != 0]
        if len(nonzero) == 2:
            a, b = nonzero
            pair = sorted((recips[a], recips[b]))
            if pair == sorted((Fraction(1), rp.reciprocal)):
                gap = abs(float(theta.entries[a] - theta.entries[b]))
                val = gap ** (-d / float(rp))
                return val, "vertex", {"pair": [a + 1, b + 1]}
    return 1.0, "empirical", {}


def young_check(
    fs: Sequence[SampledFunction],
    g: SampledFunction,
    theta,
    ps: Sequence,
    r,
    tolerance: float = 1e-9,
) -> YoungCheckResult:
    """Evaluate ||f⊗g||_q against the explicit constant where one is known.

    The g-factor is the weak L^r norm in CASE_A and the strong norm in
    CASE_B.  Exponents p_j = 1 are only admitted in CASE_B.  For exponent
    tuples without an explicit constant the ratio is reported against 1 and
    ``passed`` is ``None``.
    """
    theta = _as_theta(theta)
    ps = [Exponent.of(p) for p in ps]
    r = Exponent.of(r)
    p = holder_exponent(ps)
    label = classify_regime(p, r)
    if label.tag is Regime.OUT_OF_RANGE:
        raise ValueError(f"exponents p = {p}, r = {r} are outside both Young regimes")
    if label.tag is Regime.CASE_A and any(pj == 1 for pj in ps):
        raise ValueError("p_j = 1 is only admitted in CASE_B")
    grid = _same_grid(*fs, g)
    out = mconv(fs, g, theta)
    lhs = lp_norm(out, label.q)
    f_factor = math.prod(lp_norm(f, pj) for f, pj in zip(fs, ps))
    if label.tag is Regime.CASE_A:
        g_factor, g_norm = weak_lp_norm(g, r), "weak"
    else:
        g_factor, g_norm = lp_norm(g, r), "strong"
    const, kind, detail = young_constant(theta, ps, r, grid.d)
    denom = const * f_factor * g_factor
    if denom == 0:
        ratio = 0.0 if lhs == 0 else math.inf
    else:
        ratio = lhs / denom
    passed = None if kind == "empirical" else bool(ratio <= 1 + tolerance)
    return YoungCheckResult(lhs, f_factor, g_factor, g_norm, const, kind, ratio, passed, label, tolerance, detail)
