"""Analytic kernels K, their torus samples, and the block-norm constants B_p.

B_p sums the L^s norms of K over the unit cubes u + [0,1)^d, with s = p' for
1 <= p < 2 and s = 2 for p >= 2.  It is a property of K on R^d, so it is
computed from the closed form at a resolution independent of any torus grid.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from .exponents import Exponent, dual
from .grid import SampledFunction, TorusGrid

__all__ = [
    "KernelSpec",
    "CUBE_INDICATOR",
    "GAUSSIAN",
    "BUMP",
    "POWER_TAIL",
    "BConstant",
    "DivergentBConstant",
    "KernelError",
    "block_exponent",
    "sample_kernel",
    "b_constant",
    "sampled_block_norms",
    "sampled_b_constant",
    "modulate",
    "kernel_from_params",
]

DEFAULT_RESOLUTION = 2 ** 12
PERIODIZATION_TAIL = 1e-12


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """Tagged kernel descriptor.

    kind is one of ``cube`` (indicator of [0, a)^d), ``gaussian`` (unit-mass
    normal density with standard deviation sigma), ``bump`` (product of 1-D
    bumps on [-R, R]; ``order=None`` is the C-infinity bump
    exp(1 - 1/(1 - t^2)), an integer order k gives (1 - t^2)^k) and
    ``power_tail`` (min(1, |y|^-a))."""

    kind: str
    a: Fraction = Fraction(1)
    sigma: float = 1.0
    radius: float = 1.0
    order: Optional[int] = None

    @property
    def name(self) -> str:
        return {
            "cube": "CUBE_INDICATOR",
            "gaussian": "GAUSSIAN",
            "bump": "BUMP",
            "power_tail": "POWER_TAIL",
        }[self.kind]

    @property
    def support_radius(self) -> float:
        if self.kind == "cube":
            return float(self.a)
        if self.kind == "bump":
            return float(self.radius)
        return math.inf

    @property
    def separable(self) -> bool:
        return self.kind != "power_tail"

    def params(self) -> dict:
        if self.kind == "cube":
            return {"a": str(self.a)}
        if self.kind == "gaussian":
            return {"sigma": self.sigma}
        if self.kind == "bump":
            return {"radius": self.radius, "order": "inf" if self.order is None else self.order}
        return {"a": str(self.a)}

    def factor(self, t: np.ndarray, d: int) -> np.ndarray:
        """One axis of a separable kernel; the full kernel is the product."""
        t = np.asarray(t, dtype=float)
        if self.kind == "cube":
            a = float(self.a)
            return ((t >= 0) & (t < a)).astype(float)
        if self.kind == "gaussian":
            s = self.sigma
            return np.exp(-0.5 * (t / s) ** 2) / (s * math.sqrt(2 * math.pi))
        if self.kind == "bump":
            u = t / self.radius
            inside = np.abs(u) < 1
            out = np.zeros_like(u)
            w = 1.0 - u[inside] ** 2
            if self.order is None:
                out[inside] = np.exp(1.0 - 1.0 / w)
            else:
                out[inside] = w ** self.order
            return out
        raise KernelError(f"{self.name} is not separable")

    def __call__(self, *ys: np.ndarray) -> np.ndarray:
        """Evaluate at coordinates ``ys`` (one broadcastable array per axis)."""
        d = len(ys)
        if self.separable:
            out = self.factor(ys[0], d)
            for y in ys[1:]:
                out = out * self.factor(y, d)
            return out
        r2 = sum(np.asarray(y, dtype=float) ** 2 for y in ys)
        r = np.sqrt(r2)
        with np.errstate(divide="ignore"):
            tail = np.where(r > 0, r, 1.0) ** (-float(self.a))
        return np.where(r <= 1.0, 1.0, tail)


def CUBE_INDICATOR(a=1) -> KernelSpec:
    a = Fraction(a)
    if a <= 0:
        raise KernelError("cube side must be positive")
    return KernelSpec("cube", a=a)


def GAUSSIAN(sigma: float) -> KernelSpec:
    if not sigma > 0:
        raise KernelError("sigma must be positive")
    return KernelSpec("gaussian", sigma=float(sigma))


def BUMP(radius: float = 1.0, order: Optional[int] = None) -> KernelSpec:
    if not radius > 0:
        raise KernelError("bump radius must be positive")
    if order is not None and order < 1:
        raise KernelError("bump order must be >= 1 (None for C-infinity)")
    return KernelSpec("bump", radius=float(radius), order=order)


def POWER_TAIL(a) -> KernelSpec:
    a = Fraction(a)
    if a <= 0:
        raise KernelError("tail exponent must be positive")
    return KernelSpec("power_tail", a=a)


def _real(text) -> float:
    """Accept ``0.5`` as well as ``3/2``."""
    return float(Fraction(str(text).strip()))


def kernel_from_params(name: str, params: dict) -> KernelSpec:
    """Build a spec from a CLI/config name and ``{key: text}`` parameters."""
    key = name.strip().lower()
    if key in {"cube", "cube_indicator"}:
        return CUBE_INDICATOR(Fraction(str(params.get("a", "1"))))
    if key == "gaussian":
        return GAUSSIAN(_real(params.get("sigma", 1.0)))
    if key == "bump":
        order = str(params.get("order", "inf")).lower()
        return BUMP(_real(params.get("radius", 1.0)), None if order in {"inf", "none"} else int(order))
    if key in {"power_tail", "powertail"}:
        return POWER_TAIL(Fraction(str(params.get("a", "2"))))
    raise KernelError(f"unknown kernel {name!r}")


def _tail_mass(spec: KernelSpec, d: int, reach: float) -> float:
    """Relative mass of K outside the box [-reach, reach]^d."""
    if spec.kind == "gaussian":
        inside = math.erf(reach / (spec.sigma * math.sqrt(2))) ** d
        return 1.0 - inside
    a = float(spec.a)
    if a <= d:
        return math.inf
    surface = 2 * math.pi ** (d / 2) / math.gamma(d / 2)
    outside = surface * reach ** (d - a) / (a - d)
    ball = math.pi ** (d / 2) / math.gamma(d / 2 + 1)
    return outside / ball


def sample_kernel(spec: KernelSpec, grid: TorusGrid, shells: int = 3) -> SampledFunction:
    """Samples of K, or of its L-periodization when K has unbounded support.

    Compactly supported kernels must fit on the torus without overlapping
    their own translates.  Unbounded kernels are summed over ``shells``
    period images per direction; the sample is rejected when the mass beyond
    that reach exceeds 1e-12.
    """
    L = grid.L
    axis = grid.axis()
    if spec.kind == "cube":
        if float(spec.a) > L:
            raise KernelError(f"cube side {spec.a} exceeds the period {L}")
        offsets = [0]
    elif spec.kind == "bump":
        if 2 * spec.radius > L:
            raise KernelError(f"bump radius {spec.radius} exceeds L/2 = {L / 2}")
        offsets = [0, -1]
    else:
        tail = _tail_mass(spec, grid.d, (shells + 0.5) * L)
        if tail > PERIODIZATION_TAIL:
            raise KernelError(
                f"{spec.name}{spec.params()} loses relative mass {tail:.3g} beyond "
                f"{shells} periodization shells (limit {PERIODIZATION_TAIL:g})"
            )
        offsets = list(range(-shells, shells + 1))
    coords = grid.coords()
    vals = np.zeros(grid.shape)
    if spec.separable:
        per_axis = sum(spec.factor(axis + k * L, grid.d) for k in offsets)
        vals = per_axis
        for _ in range(grid.d - 1):
            vals = np.multiply.outer(vals, per_axis)
    else:
        for shift in itertools.product(offsets, repeat=grid.d):
            vals = vals + spec(*[c + k * L for c, k in zip(coords, shift)])
    out = SampledFunction(grid, vals)
    out.meta.update(kernel=spec.name, params=spec.params(), support_radius=spec.support_radius)
    return out


def block_exponent(p) -> Exponent:
    """p' when 1 <= p < 2, else 2."""
    p = Exponent.of(p)
    if p < 1:
        raise ValueError(f"B_p needs p >= 1, got {p}")
    return dual(p) if p < 2 else Exponent(2)


@dataclass(frozen=True)
class BConstant:
    p: Exponent
    exponent_used: Exponent
    U: int
    value: float
    last_shell: float
    divergent: bool = False

    def as_dict(self) -> dict:
        return {
            "p": str(self.p),
            "exponent_used": str(self.exponent_used),
            "U": self.U,
            "value": self.value,
            "last_shell": self.last_shell,
        }


@dataclass(frozen=True)
class DivergentBConstant:
    p: Exponent
    exponent_used: Exponent
    U: int
    reason: str
    divergent: bool = True

    def as_dict(self) -> dict:
        return {
            "p": str(self.p),
            "exponent_used": str(self.exponent_used),
            "U": self.U,
            "divergent": True,
            "reason": self.reason,
        }


def _midpoints(u: int, resolution: int) -> np.ndarray:
    return u + (np.arange(resolution) + 0.5) / resolution


def _norm_1d(vals: np.ndarray, s: Exponent, resolution: int) -> float:
    a = np.abs(vals)
    if s.infinite:
        return float(a.max())
    sf = float(s)
    return float((np.sum(a ** sf) / resolution) ** (1.0 / sf))


def _cube_norms(spec: KernelSpec, s: Exponent, U: int, d: int, resolution: int) -> dict:
    """{u: ||K 1_{Q_u}||_s} for u in [-U, U)^d."""
    rng = range(-U, U)
    if spec.separable:
        per = {u: _norm_1d(spec.factor(_midpoints(u, resolution), d), s, resolution) for u in rng}
        return {us: math.prod(per[u] for u in us) for us in itertools.product(rng, repeat=d)}
    out = {}
    base = (np.arange(resolution) + 0.5) / resolution
    mesh = np.meshgrid(*([base] * d), indexing="ij")
    for us in itertools.product(rng, repeat=d):
        vals = spec(*[m + u for m, u in zip(mesh, us)])
        a = np.abs(vals)
        if s.infinite:
            out[us] = float(a.max())
        else:
            sf = float(s)
            out[us] = float((np.sum(a ** sf) / resolution ** d) ** (1.0 / sf))
    return out


def b_constant(
    spec: KernelSpec, p, U: int, d: int = 1, resolution: int = DEFAULT_RESOLUTION
) -> Union[BConstant, DivergentBConstant]:
    """Partial sum of B_p over cubes u in [-U, U)^d by midpoint quadrature.

    ``last_shell`` is the contribution of the cubes with some |index| at the
    outer edge, i.e. those added when going from U - 1 to U.
    """
    p = Exponent.of(p)
    s = block_exponent(p)
    if U < 1:
        raise ValueError("truncation U must be >= 1")
    if spec.kind == "power_tail" and spec.a <= d:
        return DivergentBConstant(
            p, s, U, f"cube norms decay like |u|^-{spec.a}, not summable over Z^{d}"
        )
    norms = _cube_norms(spec, s, U, d, resolution)
    total = math.fsum(norms[u] for u in sorted(norms))
    shell = math.fsum(
        norms[u] for u in sorted(norms) if any(x == -U or x == U - 1 for x in u)
    )
    return BConstant(p, s, U, total, shell)


def sampled_block_norms(K: SampledFunction, s) -> np.ndarray:
    """Per-torus-cube L^s norms of the samples, shape (L,)*d."""
    s = Exponent.of(s)
    grid = K.grid
    L, n, d = grid.L, grid.n, grid.d
    a = np.abs(K.values).reshape(sum(((L, n) for _ in range(d)), ()))
    inner = tuple(2 * k + 1 for k in range(d))
    if s.infinite:
        return a.max(axis=inner)
    sf = float(s)
    return (grid.cell * np.sum(a ** sf, axis=inner)) ** (1.0 / sf)


def sampled_b_constant(K: SampledFunction, p) -> float:
    """B_p from the torus samples, using the same cube cells as the square function."""
    return float(np.sum(sampled_block_norms(K, block_exponent(p))))


def modulate(K: SampledFunction, ell) -> SampledFunction:
    """K_l(x) = K(x) exp(2 pi i x.l) for integer l."""
    ell = (ell,) if np.isscalar(ell) else tuple(ell)
    if len(ell) != K.grid.d or any(int(e) != e for e in ell):
        raise ValueError(f"modulation {ell} must be an integer vector of length {K.grid.d}")
    phase = sum(int(e) * c for e, c in zip(ell, K.grid.coords()))
    return K.with_values(K.values * np.exp(2j * np.pi * phase))
