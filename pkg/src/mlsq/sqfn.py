"""The operators T_l, the square function T = (Σ_l |T_l|^2)^(1/2), and its proof chains.

Fix x and write G_x(y) = prod_i f_i(x - θ_i y) K(y).  Then T_l(x) is the l-th
Fourier coefficient of the unit-periodization P_x(v) = Σ_u G_x(v + u), so the
full l-sum is ||P_x||_{L^2([0,1)^d)} by Parseval.  On the grid the unit cell
holds n^d samples and the discrete Parseval identity is exact over the n^d
distinct modulation classes l mod n; truncated lattices must therefore keep
2R + 1 <= n.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .convolve import ThetaVector, mconv, product_matrix
from .exponents import Exponent, holder_exponent
from .grid import SampledFunction, TorusGrid, _same_grid, lp_norm
from .kernels import KernelError, KernelSpec, b_constant, modulate, sample_kernel, sampled_b_constant

__all__ = [
    "ModulationLattice",
    "SquareFunctionResult",
    "ChainReport",
    "t_ell",
    "square_function_truncated",
    "square_function_exact",
    "square_function",
    "cube_majorant",
    "duality_witness",
    "verify_case1_chain",
    "verify_case2_prefix",
    "theorem1_ratio",
    "block_energies",
    "captured_mass",
    "case1_quantities",
]

KernelLike = Union[SampledFunction, KernelSpec]


@dataclass(frozen=True)
class ModulationLattice:
    d: int
    R: int

    @property
    def count(self) -> int:
        return (2 * self.R + 1) ** self.d

    def points(self) -> list:
        rng = range(-self.R, self.R + 1)
        return list(itertools.product(rng, repeat=self.d))


def _kernel(K: KernelLike, grid: TorusGrid, compact: bool = False) -> SampledFunction:
    if isinstance(K, KernelSpec):
        if compact and math.isinf(K.support_radius):
            raise KernelError(f"{K.name} has unbounded support; pass torus samples explicitly")
        return sample_kernel(K, grid)
    if K.grid != grid:
        raise ValueError("kernel sampled on a different grid")
    return K


def _check_lattice(lattice: ModulationLattice, grid: TorusGrid) -> None:
    if lattice.d != grid.d:
        raise ValueError("lattice dimension differs from grid dimension")
    if 2 * lattice.R + 1 > grid.n:
        raise ValueError(
            f"R = {lattice.R} folds modulations: the grid resolves only "
            f"{grid.n} classes per axis (need 2R + 1 <= n)"
        )


def t_ell(fs: Sequence[SampledFunction], K: KernelLike, ell, theta) -> SampledFunction:
    """T_l(f)(x) = ∫ prod f_i(x - θ_i y) K(y) e^{2πi l.y} dy."""
    grid = _same_grid(*fs)
    return mconv(fs, modulate(_kernel(K, grid), ell), theta)


def square_function_truncated(
    fs: Sequence[SampledFunction], K: KernelLike, theta, lattice: ModulationLattice
) -> SampledFunction:
    grid = _same_grid(*fs)
    _check_lattice(lattice, grid)
    Ks = _kernel(K, grid)
    acc = np.zeros(grid.shape)
    for ell in lattice.points():
        acc = acc + np.abs(t_ell(fs, Ks, ell, theta).values) ** 2
    return SampledFunction(grid, np.sqrt(acc))


def _cell_split(W: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """Reshape the trailing flat y-axis into (cube index, in-cube index)."""
    L, n, d = grid.L, grid.n, grid.d
    lead = W.shape[:-1]
    arr = W.reshape(lead + sum(((L, n) for _ in range(d)), ()))
    k = len(lead)
    cube_axes = [k + 2 * a for a in range(d)]
    cell_axes = [k + 2 * a + 1 for a in range(d)]
    arr = arr.transpose(list(range(k)) + cube_axes + cell_axes)
    return arr.reshape(lead + (L ** d, n ** d))


def _weighted(fs, K: SampledFunction, theta) -> np.ndarray:
    """W[x, u, v] = G_x(u + v h) with G_x(y) = prod f_i(x - θ_i y) K(y)."""
    G = product_matrix(fs, theta) * K.values.ravel()[None, :]
    return _cell_split(G, K.grid)


def _cube_mask(grid: TorusGrid, U: Optional[int]) -> np.ndarray:
    """Torus cubes whose signed index lies in [-U, U)^d."""
    if U is None:
        return np.ones(grid.L ** grid.d, dtype=bool)
    idx = np.arange(grid.L)
    signed = np.where(idx >= (grid.L + 1) // 2, idx - grid.L, idx)
    ok = (signed >= -U) & (signed < U)
    mask = ok
    for _ in range(grid.d - 1):
        mask = np.logical_and.outer(mask, ok)
    return mask.ravel()


def block_energies(fs, K: KernelLike, theta) -> np.ndarray:
    """E[x, u] = ∫_{Q_u} |G_x(y)|^2 dy, shape (N^d, L^d)."""
    grid = _same_grid(*fs)
    W = _weighted(fs, _kernel(K, grid, compact=True), theta)
    return grid.cell * np.sum(np.abs(W) ** 2, axis=-1)


def square_function_exact(fs: Sequence[SampledFunction], K: KernelLike, theta) -> SampledFunction:
    """Full l-sum through the periodization identity (no truncation)."""
    grid = _same_grid(*fs)
    W = _weighted(fs, _kernel(K, grid, compact=True), theta)
    P = W.sum(axis=1)
    vals = np.sqrt(grid.cell * np.sum(np.abs(P) ** 2, axis=-1))
    return SampledFunction(grid, vals.reshape(grid.shape))


def cube_majorant(
    fs: Sequence[SampledFunction], K: KernelLike, theta, U: Optional[int] = None
) -> SampledFunction:
    """Σ_u (∫_{Q_u} |G_x|^2 dy)^(1/2) over torus cubes with signed index in [-U, U)^d."""
    grid = _same_grid(*fs)
    E = block_energies(fs, K, theta)
    vals = np.sqrt(E[:, _cube_mask(grid, U)]).sum(axis=1)
    return SampledFunction(grid, vals.reshape(grid.shape))


@dataclass
class SquareFunctionResult:
    truncated: SampledFunction
    exact: SampledFunction
    lattice: ModulationLattice
    captured: float


def captured_mass(truncated: SampledFunction, exact: SampledFunction, floor: float = 1e-10) -> float:
    """min_x truncated^2 / exact^2 over points where exact^2 exceeds ``floor`` times its max."""
    t2 = np.abs(truncated.values) ** 2
    e2 = np.abs(exact.values) ** 2
    top = e2.max()
    if top == 0:
        return 1.0
    keep = e2 > floor * top
    return float(np.min(t2[keep] / e2[keep]))


def square_function(fs, K: KernelLike, theta, R: int) -> SquareFunctionResult:
    grid = _same_grid(*fs)
    Ks = _kernel(K, grid, compact=True)
    lattice = ModulationLattice(grid.d, R)
    trunc = square_function_truncated(fs, Ks, theta, lattice)
    exact = square_function_exact(fs, Ks, theta)
    return SquareFunctionResult(trunc, exact, lattice, captured_mass(trunc, exact))


def _a_hat(a: Mapping, grid: TorusGrid) -> tuple:
    if not a:
        raise ValueError("empty coefficient sequence")
    keys = []
    for key in a:
        k = (key,) if np.isscalar(key) else tuple(key)
        if len(k) != grid.d:
            raise ValueError(f"index {key} has wrong dimension")
        keys.append(tuple(int(x) for x in k))
    classes = {tuple(x % grid.n for x in k) for k in keys}
    if len(classes) != len(keys):
        raise ValueError(f"indices collide modulo n = {grid.n}; the grid cannot separate them")
    coords = grid.coords()
    ahat = np.zeros(grid.shape, dtype=complex)
    for k, c in zip(keys, a.values()):
        ahat = ahat + c * np.exp(2j * np.pi * sum(ka * x for ka, x in zip(k, coords)))
    return keys, list(a.values()), ahat


def duality_witness(fs, K: KernelLike, theta, a: Mapping) -> tuple:
    """(Σ_l a_l T_l, f⊗(K·â)) with â(y) = Σ_l a_l e^{2πi l.y}.

    The two are separate code paths for the same quantity.
    """
    grid = _same_grid(*fs)
    Ks = _kernel(K, grid)
    keys, coeffs, ahat = _a_hat(a, grid)
    sumside = np.zeros(grid.shape, dtype=complex)
    for k, c in zip(keys, coeffs):
        sumside = sumside + c * t_ell(fs, Ks, k, theta).values
    integral = mconv(fs, Ks.with_values(Ks.values * ahat), theta)
    return SampledFunction(grid, sumside), integral


@dataclass
class ChainReport:
    check: str
    quantities: list
    slack: float
    scale: float
    extra: dict = field(default_factory=dict)

    @property
    def gaps(self) -> list:
        q = self.quantities
        return [q[i + 1] - q[i] for i in range(len(q) - 1)]

    @property
    def passed(self) -> bool:
        return all(g >= -self.slack * self.scale for g in self.gaps)

    def as_dict(self) -> dict:
        out = {
            "check": self.check,
            "quantities": list(self.quantities),
            "gaps": self.gaps,
            "slack": self.slack,
            "scale": self.scale,
            "pass": self.passed,
        }
        out.update(self.extra)
        return out


def _exponents(ps) -> tuple:
    ps = [Exponent.of(p) for p in ps]
    return ps, holder_exponent(ps)


def _q1_q2(fs, Ks: SampledFunction, theta, p: float) -> tuple:
    grid = Ks.grid
    W = _weighted(fs, Ks, theta)
    exact = np.sqrt(grid.cell * np.sum(np.abs(W.sum(axis=1)) ** 2, axis=-1))
    E = grid.cell * np.sum(np.abs(W) ** 2, axis=-1)
    q1 = (grid.cell * np.sum(exact ** p)) ** (1 / p)
    q2 = float(np.sum((grid.cell * np.sum(E ** (p / 2), axis=0)) ** (1 / p)))
    return float(q1), q2, W


def case1_quantities(fs, K: KernelLike, theta, ps) -> list:
    """Q1..Q4 of the Minkowski chain without the exponent precondition."""
    grid = _same_grid(*fs)
    Ks = _kernel(K, grid, compact=True)
    ps, p = _exponents(ps)
    pf = float(p)
    q1, q2, _ = _q1_q2(fs, Ks, theta, pf)
    G = np.abs(product_matrix(fs, theta)) ** pf
    A = grid.cell * G.sum(axis=0)  # A(y) = ∫ |prod f_i(x - θ_i y)|^p dx
    weight = _cell_split((np.abs(Ks.values.ravel()) ** 2 * A ** (2 / pf))[None, :], grid)[0]
    q3 = float(np.sum(np.sqrt(grid.cell * weight.sum(axis=-1))))
    b2 = sampled_b_constant(Ks, 2)
    q4 = b2 * math.prod(lp_norm(f, pj) for f, pj in zip(fs, ps))
    return [q1, q2, q3, q4]


def verify_case1_chain(fs, K: KernelLike, theta, ps, slack: float = 1e-9) -> ChainReport:
    """Q1 <= Q2 <= Q3 <= Q4 for p >= 2.

    Q1 = ||T||_p, Q2 = Σ_u ||(∫_{Q_u}|G_x|^2)^(1/2)||_{L^p(dx)},
    Q3 = Σ_u (∫_{Q_u} |K|^2 (∫|prod f_i(x - θ_i y)|^p dx)^(2/p) dy)^(1/2),
    Q4 = B_2 prod ||f_i||_{p_i}, with B_2 from the same torus cube cells.
    """
    ps_e, p = _exponents(ps)
    if p < 2 or p.infinite or any(pj < 2 or pj.infinite for pj in ps_e):
        raise ValueError(f"case-1 chain needs 2 <= p_j < inf and p >= 2 (got p = {p})")
    qs = case1_quantities(fs, K, theta, ps_e)
    return ChainReport("case1", qs, slack, qs[-1], {"p": str(p)})


def verify_case2_prefix(fs, K: KernelLike, theta, ps, slack: float = 1e-9) -> ChainReport:
    """Q1 <= Q2 <= Q3 for 1 <= p < 2, with Q3 = Σ_u (Σ_n A_{n,u}^(p/2))^(1/p).

    A_{n,u} = ∫_{P_n} ∫_{Q_u} |G_x(y)|^2 dy dx with P_n the unit cells of x.
    ``extra`` carries the bookkeeping identity Σ A_{n,u} = ∫∫ |G|^2.
    """
    grid = _same_grid(*fs)
    ps_e, p = _exponents(ps)
    if p < 1 or not p < 2:
        raise ValueError(f"case-2 prefix needs 1 <= p < 2 (got p = {p})")
    Ks = _kernel(K, grid, compact=True)
    pf = float(p)
    q1, q2, W = _q1_q2(fs, Ks, theta, pf)
    E = grid.cell * np.sum(np.abs(W) ** 2, axis=-1)  # (x, u)
    A = grid.cell * _cell_split(E.T, grid).sum(axis=-1)  # (u, n)
    q3 = float(np.sum(np.sum(A ** (pf / 2), axis=1) ** (1 / pf)))
    total_A = float(A.sum())
    fubini = float(grid.cell ** 2 * np.sum(np.abs(W) ** 2))
    scale = sampled_b_constant(Ks, 2) * math.prod(lp_norm(f, pj) for f, pj in zip(fs, ps_e))
    extra = {
        "p": str(p),
        "A_total": total_A,
        "G_mass": fubini,
        "A_min": float(A.min()),
    }
    return ChainReport("case2prefix", [q1, q2, q3], slack, max(scale, q3), extra)


def theorem1_ratio(fs, K: KernelLike, theta, ps, U: int = 10) -> dict:
    """||T||_p / (B prod ||f_j||_{p_j}), B = B_2 for p >= 2 and B_p for p < 2.

    B comes from the analytic kernel when a KernelSpec is given, else from
    the torus samples.  The ratio is reported, not judged.
    """
    grid = _same_grid(*fs)
    ps_e, p = _exponents(ps)
    if any(pj < 2 or pj.infinite for pj in ps_e):
        raise ValueError("theorem1_ratio needs 2 <= p_j < inf")
    Ks = _kernel(K, grid)
    if isinstance(K, KernelSpec):
        reach = U if math.isinf(K.support_radius) else max(1, math.ceil(K.support_radius))
        bc = b_constant(K, p, reach, grid.d)
        B = bc.value
    else:
        B = sampled_b_constant(Ks, p)
    T = square_function_exact(fs, Ks, theta)
    lhs = lp_norm(T, p)
    fprod = math.prod(lp_norm(f, pj) for f, pj in zip(fs, ps_e))
    denom = B * fprod
    ratio = lhs / denom if denom > 0 else (0.0 if lhs == 0 else math.inf)
    return {
        "check": "theorem1",
        "p": str(p),
        "lhs": lhs,
        "B": B,
        "f_factor": fprod,
        "rhs": denom,
        "ratio": ratio,
    }
