"""Named verification checks and the suite runner."""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from ..convolve import young_check
from ..exponents import (
    dual,
    format_rational,
    holder_exponent,
    hull_decompose,
    interpolation_parameter,
    slice_vertices,
    vertices_U,
    vertices_V,
    vertices_W,
)
from ..grid import lp_norm
from ..kernels import b_constant, sampled_b_constant
from ..sqfn import (
    cube_majorant,
    duality_witness,
    square_function_exact,
    theorem1_ratio,
    verify_case1_chain,
    verify_case2_prefix,
)
from .config import ALL_CHECKS, ConfigError, ExperimentConfig
from .instances import generate_instance, generate_young_instance, instance_rng
from .report import CheckReport, Record, VerificationReport

log = logging.getLogger(__name__)

__all__ = ["CHECKS", "run_check", "run_suite"]


def _sup_scale(inst) -> float:
    """B_2 of the sampled kernel times prod sup|f_i|: bounds the majorant pointwise."""
    return sampled_b_constant(inst.K, 2) * math.prod(lp_norm(f, "inf") for f in inst.fs)


def check_bconst(cfg: ExperimentConfig) -> CheckReport:
    rep = CheckReport("bconst")
    p = holder_exponent(cfg.ps)
    prev = 0.0
    for U in range(1, cfg.cube_truncation + 1):
        bc = b_constant(cfg.kernel, p, U, cfg.grid.d)
        if bc.divergent:
            rep.notes["divergent"] = bc.reason
            rep.records.append(Record("bconst", U, None, math.nan, math.nan, 0.0, None))
            return rep
        rep.records.append(
            Record(
                "bconst", U, None, prev, bc.value, 0.0, bc.value >= prev,
                extra={"U": U, "last_shell": bc.last_shell, "exponent_used": str(bc.exponent_used)},
            )
        )
        prev = bc.value
    rep.notes["p"] = str(p)
    return rep


def check_young(cfg: ExperimentConfig) -> CheckReport:
    rep = CheckReport("young", notes={"family": cfg.family})
    for k in range(cfg.instances):
        inst = generate_young_instance(cfg, k)
        res = young_check(inst.fs, inst.g, cfg.young_theta, cfg.young_ps, cfg.r, cfg.slack)
        rep.records.append(
            Record(
                "young", k, inst.seed, res.lhs, res.rhs, cfg.slack * res.rhs, res.passed, res.ratio,
                extra={
                    "constant": res.constant,
                    "constant_kind": res.constant_kind,
                    "regime": res.regime.tag.value,
                    "g_norm": res.g_norm,
                },
            )
        )
    return rep


def _single_cube(cfg: ExperimentConfig) -> bool:
    return cfg.kernel.kind == "cube" and cfg.kernel.a <= 1


def check_claim21(cfg: ExperimentConfig) -> CheckReport:
    rep = CheckReport("claim21")
    for k in range(cfg.instances):
        inst = generate_instance(cfg, k)
        ex = square_function_exact(inst.fs, inst.K, cfg.theta).values.real
        mj = cube_majorant(inst.fs, inst.K, cfg.theta).values.real
        scale = _sup_scale(inst)
        gap = ex - mj
        worst = int(np.argmax(gap))
        ok = bool(np.all(gap <= cfg.slack * scale))
        extra = {"max_excess": float(gap.max())}
        if _single_cube(cfg):
            dev = float(np.max(np.abs(gap)))
            extra["equality_deviation"] = dev
            ok = ok and dev <= 1e-12 * max(scale, 1.0)
        rep.records.append(
            Record("claim21", k, inst.seed, float(ex.ravel()[worst]), float(mj.ravel()[worst]),
                   cfg.slack * scale, ok, extra=extra)
        )
    return rep


def duality_radius(cfg: ExperimentConfig) -> int:
    return min(cfg.lattice_radius, (cfg.grid.n - 1) // 2)


def random_unit_sequence(rng: np.random.Generator, d: int, R: int) -> dict:
    pts = [tuple(int(v) for v in p) for p in np.ndindex(*([2 * R + 1] * d))]
    coeffs = rng.standard_normal(len(pts)) + 1j * rng.standard_normal(len(pts))
    coeffs = coeffs / np.linalg.norm(coeffs)
    return {tuple(v - R for v in p): c for p, c in zip(pts, coeffs)}


def check_duality(cfg: ExperimentConfig) -> CheckReport:
    rep = CheckReport("duality")
    R = duality_radius(cfg)
    rep.notes["radius"] = R
    for k in range(cfg.instances):
        inst = generate_instance(cfg, k)
        a = random_unit_sequence(instance_rng(cfg.seed, "duality/a", k), cfg.grid.d, R)
        s, i = duality_witness(inst.fs, inst.K, cfg.theta, a)
        mj = cube_majorant(inst.fs, inst.K, cfg.theta).values.real
        scale = max(float(np.abs(i.values).max()), 1e-300)
        disc = float(np.abs(s.values - i.values).max()) / scale
        bound_excess = float(np.max(np.abs(s.values) - mj))
        bound_ok = bound_excess <= cfg.slack * _sup_scale(inst)
        rep.records.append(
            Record("duality", k, inst.seed, disc, cfg.duality_tol, 0.0,
                   bool(disc <= cfg.duality_tol and bound_ok),
                   extra={"bound_excess": bound_excess, "bound_ok": bool(bound_ok)})
        )
    return rep


def _chain_check(name: str, cfg: ExperimentConfig, verify: Callable, ps) -> CheckReport:
    rep = CheckReport(name, notes={"p": [str(p) for p in ps]})
    for k in range(cfg.instances):
        inst = generate_instance(cfg, k)
        try:
            chain = verify(inst.fs, inst.K, cfg.theta, ps, cfg.slack)
        except ValueError as exc:
            rep.notes["error"] = str(exc)
            rep.records.append(Record(name, k, inst.seed, math.nan, math.nan, 0.0, False))
            return rep
        q = chain.quantities
        ok = chain.passed
        extra = {"quantities": q}
        if name == "case2prefix":
            book = abs(chain.extra["A_total"] - chain.extra["G_mass"])
            extra["bookkeeping_error"] = book
            ok = ok and book <= 1e-10 * max(chain.extra["G_mass"], 1e-300) and chain.extra["A_min"] >= 0
        rep.records.append(
            Record(name, k, inst.seed, q[0], q[-1], cfg.slack * chain.scale, ok, q[0] / q[-1] if q[-1] else None, extra)
        )
    return rep


def check_case1(cfg: ExperimentConfig) -> CheckReport:
    return _chain_check("case1", cfg, verify_case1_chain, cfg.ps)


def check_case2prefix(cfg: ExperimentConfig) -> CheckReport:
    return _chain_check("case2prefix", cfg, verify_case2_prefix, cfg.case2_ps)


def check_theorem1(cfg: ExperimentConfig) -> CheckReport:
    rep = CheckReport("theorem1")
    for k in range(cfg.instances):
        inst = generate_instance(cfg, k)
        res = theorem1_ratio(inst.fs, cfg.kernel, cfg.theta, cfg.ps, cfg.cube_truncation)
        ratio = res["ratio"]
        rep.records.append(
            Record("theorem1", k, inst.seed, res["lhs"], res["rhs"], 0.0, bool(math.isfinite(ratio)), ratio,
                   extra={"B": res["B"]})
        )
    return rep


def check_vertices(cfg: ExperimentConfig) -> CheckReport:
    rep = CheckReport("vertices", notes={"r": str(cfg.r)})
    rp = dual(cfg.r)
    for m in (3, 4, 5):
        if cfg.r.infinite:
            pts, want, level = vertices_W(m), m * (m - 1) // 2, Fraction(2)
        else:
            pts, want, level = vertices_V(m, cfg.r), m * (m - 1), 1 + rp.reciprocal
        us = vertices_U(m)
        ok = (
            len(pts) == want
            and len(set(pts)) == want
            and all(sum(p) == level for p in pts)
            and len(us) == m
            and all(sum(u) == 1 for u in us)
        )
        rep.records.append(Record("vertices", m, None, float(len(pts)), float(want), 0.0, ok))
    return rep


def check_hull(cfg: ExperimentConfig) -> CheckReport:
    m = max(cfg.young_theta.m, 3)
    q, r = cfg.hull_q, cfg.r
    theta = interpolation_parameter(q, r)
    level = q.reciprocal + dual(r).reciprocal
    rep = CheckReport("hull", notes={"m": m, "q": str(q), "r": str(r), "theta": format_rational(theta)})
    outer = vertices_W(m) if r.infinite else vertices_V(m, r)
    for k, pt in enumerate(slice_vertices(m, level)):
        pair = hull_decompose(pt, q, r)
        ok = False
        if pair is not None:
            j, i = pair
            u, v = vertices_U(m)[j], outer[i]
            ok = tuple((1 - theta) * a + theta * b for a, b in zip(u, v)) == pt
        rep.records.append(
            Record("hull", k, None, 1.0 if ok else 0.0, 1.0, 0.0, ok,
                   extra={"point": [format_rational(x) for x in pt],
                          "pair": None if pair is None else [pair[0] + 1, pair[1] + 1]})
        )
    return rep


CHECKS = {
    "bconst": check_bconst,
    "young": check_young,
    "claim21": check_claim21,
    "duality": check_duality,
    "case1": check_case1,
    "case2prefix": check_case2prefix,
    "theorem1": check_theorem1,
    "vertices": check_vertices,
    "hull": check_hull,
}
assert tuple(CHECKS) == ALL_CHECKS


def run_check(cfg: ExperimentConfig, name: str) -> CheckReport:
    if name not in CHECKS:
        raise ConfigError(f"unknown check {name!r}")
    log.info("running %s", name)
    return CHECKS[name](cfg)


def run_suite(cfg: ExperimentConfig, checks: Optional[Sequence[str]] = None) -> VerificationReport:
    """Run ``checks`` (default: the config's list) in order and aggregate."""
    names = list(cfg.checks if checks is None else checks)
    unknown = [c for c in names if c not in CHECKS]
    if unknown:
        raise ConfigError(f"unknown checks: {unknown}")
    report = VerificationReport(cfg.digest, seed=cfg.seed)
    for name in names:
        report.checks.append(run_check(cfg, name))
    return report
