"""Discrete check of every condition a solution must satisfy."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import DomainSpec
from ..grid import boundary_trace, divergence_tensor, l2_growth_test, lp_norm
from ..patterns import LineField, make_pattern

# condition keys, in report order
CONDITIONS = ("idempotent", "rank_one", "symmetric", "div_in_L2", "eikonal", "boundary_trace")
ALGEBRA_TOL = 1e-12


@dataclass
class VerificationReport:
    conditions: dict  # key -> {"status": "pass"|"fail"|"untested", "value": ..., "tol": ...}
    norms: dict
    verdict: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict.get("pass", False)

    def to_dict(self) -> dict:
        return {"conditions": self.conditions, "norms": self.norms, "verdict": self.verdict}


def _status(ok):
    return "pass" if ok else "fail"


def _div_sq(P: LineField) -> float:
    d = divergence_tensor(P.tensor(), P.grid, extended=True, mask=P.mask)
    return lp_norm(d, 2, np.ones(P.grid.shape, bool), P.grid.h, root=False)


def verify_solution(P: LineField, spec: DomainSpec | None = None, hs=None,
                    growth_threshold: float = 0.10) -> VerificationReport:
    """Evaluate the solution conditions for ``P``.

    The algebraic conditions, the eikonal residual and the boundary trace are
    measured on ``P`` itself. Membership of div P in L2 needs a refinement
    sequence: with ``hs`` (two or more spacings) the named pattern of ``P`` is
    rebuilt on ``spec`` at each spacing and the growth rule of
    :func:`linefield.grid.l2_growth_test` is applied to the squared norms of
    the zero-extended divergence. Without ``hs`` the condition is
    "untested", which does not fail the verdict.
    """
    grid, mask, h = P.grid, P.mask, P.grid.h
    conds = {}
    d = P.projection_defects()
    conds["idempotent"] = {"status": _status(d["projection"] <= ALGEBRA_TOL), "value": d["projection"], "tol": ALGEBRA_TOL}
    conds["rank_one"] = {"status": _status(d["rank"] <= ALGEBRA_TOL), "value": d["rank"], "tol": ALGEBRA_TOL}
    conds["symmetric"] = {"status": _status(d["symmetry"] <= ALGEBRA_TOL), "value": d["symmetry"], "tol": ALGEBRA_TOL}

    T = P.tensor()
    div_in = divergence_tensor(T, grid, extended=False, mask=mask)
    res = np.einsum("...ij,...j->...i", T, div_in)
    div_norm = lp_norm(div_in, 2, mask, h)
    res_norm = lp_norm(res, 2, mask, h)
    tol = 10 * h * div_norm
    conds["eikonal"] = {"status": _status(res_norm <= tol), "value": res_norm, "tol": tol}
    deep = mask & (grid.sdf < -10 * h)
    res_mag = np.linalg.norm(res, axis=-1)
    max_deep = float(res_mag[deep].max()) if deep.any() else None

    tr = boundary_trace(T, grid, mask)
    conds["boundary_trace"] = {"status": _status(tr.max_abs <= 5 * h), "value": tr.max_abs, "tol": 5 * h,
                               "skipped": tr.skipped}

    norms = {"h": h, "div_L2": div_norm, "residual_L2": res_norm, "residual_max_interior": max_deep,
             "residual_max": float(res_mag[mask].max()), "trace_max": tr.max_abs,
             "div_ext_L2_sq": _div_sq(P)}
    if hs is not None and len(hs) >= 2:
        if spec is None:
            raise ValueError("a refinement sequence needs the domain spec")
        seq = []
        for hk in hs:
            seq.append(norms["div_ext_L2_sq"] if np.isclose(hk, h, rtol=1e-12)
                       else _div_sq(make_pattern(P.name, spec, hk, P.params)))
        g = l2_growth_test(seq, growth_threshold)
        norms["refinement"] = {"h": [float(x) for x in hs], "div_ext_L2_sq": seq, **g}
        conds["div_in_L2"] = {"status": _status(not g["divergent"]), "value": g["mean_ratio"],
                              "tol": 1.0 + growth_threshold}
    else:
        conds["div_in_L2"] = {"status": "untested", "value": None, "tol": 1.0 + growth_threshold}

    conds = {k: conds[k] for k in CONDITIONS}
    failed = [k for k in CONDITIONS if conds[k]["status"] == "fail"]
    untested = [k for k in CONDITIONS if conds[k]["status"] == "untested"]
    reason = "; ".join(f"{k}: " + ("L2 growth" if k == "div_in_L2" else "exceeds tolerance") for k in failed)
    verdict = {"pass": not failed, "failed": failed, "untested": untested, "reason": reason}
    return VerificationReport(conds, norms, verdict)
