"""One function per CLI command.

Each command receives the validated configuration and the output
directory, writes its artifacts and returns ``(summary, files, failure)``
where ``failure`` is a :class:`ToleranceExceeded` to raise once the
manifest is on disk, or ``None``.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..classify import GridSpec, scan_region, stencil_reach
from ..curves import FrameBundlePoint, curve_from_curvature, geodesic, latitude, param_curve
from ..errors import ConfigError, ExprError, ToleranceExceeded
from ..exprcore import parse_expr
from ..gaussbonnet import Triangulation, grid_triangulation, surface_sum
from ..manifold import FrameField, VectorFieldJet, builtin, curvature_jet, killing_residual, metric_chart
from ..transport import (
    Jet2D,
    curvature_defect,
    holonomy,
    jacobi_check,
    killing_transport,
    rigid_variation,
    transported_vector,
    variation_field,
)
from .config import RunConfig
from .output import emit_csv, emit_json


def build_chart(cfg: RunConfig):
    s = cfg.surface
    if s.kind == "builtin":
        try:
            return builtin(s.name, **s.params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for surface {s.name!r}: {exc}").with_context(field="surface.params") from None
    for key in ("g11", "g12", "g22"):
        try:
            parse_expr(getattr(s, key))
        except ExprError as exc:
            raise exc.with_context(field=f"surface.{key}")
    return metric_chart(s.g11, s.g12, s.g22, s.domain, s.periodic, s.period, name=s.name, h=s.h)


def build_curve(cfg: RunConfig, chart):
    c = cfg.curve
    if c is None:
        raise ConfigError(f"command {cfg.command!r} needs a 'curve' block").with_context(field="curve")
    if c.kind == "latitude":
        return latitude(chart, c.u0, cfg.samples, c.v0, c.turns)
    if c.kind == "geodesic":
        return geodesic(chart, c.point, c.direction, c.length, cfg.samples)
    if c.kind == "param":
        for k, text in enumerate(c.components):
            try:
                parse_expr(text, variables=("t",))
            except ExprError as exc:
                raise exc.with_context(field=f"curve.components[{k}]")
        return param_curve(chart, c.components, cfg.samples, c.t_range, closed=c.closed)
    try:
        kappa = parse_expr(c.kappa, variables=("t",))
    except ExprError as exc:
        raise exc.with_context(field="curve.kappa")

    def kfun(t):
        return float(kappa.evaluate({"t": np.asarray(t, dtype=float)}))

    start = FrameBundlePoint.from_tangent(chart, c.point, c.direction)
    curve, _, _ = curve_from_curvature(chart, start, kfun, c.length, cfg.samples, cfg.tolerance_values().reorthonormalize_every)
    return curve


def _det_failure(drift: float, tol: float):
    if drift > tol:
        return ToleranceExceeded(f"det U drifted by {drift:.3e} (limit {tol:g})", residual=drift, tolerance=tol)
    return None


def _path_table(curve, path) -> dict:
    return {
        "t": curve.t,
        "u": curve.points[:, 0],
        "v": curve.points[:, 1],
        "xi1": path[:, 0],
        "xi2": path[:, 1],
        "xi12": path[:, 2],
    }


def cmd_transport(cfg: RunConfig, out: Path):
    tol = cfg.tolerance_values()
    chart = build_chart(cfg)
    curve = build_curve(cfg, chart)
    path, U = killing_transport(chart, curve, cfg.jet, cfg.frame)
    files = [emit_csv(out / "transport.csv", _path_table(curve, path))]
    summary = {
        "frame": cfg.frame,
        "jet_start": path[0],
        "jet_end": path[-1],
        "length": curve.length,
        "samples": curve.samples,
        "closed": curve.closed,
        "det_drift": U.det_drift,
    }
    files.append(emit_json(out / "transport.json", summary))
    return summary, files, _det_failure(U.det_drift, tol.det_drift)


def cmd_holonomy(cfg: RunConfig, out: Path):
    tol = cfg.tolerance_values()
    chart = build_chart(cfg)
    curve = build_curve(cfg, chart)
    U = holonomy(chart, curve, cfg.frame, closure=tol.closure)
    report = U.report(tol.fixed_direction)
    report.update(rotation_angle=U.rotation_angle(), length=curve.length, closure_distance=curve.closure_distance())
    files = [emit_json(out / "holonomy.json", report)]
    return report, files, _det_failure(U.det_drift, tol.det_drift)


def cmd_classify(cfg: RunConfig, out: Path):
    tol = cfg.tolerance_values()
    chart = build_chart(cfg)
    g = cfg.grid
    res = scan_region(chart, GridSpec(g.nu, g.nv, g.u_range, g.v_range), tol)
    cls = res.classes
    rows = [
        (c.point[0], c.point[1], c.singular_values[0], c.singular_values[1], c.singular_values[2], c.rank, c.kind.value)
        for c in cls
    ]
    files = [emit_csv(out / "classify.csv", (["u", "v", "sigma1", "sigma2", "sigma3_of_top3", "rank", "class"], rows))]
    summary = res.summary()
    summary["jet_failures"] = [list(c.point) for c in cls if "jet" in c.flags]
    files.append(emit_json(out / "classify.json", summary))
    failure = None
    if summary["jet_failures"]:
        n = len(summary["jet_failures"])
        failure = ToleranceExceeded(
            f"curvature-jet identities failed at {n} grid points", residual=float(n), tolerance=tol.jet_symmetry
        )
    return summary, files, failure


def _triangulation(cfg: RunConfig, chart):
    t = cfg.triangulation
    if t.kind == "grid":
        return grid_triangulation(chart, t.nu, t.nv, t.samples)
    try:
        text = Path(t.path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read triangulation {t.path}: {exc.strerror}").with_context(field="triangulation.path") from None
    return Triangulation.from_json(chart, text, t.samples)


def cmd_gauss_bonnet(cfg: RunConfig, out: Path):
    tol = cfg.tolerance_values()
    chart = build_chart(cfg)
    tri = _triangulation(cfg, chart)
    rep = surface_sum(chart, tri, tol=tol)
    table = {
        "triangle": np.arange(len(rep.triangles)),
        "total": [t.total for t in rep.triangles],
        "excess": [t.excess for t in rep.triangles],
        "boundary_omega": [t.boundary_omega for t in rep.triangles],
        "curvature_integral": [t.curvature_integral for t in rep.triangles],
        "stokes_residual": [t.stokes_residual for t in rep.triangles],
        "edge_residual": [t.edge_residual for t in rep.triangles],
        "angle_identity_residual": [t.angle_identity_residual for t in rep.triangles],
    }
    files = [emit_csv(out / "triangles.csv", table)]
    summary = rep.as_dict()
    files.append(emit_json(out / "gauss_bonnet.json", summary))
    limit = tol.edge_integer * 2 * np.pi
    failure = None
    if rep.max_edge_residual > limit:
        failure = ToleranceExceeded(
            f"edge formula residual {rep.max_edge_residual:.3e} exceeds {limit:.3e}",
            residual=rep.max_edge_residual,
            tolerance=limit,
        )
    elif not rep.m_cancellation_ok:
        failure = ToleranceExceeded("edge integers m do not cancel between adjacent triangles")
    return summary, files, failure


def _metric_norm(chart, X, V) -> np.ndarray:
    return np.sqrt(np.einsum("sa,sab,sb->s", V, chart.metric(X), V))


def cmd_rigid_var(cfg: RunConfig, out: Path):
    tol = cfg.tolerance_values()
    chart = build_chart(cfg)
    curve = build_curve(cfg, chart)
    path, _ = killing_transport(chart, curve, cfg.jet, cfg.frame)
    X = transported_vector(chart, curve, path, cfg.frame)
    errs = {}
    fields = {}
    for label, dtau in (("dtau", cfg.dtau), ("half_dtau", cfg.dtau / 2)):
        fam = rigid_variation(chart, curve, cfg.jet, dtau, cfg.frame, reorthonormalize_every=tol.reorthonormalize_every)
        Xt = variation_field(fam)
        fields[label] = Xt
        errs[label] = _metric_norm(chart, curve.points, Xt - X)
    table = {
        "t": curve.t,
        "u": curve.points[:, 0],
        "v": curve.points[:, 1],
        "X_u": X[:, 0],
        "X_v": X[:, 1],
        "Xtilde_u": fields["dtau"][:, 0],
        "Xtilde_v": fields["dtau"][:, 1],
        "error": errs["dtau"],
        "error_half": errs["half_dtau"],
    }
    files = [emit_csv(out / "rigid_var.csv", table)]
    e1, e2 = float(np.max(errs["dtau"])), float(np.max(errs["half_dtau"]))
    summary = {"dtau": cfg.dtau, "sup_error": e1, "sup_error_half": e2, "ratio": e1 / e2 if e2 > 0 else None}
    files.append(emit_json(out / "rigid_var.json", summary))
    return summary, files, None


def cmd_jacobi_check(cfg: RunConfig, out: Path):
    tol = cfg.tolerance_values()
    chart = build_chart(cfg)
    curve = build_curve(cfg, chart)
    res = jacobi_check(chart, curve, cfg.jet, cfg.frame, tol.geodesic_kappa)
    files = [emit_csv(out / "jacobi.csv", _path_table(curve, res.path))]
    summary = {"residual": res.residual, "frame": cfg.frame, "length": curve.length}
    files.append(emit_json(out / "jacobi.json", summary))
    return summary, files, None


def _probe_points(cfg: RunConfig, chart) -> np.ndarray:
    pts = []
    if cfg.point is not None:
        pts.append(cfg.point)
    if cfg.points:
        pts.extend(cfg.points)
    if cfg.random_points:
        rng = np.random.default_rng(cfg.seed)
        reach = stencil_reach(chart) * 1.05
        lo, hi = [], []
        for a, (b0, b1) in enumerate(chart.domain.bounds):
            pad = 0.0 if chart.domain.periodic[a] else reach[a]
            lo.append(b0 + pad)
            hi.append(b1 - pad)
        pts.extend(rng.uniform(lo, hi, size=(cfg.random_points, chart.dim)).tolist())
    if not pts:
        raise ConfigError("give 'point', 'points' or 'random_points'").with_context(field="points")
    P = np.asarray(pts, dtype=float)
    if P.ndim != 2 or P.shape[1] != chart.dim:
        raise ConfigError(f"points need {chart.dim} coordinates").with_context(field="points")
    return P


def cmd_killing_check(cfg: RunConfig, out: Path):
    chart = build_chart(cfg)
    if cfg.field is None:
        raise ConfigError("killing-check needs a 'field' list of component expressions").with_context(field="field")
    for k, text in enumerate(cfg.field):
        try:
            parse_expr(text)
        except ExprError as exc:
            raise exc.with_context(field=f"field[{k}]")
    vf = VectorFieldJet(chart, cfg.field, cfg.field_basis)
    P = _probe_points(cfg, chart)
    res = [killing_residual(chart, vf, p) for p in P]
    table = {
        "u": P[:, 0],
        "v": P[:, 1],
        "first_order": [r.first_order for r in res],
        "second_order": [r.second_order for r in res],
    }
    files = [emit_csv(out / "killing.csv", table)]
    summary = {
        "points": len(P),
        "max_first_order": max(r.first_order for r in res),
        "max_second_order": max(r.second_order for r in res),
    }
    files.append(emit_json(out / "killing.json", summary))
    return summary, files, None


def cmd_curvature_defect(cfg: RunConfig, out: Path):
    chart = build_chart(cfg)
    P = _probe_points(cfg, chart)
    frame = FrameField(chart)
    rows = []
    per_point = []
    for p in P:
        j = curvature_jet(chart, p, frame)
        pred = -np.array([j.K1, j.K2, 0.0])
        errs = []
        for h in cfg.defect_h:
            D = curvature_defect(chart, p, h, cfg.defect_steps, frame)
            err = float(np.max(np.abs(D[2] - pred)))
            off = float(np.max(np.abs(D[:2])))
            errs.append(err)
            rows.append((p[0], p[1], h, float(np.max(np.abs(D))), err, off, D[2, 0], D[2, 1], D[2, 2], pred[0], pred[1]))
        ratios = [errs[k + 1] / errs[k] if errs[k] > 0 else None for k in range(len(errs) - 1)]
        per_point.append({"point": p, "K1": j.K1, "K2": j.K2, "errors": errs, "error_ratios": ratios})
    cols = ["u", "v", "h", "defect_max", "error", "off_row_max", "d31", "d32", "d33", "pred1", "pred2"]
    files = [emit_csv(out / "curvature_defect.csv", (cols, rows))]
    summary = {"h": cfg.defect_h, "steps": cfg.defect_steps, "points": per_point}
    files.append(emit_json(out / "curvature_defect.json", summary))
    return summary, files, None


COMMAND_TABLE = {
    "transport": cmd_transport,
    "holonomy": cmd_holonomy,
    "classify": cmd_classify,
    "gauss-bonnet": cmd_gauss_bonnet,
    "rigid-var": cmd_rigid_var,
    "jacobi-check": cmd_jacobi_check,
    "killing-check": cmd_killing_check,
    "curvature-defect": cmd_curvature_defect,
}
