"""Experiment harness: configurations, deterministic records, checks.

Every command produces a ResultRecord whose payload (everything except wall
time) serializes to canonical JSON. All randomness flows through explicit
seeds and all parallel merges are ordered, so the payload bytes are
independent of the worker count.
"""
from __future__ import annotations

import dataclasses
import io
import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np

from . import __version__ as _version
from . import geometry, graph, pac, prism, seeds, vc
from .field import FieldParams, Point, PointSet, reduce_point
from .kernels import BACKEND

STATUS_PASS = "pass"
STATUS_FAIL = "fail"
STATUS_UNMET = "hypothesis-unmet"
STATUS_INFO = "informational"


@dataclass
class ExperimentConfig:
    q: int
    d: int
    t: int
    command: str
    set_spec: str = "full"
    seed: int = 0
    workers: int | None = None
    options: dict = field(default_factory=dict)

    def params(self) -> FieldParams:
        return FieldParams(self.q, self.d, self.t)


def load_pointset(path: str, params: FieldParams) -> PointSet:
    """Point family from a text file: one point per line, d integers
    separated by commas or whitespace, '#' comments, duplicates rejected."""
    mask = 0
    n = params.space_size
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) != params.d:
                raise ValueError(
                    f"{path}:{lineno}: expected {params.d} coordinates, "
                    f"got {len(parts)}")
            try:
                coords = tuple(int(x) for x in parts)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            p = reduce_point(coords, params)
            from .field import point_index

            i = point_index(p, params)
            if mask >> i & 1:
                raise ValueError(f"{path}:{lineno}: duplicate point {p}")
            mask |= 1 << i
    if mask == 0:
        raise ValueError(f"{path}: no points")
    return PointSet(n, mask)


def resolve_pointset(spec: str, params: FieldParams) -> PointSet:
    """The family named by a set spec: 'full', 'random:SIZE:SEED', or
    'file:PATH'."""
    if spec == "full":
        return PointSet.full(params)
    if spec.startswith("random:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad random spec {spec!r}, want random:SIZE:SEED")
        try:
            size, seed = int(parts[1]), int(parts[2])
        except ValueError:
            raise ValueError(f"bad random spec {spec!r}") from None
        if not 1 <= size <= params.space_size:
            raise ValueError(
                f"random size {size} out of range [1, {params.space_size}]")
        idx = seeds.sample_indices(params.space_size, size, seed)
        return PointSet.from_indices(idx, params)
    if spec.startswith("file:"):
        return load_pointset(spec[5:], params)
    raise ValueError(f"unknown set spec {spec!r}")


@dataclass
class CheckResult:
    name: str
    status: str
    detail: str = ""
    data: dict | None = None


@dataclass
class ResultRecord:
    command: str
    config: dict
    results: dict
    checks: list[CheckResult]
    version: str
    backend: str
    wall_ms: float

    def exit_code(self) -> int:
        return 1 if any(c.status == STATUS_FAIL for c in self.checks) else 0

    def payload(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "checks": [dataclasses.asdict(c) for c in self.checks],
            "version": self.version,
        }

    def payload_bytes(self) -> bytes:
        return json.dumps(_jsonify(self.payload()), sort_keys=True,
                          separators=(",", ":")).encode()

    def to_json(self) -> str:
        body = _jsonify(self.payload())
        body["backend"] = self.backend
        body["wall_ms"] = round(self.wall_ms, 3)
        return json.dumps(body, indent=2, sort_keys=True)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("section,key,value\n")

        def emit(section: str, key: str, value):
            v = json.dumps(_jsonify(value), sort_keys=True,
                           separators=(",", ":"))
            v = v.replace('"', '""')
            out.write(f'{section},{key},"{v}"\n')

        for k in sorted(self.config):
            emit("config", k, self.config[k])
        for k in sorted(self.results):
            emit("result", k, self.results[k])
        for c in self.checks:
            emit("check", c.name, {"status": c.status, "detail": c.detail})
        emit("meta", "version", self.version)
        return out.getvalue()


def _jsonify(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (int, float, str)):
        return obj
    if dataclasses.is_dataclass(obj):
        return _jsonify(dataclasses.asdict(obj))
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _point_list(p: Point) -> list[int]:
    return list(p)


def _prism_dict(pr: prism.Prism) -> dict:
    return {"tails": [_point_list(p) for p in pr.tails],
            "center": [_point_list(p) for p in pr.center]}


def run_command(config: ExperimentConfig) -> ResultRecord:
    params = config.params()
    e_set = resolve_pointset(config.set_spec, params)
    handler = _HANDLERS.get(config.command)
    if handler is None:
        raise ValueError(f"unknown command {config.command!r}")
    start = time.perf_counter()
    results, checks = handler(config, params, e_set)
    wall = (time.perf_counter() - start) * 1000.0
    cfg = {"q": config.q, "d": config.d, "t": config.t,
           "set": config.set_spec, "seed": config.seed}
    return ResultRecord(config.command, cfg, results, checks,
                        _version, BACKEND, wall)


def _cmd_sphere_size(config, params, e_set):
    sizes = geometry.sphere_sizes(params, config.workers)
    checks = []
    for c in geometry.verify_sphere_size_bounds(params, config.workers):
        status = STATUS_PASS if c.within else STATUS_FAIL
        checks.append(CheckResult(
            f"sphere-size-window-t{c.t}", status,
            f"|S_{c.t}| = {c.size}, window [{c.lower:.3f}, {c.upper:.3f}]"))
    return {"sizes": {str(t): n for t, n in sorted(sizes.items())}}, checks


def _parse_int_list(raw, default: list[int]) -> list[int]:
    if raw is None:
        return list(default)
    if isinstance(raw, (list, tuple)):
        return [int(x) for x in raw]
    return [int(x) for x in str(raw).split(",") if x.strip()]


def _cmd_gamma(config, params, e_set):
    ks = _parse_int_list(config.options.get("k_values"), [2])
    g = graph.build_graph(e_set, params, config.workers)
    results = {"edge_vertices": g.n, "gamma": {}}
    checks = []
    for k in ks:
        c = graph.gamma_bound_check(g, k, config.workers)
        results["gamma"][str(k)] = {
            "value": c.gamma,
            "main_term": c.main_term,
            "discrepancy": c.discrepancy,
            "window": c.bound,
            "hypothesis_met": c.hypothesis_met,
        }
        if c.hypothesis_met:
            status = STATUS_PASS if c.bound_holds else STATUS_FAIL
            detail = f"discrepancy {float(c.discrepancy):.3f} vs window {c.bound:.3f}"
        else:
            status = STATUS_UNMET
            detail = (f"size hypothesis not met; window "
                      f"{'holds' if c.bound_holds else 'does not hold'} anyway")
        checks.append(CheckResult(f"gamma-window-k{k}", status, detail,
                                  {"bound_holds": c.bound_holds}))
        if c.gamma2_lower_holds is not None:
            checks.append(CheckResult(
                "gamma2-cube-lower",
                STATUS_PASS if c.gamma2_lower_holds else STATUS_FAIL,
                "2-chain count against |E|^3 / (2 q^2)"))
    return results, checks


def _cmd_prisms(config, params, e_set):
    n_centers = int(config.options.get("n_centers", params.d))
    g = graph.build_graph(e_set, params, config.workers)
    counts = graph.two_path_counts(g, config.workers)
    total = prism.count_prisms_formula(counts, n_centers)
    frac = prism.affinely_nondegenerate_fraction(
        g, n_centers,
        exact_limit=int(config.options.get("exact_limit", 2_000_000)),
        samples=int(config.options.get("samples", 20_000)),
        seed=config.seed, workers=config.workers)
    results = {
        "n_centers": n_centers,
        "count": total,
        "fraction": {
            "method": frac.method,
            "affinely_nondegenerate": frac.affinely_nondegenerate,
            "nondegenerate": frac.nondegenerate,
            "samples": frac.samples,
            "value": frac.fraction,
        },
    }
    checks = [CheckResult("prism-count", STATUS_INFO,
                          f"{total} ordered nondegenerate prisms "
                          f"({n_centers} centers); unordered factor 2*{n_centers}!")]
    sb = counts.support_bound_check()
    if sb is not None:
        mx, bound, ok = sb
        checks.append(CheckResult(
            "pair-support-bound", STATUS_PASS if ok else STATUS_FAIL,
            f"max common-neighbor count {mx} vs 2 q^(d-2) = {bound}"))
    if frac.method == "exact" and frac.nondegenerate:
        agrees = frac.nondegenerate == total
        checks.append(CheckResult(
            "prism-formula-vs-enumeration",
            STATUS_PASS if agrees else STATUS_FAIL,
            f"formula {total} vs enumeration {frac.nondegenerate}"))
    return results, checks


def _cmd_bad_sets(config, params, e_set):
    n_centers = int(config.options.get("n_centers", params.d))
    limit = int(config.options.get("max_prisms", 200))
    g = graph.build_graph(e_set, params, config.workers)
    scanned = 0
    with_bad = 0
    first_clean: dict | None = None
    first_bad: dict | None = None
    pole_violations = 0
    pole_checked = 0
    for pr in prism.enumerate_prisms(g, n_centers, "affinely_nondegenerate",
                                     limit=limit):
        scanned += 1
        report = prism.find_bad_sets(pr, params)
        if report.admits_bad_set:
            with_bad += 1
            if first_bad is None:
                entry = next(e for e in report.entries if e.bad)
                first_bad = {"prism": _prism_dict(pr),
                             "subset": [_point_list(p) for p in entry.subset],
                             "pole_count": entry.pole_count,
                             "vacuous": entry.vacuous}
        elif first_clean is None:
            first_clean = {"prism": _prism_dict(pr)}
        for pb in prism.pole_bound_entries(report, params):
            pole_checked += 1
            if not pb.within:
                pole_violations += 1
    results = {
        "n_centers": n_centers,
        "prisms_scanned": scanned,
        "admitting_bad_set": with_bad,
        "admitting_none": scanned - with_bad,
        "first_without_bad_set": first_clean,
        "first_with_bad_set": first_bad,
        "truncated": scanned == limit,
    }
    checks = [CheckResult(
        "bad-set-scan", STATUS_INFO,
        f"{with_bad}/{scanned} affinely nondegenerate prisms admit a bad subset")]
    if pole_checked:
        checks.append(CheckResult(
            "pole-cardinality-report", STATUS_INFO,
            f"{pole_violations}/{pole_checked} bad subsets reach "
            f"2 (d-k) q^(d-k-1); reported, not asserted"))
    return results, checks


def _cmd_vc_dim(config, params, e_set):
    kind = config.options.get("kind", "pair")
    max_checks = config.options.get("max_checks")
    res = vc.vc_dimension(e_set, params, kind, config.workers,
                          None if max_checks is None else int(max_checks))
    results = {
        "kind": kind,
        "value": res.value,
        "exact": res.exact,
        "degenerate": res.degenerate,
        "checks_run": res.checks,
        "shattered_set": ([_point_list(p) for p in res.shattered_set]
                          if res.shattered_set else None),
        "notes": res.notes,
    }
    checks = []
    expect = config.options.get("expect")
    if expect is not None:
        ok = res.exact and res.value == int(expect)
        checks.append(CheckResult(
            "vc-dimension-expected", STATUS_PASS if ok else STATUS_FAIL,
            f"computed {res.value} (exact={res.exact}), expected {expect}"))
    else:
        checks.append(CheckResult(
            "vc-dimension", STATUS_INFO,
            f"{kind} class VC dimension {res.value} (exact={res.exact})"))
    return results, checks


def _cmd_witness(config, params, e_set):
    kind = config.options.get("kind", "pair")
    scan_limit = int(config.options.get("scan_limit", 5000))
    n_centers = int(config.options.get("n_centers", params.d))
    g = graph.build_graph(e_set, params, config.workers)
    found = None
    for pr in prism.prisms_admitting_no_bad_set(g, n_centers, limit=1,
                                                scan_limit=scan_limit):
        found = pr
    if found is None:
        return ({"prism": None},
                [CheckResult("witness-prism", STATUS_FAIL,
                             f"no prism without bad subsets in the first "
                             f"{scan_limit} affinely nondegenerate prisms")])
    try:
        w = vc.shatter_witness(found, e_set, params, kind)
    except vc.WitnessError as exc:
        return ({"prism": _prism_dict(found), "witness": None},
                [CheckResult("witness-construction", STATUS_FAIL, str(exc))])
    valid = vc.validate_witness(w, params)
    results = {
        "prism": _prism_dict(found),
        "kind": kind,
        "witness": {format(mask, "b").zfill(len(w.set_points))[::-1]:
                    [_point_list(p) for p in h.points]
                    for mask, h in enumerate(w.assignment)},
        "valid": valid,
    }
    checks = [CheckResult(
        "witness-validation", STATUS_PASS if valid else STATUS_FAIL,
        f"all {1 << len(w.set_points)} labelings re-evaluated")]
    return results, checks


def _parse_target(raw: str | None, e_set: PointSet, params: FieldParams,
                  kind: str) -> vc.Hypothesis:
    if raw is None:
        it = vc.hypotheses(e_set, params, kind)
        return next(it)
    pts = []
    for chunk in raw.split(";"):
        coords = tuple(int(x) for x in chunk.replace(",", " ").split())
        if len(coords) != params.d:
            raise ValueError(f"target point {chunk!r} needs {params.d} coordinates")
        pts.append(reduce_point(coords, params))
    if kind == "single":
        if len(pts) != 1:
            raise ValueError("single-kind target takes one point")
        return vc.single_hypothesis(pts[0], params)
    if len(pts) != 2:
        raise ValueError("pair-kind target takes two points separated by ';'")
    return vc.pair_hypothesis(pts[0], pts[1], params)


def _cmd_pac_sweep(config, params, e_set):
    kind = config.options.get("kind", "pair")
    epsilon = float(config.options.get("epsilon", 0.15))
    delta = float(config.options.get("delta", 0.1))
    trials = int(config.options.get("trials", 500))
    m_grid = _parse_int_list(config.options.get("m_grid"), list(range(0, 11)))
    target = _parse_target(config.options.get("target"), e_set, params, kind)
    task = pac.make_task(params, e_set, target, seed=config.seed,
                         workers=config.workers)
    sweep = pac.sample_complexity_sweep(task, epsilon, delta, m_grid, trials,
                                        config.workers)
    ceiling = pac.loss_ceiling(task)
    results = {
        "kind": kind,
        "target": [_point_list(p) for p in target.points],
        "epsilon": epsilon,
        "delta": delta,
        "trials": trials,
        "curve": [{"m": p.m, "successes": p.successes,
                   "rate": p.success_rate, "max_loss": p.max_loss}
                  for p in sweep.points],
        "m_hat": sweep.m_hat,
        "exceeded_grid": sweep.exceeded_grid,
        "max_loss": sweep.max_loss,
        "loss_ceiling": ceiling,
    }
    checks = [CheckResult(
        "pac-loss-ceiling",
        STATUS_PASS if sweep.max_loss <= ceiling else STATUS_FAIL,
        f"max observed loss {sweep.max_loss} vs ceiling {ceiling}")]
    if sweep.m_hat is not None:
        checks.append(CheckResult(
            "pac-sample-complexity", STATUS_PASS,
            f"success rate reached {1 - delta:.3f} at m = {sweep.m_hat}"))
    else:
        checks.append(CheckResult(
            "pac-sample-complexity", STATUS_INFO,
            f"success rate below {1 - delta:.3f} everywhere; "
            f"empirical m exceeds max(grid) = {max(m_grid)}"))
    return results, checks


def _cmd_verify(config, params, e_set):
    results: dict = {}
    checks: list[CheckResult] = []
    r, c = _cmd_sphere_size(config, params, e_set)
    results["sphere_sizes"] = r["sizes"]
    checks.extend(c)
    r, c = _cmd_gamma(config, params, e_set)
    results["gamma"] = r["gamma"]
    checks.extend(c)
    if params.space_size <= 700:
        r, c = _cmd_prisms(config, params, e_set)
        results["prisms"] = {"count": r["count"], "fraction": r["fraction"]}
        checks.extend(c)
        sample = geometry.pole_bound_sample(params, config.seed,
                                            int(config.options.get("pole_samples", 50)))
        results["pole_sample"] = sample
        checks.append(CheckResult(
            "pole-cardinality-sample", STATUS_INFO,
            f"{sample['violations']}/{sample['checked']} sampled affinely "
            f"independent tuples exceed 2 q^(d-k); reported, not asserted"))
    if params.space_size <= 200 and e_set.size >= 2:
        res = vc.vc_dimension(e_set, params, "pair", config.workers)
        results["vc_pair"] = res.value
        checks.append(CheckResult(
            "vc-dimension", STATUS_INFO,
            f"pair class VC dimension {res.value} (exact={res.exact})"))
    return results, checks


_HANDLERS = {
    "sphere-size": _cmd_sphere_size,
    "gamma": _cmd_gamma,
    "prisms": _cmd_prisms,
    "bad-sets": _cmd_bad_sets,
    "vc-dim": _cmd_vc_dim,
    "witness": _cmd_witness,
    "pac-sweep": _cmd_pac_sweep,
    "verify": _cmd_verify,
}

COMMANDS = tuple(sorted(_HANDLERS))
