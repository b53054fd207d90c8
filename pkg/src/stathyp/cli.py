"""Config-driven experiment runner.

Experiments are described by INI-style config files with a ``[space]``
section (model geometry), an ``[experiment]`` section (kind plus numeric
parameters), and for the convex-body experiments a ``[body]`` section.  Each
run writes a CSV data file with a fixed column schema and a human-readable
summary with per-invariant pass/fail lines; both writes are atomic
(write-then-rename).  Identical config and seed produce identical output
bytes regardless of ``--workers``.

Exit codes: 0 success, 2 config/parameter error, 3 invariant failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import coarse, convex, stats
from .errors import StathypError
from .rng import substream
from .spaces import SegmentRegion, build_net, make_space, thin_area_fraction

SEED_ENV = "STATHYP_SEED"

CSV_COLUMNS = ("experiment", "space", "r", "k", "n", "seed", "mean",
               "std_error", "extra1_name", "extra1_value", "extra2_name",
               "extra2_value", "pass")


class ConfigError(StathypError):
    """Bad config file or parameter set."""


# ---------------------------------------------------------------------------
# Experiment catalog
# ---------------------------------------------------------------------------

_SPACE_DEFAULTS = {"kind": "euclidean", "dim": 2, "p": 2.0, "q": 3}
_BODY_DEFAULTS = {"kind": "lp", "dim": 2, "p": 2.0, "method": "exact"}

CATALOG = {
    "estimate-e": {
        "claim": "average normalized pair distance over spheres/annuli/balls: "
                 "4/pi on the round plane, approaching 2 on hyperbolic models",
        "parameters": {"r": 1.0, "k": 0.0, "n": 100000, "seed": 0},
    },
    "thick-stat": {
        "claim": "time fraction a geodesic ray spends in the thick part; "
                 "long rays match the thick-region area fraction",
        "parameters": {"r": 100.0, "n": 50, "eps": 0.5, "dt": 0.1, "seed": 0},
    },
    "p1": {
        "claim": "typical rays keep their running thickness fraction above "
                 "theta beyond time sigma*r",
        "parameters": {"r": 50.0, "k": 5.0, "n": 1000, "eps": 0.1,
                       "theta": 0.5, "sigma": 0.2, "dt": 0.1, "seed": 0},
    },
    "separation": {
        "claim": "probability that two random rays are still M0-close at time "
                 "t = sigma*r; decays exponentially on hyperbolic models, "
                 "polynomially on flat ones",
        "parameters": {"r": 20.0, "sigma": 0.5, "M0": 2.0, "n": 100000, "seed": 0},
    },
    "thin-triangle": {
        "claim": "the middle of one side of a long random triangle comes "
                 "within C of the other two sides when the space is "
                 "hyperbolic-like",
        "parameters": {"r": 20.0, "n": 100, "C": 3.0, "ds": 0.05, "seed": 0},
    },
    "mahler": {
        "claim": "product of the volumes of a symmetric convex body and its "
                 "polar lies between the cube-lower and ball-upper bounds",
        "parameters": {"n": 200000, "seed": 0},
    },
    "densities": {
        "claim": "ratio of the inverse-volume and polar-volume densities of "
                 "a norm lies in [1, n^(n/2)]",
        "parameters": {"n": 200000, "seed": 0},
    },
    "coarse-check": {
        "claim": "horoball distance and its log-max proxy are 6-bilipschitz "
                 "above the threshold floor, thresholded sums chain "
                 "accordingly, and the max/sum log identity has factor 3",
        "parameters": {"n": 100000, "eps": 4.5399929762484854e-05,  # exp(-10)
                       "M0": 400.0, "seed": 0},
    },
    "discretize": {
        "claim": "snapping marks spaced tau-2c to a c-separated, 2c-dense net "
                 "yields paths with steps at most tau and marks within 2c",
        "parameters": {"r": 10.0, "tau": 3.0, "c": 0.5, "n": 200, "seed": 0},
    },
}


def list_experiments() -> dict:
    """Machine-readable catalog of experiment kinds, parameters, and claims."""
    out = {}
    for kind, entry in CATALOG.items():
        out[kind] = {
            "claim": entry["claim"],
            "parameters": dict(entry["parameters"]),
            "space_defaults": dict(_SPACE_DEFAULTS),
        }
        if kind in ("mahler", "densities"):
            out[kind]["body_defaults"] = dict(_BODY_DEFAULTS)
    return out


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def _new_parser() -> configparser.ConfigParser:
    cp = configparser.ConfigParser()
    cp.optionxform = str  # keep key case: C (threshold) vs c (net separation)
    return cp


def parse_config(text: str) -> dict:
    """Parse INI text into {section: {key: string}} with validation."""
    cp = _new_parser()
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    cfg = {s: dict(cp.items(s)) for s in cp.sections()}
    if "experiment" not in cfg or "kind" not in cfg["experiment"]:
        raise ConfigError("config needs an [experiment] section with a kind")
    kind = cfg["experiment"]["kind"]
    if kind not in CATALOG:
        raise ConfigError(f"unknown experiment kind {kind!r}; see `stathyp list`")
    return cfg


def serialize_config(cfg: dict) -> str:
    cp = _new_parser()
    for section, items in cfg.items():
        cp[section] = {k: str(v) for k, v in items.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def _params(cfg: dict, kind: str, seed_override: int | None) -> dict:
    out = dict(CATALOG[kind]["parameters"])
    for key, raw in cfg.get("experiment", {}).items():
        if key == "kind":
            continue
        if key not in out:
            raise ConfigError(f"experiment {kind!r} does not take parameter {key!r}")
        out[key] = type(out[key])(float(raw)) if isinstance(out[key], (int, float)) else raw
    if seed_override is not None:
        out["seed"] = int(seed_override)
    return out


def _space(cfg: dict):
    sec = {**{k: str(v) for k, v in _SPACE_DEFAULTS.items()}, **cfg.get("space", {})}
    kind = sec["kind"]
    h = float(sec["h"]) if sec.get("h") not in (None, "") else None
    components = None
    if kind in ("sup-product",):
        comp_text = sec.get("components", "")
        if not comp_text:
            raise ConfigError("sup-product spaces need a components entry")
        components = [_component(c.strip()) for c in comp_text.split(";") if c.strip()]
    try:
        return make_space(kind, dim=int(float(sec["dim"])), p=float(sec["p"]),
                          q=int(float(sec["q"])), h=h, components=components)
    except StathypError as exc:
        raise ConfigError(str(exc)) from exc


def _component(text: str):
    tokens = text.split()
    kind = tokens[0]
    kv = dict(t.split("=", 1) for t in tokens[1:])
    return make_space(kind, dim=int(float(kv.get("dim", 1))),
                      p=float(kv.get("p", 2.0)), q=int(float(kv.get("q", 3))),
                      h=float(kv["h"]) if "h" in kv else None)


def _body(cfg: dict) -> convex.ConvexBody:
    sec = {**{k: str(v) for k, v in _BODY_DEFAULTS.items()}, **cfg.get("body", {})}
    kind = sec["kind"]
    if kind == "lp":
        p = math.inf if sec["p"] in ("inf", "oo") else float(sec["p"])
        return convex.LpBall(int(float(sec["dim"])), p)
    if kind == "ellipsoid":
        axes = [float(a) for a in sec["axes"].replace(",", " ").split()]
        return convex.Ellipsoid(axes)
    if kind == "polytope":
        rows = [r.strip() for r in sec["vertices"].split(";") if r.strip()]
        verts = [[float(v) for v in row.replace(",", " ").split()] for row in rows]
        return convex.Polytope(np.asarray(verts))
    raise ConfigError(f"unknown body kind {kind!r}")


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

@dataclass
class Report:
    rows: list[tuple] = field(default_factory=list)
    lines: list[str] = field(default_factory=list)
    ok: bool = True

    def check(self, label: str, passed: bool, detail: str = "") -> bool:
        tag = "PASS" if passed else "FAIL"
        self.lines.append(f"{tag}: {label}" + (f" ({detail})" if detail else ""))
        self.ok = self.ok and passed
        return passed


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _row(report: Report, experiment: str, space: str, r, k, n, seed, mean,
         std_error, e1=("", ""), e2=("", ""), passed=True):
    report.rows.append((experiment, space, _fmt(float(r)), _fmt(float(k)),
                        str(int(n)), str(int(seed)), _fmt(float(mean)),
                        _fmt(float(std_error)), e1[0], _fmt(e1[1]) if e1[0] else "",
                        e2[0], _fmt(e2[1]) if e2[0] else "",
                        "1" if passed else "0"))


def _run_estimate_e(cfg, pr):
    space = _space(cfg)
    res = stats.estimate_spread(space, space.basepoint(), pr["r"], pr["k"],
                                int(pr["n"]), int(pr["seed"]))
    rep = Report()
    form = "sphere" if pr["k"] == 0 else ("ball" if pr["k"] == pr["r"] else "annulus")
    ok = rep.check("normalized mean within [0, 2]", 0.0 <= res.mean <= 2.0,
                   f"mean={res.mean:.6f} se={res.std_error:.2e}")
    _row(rep, "estimate-e", space.describe(), pr["r"], pr["k"], pr["n"],
         pr["seed"], res.mean, res.std_error, ("form", form),
         ("digest", res.config_digest), ok)
    rep.lines.insert(0, f"estimate-e: mean={res.mean!r} std_error={res.std_error!r} "
                        f"digest={res.config_digest}")
    return rep


def _run_thick_stat(cfg, pr):
    space = _space(cfg)
    n, seed = int(pr["n"]), int(pr["seed"])
    fracs = stats.ray_thick_fraction_many(space, space.basepoint(), pr["r"],
                                          pr["eps"], pr["dt"], n, seed)
    mean = float(np.mean(fracs))
    se = float(np.std(fracs, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    rep = Report()
    ok = rep.check("thick fractions within [0, 1]",
                   bool(np.all((fracs >= 0) & (fracs <= 1 + 1e-12))),
                   f"mean={mean:.6f}")
    extra = ("", "")
    if space.has_thin_part:
        extra = ("thick_area_fraction", 1.0 - thin_area_fraction(pr["eps"]))
    _row(rep, "thick-stat", space.describe(), pr["r"], 0.0, n, seed, mean, se,
         extra, ("eps", pr["eps"]), ok)
    rep.lines.insert(0, f"thick-stat: mean={mean!r} std_error={se!r}")
    return rep


def _run_p1(cfg, pr):
    space = _space(cfg)
    frac = stats.p1_fraction(space, space.basepoint(), pr["r"], pr["k"],
                             pr["eps"], pr["theta"], pr["sigma"], int(pr["n"]),
                             pr["dt"], int(pr["seed"]))
    se = math.sqrt(max(frac * (1 - frac), 1.0 / pr["n"]) / pr["n"])
    rep = Report()
    ok = rep.check("fraction within [0, 1]", 0.0 <= frac <= 1.0, f"fraction={frac:.4f}")
    _row(rep, "p1", space.describe(), pr["r"], pr["k"], pr["n"], pr["seed"],
         frac, se, ("theta", pr["theta"]), ("sigma", pr["sigma"]), ok)
    rep.lines.insert(0, f"p1: fraction={frac!r}")
    return rep


def _run_separation(cfg, pr):
    space = _space(cfg)
    t = pr["sigma"] * pr["r"]
    frac = stats.separation_fraction(space, space.basepoint(), pr["r"], t,
                                     pr["M0"], int(pr["n"]), int(pr["seed"]))
    se = math.sqrt(max(frac * (1 - frac), 1.0 / pr["n"]) / pr["n"])
    rep = Report()
    ok = rep.check("fraction within [0, 1]", 0.0 <= frac <= 1.0,
                   f"fraction={frac:.6f} at t={t:.3f}")
    _row(rep, "separation", space.describe(), pr["r"], 0.0, pr["n"], pr["seed"],
         frac, se, ("t", t), ("M0", pr["M0"]), ok)
    rep.lines.insert(0, f"separation: fraction={frac!r} at t={t!r}")
    return rep


def _run_thin_triangle(cfg, pr):
    space = _space(cfg)
    n, seed, r = int(pr["n"]), int(pr["seed"]), pr["r"]
    hits = 0
    worst = math.inf
    x = space.basepoint()
    for i in range(n):
        rng = substream(seed, 0x7A1, i)
        for _ in range(64):
            bundle = space.rays_chunk(x, 2, rng, horizon=1.5 * r)
            radii = r + 0.25 * r * rng.uniform(size=2)
            pts = bundle.points_at(radii)
            y = space.batch_get(pts, 0)
            z = space.batch_get(pts, 1)
            if space.distance(y, z) >= r:
                break
        else:
            raise ConfigError("could not sample a triangle with all sides >= r")
        d_xy = space.distance(x, y)
        hit, mind = stats.thin_triangle_probe(space, x, y, z,
                                              (d_xy / 3.0, 2.0 * d_xy / 3.0),
                                              pr["C"], pr["ds"])
        hits += int(hit)
        worst = min(worst, mind)
    rep = Report()
    rate = hits / n
    ok = rep.check("reported minima nonnegative", worst >= 0.0,
                   f"hit_rate={rate:.3f} min={worst:.4f}")
    _row(rep, "thin-triangle", space.describe(), r, 0.0, n, seed, rate, 0.0,
         ("C", pr["C"]), ("min_distance", worst), ok)
    rep.lines.insert(0, f"thin-triangle: hit_rate={rate!r} min_distance={worst!r}")
    return rep


def _run_mahler(cfg, pr):
    body = _body(cfg)
    method = cfg.get("body", {}).get("method", _BODY_DEFAULTS["method"])
    report = convex.mahler(body, method, int(pr["n"]), int(pr["seed"]))
    rep = Report()
    ok = rep.check("Mahler volume within bounds", report.ok,
                   f"{report.lower_bound:.6f} <= {report.value:.6f} <= {report.upper_bound:.6f}")
    _row(rep, "mahler", body.describe(), 0.0, 0.0, pr["n"], pr["seed"],
         report.value, report.std_error, ("lower", report.lower_bound),
         ("upper", report.upper_bound), ok)
    rep.lines.insert(0, f"mahler: value={report.value!r} std_error={report.std_error!r}")
    return rep


def _run_densities(cfg, pr):
    body = _body(cfg)
    method = cfg.get("body", {}).get("method", _BODY_DEFAULTS["method"])
    f = convex.busemann_density(body, method, int(pr["n"]), int(pr["seed"]))
    g = convex.holmes_thompson_density(body, method, int(pr["n"]), int(pr["seed"]) + 1)
    ratio, se = convex.density_ratio(body, method, int(pr["n"]), int(pr["seed"]))
    cap = body.dim ** (body.dim / 2.0)
    rep = Report()
    ok = rep.check("density ratio within [1, n^(n/2)]",
                   1.0 - 3.0 * se - 1e-9 <= ratio <= cap + 3.0 * se + 1e-9,
                   f"ratio={ratio:.6f}")
    _row(rep, "densities", body.describe(), 0.0, 0.0, pr["n"], pr["seed"],
         ratio, se, ("busemann", f.value), ("holmes_thompson", g.value), ok)
    rep.lines.insert(0, f"densities: ratio={ratio!r} busemann={f.value!r} "
                        f"holmes_thompson={g.value!r}")
    return rep


def _run_coarse_check(cfg, pr):
    n, seed, eps0, m0 = int(pr["n"]), int(pr["seed"]), pr["eps"], pr["M0"]
    floor = coarse.threshold_floor(eps0)
    pairs = coarse.random_pairs(n, seed, eps0)
    sandwich_fails = sum(
        not coarse.proxy_sandwich_holds(p) for p in pairs
        if max(coarse.horoball_distance(p), coarse.log_max_proxy(p)) >= floor)
    ineq_fails = 0
    rng = substream(seed, 0xB1)
    for _ in range(n):
        d_c = math.exp(rng.uniform(-5.0, 300.0))
        b = coarse.twist_only_distance(d_c)
        if b >= 3.0 or d_c >= 3.0:
            lp = coarse.log_plus(d_c)
            ineq_fails += not (lp <= b + 1e-12 and b <= 4.0 * lp + 1e-12)
    chain_fails = sum(
        not coarse.chain_inequality_holds(coarse.random_pairs(40, seed + i, eps0), m0)
        for i in range(max(n // 1000, 1)))
    ident_fails = 0
    rng = substream(seed, 0xB2)
    for _ in range(n):
        f, g, h = (math.exp(rng.uniform(-7.0, 20.0)) for _ in range(3))
        ident_fails += not coarse.max_log_identity(f, g, h, math.e ** 3)[2]
    fails = sandwich_fails + ineq_fails + chain_fails + ident_fails
    rep = Report()
    rep.check("proxy sandwich (factor 6) above the floor", sandwich_fails == 0,
              f"{sandwich_fails} failures")
    rep.check("twist-distance log bounds (factor 4)", ineq_fails == 0,
              f"{ineq_fails} failures")
    rep.check("thresholded-sum chain", chain_fails == 0, f"{chain_fails} failures")
    rep.check("max/sum log identity (factor 3)", ident_fails == 0,
              f"{ident_fails} failures")
    if m0 < floor:
        rep.lines.append(f"NOTE: M0={m0} is below the documented floor {floor:.1f}; "
                         "sandwich guarantees do not apply")
    _row(rep, "coarse-check", f"profiles(eps0={eps0!r})", 0.0, 0.0, n, seed,
         float(fails), 0.0, ("M0", m0), ("floor", floor), fails == 0)
    rep.lines.insert(0, f"coarse-check: failures={fails}")
    return rep


def _run_discretize(cfg, pr):
    space = _space(cfg)
    n, seed = int(pr["n"]), int(pr["seed"])
    tau, c = pr["tau"], pr["c"]
    if tau <= 4 * c:
        raise ConfigError(f"need tau > 4c, got tau={tau}, c={c}")
    x = space.basepoint()
    violations = 0
    marks_checked = 0
    for i in range(n):
        rng = substream(seed, 0xD15, i)
        bundle = space.rays_chunk(x, 1, rng, horizon=pr["r"])
        length = pr["r"] * (0.5 + 0.5 * rng.uniform())
        y = space.batch_get(bundle.points_at(length), 0)
        net = build_net(space, SegmentRegion(x, y), c)
        try:
            path = stats.discretize_geodesic(space, net, tau, (x, y))
            marks_checked += space.batch_size(path.points)
        except StathypError:
            violations += 1
    rep = Report()
    ok = rep.check("step-tau and 2c-proximity invariants", violations == 0,
                   f"{violations} violations over {n} runs")
    _row(rep, "discretize", space.describe(), pr["r"], 0.0, n, seed,
         float(violations), 0.0, ("tau", tau), ("c", c), ok)
    rep.lines.insert(0, f"discretize: violations={violations} "
                        f"path_points={marks_checked}")
    return rep


_RUNNERS = {
    "estimate-e": _run_estimate_e,
    "thick-stat": _run_thick_stat,
    "p1": _run_p1,
    "separation": _run_separation,
    "thin-triangle": _run_thin_triangle,
    "mahler": _run_mahler,
    "densities": _run_densities,
    "coarse-check": _run_coarse_check,
    "discretize": _run_discretize,
}


def run_config(cfg: dict, seed_override: int | None = None) -> Report:
    kind = cfg["experiment"]["kind"]
    pr = _params(cfg, kind, seed_override)
    try:
        return _RUNNERS[kind](cfg, pr)
    except ConfigError:
        raise
    except StathypError as exc:
        raise ConfigError(f"parameter error in {kind}: {exc}") from exc


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".stathyp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(report.rows)
    return buf.getvalue()


def render_summary(cfg: dict, report: Report) -> str:
    head = [f"config digest: {stats.config_digest(config=serialize_config(cfg))}"]
    return "\n".join(head + report.lines) + "\n"


def _run_one(config_path: str, out_dir: str, seed_override, fmt: str) -> tuple[str, Report]:
    with open(config_path) as fh:
        cfg = parse_config(fh.read())
    report = run_config(cfg, seed_override)
    stem = os.path.splitext(os.path.basename(config_path))[0]
    _atomic_write(os.path.join(out_dir, stem + ".csv"), render_csv(report))
    _atomic_write(os.path.join(out_dir, stem + ".summary.txt"),
                  render_summary(cfg, report))
    echo = render_csv(report) if fmt == "csv" else render_summary(cfg, report)
    return echo, report


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="stathyp",
        description="run statistical-hyperbolicity experiments from config files")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=".")
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--format", choices=("csv", "summary"), default="summary")

    sub.add_parser("list", help="print the machine-readable experiment catalog")

    p_sweep = sub.add_parser("sweep", help="run every *.ini config in a directory")
    p_sweep.add_argument("--config", required=True, help="directory of configs")
    p_sweep.add_argument("--out", default=".")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--format", choices=("csv", "summary"), default="summary")

    args = parser.parse_args(argv)
    seed_override = args.seed if getattr(args, "seed", None) is not None else None
    if seed_override is None and os.environ.get(SEED_ENV):
        try:
            seed_override = int(os.environ[SEED_ENV])
        except ValueError:
            print(f"error: {SEED_ENV} must be an integer", file=sys.stderr)
            return 2

    if args.command == "list":
        print(json.dumps(list_experiments(), indent=2, sort_keys=True))
        return 0

    try:
        if args.command == "run":
            echo, report = _run_one(args.config, args.out, seed_override, args.format)
            print(echo, end="")
            return 0 if report.ok else 3

        # sweep
        paths = sorted(
            os.path.join(args.config, f) for f in os.listdir(args.config)
            if f.endswith(".ini"))
        if not paths:
            print(f"error: no .ini configs in {args.config}", file=sys.stderr)
            return 2
        with ThreadPoolExecutor(max_workers=max(args.workers, 1)) as pool:
            futures = [pool.submit(_run_one, p, args.out, seed_override, args.format)
                       for p in paths]
        any_config_error = False
        all_ok = True
        for path, future in zip(paths, futures):
            print(f"== {os.path.basename(path)}")
            try:
                echo, report = future.result()
            except (ConfigError, OSError) as exc:
                print(f"error: {exc}")
                any_config_error = True
                continue
            print(echo, end="")
            all_ok = all_ok and report.ok
        if any_config_error:
            return 2
        return 0 if all_ok else 3
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
