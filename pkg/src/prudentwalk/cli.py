"""Command line front end: simulate, verify, plot, bench.

Determinism contract: a run is a pure function of its RunConfig; replica
r draws from the stream keyed by mix(seed, replica), results are merged
in replica order, and output files carry no timestamps, so bytes are
identical across thread counts.

Exit codes: 0 success (verify: all gates pass), 1 verification failure,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import _kernels, acceptance, effective, scaling, serialize, stats, svg, walk2d, walk3d
from .lattice import LatticePath
from .rng import mix, replica_rng

__all__ = ["RunConfig", "main", "cmd_simulate", "cmd_verify", "cmd_plot", "cmd_bench"]

VARIANTS = ("prudent2d", "corner", "walk3d", "effective", "zprocess")


@dataclass
class RunConfig:
    command: str = "simulate"
    variant: str = "prudent2d"
    n: int = 10_000
    replicas: int = 1
    seed: int = 0
    out: str = "out"
    checkpoints: tuple = ()
    threads: int = 1
    quick: bool = False
    svg: bool = False

    def to_file_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "checkpoints":
                v = ",".join(str(int(c)) for c in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_file_text(cls, text: str) -> "RunConfig":
        kv = {}
        for i, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"config line {i}: expected 'key = value'")
            k, v = (part.strip() for part in line.split("=", 1))
            kv[k] = v
        return cls(**_coerce_config(kv))


def _coerce_config(kv: dict) -> dict:
    out = {}
    for f in fields(RunConfig):
        if f.name not in kv:
            continue
        raw = kv[f.name]
        if f.name == "checkpoints":
            out[f.name] = tuple(int(v) for v in str(raw).split(",") if v != "")
        elif f.type == "int":
            out[f.name] = int(raw)
        elif f.type == "bool":
            out[f.name] = str(raw).lower() in ("1", "true", "yes")
        else:
            out[f.name] = str(raw)
    return out


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="prudentwalk",
        description="Prudent-walk simulation and limit-law verification",
    )
    sub = p.add_subparsers(dest="command")
    for name in ("simulate", "verify", "plot", "bench"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="flat key=value config file; flags win")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--replicas", type=int)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--out")
        sp.add_argument("--quick", action="store_true", default=None)
        sp.add_argument("--svg", action="store_true", default=None)
        if name == "simulate":
            sp.add_argument("--variant", choices=VARIANTS)
            sp.add_argument("--n", type=int)
            sp.add_argument("--checkpoints")
            sp.add_argument(
                "--random-first-step",
                action="store_true",
                help="do not force the opening step east (2D variants)",
            )
        if name == "verify":
            sp.add_argument("--criterion", type=int, help="run a single criterion")
        if name == "plot":
            sp.add_argument("--kind", choices=("trajectory", "angle"), required=True)
            sp.add_argument("--input", required=True)
    return p


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        cfg = RunConfig.from_file_text(Path(args.config).read_text())
    cfg.command = args.command
    for name in ("variant", "n", "replicas", "seed", "threads", "out", "quick", "svg"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    cp = getattr(args, "checkpoints", None)
    if cp:
        cfg.checkpoints = tuple(int(v) for v in cp.split(","))
    return cfg


def _map_replicas(cfg: RunConfig, fn):
    """Apply fn(replica_index) across replicas, results in replica order."""
    if cfg.threads <= 1:
        return [fn(r) for r in range(cfg.replicas)]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(fn, range(cfg.replicas)))


def _simulate_2d(cfg: RunConfig, variant: str, first_step) -> tuple[list, dict]:
    import threading

    local = threading.local()

    def one(r: int):
        eng = getattr(local, "eng", None)
        if eng is None or eng.n_max < cfg.n:
            eng = walk2d.Walk2DEngine(cfg.n)
            local.eng = eng
        path, summary = eng.run_path(
            replica_rng(cfg.seed, r), cfg.n, variant=variant, first_step=first_step
        )
        lp = LatticePath(path.astype(np.int64), variant=variant, seed=mix(cfg.seed, r) & 0xFFFFFFFF)
        rec = serialize.path2d_to_record(lp)
        n_exc = len(walk2d.excursion_decompose(lp)) if first_step == "east" else 0
        stats_row = {
            "speed_l1": (abs(int(summary[_kernels.S_X])) + abs(int(summary[_kernels.S_Y]))) / cfg.n,
            "quadrant": walk2d.summary_quadrant(summary),
            "excursions": n_exc,
            "min_allowed": int(summary[_kernels.S_MIN_ALLOWED]),
        }
        return rec, stats_row

    results = _map_replicas(cfg, one)
    records = [r for r, _ in results]
    rows = [s for _, s in results]
    summary = {
        "variant": variant,
        "n": cfg.n,
        "replicas": cfg.replicas,
        "seed": cfg.seed,
        "mean_speed_l1": sum(r["speed_l1"] for r in rows) / len(rows),
        "quadrant_counts": [sum(1 for r in rows if r["quadrant"] == q) for q in (1, 2, 3, 4)],
        "mean_excursions": sum(r["excursions"] for r in rows) / len(rows),
        "min_allowed": min(r["min_allowed"] for r in rows),
    }
    return records, summary


def _simulate_3d(cfg: RunConfig) -> tuple[list, dict]:
    records = []
    norms = []
    rate = 0.0
    for r in range(cfg.replicas):
        t0 = time.time()
        path, _, info = walk3d.simulate_3d(cfg.n, seed=replica_rng(cfg.seed, r))
        rate = cfg.n / max(time.time() - t0, 1e-9)
        lp3 = walk3d.LatticePath3D(path.sites, seed=mix(cfg.seed, r) & 0xFFFFFFFF)
        records.append(serialize.path3d_to_record(lp3))
        norms.append(math.sqrt(sum(v * v for v in info["endpoint"])))
    print(f"walk3d: {rate / 1e6:.2f} M steps/s (last replica)", file=sys.stderr)
    summary = {
        "variant": "walk3d",
        "n": cfg.n,
        "replicas": cfg.replicas,
        "seed": cfg.seed,
        "mean_endpoint_norm": sum(norms) / len(norms),
        "norm_over_sqrt_n": sum(norms) / len(norms) / math.sqrt(cfg.n),
    }
    return records, summary


def _simulate_effective(cfg: RunConfig) -> tuple[list, dict]:
    records = []
    ratios = []
    for r in range(cfg.replicas):
        rng = replica_rng(cfg.seed, r)
        path = effective.simulate_effective_walk(cfg.n, rng)
        hat = effective.hat_path(path)
        t_n = effective.microscopic_time(hat, cfg.n)
        ratios.append(t_n / cfg.n)
        records.append(serialize.effective_to_record(path.values, seed=mix(cfg.seed, r) & 0xFFFFFFFF))
    summary = {
        "variant": "effective",
        "n": cfg.n,
        "replicas": cfg.replicas,
        "seed": cfg.seed,
        "mean_time_change_ratio": sum(ratios) / len(ratios),
        "target_ratio": 7.0 / 3.0,
    }
    return records, summary


def _simulate_zprocess(cfg: RunConfig, out_dir: Path) -> dict:
    dt = 1.0 / cfg.n
    u_grid = np.linspace(0.05, 1.0, 20)
    samples = []
    worst = 0.0
    for r in range(cfg.replicas):
        rng = replica_rng(cfg.seed, r)
        w = scaling.sample_brownian(dt, 3.0 / 7.0 + dt, rng)
        s1 = 1 if rng.random() < 0.5 else -1
        s2 = 1 if rng.random() < 0.5 else -1
        z = scaling.z_process(w, s1, s2, u_grid)
        worst = max(worst, z.ray_deviation())
        samples.append((z, mix(cfg.seed, r) & 0xFFFFFFFF))
    with open(out_dir / "zprocess.csv", "w") as fh:
        serialize.z_samples_to_csv(samples, fh)
    return {
        "variant": "zprocess",
        "n": cfg.n,
        "replicas": cfg.replicas,
        "seed": cfg.seed,
        "dt": dt,
        "max_ray_deviation": worst,
        "ray_bound_one_step": dt,
    }


def cmd_simulate(cfg: RunConfig, first_step="east") -> int:
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if cfg.variant in ("prudent2d", "corner"):
        variant = "prudent" if cfg.variant == "prudent2d" else "corner"
        records, summary = _simulate_2d(cfg, variant, first_step)
    elif cfg.variant == "walk3d":
        records, summary = _simulate_3d(cfg)
    elif cfg.variant == "effective":
        records, summary = _simulate_effective(cfg)
    elif cfg.variant == "zprocess":
        summary = _simulate_zprocess(cfg, out_dir)
        records = None
    else:
        print(f"unknown variant {cfg.variant!r}", file=sys.stderr)
        return 2
    if records is not None:
        with open(out_dir / "trajectories.jsonl", "w") as fh:
            serialize.write_jsonl(records, fh)
    with open(out_dir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_verify(cfg: RunConfig, criterion: int | None = None) -> int:
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if criterion is not None:
        reports = acceptance.run_criterion(criterion, acceptance.Scale(quick=cfg.quick))
        ok = all(r.passed for r in reports if not r.informational)
    else:
        reports, ok = acceptance.run_all(quick=cfg.quick, echo=print)
    print(stats.render_report_table(reports))
    with open(out_dir / "verify.json", "w") as fh:
        fh.write(stats.reports_to_json(reports))
        fh.write("\n")
    print(f"suite: {'PASS' if ok else 'FAIL'} ({acceptance.Scale(quick=cfg.quick).name} scale)")
    return 0 if ok else 1


def _plot_trajectory(cfg: RunConfig, input_path: Path, out_dir: Path) -> int:
    with open(input_path) as fh:
        recs = serialize.read_jsonl(fh)
    if not recs:
        print("no trajectories in input", file=sys.stderr)
        return 2
    rec = recs[0]
    if rec.get("variant") == "walk3d":
        sites3 = serialize.record_to_path3d(rec).sites
        pts = sites3[:, :2]  # xy projection of the 3D trajectory
    else:
        pts = serialize.record_to_path2d(rec).sites
    with open(out_dir / "trajectory.csv", "w") as fh:
        fh.write("t,x,y\n")
        for t, (x, y) in enumerate(pts):
            fh.write(f"{t},{int(x)},{int(y)}\n")
    if cfg.svg:
        (out_dir / "trajectory.svg").write_text(svg.polyline_svg(pts))
    print(f"wrote {out_dir / 'trajectory.csv'}" + (" and trajectory.svg" if cfg.svg else ""))
    return 0


def _plot_angle(cfg: RunConfig, input_path: Path, out_dir: Path) -> int:
    with open(input_path) as fh:
        recs = serialize.read_jsonl(fh)
    angles = []
    for rec in recs:
        if rec.get("variant") == "walk3d":
            continue
        path = serialize.record_to_path2d(rec)
        q = walk2d.settled_quadrant(path)
        sx = 1 if q in (1, 4) else -1
        sy = 1 if q in (1, 2) else -1
        x, y = path.endpoint()
        x, y = sx * x, sy * y
        if x > 0 and y > 0:
            angles.append(math.atan2(y, x))
    if not angles:
        print("no usable 2D trajectories in input", file=sys.stderr)
        return 2
    xs = np.sort(angles)
    n = xs.shape[0]
    emp = np.arange(1, n + 1) / n
    theory = np.array([scaling.angle_cdf(v) for v in xs])
    with open(out_dir / "angle_cdf.csv", "w") as fh:
        fh.write("angle,empirical,theoretical\n")
        for a, e, th in zip(xs, emp, theory):
            fh.write(f"{a:.10g},{e:.10g},{th:.10g}\n")
    if cfg.svg:
        (out_dir / "angle_cdf.svg").write_text(svg.cdf_overlay_svg(xs, emp, xs, theory))
    print(f"wrote {out_dir / 'angle_cdf.csv'}" + (" and angle_cdf.svg" if cfg.svg else ""))
    return 0


def cmd_plot(cfg: RunConfig, kind: str, input_file: str) -> int:
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    input_path = Path(input_file)
    if not input_path.exists():
        print(f"input not found: {input_path}", file=sys.stderr)
        return 2
    try:
        if kind == "trajectory":
            return _plot_trajectory(cfg, input_path, out_dir)
        return _plot_angle(cfg, input_path, out_dir)
    except serialize.ParseError as e:
        print(f"malformed input: {e}", file=sys.stderr)
        return 2


def cmd_bench(cfg: RunConfig) -> int:
    from numba import int64 as nb_int64
    from numba.typed import Dict as NumbaDict

    sizes = (10_000, 100_000, 1_000_000)
    if cfg.quick:
        sizes = (1_000, 10_000, 100_000)
    rows = []
    eng = walk2d.Walk2DEngine(sizes[-1])
    # warm every kernel once
    eng.run_path(replica_rng(cfg.seed, 0), 1000)
    walk3d.simulate_3d(1000, seed=replica_rng(cfg.seed, 0), record_path=False)
    d = NumbaDict.empty(nb_int64, nb_int64)
    _kernels.walk2d_naive_bench(replica_rng(cfg.seed, 0), 1000, d)
    d3 = NumbaDict.empty(nb_int64, nb_int64)
    _kernels.walk3d_naive_bench(replica_rng(cfg.seed, 0), 1000, d3)
    for n in sizes:
        t0 = time.time()
        eng.run_path(replica_rng(cfg.seed, 1), n, record_path=False)
        fast2d = n / (time.time() - t0)
        t0 = time.time()
        visited = NumbaDict.empty(nb_int64, nb_int64)
        _kernels.walk2d_naive_bench(replica_rng(cfg.seed, 1), n, visited)
        naive2d = n / (time.time() - t0)
        t0 = time.time()
        walk3d.simulate_3d(n, seed=replica_rng(cfg.seed, 1), record_path=False)
        fast3d = n / (time.time() - t0)
        t0 = time.time()
        visited3 = NumbaDict.empty(nb_int64, nb_int64)
        _kernels.walk3d_naive_bench(replica_rng(cfg.seed, 1), n, visited3)
        naive3d = n / (time.time() - t0)
        rows.append((n, fast2d, naive2d, fast2d / naive2d, fast3d, naive3d, fast3d / naive3d))
    print(f"{'n':>9} {'2d idx/s':>12} {'2d naive/s':>12} {'ratio':>8} {'3d idx/s':>12} {'3d naive/s':>12} {'ratio':>8}")
    for n, f2, n2, r2, f3, n3, r3 in rows:
        print(f"{n:>9} {f2:>12.3g} {n2:>12.3g} {r2:>8.1f} {f3:>12.3g} {n3:>12.3g} {r3:>8.1f}")
    slope, _ = stats.loglog_slope([r[0] for r in rows], [r[1] for r in rows])
    print(f"2d indexed throughput log-log slope vs n: {slope:+.3f} (flat is 0)")
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "bench.csv", "w") as fh:
        fh.write("n,fast2d,naive2d,ratio2d,fast3d,naive3d,ratio3d\n")
        for row in rows:
            fh.write(",".join(f"{v:.6g}" for v in row) + "\n")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    if not args.command:
        parser.print_help()
        return 2
    try:
        cfg = _config_from_args(args)
    except (ValueError, OSError, TypeError) as e:
        print(f"bad configuration: {e}", file=sys.stderr)
        return 2
    if args.command == "simulate":
        first = None if getattr(args, "random_first_step", False) else "east"
        return cmd_simulate(cfg, first_step=first)
    if args.command == "verify":
        return cmd_verify(cfg, criterion=getattr(args, "criterion", None))
    if args.command == "plot":
        return cmd_plot(cfg, args.kind, args.input)
    if args.command == "bench":
        return cmd_bench(cfg)
    return 2


if __name__ == "__main__":
    sys.exit(main())
