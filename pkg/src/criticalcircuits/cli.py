"""Command-line entry point.

Four experiment families: `groundstate` (quasi-adiabatic energy sweep),
`evolve` (quench trajectory with interpolation scans), `overlap`
(power-method convergence), `variants` (cost-function comparison on one
quench). Each run writes CSV/JSON/SVG artifacts plus a manifest with the
resolved config, seeds and artifact hashes; identical configs give
bit-identical CSV/JSON.

Exit codes: 0 success, 2 config error, 3 partial results.
"""

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # 3.10
    import tomli as tomllib

from . import ansatz, imps, noise as noise_mod, oracle, svg
from .errors import ConfigError
from .evolve import CostVariant, QuenchConfig, evolve_trajectory, interpolation_scan
from .optimize import SpsaConfig, SweepSchedule, adiabatic_sweep

_FORMATS = ("csv", "json", "svg")

_VARIANT_SET = (
    "PostselectedUUprime",
    "FullOverlapUUprime",
    "RightFpFromU",
    "RightFpFromV",
    "SquaredZeroFp",
    "RatioZeroFp(2,1)",
    "RatioZeroFp(5,4)",
)


# ---------------------------------------------------------------- config ----

def _load_file(path):
    if not os.path.exists(path):
        raise ConfigError(f"no such file: {path}")
    if path.endswith(".json"):
        with open(path) as fh:
            return json.load(fh)
    with open(path, "rb") as fh:
        try:
            return tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc


def _resolve_config(args):
    """Merge precedence: flags > config file > defaults."""
    cfg = {
        "mode": "exact",
        "formats": list(_FORMATS),
        "output_dir": f"runs/{args.command}",
    }
    if args.config:
        cfg.update(_load_file(args.config))
    if args.noise:
        cfg["noise"] = _load_file(args.noise)
    if args.out:
        cfg["output_dir"] = args.out
    env_out = os.environ.get("CRITCIRC_OUT")
    if env_out:
        cfg["output_dir"] = env_out
    if args.mode:
        cfg["mode"] = args.mode
    if args.seed is not None:
        cfg.setdefault("optimizer", {})["seed"] = args.seed
        cfg["seed"] = args.seed
    if args.jobs is not None:
        cfg["jobs"] = args.jobs
    if cfg["mode"] not in ("exact", "sampled"):
        raise ConfigError(f"mode must be exact or sampled, got {cfg['mode']!r}")
    bad = [f for f in cfg["formats"] if f not in _FORMATS]
    if bad:
        raise ConfigError(f"unknown formats {bad}")
    return cfg


def _noise_model(cfg):
    sec = cfg.get("noise")
    if sec is None:
        return None
    kwargs = {
        "global_depol": float(sec.get("global_depol", 0.0)),
        "per_gate_depol": float(sec.get("per_gate_depol", 0.0)),
        "shots": int(sec.get("shots", 100_000)),
        "seed": int(sec.get("seed", 0)),
    }
    eps = sec.get("readout_eps")
    if eps is not None:
        kwargs["confusion"] = noise_mod.symmetric_readout(float(eps))
    return noise_mod.NoiseModel(**kwargs)


def _spsa_config(cfg, default_iters=2000):
    sec = dict(cfg.get("optimizer", {}))
    sec.setdefault("max_iters", default_iters)
    try:
        return SpsaConfig(**sec)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad optimizer section: {exc}") from exc


def _require(cfg, section):
    if section not in cfg:
        raise ConfigError(f"command needs a [{section}] config section")
    return cfg[section]


# ------------------------------------------------------------- artifacts ----

def _fnum(v):
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _write_csv(path, columns, rows):
    lines = ["# schema=1", ",".join(columns)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fnum(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()


class Emitter:
    """Collects artifacts for one run and writes the closing manifest."""

    def __init__(self, out_dir, formats):
        self.out_dir = out_dir
        self.formats = formats
        self.paths = []
        os.makedirs(out_dir, exist_ok=True)

    def csv(self, name, columns, rows):
        if "csv" in self.formats:
            p = os.path.join(self.out_dir, name)
            _write_csv(p, columns, rows)
            self.paths.append(p)

    def json(self, name, obj):
        if "json" in self.formats:
            p = os.path.join(self.out_dir, name)
            _write_json(p, obj)
            self.paths.append(p)

    def svg(self, name, series, **kwargs):
        if "svg" in self.formats:
            p = os.path.join(self.out_dir, name)
            svg.write_chart(p, series, **kwargs)
            self.paths.append(p)

    def manifest(self, command, cfg, seeds):
        p = os.path.join(self.out_dir, "manifest.json")
        _write_json(p, {
            "command": command,
            "config": cfg,
            "seeds": seeds,
            "artifacts": {os.path.basename(q): _sha256(q) for q in self.paths},
        })


# ------------------------------------------------------------- commands ----

def run_groundstate(cfg):
    sec = _require(cfg, "schedule")
    gs = sec.get("g_values")
    if not gs:
        raise ConfigError("schedule.g_values must be a nonempty list")
    schedule = SweepSchedule(
        g_values=tuple(float(g) for g in gs),
        iters_per_stage=int(sec.get("iters_per_stage", 4000)),
        J=float(sec.get("J", 1.0)),
    )
    opt = _spsa_config(cfg)
    noise = _noise_model(cfg)
    sampled = cfg["mode"] == "sampled"
    if sampled and noise is None:
        raise ConfigError("sampled mode needs a noise section or --noise file")
    n_eval_seeds = int(cfg.get("eval_seeds", 11))

    em = Emitter(cfg["output_dir"], cfg["formats"])
    status = 0
    stages = []
    try:
        stages = adiabatic_sweep(schedule, opt)
    except Exception as exc:
        print(f"sweep failed: {exc}", file=sys.stderr)
        status = 3

    columns = ["g", "energy", "exact_energy", "rel_err", "residual"]
    if sampled:
        columns += ["noisy_raw", "noisy_mitigated"]
    rows, recs = [], []
    for st in stages:
        h = ansatz.HamiltonianParams(schedule.J, st.g)
        exact = oracle.exact_energy_density(h)
        rec = {
            "g": st.g, "energy": st.energy, "exact_energy": exact,
            "rel_err": abs(st.energy - exact) / abs(exact),
            "residual": st.residual,
            "theta_U": list(st.theta_U), "theta_V": list(st.theta_V),
        }
        if sampled:
            Um = ansatz.build_unitary(st.theta_U)
            Vm = ansatz.build_unitary(st.theta_V)
            raw, mit = [], []
            for s in range(n_eval_seeds):
                rng = np.random.default_rng(noise.seed + 101 * s)
                raw.append(imps.expect_energy(Um, Vm, h, "sampled", noise, rng))
                mit.append(imps.expect_energy(Um, Vm, h, "sampled", noise, rng, mitigate=True))
            rec["noisy_raw"] = float(np.median(raw))
            rec["noisy_mitigated"] = float(np.median(mit))
        rows.append([rec[c] for c in columns])
        recs.append(rec)

    em.csv("energy_vs_g.csv", columns, rows)
    em.json("energy_vs_g.json", recs)
    if recs:
        series = [
            ("optimized", [r["g"] for r in recs], [r["energy"] for r in recs]),
            ("exact", [r["g"] for r in recs], [r["exact_energy"] for r in recs]),
        ]
        if sampled:
            series.append(("noisy raw", [r["g"] for r in recs], [r["noisy_raw"] for r in recs]))
            series.append(("noisy mitigated", [r["g"] for r in recs],
                           [r["noisy_mitigated"] for r in recs]))
        em.svg("energy_vs_g.svg", series, title="groundstate energy density",
               xlabel="g", ylabel="E per site")
    em.manifest("groundstate", cfg, {"optimizer": opt.seed,
                                     "noise": noise.seed if noise else None})
    return status


def _quench_from(cfg):
    sec = _require(cfg, "quench")
    try:
        return QuenchConfig(
            g_initial=float(sec["g_initial"]),
            g_quench=float(sec["g_quench"]),
            J=float(sec.get("J", 1.0)),
            dt=float(sec.get("dt", 0.1)),
            steps=int(sec.get("steps", 1)),
            variant=CostVariant.parse(sec.get("variant", "PostselectedUUprime")),
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad quench section: {exc}") from exc


def _groundstate_params(cfg, q):
    sec = cfg.get("groundstate", {})
    if "params" in sec:
        p = np.asarray(sec["params"], dtype=float)
        if p.shape != (8,):
            raise ConfigError("groundstate.params must be 8 angles")
        return p
    h0 = ansatz.HamiltonianParams(q.J, q.g_initial)
    p, _ = oracle.dense_variational_optimum(
        h0, n_starts=int(sec.get("n_starts", 20)), seed=int(sec.get("seed", 3))
    )
    return p


_TS_COLUMNS = ["t"] + [f"theta_{i}" for i in range(1, 9)] + ["cost", "rate", "oracle_rate"]


def _timeseries_rows(ts):
    rows = []
    for e in ts.entries:
        rows.append([e.t, *e.params, e.cost_at_opt, e.rate_function, e.oracle_rate])
    return rows


def run_evolve(cfg):
    q = _quench_from(cfg)
    opt = _spsa_config(cfg, default_iters=800)
    noise = _noise_model(cfg)
    mode = cfg["mode"]
    if mode == "sampled" and noise is None:
        raise ConfigError("sampled mode needs a noise section or --noise file")
    p0 = _groundstate_params(cfg, q)

    em = Emitter(cfg["output_dir"], cfg["formats"])
    ts = evolve_trajectory(q, p0, opt, mode=mode, noise=noise)
    em.csv("timeseries.csv", _TS_COLUMNS, _timeseries_rows(ts))
    em.json("timeseries.json", {
        "truncated": ts.truncated,
        "entries": [
            {"t": e.t, "params": list(e.params), "cost": e.cost_at_opt,
             "rate": e.rate_function, "oracle_rate": e.oracle_rate}
            for e in ts.entries
        ],
    })
    if len(ts.entries) > 1:
        tsx = [e.t for e in ts.entries]
        em.svg(
            "rate_function.svg",
            [("circuit", tsx, [e.rate_function for e in ts.entries]),
             ("oracle", tsx, [e.oracle_rate for e in ts.entries])],
            title=f"quench {q.g_initial} -> {q.g_quench}", xlabel="t", ylabel="rate",
        )

    scan_sec = cfg.get("scan", {})
    points = int(scan_sec.get("points", 13))
    overshoot = float(scan_sec.get("overshoot", 1.5))
    scan_rows, scan_series = [], []
    for k in range(1, len(ts.entries)):
        prev, cur = ts.entries[k - 1], ts.entries[k]
        rng = noise.rng() if (mode == "sampled" and noise is not None) else None
        pairs = interpolation_scan(prev.params, cur.params, overshoot, points,
                                   q, mode=mode, noise=noise, rng=rng)
        for s, c in pairs:
            scan_rows.append([k, cur.t, s, c])
        if k <= 6:
            scan_series.append((f"step {k}", [s for s, _ in pairs], [c for _, c in pairs]))
    em.csv("scans.csv", ["step", "t", "s", "cost"], scan_rows)
    if scan_series:
        em.svg("scans.svg", scan_series, title="cost along the update line",
               xlabel="s", ylabel="cost")
    em.manifest("evolve", cfg, {"optimizer": opt.seed,
                                "noise": noise.seed if noise else None})
    return 3 if ts.truncated else 0


def run_overlap(cfg):
    sec = cfg.get("overlap", {})
    seed = int(sec.get("seed", cfg.get("seed", 0)))
    rng = np.random.default_rng(seed)
    pa = np.asarray(sec.get("params_a", rng.uniform(-np.pi, np.pi, 8)), dtype=float)
    pb = np.asarray(sec.get("params_b", rng.uniform(-np.pi, np.pi, 8)), dtype=float)
    if pa.shape != (8,) or pb.shape != (8,):
        raise ConfigError("overlap params must be 8 angles each")
    n_max = int(sec.get("n_max", 6))
    mode = cfg["mode"]
    noise = _noise_model(cfg)
    if mode == "sampled" and noise is None:
        raise ConfigError("sampled mode needs a noise section or --noise file")
    UA = ansatz.build_unitary(pa)
    UB = ansatz.build_unitary(pb)
    E = imps.transfer_matrix(ansatz.mps_tensor(UA), ansatz.mps_tensor(UB))
    lam_ref = float(np.max(np.abs(np.linalg.eigvals(E))))

    em = Emitter(cfg["output_dir"], cfg["formats"])
    srng = noise.rng() if (mode == "sampled" and noise is not None) else None
    rows, recs = [], []
    for n in range(1, n_max + 1):
        est = imps.overlap_power_estimate(UA, UB, n, mode=mode, noise=noise, rng=srng)
        lam = None
        if n >= 2:
            lam = imps.lambda_estimate(UA, UB, n, mode=mode, noise=noise, rng=srng)
        rec = {"n": n, "C_n": est.C_n, "echo": est.echo,
               "lambda_rescaled": lam, "dense_lambda": lam_ref}
        rows.append([rec[c] for c in ("n", "C_n", "echo", "lambda_rescaled", "dense_lambda")])
        recs.append(rec)
    em.csv("convergence.csv", ["n", "C_n", "echo", "lambda_rescaled", "dense_lambda"], rows)
    em.json("convergence.json", {"params_a": list(pa), "params_b": list(pb),
                                 "dense_lambda": lam_ref, "rows": recs})
    ns = [r["n"] for r in recs]
    em.svg(
        "convergence.svg",
        [("C_n", ns, [r["C_n"] for r in recs]),
         ("lambda rescaled", ns[1:], [r["lambda_rescaled"] for r in recs[1:]]),
         ("dense lambda", ns, [lam_ref] * len(ns))],
        title="power-method convergence", xlabel="n", ylabel="value",
    )

    if sec.get("spsa_demo", False):
        from .optimize import spsa_minimize

        trail = []

        A = ansatz.mps_tensor(UA)

        def neg_lambda(p):
            B = ansatz.mps_tensor(ansatz.build_unitary(p))
            val = float(np.max(np.abs(np.linalg.eigvals(imps.transfer_matrix(A, B)))))
            trail.append((len(trail), val, float(np.linalg.norm(
                ansatz.canonicalize_angles(p) - ansatz.canonicalize_angles(pa)))))
            return -val

        demo_sec = dict(cfg.get("optimizer", {}))
        demo_sec.setdefault("a", 1.0)
        demo_sec.setdefault("c", 0.2)
        demo_sec.setdefault("max_iters", 6000)
        opt = SpsaConfig(**demo_sec)
        x0 = np.random.default_rng(seed + 1).uniform(-np.pi, np.pi, 8)
        best, best_cost, _ = spsa_minimize(neg_lambda, x0, opt)
        from scipy.optimize import minimize as _nm

        res = _nm(neg_lambda, best, method="Nelder-Mead",
                  options={"maxiter": 4000, "fatol": 1e-14, "xatol": 1e-11})
        if res.fun < best_cost:
            best, best_cost = res.x, float(res.fun)
        em.csv("spsa_demo.csv", ["eval", "lambda", "param_distance"], trail)
        em.json("spsa_demo.json", {"final_lambda": -best_cost, "final_params": list(best)})
    em.manifest("overlap", cfg, {"overlap": seed,
                                 "noise": noise.seed if noise else None})
    return 0


def _variant_worker(args):
    label, qdict, p0, optdict = args
    q = QuenchConfig(variant=CostVariant.parse(label), **qdict)
    opt = SpsaConfig(**optdict)
    ts = evolve_trajectory(q, np.asarray(p0), opt, mode="exact")
    return label, [
        (e.t, e.rate_function, e.oracle_rate) for e in ts.entries
    ], ts.truncated


def run_variants(cfg):
    q = _quench_from(cfg)
    opt = _spsa_config(cfg, default_iters=800)
    p0 = _groundstate_params(cfg, q)
    jobs = int(cfg.get("jobs", 1))
    labels = list(cfg.get("variants", _VARIANT_SET))
    qdict = {"g_initial": q.g_initial, "g_quench": q.g_quench, "J": q.J,
             "dt": q.dt, "steps": q.steps,
             "effective_time_factor": q.effective_time_factor}
    optdict = {k: getattr(opt, k) for k in
               ("a", "c", "A", "alpha", "gamma", "max_iters", "tol", "seed")}
    work = [(lab, qdict, list(p0), optdict) for lab in labels]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_variant_worker, work))
    else:
        results = [_variant_worker(w) for w in work]

    em = Emitter(cfg["output_dir"], cfg["formats"])
    rows, series, summary = [], [], []
    any_truncated = False
    oracle_added = False
    for label, entries, truncated in results:
        any_truncated = any_truncated or truncated
        ts_t = [e[0] for e in entries]
        ts_r = [e[1] for e in entries]
        ts_o = [e[2] for e in entries]
        for t, r, o in entries:
            rows.append([label, t, r, o])
        err = np.asarray(ts_r) - np.asarray(ts_o)
        rms = float(np.sqrt(np.mean(err**2))) if len(err) else float("nan")
        summary.append({"variant": label, "rms_rate_error": rms,
                        "truncated": truncated})
        series.append((label, ts_t, ts_r))
        if not oracle_added and ts_t:
            series.insert(0, ("oracle", ts_t, ts_o))
            oracle_added = True
    summary.sort(key=lambda r: r["rms_rate_error"])

    em.csv("variant_trajectories.csv", ["variant", "t", "rate", "oracle_rate"], rows)
    em.csv("variant_ranking.csv", ["variant", "rms_rate_error"],
           [[r["variant"], r["rms_rate_error"]] for r in summary])
    rms = {r["variant"]: r["rms_rate_error"] for r in summary}
    ordering_ok = True
    ps = rms.get("PostselectedUUprime")
    if ps is not None:
        checks = [
            rms.get("RatioZeroFp(2,1)", np.inf) > 3.0 * ps,
            rms.get("RatioZeroFp(5,4)", np.inf) <= 1.5 * ps,
            rms.get("RightFpFromU", np.inf) <= 1.5 * ps,
            rms.get("RightFpFromV", np.inf) <= 1.5 * ps,
            rms.get("RatioZeroFp(5,4)", np.inf) < rms.get("RatioZeroFp(2,1)", np.inf),
        ]
        ordering_ok = all(checks)
    em.json("variant_ranking.json", {"ranking": summary, "ordering_ok": ordering_ok})
    if series:
        em.svg("variant_trajectories.svg", series,
               title="rate function by cost variant", xlabel="t", ylabel="rate")
    em.manifest("variants", cfg, {"optimizer": opt.seed})
    if any_truncated or not ordering_ok:
        return 3
    return 0


# ----------------------------------------------------------------- main ----

_RUNNERS = {
    "groundstate": run_groundstate,
    "evolve": run_evolve,
    "overlap": run_overlap,
    "variants": run_variants,
}


def build_parser():
    p = argparse.ArgumentParser(prog="criticalcircuits")
    p.add_argument("command", choices=sorted(_RUNNERS))
    p.add_argument("--config", help="TOML or JSON run configuration")
    p.add_argument("--out", help="output directory (CRITCIRC_OUT overrides)")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mode", choices=["exact", "sampled"], default=None)
    p.add_argument("--noise", help="TOML or JSON noise model file")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        return _RUNNERS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
