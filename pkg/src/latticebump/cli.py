"""Command-line front end: deterministic experiment runs with JSON/CSV output.

Subcommands: synth, decompose, opnorm, transfer, scaling, selftest.
Every run reads one JSON config (--config), writes a deterministic
``report.json`` (sorted keys; no timestamps) plus CSV tables into --out, and
puts wall-clock metadata into a separate ``meta.json`` so reports stay
byte-identical across reruns with the same config and seed.

Exit codes: 0 pass, 2 config error, 3 exponent-hypothesis violation,
4 assertion failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import bumps, grid, norms, operators, scalinglab, symbols, transference

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_HYPOTHESIS = 3
EXIT_ASSERTION = 4


class ConfigError(ValueError):
    pass


# named Phi fixtures (d = 2n)
def _phi_fixture(name: str, n: int) -> bumps.BumpProfile:
    if name == "tensor-0.4":
        return bumps.make_bump(2 * n, "tensor-exp", radius=0.4)
    if name == "tensor-0.3":
        return bumps.make_bump(2 * n, "tensor-exp", radius=0.3)
    if name == "plateau-wide":
        return bumps.make_plateau(2 * n, inner=0.9, outer=1.0)
    raise ConfigError(f"unknown Phi fixture {name!r}")


def _load_config(path: str | None) -> dict:
    if path is None:
        raise ConfigError("--config PATH is required for this command")
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"config is not valid JSON: {e}") from e


def _grid_from(cfg: dict, args) -> grid.GridSpec:
    n = int(cfg.get("n", 1))
    if args.grid:
        try:
            L, s = (int(v) for v in args.grid.split(","))
        except ValueError as e:
            raise ConfigError(f"--grid expects L,s got {args.grid!r}") from e
    else:
        g = cfg.get("grid", {})
        L, s = int(g.get("L", 8)), int(g.get("s", 32))
    try:
        return grid.make_grid(n, L, s)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _phi_from(cfg: dict, n: int) -> bumps.BumpProfile:
    spec = cfg.get("phi")
    if spec is None:
        raise ConfigError("config needs a 'phi' fixture")
    if isinstance(spec, str):
        return _phi_fixture(spec, n)
    if "fixture" in spec:
        return _phi_fixture(spec["fixture"], n)
    try:
        return bumps.profile_from_json(json.dumps(spec))
    except (KeyError, ValueError) as e:
        raise ConfigError(f"bad phi profile: {e}") from e


def _coeffs_from(cfg: dict, n: int, seed: int) -> symbols.LatticeCoefficients:
    a = cfg.get("a")
    if a is None:
        raise ConfigError("config needs an 'a' section")
    if "entries" in a:
        entries = {}
        for row in a["entries"]:
            m1, m2, re, im = row
            entries[(tuple(int(c) for c in np.atleast_1d(m1)),
                     tuple(int(c) for c in np.atleast_1d(m2)))] = complex(re, im)
        return symbols.LatticeCoefficients(n, entries)
    if "random" in a:
        r = a["random"]
        return symbols.random_lattice_coefficients(
            n, int(r.get("radius", 1)), int(r.get("count", 9)),
            int(r.get("seed", seed)))
    raise ConfigError("'a' needs 'entries' or 'random'")


def _family_from(cfg: dict, n: int, seed: int) -> list[symbols.LatticeCoefficients]:
    fam = cfg.get("a_family")
    if fam is None:
        return [_coeffs_from(cfg, n, seed)]
    base = int(fam.get("seed", seed))
    return [symbols.random_lattice_coefficients(n, int(fam.get("radius", 1)),
                                                int(fam.get("count", 9)), base + i)
            for i in range(int(fam.get("members", 20)))]


def _search_from(cfg: dict, seed: int) -> transference.SearchParams:
    s = cfg.get("search", {})
    defaults = transference.SearchParams()
    return transference.SearchParams(
        starts=int(s.get("starts", defaults.starts)),
        steps=int(s.get("steps", defaults.steps)),
        initial_step=float(s.get("initial_step", defaults.initial_step)),
        shrink=float(s.get("shrink", defaults.shrink)),
        min_step=float(s.get("min_step", defaults.min_step)),
        seed=int(s.get("seed", seed)),
        mode_margin=int(s.get("mode_margin", defaults.mode_margin)),
        support_margin=int(s.get("support_margin", defaults.support_margin)),
        random_pool=int(s.get("random_pool", defaults.random_pool)),
        torus_points=int(s.get("torus_points", defaults.torus_points)),
        stability_bound=float(s.get("stability_bound", defaults.stability_bound)))


def _exponents_from(cfg: dict) -> norms.ExponentTuple:
    ex = cfg.get("exponents")
    if ex is None:
        raise ConfigError("config needs 'exponents': [p1,p2,p,q1,q2,q]")
    vals = [math.inf if v in ("inf", None) else float(v) for v in ex]
    if len(vals) != 6:
        raise ConfigError("'exponents' must have six entries")
    try:
        return norms.ExponentTuple(*vals)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def _finish(out: Path, report: dict, t0: float) -> None:
    _write_json(out / "report.json", report)
    _write_json(out / "meta.json", {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                                    "runtime_seconds": round(time.time() - t0, 3)})


def cmd_synth(args) -> int:
    t0 = time.time()
    cfg = _load_config(args.config)
    spec = _grid_from(cfg, args)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 42))
    phi = _phi_from(cfg, spec.n)
    a = _coeffs_from(cfg, spec.n, seed)
    out = Path(args.out or cfg.get("out", "synth-out"))
    out.mkdir(parents=True, exist_ok=True)

    sigma = symbols.synth_sigma(a, phi, spec)
    sigma.save(out / "sigma")
    M = int(cfg.get("cm", {}).get("M", 16))
    K = cfg.get("cm", {}).get("K")
    d = symbols.cm_decompose(phi, K=K, M=M)
    (out / "cm.json").write_text(d.to_json())

    # reconstruction error ladder over truncations up to M
    probe = np.linspace(-max(phi.radius), max(phi.radius), 33)
    rows = [["M", "sup_error", "center_error", "tail_bound"]]
    for m in sorted({max(M // 4, 1), max(M // 2, 1), M}):
        dm = symbols.cm_decompose(phi, K=K, M=m)
        if spec.n == 1:
            rec = symbols.cm_reconstruct(dm, probe[:, None], probe[None, :])
            exact = bumps.bump_eval_axes(phi, [probe[:, None], probe[None, :]])
            sup_err = float(np.max(np.abs(rec - exact)))
        else:
            sup_err = float("nan")
        center = abs(symbols.cm_reconstruct(dm, np.zeros(spec.n), np.zeros(spec.n))
                     - bumps.bump_eval(phi, np.zeros(2 * spec.n)))
        rows.append([m, sup_err, float(center), dm.tail])
    _write_csv(out / "recon_error.csv", rows)
    _finish(out, {"command": "synth", "grid": {"n": spec.n, "L": spec.L, "s": spec.s},
                  "entries": len(a), "cm_M": M, "cm_tail": d.tail, "seed": seed},
            t0)
    return EXIT_OK


def cmd_decompose(args) -> int:
    t0 = time.time()
    cfg = _load_config(args.config)
    n = int(cfg.get("n", 1))
    phi = _phi_from(cfg, n)
    M = int(cfg.get("cm", {}).get("M", 16))
    K = cfg.get("cm", {}).get("K")
    out = Path(args.out or cfg.get("out", "decompose-out"))
    d = symbols.cm_decompose(phi, K=K, M=M)
    out.mkdir(parents=True, exist_ok=True)
    (out / "cm.json").write_text(d.to_json())
    rows = [["k1", "k2", "abs_b"]]
    if n == 1:
        for k1 in range(-M, M + 1):
            for k2 in range(-M, M + 1):
                rows.append([k1, k2, abs(d.coefficient((k1, k2)))])
    _write_csv(out / "decay.csv", rows)
    _finish(out, {"command": "decompose", "K": d.K, "M": d.M, "tail": d.tail,
                  "decay_C4": d.decay_constant(4)}, t0)
    return EXIT_OK


def cmd_opnorm(args) -> int:
    t0 = time.time()
    cfg = _load_config(args.config)
    spec = _grid_from(cfg, args)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 42))
    a = _coeffs_from(cfg, spec.n, seed)
    ex = _exponents_from(cfg)
    params = _search_from(cfg, seed)
    family = cfg.get("family", "S")
    out = Path(args.out or cfg.get("out", "opnorm-out"))

    if family == "S":
        est = transference.estimate_norm_S(a, ex.q1, ex.q2, ex.q, params)
    elif family == "T_period":
        est = transference.estimate_norm_T_period(a, ex.p1, ex.p2, ex.p, params)
    elif family == "T_aPhi":
        phi = _phi_from(cfg, spec.n)
        cb = bumps.check_condition_B(phi)
        if not cb.holds:
            raise ConfigError("Phi fixture fails condition (B); "
                              "no witness-pool estimation possible")
        theta = bumps.make_theta_pair(phi, cb.witness, cb.slack / 4, spec)
        space = cfg.get("space", "amalgam")
        kappa = bumps.make_window(spec.n, float(cfg.get("window", {}).get("outer", 0.6)))
        est = transference.estimate_norm_T_aPhi(a, phi, ex, space, theta, spec,
                                                kappa=kappa, params=params)
    else:
        raise ConfigError(f"unknown family {family!r} (S | T_period | T_aPhi)")
    trace = {k: v for k, v in est.trace.items() if k not in ("vectors", "boxes")}
    _finish(out, {"command": "opnorm", "family": family, "value": est.value,
                  "witness": est.witness, "trace": trace, "seed": seed}, t0)
    return EXIT_OK


def cmd_transfer(args) -> int:
    t0 = time.time()
    cfg = _load_config(args.config)
    spec = _grid_from(cfg, args)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 42))
    phi = _phi_from(cfg, spec.n)
    ex = _exponents_from(cfg)
    space = cfg.get("space", "amalgam")
    params = _search_from(cfg, seed)
    family = _family_from(cfg, spec.n, seed)
    out = Path(args.out or cfg.get("out", "transfer-out"))

    cb = bumps.check_condition_B(phi)
    if not cb.holds:
        raise ConfigError("Phi fixture fails condition (B)")
    theta = bumps.make_theta_pair(phi, cb.witness, cb.slack / 4, spec)
    kappa = bumps.make_window(spec.n, float(cfg.get("window", {}).get("outer", 0.6)))
    report = transference.transference_report(family, phi, ex, space, theta,
                                              spec, kappa=kappa, params=params)
    _write_csv(out / "ratios.csv", report.csv_rows())
    doc = report.to_json_dict()
    doc.update({"command": "transfer", "seed": seed, "members": len(family),
                "witness_fixture": {"xi0": list(theta.xi0), "eps": theta.eps,
                                    "slack": cb.slack, "min_q_kernel": theta.m,
                                    "window_outer": kappa.outer}})
    _finish(out, doc, t0)
    if not (report.all_finite and report.stable):
        print(f"transfer: ratio stability failed "
              f"(spread {report.ratio_spread:.3g} vs bound {report.stability_bound})",
              file=sys.stderr)
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_scaling(args) -> int:
    t0 = time.time()
    cfg = _load_config(args.config)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 42))
    sc = cfg.get("scaling", {})
    eps = tuple(float(e) for e in sc.get("epsilons", (0.5, 0.25, 0.125)))
    if len(eps) < 3:
        raise ConfigError("regression needs at least 3 epsilons")
    try:
        fam = scalinglab.make_scaling_family(
            xi0=sc.get("xi0", 0.0), epsilons=eps, n=int(cfg.get("n", 1)),
            s=int(sc.get("s", 8)), box_factor=float(sc.get("box_factor", 192.0)),
            base_radius=float(sc.get("base_radius", 0.3)))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    kappa = bumps.make_window(fam.n, float(cfg.get("window", {}).get("outer", 0.6)))
    out = Path(args.out or cfg.get("out", "scaling-out"))
    out.mkdir(parents=True, exist_ok=True)

    report: dict = {"command": "scaling", "seed": seed,
                    "tail_fraction": fam.tail_fraction,
                    "min_q_modulus": fam.min_q_modulus, "slopes": {}}
    rows = [["space", "exponent", "eps", "norm"]]
    for q in sc.get("amalgam_q", [1.0, 2.0, "inf"]):
        qv = math.inf if q == "inf" else float(q)
        fit = scalinglab.amalgam_scaling_slope(fam, 2.0, qv)
        report["slopes"][f"amalgam_q{q}"] = {
            "slope": fit.slope, "expected": 0.0 if math.isinf(qv) else fam.n / qv,
            "r_squared": fit.r_squared}
        for e, nv in zip(fit.epsilons, fit.norms):
            rows.append(["amalgam", f"q={q}", e, nv])
    for p in sc.get("wiener_p", [1.0, 2.0, "inf"]):
        pv = math.inf if p == "inf" else float(p)
        fit = scalinglab.wiener_scaling_slope(fam, pv, 2.0, kappa)
        report["slopes"][f"wiener_p{p}"] = {
            "slope": fit.slope, "expected": 0.0 if math.isinf(pv) else fam.n / pv,
            "r_squared": fit.r_squared}
        for e, nv in zip(fit.epsilons, fit.norms):
            rows.append(["wiener", f"p={p}", e, nv])
    _write_csv(out / "norms.csv", rows)

    # necessity verdicts for configured exponent tuples
    verdicts = []
    for tup in sc.get("verdicts", []):
        ex = norms.ExponentTuple(*[math.inf if v == "inf" else float(v) for v in tup["exponents"]])
        space = tup["space"]
        if space == "amalgam":
            s1 = scalinglab.amalgam_scaling_slope(fam, 2.0, ex.q1).slope
            s2 = scalinglab.amalgam_scaling_slope(fam, 2.0, ex.q2).slope
            ps = scalinglab.bilinear_product_scaling(
                fam, fam, lambda u, v: np.ones(np.broadcast(u, v).shape),
                "amalgam", 2.0, ex.q)
        else:
            s1 = scalinglab.wiener_scaling_slope(fam, ex.p1, 2.0, kappa).slope
            s2 = scalinglab.wiener_scaling_slope(fam, ex.p2, 2.0, kappa).slope
            ps = scalinglab.bilinear_product_scaling(
                fam, fam, lambda u, v: np.ones(np.broadcast(u, v).shape),
                "wiener", ex.p, 2.0, kappa=kappa)
        v = scalinglab.necessity_verdict(ex, space, (s1, s2), ps.slope)
        verdicts.append({"space": space, "status": v.status, "gap": v.gap,
                         "citation": v.citation, "output_slope": v.output_slope,
                         "input_slopes": list(v.input_slopes)})
    report["verdicts"] = verdicts
    _finish(out, report, t0)
    return EXIT_OK


def _selftest_checks(seed: int, window_outer: float):
    """Yield (name, passed, value) rows for the invariant matrix."""
    rng = np.random.default_rng(seed)
    spec = grid.make_grid(1, 8, 32)

    f = grid.space_function(spec, rng.standard_normal(spec.shape)
                            + 1j * rng.standard_normal(spec.shape))
    rt = np.max(np.abs(grid.idft(grid.dft(f)).samples - f.samples))
    yield "grid round trip", rt <= 1e-12 * np.max(np.abs(f.samples)), rt
    lhs = spec.h * np.sum(np.abs(f.samples) ** 2)
    rhs = spec.dxi * np.sum(np.abs(grid.dft(f).samples) ** 2)
    yield "plancherel", abs(lhs - rhs) <= 1e-12 * lhs, abs(lhs - rhs) / lhs

    # window partition of unity (fault injectable through window_outer)
    if 0.5 < window_outer < 1.0:
        w = bumps.make_window(1, window_outer)
    else:
        w = bumps.Window(base=bumps.make_plateau(1, max(window_outer - 0.05, 0.01),
                                                 window_outer))
    xs = np.linspace(-2.0, 2.0, 801)
    tot = sum(np.asarray(bumps.window_eval(w, xs - k)) for k in range(-4, 5))
    dev = float(np.max(np.abs(tot - 1)))
    yield "window partition of unity", dev <= 1e-12, dev

    phi = bumps.make_bump(2, "tensor-exp", radius=0.4)
    cb = bumps.check_condition_B(phi)
    yield "condition B holds (radius 0.4)", cb.holds, cb.slack
    cb2 = bumps.check_condition_B(bumps.make_plateau(2, 0.9, 1.0))
    yield "condition B fails ([-1,1]^2)", not cb2.holds, 0.0

    spec_p = grid.make_grid(1, 24, 32)
    fb = grid.idft(grid.freq_function(
        spec_p, lambda xi: bumps.bump_eval_axes(bumps.make_bump(1, "tensor-exp", radius=2.0), [xi])))
    res = []
    for M in (2, 4, 8):
        l, r = grid.poisson_check(fb, (0.0,), (0.0,), M)
        res.append(abs(l - r))
    yield "poisson residual decreasing", res[0] >= res[1] >= res[2], res[-1]

    a = symbols.random_lattice_coefficients(1, 1, 9, seed=seed + 1)
    b1 = operators.sequence_from_dict(1, {m: complex(rng.standard_normal(), rng.standard_normal())
                                          for m in range(-2, 3)})
    b2 = operators.sequence_from_dict(1, {m: complex(rng.standard_normal(), rng.standard_normal())
                                          for m in range(-1, 2)})
    s_fast = operators.apply_S(a, b1, b2)
    brute = {}
    for (m1, m2), av in a.items():
        for n1, v1 in b1.entries.items():
            for n2, v2 in b2.entries.items():
                if (n1, n2) == (m1, m2):
                    k = (m1[0] + m2[0],)
                    brute[k] = brute.get(k, 0) + av * v1 * v2
    err = max(abs(s_fast.entries.get(k, 0) - v) for k, v in brute.items()) if brute else 0.0
    yield "S_a brute force", err <= 1e-12, err

    d = symbols.cm_decompose(phi, M=64)
    s_cm = symbols.sigma_from_cm(a, d, spec)
    s_direct = symbols.synth_sigma(a, phi, spec)
    gap = float(np.max(np.abs(s_cm.samples - s_direct.samples)))
    bound = d.tail * a.sup_norm() * 4
    yield "sigma_from_cm within tail bound", gap <= bound, gap

    theta = bumps.make_theta_pair(phi, cb.witness, cb.slack / 4, spec)
    F1 = operators.trig_poly_from_dict(1, {m: complex(rng.standard_normal(), rng.standard_normal())
                                           for m in (-1, 0, 1)})
    F2 = operators.trig_poly_from_dict(1, {m: complex(rng.standard_normal(), rng.standard_normal())
                                           for m in (-1, 0, 1)})
    wit = transference.build_amalgam_witness(F1, F2, theta, spec)
    chk = transference.verify_amalgam_factorization(a, phi, wit, spec)
    yield "amalgam factorization residual", chk.residual <= 1e-6, chk.residual
    yield "pointwise domination on Q", chk.domination_margin >= 0.0, chk.domination_margin

    kap = bumps.make_window(1, 0.6)
    ws = transference.build_wiener_witness(b1, b2, theta, spec, kap)
    wchk = transference.verify_wiener_factorization(a, phi, ws, kap, spec)
    yield "wiener factorization residual", wchk.residual <= 1e-6, wchk.residual
    yield "wiener band collapse", wchk.band_residual <= 1e-6, wchk.band_residual
    l, r = transference.wiener_witness_norm_identity(ws, 1, 2.0, 1.0, kap, spec)
    yield "wiener witness norm identity", abs(l - r) <= 1e-6 * r, abs(l - r) / r

    ok = True
    worst = 0.0
    for _ in range(20):
        arr = rng.random((8, 8))
        lo, hi = norms.mixed_norm_check(arr, 0.5, 3.0)
        worst = max(worst, lo / hi)
        ok = ok and lo <= hi * (1 + 1e-12)
    yield "mixed norm inequality", ok, worst

    v = rng.random(12)
    seq = [norms.lq_seq_norm(v, q) for q in (0.5, 1.0, 2.0, math.inf)]
    yield "lq monotone in q", all(x >= y - 1e-12 for x, y in zip(seq, seq[1:])), seq[0]

    g = norms.amalgam_norm(f, 1.7, 1.7)
    yield "amalgam(p,p) = L^p", abs(g - norms.lp_norm(f, 1.7)) <= 1e-12 * g, g


def cmd_selftest(args) -> int:
    seed = args.seed if args.seed is not None else 42
    outer = args.force_window_outer if args.force_window_outer else 0.6
    rows = list(_selftest_checks(seed, outer))
    width = max(len(name) for name, _ok, _v in rows)
    all_ok = True
    for name, ok, value in rows:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  ({value:.3e})")
        all_ok = all_ok and ok
    print(f"selftest: {'all checks passed' if all_ok else 'FAILURES detected'}")
    return EXIT_OK if all_ok else EXIT_ASSERTION


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="latticebump",
        description="lattice bump bilinear multiplier experiments")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker hint for array backends (results are "
                             "deterministic regardless)")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("synth", cmd_synth), ("decompose", cmd_decompose),
                     ("opnorm", cmd_opnorm), ("transfer", cmd_transfer),
                     ("scaling", cmd_scaling)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=False)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--grid", default=None, help="L,s override")
        p.set_defaults(fn=fn)
    p = sub.add_parser("selftest")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--force-window-outer", type=float, default=None,
                   help="fault injection: build the partition window with this "
                        "outer radius, bypassing the (1/2, 1) guard")
    p.set_defaults(fn=cmd_selftest)

    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except transference.ExponentHypothesisError as e:
        print(f"hypothesis violation: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS


if __name__ == "__main__":
    sys.exit(main())
