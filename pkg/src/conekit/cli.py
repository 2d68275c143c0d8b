"""Command-line interface.

Exit codes: 0 success, 1 failed check, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings

import numpy as np

from . import __version__, chains, diffusion, verify
from .config import RunConfig
from .distributions import McmcConfig, gig_draws, inv_wishart_draws, wishart_draws
from .errors import ConeMembershipError, ConekitError, ConfigError, DomainError, UsageError
from .identities import corrupted, run_suite
from .io import write_json, write_path_csv, write_samples_csv, write_trajectory_csv
from .rng import run_blocks, stream

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with code 2 (argparse's default as well)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    p.add_argument("--seed", type=int, help="override the configured seed")
    p.add_argument("--replicas", type=int, help="override the configured replica count")
    p.add_argument("--out", metavar="DIR", help="output directory")


def build_parser():
    parser = _Parser(prog="conekit", description="Random walks and diffusions on symmetric cones.")
    parser.add_argument("--version", action="version", version=f"conekit {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("algebra-check", help="run the algebraic identity suite")
    _common(p)
    p.add_argument("--draws", type=int, default=1000, help="random draws per identity")
    p.add_argument("--fault", type=float, default=0.0, help=argparse.SUPPRESS)

    p = sub.add_parser("sample", help="draw GIG or Wishart samples")
    _common(p)
    p = sub.add_parser("chain", help="simulate the discrete chains")
    _common(p)
    p = sub.add_parser("diffuse", help="simulate the group diffusion and derived processes")
    _common(p)
    p = sub.add_parser("verify", help="run a verification experiment")
    _common(p)
    p.add_argument("which", choices=sorted(verify.EXPERIMENTS))
    return parser


def _load_config(args, default_algebra):
    if args.config:
        cfg = RunConfig.load(args.config)
    else:
        cfg = RunConfig.from_dict({"algebra": default_algebra})
    if args.seed is not None and not 0 <= args.seed < 2 ** 64:
        raise ConfigError("seed must lie in [0, 2^64)")
    if args.replicas is not None and args.replicas < 1:
        raise ConfigError("replicas must be positive")
    return cfg.with_overrides(args.seed, args.replicas, args.out)


def _out_dir(cfg):
    return cfg.output_dir or "."


def _element(alg, value, name):
    if value is None:
        return None
    v = np.asarray(value, dtype=float)
    if v.shape != (alg.dim,):
        raise ConfigError(f"{name} must be a list of {alg.dim} coordinates")
    return v


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_algebra_check(args):
    cfg = _load_config(args, {"kind": "sym_real", "size": 3})
    alg = cfg.make_algebra()
    if args.fault:
        alg = corrupted(alg, args.fault)
    report = run_suite(alg, stream(cfg.seed, "algebra_check"), draws=args.draws)
    for row in report["identities"]:
        tag = "PASS" if row["passed"] else "FAIL"
        print(f"[{tag}] {row['name']}: max_rel_error={row['max_rel_error']:.3e} "
              f"(tol {row['tol']:g})")
    if cfg.output_dir:
        write_json(os.path.join(cfg.output_dir, "algebra_check.json"), report,
                   cfg.to_dict(), cfg.sha256())
    if not report["passed"]:
        failed = [r["name"] for r in report["identities"] if not r["passed"]]
        print(f"failed identities: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_sample(args):
    cfg = _load_config(args, {"kind": "sym_real", "size": 2})
    alg = cfg.make_algebra()
    dist = cfg.distribution
    family = dist.get("family", "gig")
    p = cfg.p if cfg.p is not None else 2.0
    a = _element(alg, dist.get("a"), "a")
    b = _element(alg, dist.get("b"), "b")
    mcmc = McmcConfig.from_dict(cfg.mcmc)
    if family == "gig":
        a = alg.identity if a is None else a
        b = alg.identity if b is None else b

        def fn(count, rng):
            x, res = gig_draws(alg, p, a, b, count, rng, mcmc)
            rate = 1.0 if res is None else res.acceptance
            return x, np.full(count, rate)
    elif family in ("wishart", "inv_wishart"):
        draw = wishart_draws if family == "wishart" else inv_wishart_draws

        def fn(count, rng):
            return draw(alg, p, count, rng, a), np.ones(count)
    else:
        raise ConfigError(f"unknown distribution family {family!r}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        x, rate = run_blocks(fn, cfg.replicas, cfg.seed, "sample")
    out = _out_dir(cfg)
    write_samples_csv(os.path.join(out, "samples.csv"), x, cfg.sha256())
    meta = {"family": family, "p": p, "count": len(x), "seed": cfg.seed,
            "acceptance": float(rate.mean()), "mean": x.mean(axis=0)}
    write_json(os.path.join(out, "samples.json"), meta, cfg.to_dict(), cfg.sha256())
    print(f"wrote {len(x)} samples to {os.path.join(out, 'samples.csv')}")
    return EXIT_OK


def cmd_chain(args):
    cfg = _load_config(args, {"kind": "sym_real", "size": 2})
    alg = cfg.make_algebra()
    c = cfg.chain
    p = cfg.p if cfg.p is not None else alg.wishart_threshold + 2.0
    steps = int(c.get("steps", 100))
    # the unscaled chain (n_scale 1) loses cone membership to rounding within tens of steps
    n_scale = float(c.get("n_scale", 16))
    stride = int(c.get("record_stride", 1))
    ell0 = _element(alg, c.get("ell0"), "ell0")
    lam0 = _element(alg, c.get("lambda0"), "lambda0")
    if n_scale == 1 and ell0 is None and lam0 is not None:
        raise ConfigError("lambda0 needs ell0 (scaled chain)")
    if n_scale != 1:
        ell0 = alg.identity if ell0 is None else ell0
        lam0 = alg.identity if lam0 is None else lam0
    mcmc = McmcConfig.from_dict(cfg.mcmc)

    def fn(count, rng):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            tr = chains.simulate_chain(alg, p, steps, count, rng, n_scale, ell0, lam0, mcmc,
                                       stride)
        return np.stack([tr.L, tr.Lambda, tr.I]).transpose(2, 0, 1, 3)

    data = run_blocks(fn, cfg.replicas, cfg.seed, "chain")
    rec = np.array([0] + [k for k in range(1, steps + 1) if k % stride == 0 or k == steps])
    blocks = {name: data[:, i].transpose(1, 0, 2) for i, name in enumerate(("L", "Lambda", "I"))}
    out = _out_dir(cfg)
    write_trajectory_csv(os.path.join(out, "trajectory.csv"), rec, blocks, cfg.sha256())
    final = {k: {"mean": v[-1].mean(axis=0), "se": v[-1].std(axis=0, ddof=1) / np.sqrt(len(v[-1]))}
             for k, v in blocks.items()} if cfg.replicas > 1 else {}
    meta = {"p": p, "steps": steps, "n_scale": n_scale, "replicas": cfg.replicas,
            "seed": cfg.seed, "final": final}
    write_json(os.path.join(out, "chain.json"), meta, cfg.to_dict(), cfg.sha256())
    print(f"wrote trajectories to {os.path.join(out, 'trajectory.csv')}")
    return EXIT_OK


def cmd_diffuse(args):
    cfg = _load_config(args, {"kind": "sym_real", "size": 2})
    alg = cfg.make_algebra()
    d = cfg.diffusion
    p = cfg.p if cfg.p is not None else alg.wishart_threshold + 2.0
    T = float(d.get("T", 1.0))
    h = float(d.get("h", 1e-3))
    steps = int(round(T / h))
    stride = int(d.get("record_stride", max(1, steps // 10)))
    track = bool(d.get("track_g", False))
    ell0 = _element(alg, d.get("ell0"), "ell0")
    lam0 = _element(alg, d.get("lambda0"), "lambda0")
    metric = d.get("metric", "trace")
    quad = d.get("quadrature", "left")
    if metric not in ("trace", "euclidean"):
        raise ConfigError(f"unknown metric {metric!r}")
    names = ["y", "iota", "ell", "lambda"] + (["g_flat"] if track else [])

    def fn(count, rng):
        path = diffusion.simulate_hypo_bm(alg, p, T, h, count, rng, ell0, lam0, stride, metric,
                                          quad, track_g=track)
        parts = [path.y, path.iota, path.ell, path.lam]
        if track:
            parts.append(path.g_flat)
        return tuple(np.swapaxes(x, 0, 1) for x in parts) + (path.t[None].repeat(count, 0),)

    *parts, times = run_blocks(fn, cfg.replicas, cfg.seed, "diffuse")
    blocks = {n: np.swapaxes(x, 0, 1) for n, x in zip(names, parts)}
    out = _out_dir(cfg)
    write_path_csv(os.path.join(out, "path.csv"), times[0], blocks, cfg.sha256())
    meta = {"p": p, "T": T, "h": h, "metric": metric, "quadrature": quad,
            "replicas": cfg.replicas, "seed": cfg.seed,
            "terminal_iota_mean": blocks["iota"][-1].mean(axis=0)}
    write_json(os.path.join(out, "diffuse.json"), meta, cfg.to_dict(), cfg.sha256())
    print(f"wrote paths to {os.path.join(out, 'path.csv')}")
    return EXIT_OK


def cmd_verify(args):
    cfg = _load_config(args, {"kind": "sym_real", "size": 2})
    alg = cfg.make_algebra()
    params = dict(cfg.verify)
    if cfg.p is not None:
        params.setdefault("p", cfg.p)
    if "replicas" in cfg.raw or args.replicas is not None:
        params.setdefault("replicas", cfg.replicas)
    if cfg.mcmc:
        params.setdefault("mcmc", cfg.mcmc)
    result = verify.run(args.which, alg, cfg.seed, **params)
    for line in result.summary_lines():
        print(line)
    print(f"{args.which}: {'PASS' if result.passed else 'FAIL'}")
    if cfg.output_dir:
        write_json(os.path.join(cfg.output_dir, f"verify_{args.which}.json"), result.to_dict(),
                   cfg.to_dict(), cfg.sha256())
    return EXIT_OK if result.passed else EXIT_FAIL


COMMANDS = {
    "algebra-check": cmd_algebra_check,
    "sample": cmd_sample,
    "chain": cmd_chain,
    "diffuse": cmd_diffuse,
    "verify": cmd_verify,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError, DomainError) as exc:
        print(f"conekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConeMembershipError as exc:
        print(f"conekit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except ConekitError as exc:
        print(f"conekit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
