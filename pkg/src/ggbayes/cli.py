"""Command-line surface: fit, simulate, compare, prior-check.

Every run writes a sidecar manifest.json carrying the command, input,
config echo, seed, version, and timestamps; each numeric output embeds the
timestamp-free core of that manifest so re-running a command from its
manifest reproduces every numeric file byte for byte.

All floats are written with 17 significant digits, which round-trips
float64 exactly and makes determinism testable at the byte level.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import math
import os
import sys

import numpy as np
from scipy.stats import gaussian_kde

from . import __version__, diagnostics
from ._quadrature import QuadratureError
from .data import Dataset, load_dataset
from .distribution import Params
from .modelsel import compare_models
from .posterior import Chain, McmcConfig, run_chain
from .priors import PriorSpec, propriety_evidence
from .simstudy import run_study

_GEWEKE_BOUND = 1.959963984540054


# ---------------------------------------------------------------------------
# serialization helpers

def fmt_float(x) -> str:
    """17-significant-digit decimal form; exact float64 round-trip."""
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    return format(x, ".17g")


def _json_scalar(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, str):
        return json.dumps(v)
    if v is None:
        return "null"
    raise TypeError(f"cannot serialize {type(v).__name__}")


def to_json(obj, indent: int = 0, compact: bool = False) -> str:
    """Recursive JSON writer with 17-digit floats and stable key order."""
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        if compact:
            parts = [f"{json.dumps(str(k))}:{to_json(v, 0, True)}"
                     for k, v in obj.items()]
            return "{" + ",".join(parts) + "}"
        pad = "  " * indent
        inner = "  " * (indent + 1)
        parts = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if compact:
            return "[" + ",".join(to_json(v, 0, True) for v in seq) + "]"
        pad = "  " * indent
        inner = "  " * (indent + 1)
        parts = [f"{inner}{to_json(v, indent + 1)}" for v in seq]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    return _json_scalar(obj)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_csv(path: str, header, rows, comments=()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, bool):
                cells.append("true" if v else "false")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, (float, np.floating)):
                cells.append(fmt_float(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    _write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# manifest

@dataclasses.dataclass(frozen=True)
class RunManifest:
    """What a run was: command, input, config echo, seed, version."""

    command: str
    input: dict
    config: dict
    seed: int
    version: str

    def core(self) -> dict:
        # reproduction needs exactly these; timestamps stay in the sidecar
        return {"command": self.command, "input": dict(self.input),
                "config": dict(self.config), "seed": self.seed,
                "version": self.version}


def _config_echo(cfg: McmcConfig) -> dict:
    return dataclasses.asdict(cfg)


def _write_manifest(out_dir: str, manifest: RunManifest,
                    started: str, finished: str) -> None:
    doc = manifest.core()
    doc["created_utc"] = started
    doc["completed_utc"] = finished
    _write_text(os.path.join(out_dir, "manifest.json"), to_json(doc) + "\n")


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc).isoformat()


# ---------------------------------------------------------------------------
# chain CSV round trip

def write_chain_csv(path: str, chain: Chain, manifest: RunManifest) -> None:
    comments = (
        "manifest: " + to_json(manifest.core(), compact=True),
        "acceptance_alpha: " + fmt_float(chain.acceptance_alpha),
        "acceptance_phi: " + fmt_float(chain.acceptance_phi),
        "config: " + to_json(_config_echo(chain.config), compact=True),
    )
    rows = [(i + 1, chain.phi[i], chain.mu[i], chain.alpha[i])
            for i in range(len(chain))]
    _write_csv(path, ("iteration", "phi", "mu", "alpha"), rows, comments)


def read_chain_csv(path: str) -> Chain:
    """Reload a chain written by write_chain_csv, field for field."""
    meta = {}
    body = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("# "):
                key, _, val = line[2:].partition(": ")
                meta[key] = val
            else:
                body.append(line)
    if not body or body[0] != "iteration,phi,mu,alpha":
        raise ValueError(f"{path}: not a chain CSV")
    missing = {"acceptance_alpha", "acceptance_phi", "config"} - meta.keys()
    if missing:
        raise ValueError(f"{path}: missing header comments {sorted(missing)}")
    cols = np.array([[float(c) for c in ln.split(",")] for ln in body[1:]])
    if cols.shape[1] != 4:
        raise ValueError(f"{path}: expected 4 columns")
    cfg_doc = json.loads(meta["config"])
    cfg = McmcConfig(**cfg_doc)
    return Chain(phi=cols[:, 1], mu=cols[:, 2], alpha=cols[:, 3],
                 acceptance_alpha=float(meta["acceptance_alpha"]),
                 acceptance_phi=float(meta["acceptance_phi"]),
                 config=cfg)


# ---------------------------------------------------------------------------
# command implementations

def _plot_data(chain: Chain, out_dir: str, core_comment: str) -> None:
    series = {"phi": chain.phi, "mu": chain.mu, "alpha": chain.alpha}

    rows = [(p, i + 1, s[i]) for p, s in series.items()
            for i in range(len(s))]
    _write_csv(os.path.join(out_dir, "trace.csv"),
               ("parameter", "iteration", "value"), rows, (core_comment,))

    dens_rows = []
    for p, s in series.items():
        if np.std(s) == 0.0:
            continue
        kde = gaussian_kde(s)
        grid = np.linspace(float(np.min(s)), float(np.max(s)), 256)
        for x, y in zip(grid, kde(grid)):
            dens_rows.append((p, float(x), float(y)))
    _write_csv(os.path.join(out_dir, "density.csv"),
               ("parameter", "x", "density"), dens_rows, (core_comment,))

    max_lag = min(40, len(chain) // 4 - 1)
    acf_rows = []
    for p, s in series.items():
        acf = diagnostics.autocorrelation(s, max_lag)
        for lag, v in enumerate(acf):
            acf_rows.append((p, lag, float(v)))
    _write_csv(os.path.join(out_dir, "acf.csv"),
               ("parameter", "lag", "acf"), acf_rows, (core_comment,))


def _core_comment(manifest: RunManifest) -> str:
    return "manifest: " + to_json(manifest.core(), compact=True)


def _run_fit(data: Dataset, cfg: McmcConfig, out_dir: str,
             manifest: RunManifest) -> None:
    chain = run_chain(data, cfg)
    summary = diagnostics.summarize(chain, data)
    doc = summary.as_dict()
    flags = list(doc.pop("flags", []))
    z_fail = [name for name in ("phi", "mu", "alpha")
              if abs(doc[name]["geweke_z"]) >= _GEWEKE_BOUND]
    if z_fail:
        flags.append("geweke_convergence_warning")
        print("warning: Geweke diagnostic outside +-1.96 for "
              + ", ".join(z_fail), file=sys.stderr)
    out = {"manifest": manifest.core()}
    out.update(doc)
    out["acceptance"] = {"alpha": chain.acceptance_alpha,
                         "phi": chain.acceptance_phi}
    if flags:
        out["flags"] = flags
    _write_text(os.path.join(out_dir, "summary.json"), to_json(out) + "\n")
    write_chain_csv(os.path.join(out_dir, "chain.csv"), chain, manifest)
    _plot_data(chain, out_dir, _core_comment(manifest))
    for name in ("phi", "mu", "alpha"):
        b = doc[name]
        print(f"{name:>5s}: mode={fmt_float(b['mode'])} sd={fmt_float(b['sd'])} "
              f"hpd=({fmt_float(b['hpd_low'])}, {fmt_float(b['hpd_high'])}) "
              f"geweke_z={fmt_float(b['geweke_z'])}")


def _run_simulate(truth: Params, n_list, reps: int, cfg: McmcConfig,
                  master_seed: int, estimator: str, out_dir: str,
                  manifest: RunManifest) -> None:
    report = run_study(truth, n_list, reps, cfg, master_seed,
                       estimator=estimator)
    out = {"manifest": manifest.core()}
    out.update(report.as_dict())
    _write_text(os.path.join(out_dir, "simreport.json"), to_json(out) + "\n")
    header = ("parameter", "n", "mre", "mse", "cov_low", "cov_up", "cov",
              "n_below", "n_inside", "n_above", "replications_used",
              "geweke_pass_rate")
    rows = [(c.parameter, c.n, c.mre, c.mse, c.cov_low, c.cov_up, c.cov,
             c.n_below, c.n_inside, c.n_above, c.replications_used,
             c.geweke_pass_rate) for c in report.cells]
    _write_csv(os.path.join(out_dir, "simreport.csv"), header, rows,
               (_core_comment(manifest),))
    for c in report.cells:
        print(f"{c.parameter:>5s} n={c.n:<4d} mre={c.mre:.4f} "
              f"mse={c.mse:.6g} cov={c.cov:.3f} used={c.replications_used}")


def _run_compare(data: Dataset, cfg: McmcConfig, out_dir: str,
                 manifest: RunManifest) -> None:
    res = compare_models(data, cfg)
    out = {"manifest": manifest.core()}
    out.update(res.as_dict())
    out["winner"] = out["winner_bic"]
    _write_text(os.path.join(out_dir, "comparison.json"), to_json(out) + "\n")
    header = ("model", "k", "mean_deviance", "deviance_at_mean", "p_d",
              "dic", "bic", "flags")
    rows = [(f.display_name, f.k, f.mean_deviance, f.deviance_at_mean,
             f.p_d, f.dic, f.bic, ";".join(f.flags)) for f in res.fits]
    _write_csv(os.path.join(out_dir, "comparison.csv"), header, rows,
               (_core_comment(manifest),))
    print(f"{'model':<12s}{'DIC':>14s}{'BIC':>14s}  flags")
    for f in res.fits:
        print(f"{f.display_name:<12s}{f.dic:>14.3f}{f.bic:>14.3f}  "
              + (";".join(f.flags) or "-"))
    print(f"winner by DIC: {res.fit_for(res.winner_dic).display_name}")
    print(f"winner by BIC: {res.fit_for(res.winner_bic).display_name}")


def _run_prior_check(data: Dataset, spec: PriorSpec, levels: int,
                     out_dir: str, manifest: RunManifest) -> None:
    ev = propriety_evidence(spec, data, levels)
    out = {"manifest": manifest.core(),
           "prior": spec.value,
           "levels": levels,
           "box_bounds": [list(b[0]) for b in ev.box_bounds],
           "log_integral_values": list(ev.log_integral_values),
           "integral_values": list(ev.integral_values),
           "ratios": list(ev.ratios),
           "relative_increments": list(ev.relative_increments),
           "verdict": ev.verdict}
    _write_text(os.path.join(out_dir, "propriety.json"), to_json(out) + "\n")
    header = ("level", "low", "high", "log_integral", "integral", "ratio",
              "relative_increment")
    rows = []
    for i, ((lo, hi), _) in enumerate(ev.box_bounds):
        ratio = ev.ratios[i - 1] if i > 0 else ""
        inc = ev.relative_increments[i - 1] if i > 0 else ""
        rows.append((i + 1, lo, hi, ev.log_integral_values[i],
                     ev.integral_values[i], ratio, inc))
    _write_csv(os.path.join(out_dir, "propriety.csv"), header, rows,
               (_core_comment(manifest),))
    print(f"{'box':<22s}{'log integral':>16s}{'ratio':>12s}")
    for i, ((lo, hi), _) in enumerate(ev.box_bounds):
        box = f"({fmt_float(lo)[:8]}, {fmt_float(hi)[:8]})^2"
        r = f"{ev.ratios[i-1]:.4g}" if i > 0 else "-"
        print(f"{box:<22s}{ev.log_integral_values[i]:>16.6f}{r:>12s}")
    print(f"verdict: {ev.verdict}")


# ---------------------------------------------------------------------------
# argument plumbing

def _add_mcmc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iters", type=int, default=31000,
                   help="total chain iterations")
    p.add_argument("--burnin", type=int, default=1000,
                   help="iterations discarded before storage")
    p.add_argument("--thin", type=int, default=30,
                   help="keep every thin-th post-burn-in draw")
    p.add_argument("--seed", type=int, default=0, help="chain seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ggbayes",
        description="Objective Bayesian inference for the generalized "
                    "gamma distribution.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="sample the posterior on a dataset")
    p_fit.add_argument("--data", required=True,
                       help="path to a data file, or the builtin id 'meeker'")
    _add_mcmc_flags(p_fit)
    p_fit.add_argument("--out-dir", default=".", help="output directory")

    p_sim = sub.add_parser("simulate", help="repeated-sampling study")
    p_sim.add_argument("--phi", type=float, default=0.4)
    p_sim.add_argument("--mu", type=float, default=1.5)
    p_sim.add_argument("--alpha", type=float, default=5.0)
    p_sim.add_argument("--n", default="50,100,150,200,250,300",
                       help="comma-separated sample sizes")
    p_sim.add_argument("--reps", type=int, default=100,
                       help="replications per sample size")
    p_sim.add_argument("--estimator", choices=("mode", "mean"),
                       default="mode", help="point estimator")
    _add_mcmc_flags(p_sim)
    p_sim.add_argument("--out-dir", default=".", help="output directory")

    p_cmp = sub.add_parser("compare",
                           help="fit GG, Weibull, Gamma, Lognormal and rank")
    p_cmp.add_argument("--data", required=True)
    _add_mcmc_flags(p_cmp)
    p_cmp.add_argument("--out-dir", default=".", help="output directory")

    p_pri = sub.add_parser("prior-check",
                           help="nested-box propriety evidence for a prior")
    p_pri.add_argument("--data", required=True)
    p_pri.add_argument("--prior", required=True,
                       choices=[s.value for s in PriorSpec])
    p_pri.add_argument("--levels", type=int, default=6)
    p_pri.add_argument("--out-dir", default=".", help="output directory")

    return parser


def _parse_n_list(text: str):
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ValueError(f"--n must be comma-separated integers, got {text!r}")
    if not values or any(v < 2 for v in values):
        raise ValueError("--n entries must be integers >= 2")
    return values


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = args.out_dir

    # phase 1: validate inputs and build the manifest (exit 2 on failure)
    try:
        os.makedirs(out_dir, exist_ok=True)
        if args.command == "fit":
            data = load_dataset(args.data)
            cfg = McmcConfig(iterations=args.iters, burn_in=args.burnin,
                             thin=args.thin, seed=args.seed)
            manifest = RunManifest("fit", {"data": args.data},
                                   _config_echo(cfg), args.seed, __version__)
            runner = lambda: _run_fit(data, cfg, out_dir, manifest)
        elif args.command == "simulate":
            truth = Params(args.phi, args.mu, args.alpha)
            n_list = _parse_n_list(args.n)
            if args.reps < 2:
                raise ValueError("--reps must be an integer >= 2")
            cfg = McmcConfig(iterations=args.iters, burn_in=args.burnin,
                             thin=args.thin, seed=args.seed)
            echo = _config_echo(cfg)
            echo.update({"truth": {"phi": truth.phi, "mu": truth.mu,
                                   "alpha": truth.alpha},
                         "n_list": list(n_list), "reps": args.reps,
                         "estimator": args.estimator})
            manifest = RunManifest("simulate", {"builtin": "simulated"},
                                   echo, args.seed, __version__)
            runner = lambda: _run_simulate(truth, n_list, args.reps, cfg,
                                           args.seed, args.estimator,
                                           out_dir, manifest)
        elif args.command == "compare":
            data = load_dataset(args.data)
            cfg = McmcConfig(iterations=args.iters, burn_in=args.burnin,
                             thin=args.thin, seed=args.seed)
            manifest = RunManifest("compare", {"data": args.data},
                                   _config_echo(cfg), args.seed, __version__)
            runner = lambda: _run_compare(data, cfg, out_dir, manifest)
        else:
            data = load_dataset(args.data)
            spec = PriorSpec(args.prior)
            if args.levels < 3:
                raise ValueError("--levels must be an integer >= 3")
            manifest = RunManifest(
                "prior-check", {"data": args.data},
                {"prior": spec.value, "levels": args.levels},
                0, __version__)
            runner = lambda: _run_prior_check(data, spec, args.levels,
                                              out_dir, manifest)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    # phase 2: run and write outputs (exit 1 on failure)
    started = _utc_now()
    try:
        runner()
    except QuadratureError as exc:
        print(f"error: quadrature failure: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_manifest(out_dir, manifest, started, _utc_now())
    return 0


if __name__ == "__main__":
    sys.exit(main())
