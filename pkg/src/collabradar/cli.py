"""Command-line experiment runner.

Subcommands: validate-config, validate-moments, design-weights, roc, reproduce.
Exit status is 0 when every check passes, 1 when a check fails, 2 for
configuration errors and 3 for I/O errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import kernels
from .collab import af_baseline, design_weights
from .detect import estimate_rocs
from .experiments import ExperimentSpec, build_scenario, load_spec, standard_spec
from .model import ConfigurationError, validate_config
from .moments import cc_cross_covariance_check, cc_moments_closed_form, cc_moments_from_kernel, mc_cc_moments
from .subspace import whitening_kernel

log = logging.getLogger("collabradar")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

FIG2_GAINS = {"low": 0.1, "high": 10.0}
FIG3_ALPHAS = (1.0, 2.0, 4.0)
FIG3_GAIN = 1.0


class Run:
    """Collects artifacts and checks for one invocation."""

    def __init__(self, spec: ExperimentSpec, out_dir: Path, command: str):
        self.spec = spec
        self.out = Path(out_dir)
        self.command = command
        self.checks = []
        self.results = {}
        self.artifacts = []

    @property
    def stamp(self):
        return f"config_hash={self.spec.config_hash()} seed={self.spec.config.seed}"

    def check(self, name, passed, **detail):
        self.checks.append({"name": name, "passed": bool(passed), **detail})
        return passed

    def write_csv(self, name, header, rows):
        path = self.out / name
        with open(path, "w") as fh:
            fh.write(f"# {self.stamp}\n")
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(v) for v in row) + "\n")
        self.artifacts.append(name)

    def write_roc(self, name, roc):
        roc.to_csv(self.out / name, self.stamp)
        self.artifacts.append(name)

    def finish(self) -> int:
        ok = all(c["passed"] for c in self.checks)
        summary = {
            "command": self.command,
            "config_hash": self.spec.config_hash(),
            "seed": self.spec.config.seed,
            "kernel_backend": kernels.BACKEND,
            "passed": ok,
            "checks": self.checks,
            "results": self.results,
            "artifacts": sorted(self.artifacts),
            "spec": self.spec.to_dict(),
        }
        (self.out / "summary.json").write_text(json.dumps(summary, indent=2, default=_json_default) + "\n")
        n_fail = sum(not c["passed"] for c in self.checks)
        print(f"{self.command}: {'PASS' if ok else 'FAIL'} ({len(self.checks) - n_fail}/{len(self.checks)} checks) "
              f"-> {self.out}")
        return EXIT_OK if ok else EXIT_CHECK_FAILED


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _trials(spec, default):
    return int(spec.run.get("n_trials", default))


def cmd_validate_config(run: Run) -> None:
    sc = build_scenario(run.spec)
    report = validate_config(sc.cfg, sc.sub, sc.noise, sc.topo)
    run.check("config_valid", not report, violations=report)
    run.results["n_w"] = sc.topo.n_w
    run.results["index_map"] = [list(p) for p in sc.topo.nonzero_index_map]


def cmd_validate_moments(run: Run) -> None:
    sc = build_scenario(run.spec)
    n = _trials(run.spec, 100_000)
    sub_g = sc.sub.with_alphabet("gaussian")
    cf = cc_moments_closed_form(sc.cfg, sc.kernel, sub_g)
    mc = mc_cc_moments(sc.cfg, sub_g, sc.noise, n, kernel=sc.kernel, receivers=1)
    rows = []
    for h, closed, est, se in (("H0", cf.var_h0, mc.var_h0, mc.se_h0), ("H1", cf.var_h1, mc.var_h1, mc.se_h1)):
        z = abs(est - closed) / se
        run.check(f"var_{h}_within_5se", z <= 5.0, closed_form=closed, monte_carlo=est, se=se, z=z)
        rows.append((h, closed, est, se, z))
    for h, m, se in (("H0", mc.mean_h0, mc.mean_se_h0), ("H1", mc.mean_h1, mc.mean_se_h1)):
        run.check(f"mean_{h}_zero", abs(m) <= 5.0 * se, estimate=m, se=se)
    run.write_csv("moments.csv", ["hypothesis", "closed_form", "monte_carlo", "std_error", "z_score"], rows)
    if sc.cfg.n_receivers >= 2:
        xc = cc_cross_covariance_check(sc.cfg, sub_g, sc.noise, min(n, 100_000), kernel=sc.kernel)
        run.check("cross_covariance_4se", all(r["passed"] for r in xc), worst_z=max(r["z"] for r in xc))
        run.write_csv(
            "cross_covariance.csv",
            ["hypothesis", "i", "j", "kind", "re", "im", "z_score", "passed"],
            [(r["hypothesis"], r["i"], r["j"], r["kind"], r["estimate"].real, r["estimate"].imag, r["z"],
              r["passed"]) for r in xc],
        )
    run.results["closed_form"] = dataclasses.asdict(cf)


def cmd_design_weights(run: Run) -> None:
    sc = build_scenario(run.spec)
    cfg = sc.cfg
    mom = cc_moments_closed_form(cfg, sc.kernel, sc.sub)
    d = design_weights(sc.topo, cfg.gains, mom, cfg.sigma_eps_sq, cfg.sigma_eta_sq, cfg.power_budget)
    rep = d.report()
    rep["moments"] = dataclasses.asdict(mom)
    (run.out / "design.json").write_text(json.dumps(rep, indent=2) + "\n")
    run.artifacts.append("design.json")
    run.write_csv("design_weights.csv", ["l", "row", "col", "w_re", "w_im"],
                  [(l, i, j, w.real, w.imag) for l, ((i, j), w) in enumerate(zip(sc.topo.nonzero_index_map, d.w_vec))])
    run.check("power_constraint", abs(np.vdot(d.w_vec, d.w_vec).real - cfg.power_budget) <= 1e-10 * cfg.power_budget)
    run.results.update(ratio=d.ratio, lambda_max=d.lambda_max, multiplicity=d.multiplicity)


def _roc_rows(rocs, run, prefix):
    rows = []
    for name, roc in rocs.items():
        run.write_roc(f"{prefix}{name}.csv", roc)
        rows.append((name, roc.auc, roc.ci[0], roc.ci[1], roc.n_trials))
    return rows


def cmd_roc(run: Run) -> None:
    sc = build_scenario(run.spec)
    cfg = sc.cfg
    n = _trials(run.spec, 20_000)
    baselines = run.spec.run.get("baselines", [])
    mom = cc_moments_closed_form(cfg, sc.kernel, sc.sub)
    designs = {"collab": design_weights(sc.topo, cfg.gains, mom, cfg.sigma_eps_sq, cfg.sigma_eta_sq,
                                        cfg.power_budget)}
    if "af" in baselines:
        designs["af"] = af_baseline(cfg, mom)
    rocs = estimate_rocs(cfg, sc.sub, sc.noise, sc.kernel, designs, n)
    if "whitening" in baselines:
        mw = cc_moments_from_kernel(cfg, whitening_kernel(sc.noise), sc.noise, sc.sub)
        dw = design_weights(sc.topo, cfg.gains, mw, cfg.sigma_eps_sq, cfg.sigma_eta_sq, cfg.power_budget)
        rocs.update(estimate_rocs(cfg, sc.sub, sc.noise, sc.kernel, {"whitening": dw}, n, method="whitening"))
    rows = _roc_rows(rocs, run, "roc_")
    run.write_csv("auc.csv", ["system", "auc", "ci_low", "ci_high", "n_trials"], rows)
    run.results["auc"] = {r[0]: r[1] for r in rows}
    for name, roc in rocs.items():
        run.check(f"roc_{name}_monotone", bool(np.all(np.diff(roc.pfa) >= 0) and np.all(np.diff(roc.pd) >= 0)))


def figure2(spec: ExperimentSpec, n_trials: int) -> dict:
    """AUCs for collaboration vs AF at the low and high MAC gains."""
    out = {}
    for level, g in FIG2_GAINS.items():
        s = dataclasses.replace(spec, config=spec.config.replace(mac_gain=(g,) * spec.config.n_transmitters))
        sc = build_scenario(s)
        cfg = sc.cfg
        mom = cc_moments_closed_form(cfg, sc.kernel, sc.sub)
        designs = {
            "collab": design_weights(sc.topo, cfg.gains, mom, cfg.sigma_eps_sq, cfg.sigma_eta_sq, cfg.power_budget),
            "af": af_baseline(cfg, mom),
        }
        rocs = estimate_rocs(cfg, sc.sub, sc.noise, sc.kernel, designs, n_trials)
        out[level] = {"g_amp": g, "rocs": rocs,
                      "ratio": {k: d.ratio for k, d in designs.items()}}
    return out


def figure2_checks(fig2: dict) -> dict:
    low, high = fig2["low"]["rocs"], fig2["high"]["rocs"]
    c, a = low["collab"], low["af"]
    low_ok = c.auc > a.auc and c.ci[0] > a.ci[1]
    ch, ah = high["collab"], high["af"]
    width = max(ch.ci[1] - ch.ci[0], ah.ci[1] - ah.ci[0])
    high_ok = abs(ch.auc - ah.auc) <= width
    return {
        "low_gain_collab_beats_af": dict(passed=low_ok, auc_collab=c.auc, ci_collab=c.ci, auc_af=a.auc, ci_af=a.ci),
        "high_gain_collab_matches_af": dict(passed=high_ok, auc_collab=ch.auc, auc_af=ah.auc,
                                            difference=ch.auc - ah.auc, ci_width=width),
    }


def figure3(spec: ExperimentSpec, n_trials: int) -> dict:
    """AUCs for subspace vs whitening-only CC over the target-RCS grid."""
    out = {}
    for sa in FIG3_ALPHAS:
        cfg0 = spec.config.replace(sigma_alpha_sq=sa, mac_gain=(FIG3_GAIN,) * spec.config.n_transmitters)
        sc = build_scenario(dataclasses.replace(spec, config=cfg0))
        cfg = sc.cfg
        mom = cc_moments_closed_form(cfg, sc.kernel, sc.sub)
        mw = cc_moments_from_kernel(cfg, whitening_kernel(sc.noise), sc.noise, sc.sub)
        d = design_weights(sc.topo, cfg.gains, mom, cfg.sigma_eps_sq, cfg.sigma_eta_sq, cfg.power_budget)
        dw = design_weights(sc.topo, cfg.gains, mw, cfg.sigma_eps_sq, cfg.sigma_eta_sq, cfg.power_budget)
        r = estimate_rocs(cfg, sc.sub, sc.noise, sc.kernel, {"subspace": d}, n_trials)
        r.update(estimate_rocs(cfg, sc.sub, sc.noise, sc.kernel, {"whitening": dw}, n_trials, method="whitening"))
        out[sa] = r
    return out


def figure3_checks(fig3: dict) -> dict:
    checks = {}
    for sa, r in fig3.items():
        s, w = r["subspace"], r["whitening"]
        checks[f"subspace_beats_whitening_sigma_alpha_sq_{sa:g}"] = dict(
            passed=s.auc > w.auc and s.ci[0] > w.ci[1], auc_subspace=s.auc, ci_subspace=s.ci,
            auc_whitening=w.auc, ci_whitening=w.ci)
    alphas = sorted(fig3)
    for method in ("subspace", "whitening"):
        aucs = [fig3[sa][method].auc for sa in alphas]
        checks[f"{method}_auc_nondecreasing_in_sigma_alpha_sq"] = dict(
            passed=all(b >= a for a, b in zip(aucs, aucs[1:])), aucs=aucs)
    return checks


def cmd_reproduce(run: Run, figure: int) -> None:
    n = _trials(run.spec, 20_000)
    if figure == 2:
        fig = figure2(run.spec, n)
        rows = []
        for level, entry in fig.items():
            for name, roc in entry["rocs"].items():
                run.write_roc(f"fig2_{name}_{level}_gain.csv", roc)
                rows.append((name, entry["g_amp"], entry["ratio"][name], roc.auc, roc.ci[0], roc.ci[1]))
        run.write_csv("fig2_auc.csv", ["system", "g_amp", "variance_ratio", "auc", "ci_low", "ci_high"], rows)
        checks = figure2_checks(fig)
    elif figure == 3:
        fig = figure3(run.spec, n)
        rows = []
        for sa, r in fig.items():
            for name, roc in r.items():
                run.write_roc(f"fig3_{name}_sigma_alpha_sq_{sa:g}.csv", roc)
                rows.append((name, sa, roc.auc, roc.ci[0], roc.ci[1]))
        run.write_csv("fig3_auc.csv", ["system", "sigma_alpha_sq", "auc", "ci_low", "ci_high"], rows)
        checks = figure3_checks(fig)
    else:
        raise ConfigurationError("--figure: expected 2 or 3")
    for name, detail in checks.items():
        run.check(name, detail.pop("passed"), **detail)


COMMANDS = {
    "validate-config": "validate_config",
    "validate-moments": "validate_moments",
    "design-weights": "design_weights",
    "roc": "roc",
    "reproduce": "reproduce",
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="collabradar", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="YAML experiment spec (default: standard N=128 setup)")
        sp.add_argument("--out", type=Path, default=Path("results"), help="output directory")
        sp.add_argument("--seed", type=int, help="override config.seed")
        sp.add_argument("--trials", type=int, help="override run.n_trials")
        if name == "reproduce":
            sp.add_argument("--figure", type=int, choices=(2, 3), required=True)
        sp.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        spec = load_spec(args.config) if args.config else standard_spec()
        if args.seed is not None:
            spec.config = spec.config.replace(seed=args.seed)
        if args.trials is not None:
            if args.trials < 1:
                raise ConfigurationError("--trials: expected a positive integer")
            spec.run = {**spec.run, "n_trials": args.trials}
        spec.run = {**spec.run, "mode": COMMANDS[args.command]}
        if args.command == "reproduce":
            spec.run["figure"] = args.figure
        spec.check()
        args.out.mkdir(parents=True, exist_ok=True)
        run = Run(spec, args.out, args.command)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if not args.verbose else "default")
            if args.command == "validate-config":
                cmd_validate_config(run)
            elif args.command == "validate-moments":
                cmd_validate_moments(run)
            elif args.command == "design-weights":
                cmd_design_weights(run)
            elif args.command == "roc":
                cmd_roc(run)
            else:
                cmd_reproduce(run, args.figure)
        return run.finish()
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
