"""Command-line interface.

Every command reads JSON/CSV inputs, writes a delimited or JSON report to
stdout or ``--out FILE``, and -- when writing to a file -- renders a PNG
figure at ``FILE.png`` unless ``--no-plot`` is given.  Exit codes: 0 success,
1 verification failure (or a curve that fails its shape laws), 2 usage and
input-format errors, 3 feasibility-guard refusals.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass

import click
import numpy as np

from . import curves, figures, sampler, schedules, specio, stepfit
from .dist import JointPMF, kl_bits, tv
from .errors import (
    DimensionMismatch,
    DuplicateEvalPoints,
    FieldTooSmall,
    HanViolation,
    InfeasibleEnumeration,
    InvalidTolerance,
    NonMonotoneNodes,
    NotADistribution,
    NotPrime,
    PositionOutOfRange,
    RankDeficient,
)

_USAGE_ERRORS = (
    NotADistribution,
    PositionOutOfRange,
    DimensionMismatch,
    NonMonotoneNodes,
    InvalidTolerance,
    NotPrime,
    DuplicateEvalPoints,
    FieldTooSmall,
    RankDeficient,
    ValueError,
    KeyError,
    json.JSONDecodeError,
    OSError,
)


class FeasibilityError(click.ClickException):
    exit_code = 3


@dataclass
class RunConfig:
    """Per-invocation output settings shared by all commands."""

    seed: int = 0
    fmt: str | None = None
    out: str | None = None
    plot: bool = True

    def emit(self, text: str) -> None:
        if self.out:
            with open(self.out, "w", encoding="utf-8") as fp:
                fp.write(text)
        else:
            click.echo(text, nl=False)

    def render(self, draw) -> None:
        """Run a figure callback against OUT.png when a file was written."""
        if self.out and self.plot:
            draw(self.out + ".png")


def _mapped(fn):
    @functools.wraps(fn)
    def inner(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except InfeasibleEnumeration as exc:
            raise FeasibilityError(str(exc)) from exc
        except HanViolation as exc:
            raise click.ClickException(f"curve failed its shape laws: {exc}") from exc
        except _USAGE_ERRORS as exc:
            raise click.UsageError(str(exc)) from exc

    return inner


def _io_options(fn):
    for opt in (
        click.option("--plot/--no-plot", "plot", default=True, show_default=True,
                     help="Render a PNG next to --out."),
        click.option("--out", type=click.Path(dir_okay=False), default=None,
                     help="Write the report here instead of stdout."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
                     help="Report format (each command has a natural default)."),
        click.option("--seed", type=int, default=0, show_default=True,
                     help="Random seed for every stochastic step."),
    ):
        fn = opt(fn)
    return fn


def _cfg(seed: int, fmt: str | None, out: str | None, plot: bool) -> RunConfig:
    return RunConfig(seed=seed, fmt=fmt, out=out, plot=plot)


def _exact_curves(p: JointPMF) -> tuple[curves.EntropyCurve, curves.InfoCurve]:
    H = curves.entropy_curve_exact(p)
    return H, curves.info_curve_from_entropy(H)


@click.group()
def main() -> None:
    """Information curves, unmasking schedules, and exact samplers."""


# ---------------------------------------------------------------- curve


@main.command("curve")
@click.option("--dist", "dist_path", required=True, type=click.Path(), help="Distribution spec (JSON).")
@click.option("--method", type=click.Choice(["exact", "mc"]), default="exact", show_default=True)
@click.option("--samples", type=int, default=200, show_default=True,
              help="Subsets per level for --method mc.")
@click.option("--dedup", is_flag=True, help="Sample subsets without replacement (mc).")
@_io_options
@_mapped
def cmd_curve(dist_path, method, samples, dedup, seed, fmt, out, plot) -> None:
    """Compute the entropy/information curve of a distribution."""
    cfg = _cfg(seed, fmt, out, plot)
    p = specio.load_dist(dist_path)
    if method == "exact":
        H = curves.entropy_curve_exact(p)
    else:
        H = curves.entropy_curve_mc(p, samples_per_level=samples, seed=cfg.seed, dedup=dedup)
    Z = curves.info_curve_from_entropy(H)
    if cfg.fmt == "json":
        obj = {
            "j": list(range(1, Z.n + 1)),
            "Z_bits": [float(v) for v in Z.values],
            "H_bits": [float(v) for v in H.values[1:]],
        }
        if Z.stderr is not None:
            obj["Z_stderr"] = [float(v) for v in Z.stderr]
        cfg.emit(specio.dump_json(obj))
    else:
        cfg.emit(specio.curve_csv_text(Z, H))
    cfg.render(lambda path: figures.render_curve(path, Z, H))


# ---------------------------------------------------------------- summary


@main.command("summary")
@click.option("--dist", "dist_path", required=True, type=click.Path(), help="Distribution spec (JSON).")
@_io_options
@_mapped
def cmd_summary(dist_path, seed, fmt, out, plot) -> None:
    """Total and dual total correlation, with the n*Z_n identity gap."""
    cfg = _cfg(seed, fmt, out, plot)
    p = specio.load_dist(dist_path)
    _, Z = _exact_curves(p)
    summ = curves.tc_dtc_from_curve(Z)
    gap = abs(summ.tc + summ.dtc - p.n * summ.z_n)
    obj = {
        "n": p.n,
        "q": p.q,
        "tc_bits": summ.tc,
        "dtc_bits": summ.dtc,
        "z_n_bits": summ.z_n,
        "identity_gap_bits": gap,
    }
    if cfg.fmt == "csv":
        lines = ["key,value\n"] + [f"{k},{v!r}\n" for k, v in obj.items()]
        cfg.emit("".join(lines))
    else:
        cfg.emit(specio.dump_json(obj))
    cfg.render(lambda path: figures.render_summary(path, Z, summ.tc, summ.dtc))


# ---------------------------------------------------------------- plan


@main.command("plan")
@click.option("--curve", "curve_path", type=click.Path(), default=None,
              help="Curve CSV to plan against.")
@click.option("--dist", "dist_path", type=click.Path(), default=None,
              help="Distribution spec; its exact curve is used.")
@click.option("--k", type=int, default=None, help="Optimal k-round plan via dynamic programming.")
@click.option("--tc-hat", type=float, default=None, help="Front-loaded geometric plan from a TC estimate.")
@click.option("--dtc-hat", type=float, default=None, help="Back-loaded geometric plan from a DTC estimate.")
@click.option("--austin", is_flag=True, help="Use the two-phase sqrt construction (with --dtc-hat).")
@click.option("--eps", type=float, default=None, help="Error budget in bits for the hat routes.")
@click.option("--n", "n_opt", type=int, default=None, help="String length (when no curve is given).")
@_io_options
@_mapped
def cmd_plan(curve_path, dist_path, k, tc_hat, dtc_hat, austin, eps, n_opt, seed, fmt, out, plot) -> None:
    """Build an unmasking schedule by DP or from a correlation estimate."""
    cfg = _cfg(seed, fmt, out, plot)
    if cfg.fmt == "csv":
        raise click.UsageError("plan reports are JSON only")
    Z = None
    if curve_path and dist_path:
        raise click.UsageError("give --curve or --dist, not both")
    if curve_path:
        Z, _ = specio.read_curve_csv(curve_path)
    elif dist_path:
        _, Z = _exact_curves(specio.load_dist(dist_path))
    n = n_opt
    if Z is not None:
        if n is not None and n != Z.n:
            raise click.UsageError(f"--n {n} disagrees with the curve length {Z.n}")
        n = Z.n

    modes = [k is not None, tc_hat is not None, dtc_hat is not None]
    if sum(modes) != 1:
        raise click.UsageError("choose exactly one of --k, --tc-hat, --dtc-hat")
    if austin and dtc_hat is None:
        raise click.UsageError("--austin requires --dtc-hat")

    obj: dict = {}
    if k is not None:
        if Z is None:
            raise click.UsageError("--k needs a curve (--curve or --dist)")
        nodes, err = schedules.optimal_nodes_dp(Z, k)
        sched = schedules.nodes_to_schedule(nodes, n)
        obj.update(source="dp", nodes=list(nodes.nodes), predicted_kl_bits=err)
    else:
        if eps is None:
            raise click.UsageError("the hat routes require --eps")
        if n is None:
            raise click.UsageError("the hat routes require --n or a curve")
        hat = tc_hat if tc_hat is not None else dtc_hat
        if tc_hat is not None:
            sched = schedules.tc_schedule(tc_hat, eps, n)
            source = "tc"
        elif austin:
            sched = schedules.austin_schedule(dtc_hat, eps, n)
            source = "austin"
        else:
            sched = schedules.dtc_schedule(dtc_hat, eps, n)
            source = "dtc"
        if source == "austin":
            k_bound = max(1.0, 3.0 * math.sqrt(hat * n / eps))
        else:
            k_bound = schedules.geometric_round_bound(hat, eps, n)
        obj.update(
            source=source,
            hat_bits=hat,
            eps_bits=eps,
            k_bound=k_bound,
            predicted_kl_bits=(schedules.riemann_error(Z, sched) if Z is not None else None),
        )
    obj.update(schedule=specio.schedule_to_obj(sched), k=sched.k)
    cfg.emit(specio.dump_json(obj))
    if Z is not None:
        Zc = Z
        err = obj.get("predicted_kl_bits")
        cfg.render(lambda path: figures.render_plan(path, Zc, sched, err))


# ---------------------------------------------------------------- simulate


@main.command("simulate")
@click.option("--dist", "dist_path", required=True, type=click.Path(), help="Distribution spec (JSON).")
@click.option("--schedule", "schedule_path", required=True, type=click.Path(),
              help="Schedule JSON ({\"steps\": [...]}).")
@click.option("--method", type=click.Choice(["auto", "exact", "mc"]), default="auto", show_default=True)
@click.option("--trials", type=int, default=1000, show_default=True, help="Partition draws for mc.")
@click.option("--dedup", is_flag=True, help="Sample partitions without replacement (mc).")
@_io_options
@_mapped
def cmd_simulate(dist_path, schedule_path, method, trials, dedup, seed, fmt, out, plot) -> None:
    """Measure a schedule's expected KL and check it against the curve formula."""
    cfg = _cfg(seed, fmt, out, plot)
    if cfg.fmt == "csv":
        raise click.UsageError("simulation reports are JSON only")
    p = specio.load_dist(dist_path)
    sched = specio.load_schedule(schedule_path)
    if sched.n != p.n:
        raise click.UsageError(
            f"schedule covers {sched.n} coordinates but the distribution has {p.n}"
        )
    _, Z = _exact_curves(p)
    formula = schedules.riemann_error(Z, sched)
    if method == "auto":
        enumerable = sampler.count_ordered_partitions(p.n, sched.steps) <= sampler.MAX_PARTITIONS
        method = "exact" if enumerable else "mc"
    if method == "exact":
        expected = sampler.expected_kl_exact(p, sched)
        stderr = None
        used_trials = None
    else:
        expected, stderr = sampler.expected_kl_mc(p, sched, trials=trials, seed=cfg.seed, dedup=dedup)
        used_trials = trials
    obj = {
        "method": method,
        "trials": used_trials,
        "schedule": specio.schedule_to_obj(sched),
        "formula_kl_bits": formula,
        "expected_kl_bits": expected,
        "stderr": stderr,
        "identity_gap": abs(expected - formula),
    }
    cfg.emit(specio.dump_json(obj))
    cfg.render(lambda path: figures.render_plan(path, Z, sched, formula))


# ---------------------------------------------------------------- sample


@main.command("sample")
@click.option("--dist", "dist_path", required=True, type=click.Path(), help="Distribution spec (JSON).")
@click.option("--schedule", "schedule_path", type=click.Path(), default=None,
              help="Schedule JSON; a fresh random partition is drawn per sample.")
@click.option("--blocks", "blocks_path", type=click.Path(), default=None,
              help="Fixed reveal blocks JSON ({\"blocks\": [[0,1],[2]]}).")
@click.option("--samples", "count", type=int, default=1, show_default=True)
@click.option("--eta", type=float, default=0.0, show_default=True,
              help="Smooth the oracle rows toward uniform by this weight.")
@_io_options
@_mapped
def cmd_sample(dist_path, schedule_path, blocks_path, count, eta, seed, fmt, out, plot) -> None:
    """Draw strings by parallel unmasking (one line per sample)."""
    cfg = _cfg(seed, fmt, out, plot)
    if (schedule_path is None) == (blocks_path is None):
        raise click.UsageError("give exactly one of --schedule or --blocks")
    if count < 1:
        raise click.UsageError(f"--samples must be >= 1, got {count}")
    p = specio.load_dist(dist_path)
    plan = specio.load_schedule(schedule_path) if schedule_path else specio.load_blocks(blocks_path)
    oracle = sampler.OracleModel.exact() if eta == 0.0 else sampler.OracleModel.smoothed(eta)
    rows = sampler.draw_samples(p, plan, oracle, seed=cfg.seed, count=count)
    if cfg.fmt == "json":
        cfg.emit(specio.dump_json({"samples": [list(r) for r in rows]}))
    else:
        cfg.emit(specio.samples_text(rows))


# ---------------------------------------------------------------- verify


def _verify_checks(p: JointPMF, method: str, samples: int, seed: int) -> list[dict]:
    checks: list[dict] = []

    def add(name: str, passed: bool | None, detail: str, tol: float | None = None) -> None:
        entry = {"name": name, "detail": detail}
        entry["status"] = "skipped" if passed is None else ("pass" if passed else "fail")
        if tol is not None:
            entry["tolerance"] = tol
        checks.append(entry)

    H = curves.entropy_curve_exact(p)
    bad = H.shape_violation(1e-9)
    add("entropy-curve-shape", bad is None, bad or "monotone with concave increments", 1e-9)
    cap = math.log2(p.q)
    add("single-letter-cap", H.values[1] <= cap + 1e-9,
        f"H_1 = {H.values[1]:.6g} vs log2 q = {cap:.6g}", 1e-9)
    try:
        Z = curves.info_curve_from_entropy(H)
        add("han-monotone", True, "Z nondecreasing from 0", curves.SHAPE_TOL)
    except HanViolation as exc:
        add("han-monotone", False, str(exc), curves.SHAPE_TOL)
        return checks
    summ = curves.tc_dtc_from_curve(Z)
    gap = abs(summ.tc + summ.dtc - p.n * summ.z_n)
    add("tc-dtc-identity", gap <= 1e-8, f"|tc + dtc - n z_n| = {gap:.3g}", 1e-8)
    tc_gap = abs(curves.tc_direct(p) - summ.tc)
    dtc_gap = abs(curves.dtc_direct(p) - summ.dtc)
    add("tc-direct-agree", tc_gap <= 1e-8, f"gap {tc_gap:.3g}", 1e-8)
    add("dtc-direct-agree", dtc_gap <= 1e-8, f"gap {dtc_gap:.3g}", 1e-8)

    uniform = JointPMF(p.n, p.q, np.full(p.q**p.n, 1.0 / p.q**p.n))
    lhs = tv(p, uniform) ** 2
    rhs = math.log(2.0) / 2.0 * kl_bits(p, uniform)
    add("pinsker", lhs <= rhs + 1e-9, f"tv^2 = {lhs:.3g} vs (ln2/2) kl = {rhs:.3g}", 1e-9)

    if p.n <= 10:
        worst = 0.0
        for sched in schedules.iter_compositions(p.n):
            err = schedules.riemann_error(Z, sched)
            bound = schedules.licai_bound(summ, sched.max_step, p.n)
            worst = max(worst, err - bound)
        add("blockwise-bound-dominates", worst <= 1e-9, f"max(error - bound) = {worst:.3g}", 1e-9)
    else:
        add("blockwise-bound-dominates", None, f"n = {p.n} > 10: composition sweep skipped")

    trial_scheds = [schedules.one_shot(p.n)]
    if p.n > 1:
        trial_scheds.append(schedules.all_singles(p.n))
    if p.n > 2:
        trial_scheds.append(schedules.Schedule((p.n - p.n // 2, p.n // 2)))
    identity_ok = True
    convex_ok = True
    details = []
    for sched in trial_scheds:
        if sampler.count_ordered_partitions(p.n, sched.steps) > 10**4:
            continue
        expected = sampler.expected_kl_exact(p, sched)
        formula = schedules.riemann_error(Z, sched)
        identity_ok &= abs(expected - formula) <= 1e-8
        mix = sampler.mixture_output_dist(p, sched)
        convex_ok &= kl_bits(p, mix) <= expected + 1e-9
        details.append(f"{sched.steps}: gap {abs(expected - formula):.3g}")
    add("expected-kl-matches-staircase", identity_ok, "; ".join(details) or "no feasible schedule", 1e-8)
    add("mixture-convexity", convex_ok, "KL(mu||mean nu) <= mean KL", 1e-9)

    if method == "mc":
        Hmc = curves.entropy_curve_mc(p, samples_per_level=samples, seed=seed)
        try:
            curves.info_curve_from_entropy(Hmc)
            add("mc-han-monotone", True, f"{samples} subsets/level", curves.SHAPE_TOL)
        except HanViolation as exc:
            add("mc-han-monotone", False, str(exc), curves.SHAPE_TOL)
    return checks


@main.command("verify")
@click.option("--dist", "dist_path", required=True, type=click.Path(), help="Distribution spec (JSON).")
@click.option("--method", type=click.Choice(["exact", "mc"]), default="exact", show_default=True,
              help="mc additionally stresses a Monte-Carlo curve.")
@click.option("--samples", type=int, default=200, show_default=True,
              help="Subsets per level for the mc stress curve.")
@_io_options
@_mapped
def cmd_verify(dist_path, method, samples, seed, fmt, out, plot) -> None:
    """Run the identity battery; exit 0 only if every check passes."""
    cfg = _cfg(seed, fmt, out, plot)
    try:
        p = specio.load_dist(dist_path)
        checks = _verify_checks(p, method, samples, cfg.seed)
    except FeasibilityError:
        raise
    except InfeasibleEnumeration as exc:
        raise FeasibilityError(str(exc)) from exc
    except Exception as exc:  # a corrupted input is a failed check, not a crash
        checks = [{"name": "load-distribution", "status": "fail", "detail": str(exc)}]
    passed = all(c["status"] != "fail" for c in checks)
    if cfg.fmt == "json":
        cfg.emit(specio.dump_json({"passed": passed, "checks": checks}))
    else:
        lines = [
            f"{c['status'].upper():7s} {c['name']}: {c['detail']}\n" for c in checks
        ] + [f"{'OK' if passed else 'FAILED'} ({len(checks)} checks)\n"]
        cfg.emit("".join(lines))
    if not passed:
        raise SystemExit(1)


# ---------------------------------------------------------------- sweep


@main.command("sweep")
@click.option("--dist", "dist_path", required=True, type=click.Path(), help="Distribution spec (JSON).")
@click.option("--eps", type=float, required=True, help="Error budget in bits.")
@click.option("--grid-mode", type=click.Choice(["value", "exponent"]), default="value",
              show_default=True)
@_io_options
@_mapped
def cmd_sweep(dist_path, eps, grid_mode, seed, fmt, out, plot) -> None:
    """Scan the power-of-two hat grid and pick the best geometric plans."""
    cfg = _cfg(seed, fmt, out, plot)
    p = specio.load_dist(dist_path)
    _, Z = _exact_curves(p)
    summ = curves.tc_dtc_from_curve(Z)
    pairs = schedules.sweep_grid(p.n, p.q, eps, mode=grid_mode)
    hats = sorted({t for t, _ in pairs})
    plans = []
    for route, true_val in (("tc", summ.tc), ("dtc", summ.dtc)):
        build = schedules.tc_schedule if route == "tc" else schedules.dtc_schedule
        for hat in hats:
            sched = build(hat, eps, p.n)
            plans.append(
                {
                    "route": route,
                    "hat_bits": hat,
                    "steps": list(sched.steps),
                    "k": sched.k,
                    "error_bits": schedules.riemann_error(Z, sched),
                    "guaranteed": hat >= true_val,
                    "k_bound": schedules.geometric_round_bound(hat, eps, p.n),
                }
            )
    guaranteed = [pl for pl in plans if pl["guaranteed"]]
    best_guaranteed = (
        min(guaranteed, key=lambda pl: (pl["k_bound"], pl["k"], pl["error_bits"]))
        if guaranteed
        else None
    )
    one = schedules.one_shot(p.n)
    baseline = {
        "route": "one_shot",
        "hat_bits": None,
        "steps": list(one.steps),
        "k": 1,
        "error_bits": schedules.riemann_error(Z, one),
        "guaranteed": False,
        "k_bound": None,
    }
    within = [pl for pl in plans + [baseline] if pl["error_bits"] <= eps]
    best_empirical = min(within, key=lambda pl: (pl["k"], pl["error_bits"])) if within else None

    def covered(true_val: float) -> bool:
        ok = [pl["hat_bits"] for pl in guaranteed]
        return bool(ok) and min(ok) <= max(2.0 * true_val, min(hats))

    obj = {
        "eps_bits": eps,
        "n": p.n,
        "q": p.q,
        "tc_bits": summ.tc,
        "dtc_bits": summ.dtc,
        "grid": hats,
        "pairs": [[t, d] for t, d in pairs],
        "plans": plans,
        "best_guaranteed": best_guaranteed,
        "best_empirical": best_empirical,
        "factor2_tc": covered(summ.tc),
        "factor2_dtc": covered(summ.dtc),
    }
    if cfg.fmt == "csv":
        lines = ["route,hat_bits,k,error_bits,guaranteed,k_bound\n"]
        for pl in plans:
            lines.append(
                f"{pl['route']},{pl['hat_bits']!r},{pl['k']},{pl['error_bits']!r},"
                f"{str(pl['guaranteed']).lower()},{pl['k_bound']!r}\n"
            )
        cfg.emit("".join(lines))
    else:
        cfg.emit(specio.dump_json(obj))
    cfg.render(lambda path: figures.render_sweep(path, eps, plans))


# ---------------------------------------------------------------- hardcurve


@main.command("hardcurve")
@click.option("--n-grid", required=True, help="Comma-separated curve sizes, e.g. 256,512,1024.")
@click.option("--eps", default="auto", show_default=True,
              help="Accuracy; 'auto' means 1/ln(n) per size.")
@click.option("--c", "c_const", type=float, default=0.05, show_default=True,
              help="Piece budget constant: k = floor(c ln(n) / eps).")
@_io_options
@_mapped
def cmd_hardcurve(n_grid, eps, c_const, seed, fmt, out, plot) -> None:
    """Exact best-k error of the adversarial curve across a size grid."""
    cfg = _cfg(seed, fmt, out, plot)
    try:
        sizes = [int(v) for v in n_grid.split(",") if v.strip()]
    except ValueError as exc:
        raise click.UsageError(f"--n-grid must be comma-separated integers: {exc}") from exc
    if not sizes:
        raise click.UsageError("--n-grid is empty")
    eps_val = None if eps == "auto" else float(eps)
    rows = stepfit.lower_bound_experiment(sizes, eps=eps_val, c=c_const)
    if cfg.fmt == "json":
        outside = [r.n for r in rows if not stepfit.in_hypothesis_range(r.n, r.eps)]
        obj = {
            "rows": [
                {"n": r.n, "eps": r.eps, "k": r.k, "best_error": r.best_error, "ratio": r.ratio}
                for r in rows
            ],
            "outside_proven_window": outside,
        }
        cfg.emit(specio.dump_json(obj))
    else:
        cfg.emit(specio.experiment_csv_text(rows))
    cfg.render(lambda path: figures.render_experiment(path, rows))


if __name__ == "__main__":
    main()
