"""Batch front-end: capacity, verify, simulate, compare.

Exit codes: 0 success, 1 config error, 2 resource budget error at the top
level, 3 internal invariant violation detected by verify.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .budgets import DEFAULT_BUDGETS, Budgets
from .bounds import check_amplitude_lower_bound, check_trace_power_bounds
from .channel import CQChannel, builtin_channel, holevo_chi, parse_channel_document
from .codebook import sample_codebook
from .config import ExperimentConfig, load_experiment_config, parse_kv_text
from .decoder import average_amplitude, build_plan, build_povm, verify_mixture_identity
from .errors import ConfigError, CqdecError, ResourceBudgetError, ValidationError
from .experiments import CSV_COLUMNS, PointResult, point_seed, run_grid
from .typicality import (
    TypicalityParams,
    build_rho_tilde,
    build_typical_model,
    subordination_gap,
)

_HARD_CHECKS = {
    "eigv_rho_bar",
    "typc_dim",
    "eigv_rho_tilde",
    "subordination",
    "mixture_identity",
    "amplitude_two_forms",
    "trace_power",
    "amplitude_lower",
    "povm_completeness",
    "povm_positivity",
}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return str(value)


def resolve_channel(cfg: ExperimentConfig) -> CQChannel:
    if cfg.channel == "file":
        try:
            with open(cfg.channel_file, "r", encoding="utf-8") as fh:
                doc = parse_kv_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read channel file: {exc}") from exc
        return parse_channel_document(doc)
    try:
        return builtin_channel(cfg.channel, **cfg.channel_params)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def resolve_budgets(cfg: ExperimentConfig) -> Budgets:
    base = Budgets(
        dim_limit=cfg.dim_budget or DEFAULT_BUDGETS.dim_limit,
        set_limit=cfg.set_budget or DEFAULT_BUDGETS.set_limit,
        work_limit=cfg.work_budget or DEFAULT_BUDGETS.work_limit,
    )
    return base.with_env_overrides()


def _emit_table(rows: list[dict], columns: tuple[str, ...], fmt: str, out_path: str | None):
    if fmt == "csv":
        lines = [",".join(columns)]
        for row in rows:
            lines.append(",".join(_fmt(row.get(c)) for c in columns))
        text = "\n".join(lines) + "\n"
    else:
        blocks = []
        for i, row in enumerate(rows):
            lines = [f"[record {i}]"]
            lines.extend(f"{c} = {_fmt(row.get(c))}" for c in columns)
            blocks.append("\n".join(lines))
        text = "\n\n".join(blocks) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_capacity(cfg: ExperimentConfig, fmt: str, out_path: str | None, jobs: int) -> int:
    ch = resolve_channel(cfg)
    rows = [
        {
            "channel": cfg.channel if cfg.channel != "file" else cfg.channel_file,
            "chi": holevo_chi(ch),
            "S_rho": ch.avg_entropy,
            "mean_letter_entropy": ch.mean_letter_entropy,
        }
    ]
    _emit_table(rows, ("channel", "chi", "S_rho", "mean_letter_entropy"), fmt, out_path)
    return 0


_VERIFY_COLUMNS = ("n", "delta", "check", "index", "lhs", "rhs", "status")


def _verify_point(ch, cfg: ExperimentConfig, n: int, budgets: Budgets) -> list[dict]:
    rows: list[dict] = []

    def add(check, status, lhs=None, rhs=None, index=None):
        rows.append(
            {
                "n": n,
                "delta": cfg.delta,
                "check": check,
                "index": index,
                "lhs": lhs,
                "rhs": rhs,
                "status": status,
            }
        )

    params = TypicalityParams(
        n=n,
        delta=cfg.delta,
        delta_source=cfg.delta_source,
        delta_cond=cfg.delta_cond,
        epsilon_target=cfg.epsilon_target,
    )
    try:
        model = build_typical_model(ch, params, budgets)
    except ResourceBudgetError as exc:
        add("model", f"skip:{exc.reason}")
        return rows
    cap = model.eigenvalue_cap * (1 + 1e-9)
    if model.dim_H:
        add(
            "eigv_rho_bar",
            "pass" if model.rho_bar_diag.max() <= cap else "fail",
            float(model.rho_bar_diag.max()),
            model.eigenvalue_cap,
        )
    else:
        add("eigv_rho_bar", "skip:empty_window")
    add(
        "typc_dim",
        "pass" if model.dim_H <= model.dim_cap + 1e-9 else "fail",
        model.dim_H,
        model.dim_cap,
    )
    add(
        "capture_target",
        "info" if model.meets_epsilon_target else "info:below_target",
        model.trace_bar,
        1.0 - cfg.epsilon_target,
    )
    try:
        rho_tilde = build_rho_tilde(ch, params, model, budgets)
    except ResourceBudgetError as exc:
        add("rho_tilde", f"skip:{exc.reason}")
        return rows
    lam = rho_tilde.eigenvalues()
    if lam.size:
        add("eigv_rho_tilde", "pass" if lam.max() <= cap else "fail", float(lam.max()),
            model.eigenvalue_cap)
    gap = subordination_gap(rho_tilde, model)
    add("subordination", "pass" if gap <= 1e-10 else "fail", gap, 1e-10)
    try:
        dev = verify_mixture_identity(ch, params, budgets)
        add("mixture_identity", "pass" if dev <= 1e-10 else "fail", dev, 1e-10)
    except ResourceBudgetError as exc:
        add("mixture_identity", f"skip:{exc.reason}")
    worst_two_forms = 0.0
    m_top = min(cfg.m_max, 20)
    for m in range(0, m_top + 1, 4):
        res = average_amplitude(rho_tilde, model, m)
        worst_two_forms = max(worst_two_forms, abs(res.power - res.binomial))
    add("amplitude_two_forms", "pass" if worst_two_forms <= 1e-9 else "fail",
        worst_two_forms, 1e-9)
    for c in check_trace_power_bounds(rho_tilde, n, cfg.delta, model.s_rho, j_max=6):
        add("trace_power", "pass" if c.ok else "fail", c.lhs, c.rhs, index=c.index)
    if model.s_rho > cfg.delta:
        report = check_amplitude_lower_bound(
            ch, params, range(0, min(cfg.m_max, 16) + 1, 4), budgets, rho_tilde
        )
        for c in report.checks:
            add("amplitude_lower", "pass" if c.ok else "fail", c.rhs, c.lhs, index=c.index)
    else:
        add("amplitude_lower", "skip:delta_above_entropy")
    try:
        seed = point_seed(cfg.seed, n, 0)
        codebook = sample_codebook(
            ch, n, cfg.r_grid[0], params.source_delta, seed,
            distinct=cfg.distinct_codewords, budgets=budgets,
        )
        plan = build_plan(codebook, ch, params, budgets=budgets)
        povm = build_povm(plan, budgets=budgets)
        defect = povm.completeness_defect()
        add("povm_completeness", "pass" if defect <= 1e-9 else "fail", defect, 1e-9)
        min_eig = povm.min_element_eigenvalue()
        add("povm_positivity", "pass" if min_eig >= -1e-10 else "fail", min_eig, -1e-10)
    except (ResourceBudgetError, ValidationError) as exc:
        reason = exc.reason if isinstance(exc, ResourceBudgetError) else "invalid"
        add("povm", f"skip:{reason}")
    return rows


def cmd_verify(cfg: ExperimentConfig, fmt: str, out_path: str | None, jobs: int) -> int:
    ch = resolve_channel(cfg)
    budgets = resolve_budgets(cfg)
    rows: list[dict] = []
    for n in cfg.n_grid:
        rows.extend(_verify_point(ch, cfg, n, budgets))
    _emit_table(rows, _VERIFY_COLUMNS, fmt, out_path)
    hard_failures = [
        r for r in rows if r["status"] == "fail" and r["check"] in _HARD_CHECKS
    ]
    return 3 if hard_failures else 0


def cmd_simulate(cfg: ExperimentConfig, fmt: str, out_path: str | None, jobs: int) -> int:
    ch = resolve_channel(cfg)
    budgets = resolve_budgets(cfg)
    results = run_grid(ch, cfg, budgets=budgets, jobs=jobs)
    _emit_table([r.csv_values() for r in results], CSV_COLUMNS, fmt, out_path)
    return 0


def cmd_compare(cfg: ExperimentConfig, fmt: str, out_path: str | None, jobs: int) -> int:
    ch = resolve_channel(cfg)
    budgets = resolve_budgets(cfg)
    results = run_grid(ch, cfg, variants=("rank_one", "subspace", "pgm"),
                       budgets=budgets, jobs=jobs)
    _emit_table([r.csv_values() for r in results], CSV_COLUMNS, fmt, out_path)
    return 0


_COMMANDS = {
    "capacity": cmd_capacity,
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cqdec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "report"), default="csv")
        p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_experiment_config(args.config)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, seed=args.seed)
        return _COMMANDS[args.command](cfg, args.format, args.out, max(1, args.jobs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except ResourceBudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return 2
    except CqdecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
