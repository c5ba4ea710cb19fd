"""Command-line front end.

Exit codes: 0 success, 1 parse/input error, 2 plant violates the standing
assumptions, 3 numerical failure (including a failed oracle bound check),
4 dense-computation budget exceeded.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .controller import ControllerRealization, feedback_to_youla
from .errors import AssumptionError, InstabilityError, RegretCtlError
from .evaluation import FrequencyGrid, noncausal_report, norm_report
from .oracle import finite_horizon_regret
from .synthesis import optimal_gamma, synthesize_h2, synthesize_hinf
from .sysmodel import StateSpacePlant, absorb_weights, validate_assumptions

KINDS = ("ro", "ro-sc", "h2", "hinf")
ORACLE_SLACK = 0.05
MONOTONE_SLACK = 1e-9


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    plant: Path
    gamma_tol: float = 1e-4
    grid: int = 1024
    horizon: int = 60
    kind: str = "ro"
    out: Path | None = None
    controller: Path | None = None

    def validate(self):
        if not self.plant.exists():
            raise io.ParseError(f"plant file {self.plant} does not exist")
        if self.controller is not None and not self.controller.exists():
            raise io.ParseError(f"controller file {self.controller} does not exist")
        if not 0 < self.gamma_tol < 0.1:
            raise io.ParseError("--gamma-tol must lie in (0, 0.1)")
        try:
            FrequencyGrid(self.grid)
        except ValueError as exc:
            raise io.ParseError(str(exc)) from exc
        if self.horizon < 1:
            raise io.ParseError("--horizon must be positive")


def _load(cfg: RunConfig) -> StateSpacePlant:
    plant = absorb_weights(io.load_plant(cfg.plant))
    report = validate_assumptions(plant)
    if not report.ok:
        raise AssumptionError(f"standing assumptions violated: {report.describe()}", report)
    return plant


def _to_physical(K: ControllerRealization, plant: StateSpacePlant) -> ControllerRealization:
    S = plant.input_scaling
    if np.allclose(S, np.eye(plant.m)):
        return K
    return ControllerRealization(K.A, K.B, S @ K.C, S @ K.D, kind=K.kind, gamma=K.gamma, form=K.form)


def _to_normalized(K: ControllerRealization, plant: StateSpacePlant) -> ControllerRealization:
    S = plant.input_scaling
    if np.allclose(S, np.eye(plant.m)):
        return K
    Si = np.linalg.inv(S)
    return ControllerRealization(K.A, K.B, Si @ K.C, Si @ K.D, kind=K.kind, gamma=K.gamma, form=K.form)


def _youla(plant, K: ControllerRealization) -> ControllerRealization:
    return K if K.form == "youla" else feedback_to_youla(plant, K)


def synthesize_kind(plant: StateSpacePlant, kind: str, tol: float, grid: int = 1024):
    """Return ``(controller, diagnostics)`` for one controller kind."""
    if kind in ("ro", "ro-sc"):
        res = optimal_gamma(plant, tol=tol, strictly_causal=(kind == "ro-sc"))
        diag = {
            "gamma": res.gamma,
            "gamma_squared": res.gamma_squared,
            "hankel_norm": res.diagnostics.get("hankel_norm", 0.0),
            "feasibility_margin": res.feasibility_margin,
            "bisection_iterations": res.iterations,
            "residuals": res.diagnostics.get("residuals", {}),
            "spectral_radii": res.diagnostics.get("spectral_radii", {}),
            "internally_stabilizing_feedback_form": res.feedback is not None,
        }
        return res.controller, diag
    if kind == "h2":
        return synthesize_h2(plant), {}
    if kind == "hinf":
        K = synthesize_hinf(plant, tol=tol, grid=grid)
        return K, {"level": K.gamma, **K.metadata}
    raise io.ParseError(f"unknown controller kind {kind!r}")


def cmd_synthesize(cfg: RunConfig) -> int:
    plant = _load(cfg)
    K, diag = synthesize_kind(plant, cfg.kind, cfg.gamma_tol, cfg.grid)
    diag["input_scaling"] = plant.input_scaling
    out = cfg.out or Path(f"controller_{cfg.kind}.json")
    io.save_controller(_to_physical(K, plant), out, diag)
    msg = f"wrote {cfg.kind} controller ({K.n_states} states) to {out}"
    if "gamma_squared" in diag:
        msg += f"; optimal regret {diag['gamma_squared']:.6g}"
    print(msg)
    return 0


def compare_rows(plant: StateSpacePlant, grid: int, tol: float):
    """Metrics for NC, RO, H2, Hinf plus the ordering checks."""
    nc = noncausal_report(plant, grid)
    reports = {}
    for name, kind in (("RO", "ro"), ("H2", "h2"), ("Hinf", "hinf")):
        K, _ = synthesize_kind(plant, kind, tol, grid)
        reports[name] = norm_report(plant, _youla(plant, K), grid)
    rows = [("NC", nc.frobenius_sq, nc.operator_sq, 0.0)]
    rows += [(k, r.frobenius_sq, r.operator_sq, r.regret) for k, r in reports.items()]
    causal = list(reports)
    checks = {
        "H2 minimizes frobenius_sq": min(causal, key=lambda k: reports[k].frobenius_sq) == "H2",
        "Hinf minimizes operator_sq": min(causal, key=lambda k: reports[k].operator_sq) == "Hinf",
        "RO minimizes regret": min(causal, key=lambda k: reports[k].regret) == "RO",
        "NC lower-bounds frobenius_sq": all(nc.frobenius_sq <= r.frobenius_sq for r in reports.values()),
        "NC lower-bounds operator_sq": all(nc.operator_sq <= r.operator_sq for r in reports.values()),
    }
    return rows, checks


def cmd_compare(cfg: RunConfig) -> int:
    plant = _load(cfg)
    rows, checks = compare_rows(plant, cfg.grid, cfg.gamma_tol)
    out = cfg.out or Path("compare.csv")
    io.write_table(rows, out)
    width = max(len(r[0]) for r in rows)
    print(f"{'':{width}}  {'frobenius_sq':>14}  {'operator_sq':>14}  {'regret':>14}")
    for name, fro, op, reg in rows:
        print(f"{name:{width}}  {fro:14.6g}  {op:14.6g}  {reg:14.6g}")
    for label, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {label}")
    print(f"wrote {out}")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    plant = _load(cfg)
    K, _ = synthesize_kind(plant, cfg.kind, cfg.gamma_tol, cfg.grid)
    rep = norm_report(plant, _youla(plant, K), cfg.grid)
    out = cfg.out or Path(f"sweep_{cfg.kind}.csv")
    io.write_sweep(rep.per_frequency, out)
    print(f"wrote {cfg.grid} rows to {out}; max regret eigenvalue {np.max(rep.per_frequency['regret_eig']):.6g}")
    return 0


def oracle_horizons(horizon: int) -> list[int]:
    return sorted({h for h in (20, 40) if h < horizon} | {horizon})


def cmd_oracle(cfg: RunConfig) -> int:
    plant = _load(cfg)
    if cfg.controller is not None:
        K = _to_normalized(io.load_controller(cfg.controller), plant)
        K.check_plant(plant)
        Q = _youla(plant, K)
        if K.gamma is not None and K.kind.startswith("RO"):
            gamma_sq = float(K.gamma) ** 2
        else:
            gamma_sq = optimal_gamma(plant, tol=cfg.gamma_tol).gamma_squared
    else:
        res = optimal_gamma(plant, tol=cfg.gamma_tol)
        Q, gamma_sq = res.controller, res.gamma_squared
    if Q.spectral_radius >= 1.0:
        raise InstabilityError(f"controller is unstable (spectral radius {Q.spectral_radius:.6g})")
    horizons = oracle_horizons(cfg.horizon)
    values = [finite_horizon_regret(plant, Q, N, strictly_causal=Q.strictly_causal).regret for N in horizons]
    bound_ok = values[-1] <= gamma_sq * (1 + ORACLE_SLACK)
    monotone = all(b >= a - MONOTONE_SLACK for a, b in zip(values, values[1:]))
    report = {
        "gamma_squared": gamma_sq,
        "horizons": horizons,
        "regret": values,
        "ratio_to_gamma_squared": [v / gamma_sq for v in values],
        "bound_ok": bound_ok,
        "monotone": monotone,
    }
    for N, v in zip(horizons, values):
        print(f"N={N:4d}  regret={v:.10g}  ratio={v / gamma_sq:.6f}")
    print(f"gamma*^2={gamma_sq:.10g}  bound {'PASS' if bound_ok else 'FAIL'}  "
          f"monotone {'PASS' if monotone else 'FAIL'}")
    if cfg.out is not None:
        cfg.out.write_text(json.dumps(report, indent=2) + "\n")
    return 0 if (bound_ok and monotone) else 3


COMMANDS = {
    "synthesize": cmd_synthesize,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="regretctl", description="Regret-optimal measurement-feedback control toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_ in (
        ("synthesize", "synthesize a controller and write it as JSON"),
        ("compare", "NC/RO/H2/Hinf summary table as CSV"),
        ("sweep", "per-frequency metrics of one controller as CSV"),
        ("oracle", "finite-horizon regret check of a controller"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--plant", required=True, type=Path)
        s.add_argument("--gamma-tol", type=float, default=1e-4)
        s.add_argument("--grid", type=int, default=1024)
        s.add_argument("--horizon", type=int, default=60)
        s.add_argument("--kind", choices=KINDS, default="ro")
        s.add_argument("--out", type=Path, default=None)
        if name == "oracle":
            s.add_argument("--controller", type=Path, default=None,
                           help="controller JSON (default: synthesize the causal RO controller)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        command=args.command,
        plant=args.plant,
        gamma_tol=args.gamma_tol,
        grid=args.grid,
        horizon=args.horizon,
        kind=args.kind,
        out=args.out,
        controller=getattr(args, "controller", None),
    )
    try:
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except RegretCtlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
