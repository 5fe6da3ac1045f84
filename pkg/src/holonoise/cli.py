"""
Command-line front end.

Subcommands::

    holonoise gate-check   verify the loop areas and the composed holonomy
    holonoise analytic     closed-form averaged state, purity and fidelity
    holonoise mc-run       one Monte Carlo ensemble
    holonoise sweep        analytic + Monte Carlo table over a parameter grid
    holonoise ou-selftest  moment/autocorrelation checks of the noise sampler

Parameters come from a ``key = value`` file (``--config``) and are
overridden by flags. Exit codes: 0 success, 1 a check failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import dataclass, fields, replace

import numpy as np

from .analytic import (
    ScenarioParams,
    analytic_fidelity,
    analytic_purity,
    averaged_density,
    noise_moments,
)
from .holonomy import (
    HADAMARD,
    SIGMA_I_TARGET,
    SIGMA_II_TARGET,
    DomainError,
    LoopPair,
    ideal_gate,
    sigma_I,
    sigma_II,
)
from .montecarlo import MCConfig, run_ensemble
from .ou import OUParams, ou_selftest
from .qubit import QubitState, purity

__all__ = ["RunConfig", "SweepSpec", "ConfigError", "load_config", "main"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    lx: float = 1.0
    ly: float = 1.0
    sigma_x: float = 1e-3
    gamma_x: float = 10.0
    sigma_y: float = 1e-3
    gamma_y: float = 10.0
    phi: float | None = None
    xi: float = 0.0
    chi: float = 0.0
    c0_re: float | None = None
    c0_im: float | None = None
    c1_re: float | None = None
    c1_im: float | None = None
    trajectories: int = 100_000
    grid_steps: int = 1024
    seed: int = 12345
    workers: str = "1"
    output_path: str | None = None
    format: str = "csv"

    def state(self) -> QubitState:
        amps = (self.c0_re, self.c0_im, self.c1_re, self.c1_im)
        if all(a is None for a in amps):
            return QubitState.from_angles(0.0 if self.phi is None else self.phi, self.xi, self.chi)
        if self.phi is not None:
            raise ConfigError("give either phi/xi/chi or raw amplitudes, not both")
        c0 = complex(self.c0_re or 0.0, self.c0_im or 0.0)
        c1 = complex(self.c1_re or 0.0, self.c1_im or 0.0)
        norm = math.sqrt(abs(c0) ** 2 + abs(c1) ** 2)
        if abs(norm - 1.0) > 1e-6:
            raise ConfigError(f"amplitudes have norm {norm!r}; expected 1")
        if abs(norm - 1.0) > 1e-12:
            warnings.warn(f"renormalizing amplitudes (norm {norm!r})", stacklevel=2)
        return QubitState(c0 / norm, c1 / norm)

    def scenario(self) -> ScenarioParams:
        return ScenarioParams(
            LoopPair.from_lengths(self.lx, self.ly),
            OUParams(self.sigma_x, self.gamma_x),
            OUParams(self.sigma_y, self.gamma_y),
            self.state(),
        )

    def mc_config(self, scenario: ScenarioParams | None = None) -> MCConfig:
        return MCConfig(scenario or self.scenario(), self.trajectories, self.grid_steps, self.seed)


_INT_KEYS = {"trajectories", "grid_steps", "seed"}
_STR_KEYS = {"workers", "output_path", "format"}
_KEYS = {f.name for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    if key not in _KEYS:
        raise ConfigError(f"unknown configuration key {key!r}")
    if key in _STR_KEYS:
        return raw
    try:
        if key in _INT_KEYS:
            return int(raw, 0)
        return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def load_config(path: str) -> dict:
    """Parse a flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, raw = (part.strip() for part in line.split("=", 1))
            out[key] = _coerce(key, raw)
    return out


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    count: int

    VARIABLES = ("phi", "sigma_x", "sigma_y", "gamma_x", "gamma_y", "lx", "ly")

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        parts = text.split(":")
        if len(parts) != 4:
            raise ConfigError("--sweep expects VAR:START:STOP:COUNT")
        try:
            spec = cls(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
        except ValueError:
            raise ConfigError(f"bad --sweep value {text!r}") from None
        spec.validate()
        return spec

    def validate(self) -> None:
        if self.variable not in self.VARIABLES:
            raise ConfigError(f"cannot sweep {self.variable!r}; choose from {', '.join(self.VARIABLES)}")
        if self.count < 2:
            raise ConfigError("sweep count must be >= 2")
        if not self.start < self.stop:
            raise ConfigError("sweep needs start < stop")
        v, lo = self.variable, self.start
        if v == "lx" and not lo > SIGMA_I_TARGET:
            raise ConfigError("l_x > pi/4 is required over the whole sweep")
        if v in ("ly", "gamma_x", "gamma_y") and not lo > 0:
            raise ConfigError(f"{v} must stay > 0 over the sweep")
        if v in ("sigma_x", "sigma_y") and lo < 0:
            raise ConfigError(f"{v} must stay >= 0 over the sweep")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _emit(rows: list[dict], fmt: str, path: str | None) -> None:
    if fmt == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(rows[0]))
        for row in rows:
            writer.writerow([_fmt(v) for v in row.values()])
        text = buf.getvalue()
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gate_check(cfg: RunConfig) -> int:
    loops = LoopPair.from_lengths(cfg.lx, cfg.ly)
    res_I = abs(sigma_I(loops.loop_I) - SIGMA_I_TARGET)
    res_II = abs(sigma_II(loops.loop_II) - SIGMA_II_TARGET)
    res_gate = float(np.max(np.abs(ideal_gate(loops) + 1j * HADAMARD)))
    ok = res_I < 1e-12 and res_II < 1e-12 and res_gate < 1e-12
    print(f"l_x={cfg.lx!r} d_x={loops.dx!r} l_y={cfg.ly!r} d_y={loops.dy!r}")
    print(f"|Sigma_I - pi/4|  = {res_I:.3e}")
    print(f"|Sigma_II - pi/2| = {res_II:.3e}")
    print(f"max|Gamma(C_II) Gamma(C_I) + i H_0| = {res_gate:.3e}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def _analytic_row(s: ScenarioParams) -> dict:
    m = noise_moments(s)
    rho = averaged_density(s).mat
    pur, fid = analytic_purity(s), analytic_fidelity(s)
    return {
        "Fx": m.Fx,
        "Fy": m.Fy,
        "combined_x": m.combined_x,
        "combined_y": m.combined_y,
        "mean_alpha": m.mean_alpha,
        "mean_beta": m.mean_beta,
        "rho00": rho[0, 0].real,
        "rho01_re": rho[0, 1].real,
        "rho01_im": rho[0, 1].imag,
        "purity_analytic": pur,
        "fidelity_analytic": fid,
        "sqrt_fidelity": math.sqrt(fid) if fid >= 0 else None,
        "purity_of_rho_bar": purity(rho),
        "two_f_minus_one": 2.0 * fid - 1.0,
    }


def cmd_analytic(cfg: RunConfig) -> int:
    _emit([_analytic_row(cfg.scenario())], cfg.format, cfg.output_path)
    return 0


def cmd_mc_run(cfg: RunConfig) -> int:
    s = cfg.scenario()
    res = run_ensemble(cfg.mc_config(s), workers=cfg.workers)
    rho = res.rho_bar.mat
    row = {
        "rho00": rho[0, 0].real,
        "rho01_re": rho[0, 1].real,
        "rho01_im": rho[0, 1].imag,
        "rho11": rho[1, 1].real,
        "purity_mc": res.purity_mc,
        "purity_mc_err": res.purity_stderr,
        "fidelity_mc": res.fidelity_mc,
        "fidelity_mc_err": res.fidelity_stderr,
        "linear_law_residual": res.linear_law_residual,
        "linear_law_err": res.linear_law_stderr,
        "purity_analytic": analytic_purity(s),
        "fidelity_analytic": analytic_fidelity(s),
        "mean_alpha": res.mean_alpha,
        "mean_beta": res.mean_beta,
        "mean_alpha_sq": res.mean_alpha_sq,
        "n_traj": res.n,
        "seed": cfg.seed,
    }
    _emit([row], cfg.format, cfg.output_path)
    err = sys.stderr
    print(f"rho_bar = [[{rho[0, 0]:.10f}, {rho[0, 1]:.10f}],", file=err)
    print(f"           [{rho[1, 0]:.10f}, {rho[1, 1]:.10f}]]", file=err)
    print(f"purity   = {res.purity_mc:.10f} +/- {res.purity_stderr:.2e}  (analytic {row['purity_analytic']:.10f})", file=err)
    print(f"fidelity = {res.fidelity_mc:.10f} +/- {res.fidelity_stderr:.2e}  (analytic {row['fidelity_analytic']:.10f})", file=err)
    print(f"(I - 1) - 2(F - 1) = {res.linear_law_residual:.3e} +/- {res.linear_law_stderr:.2e}", file=err)
    return 0


_SWEEP_COLUMNS = (
    "purity_analytic",
    "fidelity_analytic",
    "purity_mc",
    "purity_mc_err",
    "fidelity_mc",
    "fidelity_mc_err",
    "two_f_minus_one_mc",
    "n_traj",
    "seed",
)


def sweep_rows(cfg: RunConfig, spec: SweepSpec) -> list[dict]:
    rows = []
    for value in spec.values():
        point = replace(cfg, **{spec.variable: float(value)})
        s = point.scenario()
        row = {spec.variable: float(value), "purity_analytic": analytic_purity(s), "fidelity_analytic": analytic_fidelity(s)}
        if cfg.trajectories > 0:
            res = run_ensemble(point.mc_config(s), workers=cfg.workers)
            row.update(
                purity_mc=res.purity_mc,
                purity_mc_err=res.purity_stderr,
                fidelity_mc=res.fidelity_mc,
                fidelity_mc_err=res.fidelity_stderr,
                two_f_minus_one_mc=2.0 * res.fidelity_mc - 1.0,
                n_traj=res.n,
                seed=cfg.seed,
            )
        else:
            row.update({k: None for k in _SWEEP_COLUMNS[2:]})
            row["n_traj"] = 0
            row["seed"] = cfg.seed
        rows.append(row)
    return rows


def cmd_sweep(cfg: RunConfig, spec: SweepSpec | None) -> int:
    if spec is None:
        raise ConfigError("sweep needs --sweep VAR:START:STOP:COUNT")
    rows = sweep_rows(cfg, spec)
    _emit(rows, cfg.format, cfg.output_path)
    return 0


def cmd_ou_selftest(cfg: RunConfig, n_paths: int | None, expected_bandwidth: float | None) -> int:
    ok = True
    for label, params in (("x", OUParams(cfg.sigma_x, cfg.gamma_x)), ("y", OUParams(cfg.sigma_y, cfg.gamma_y))):
        length = cfg.lx if label == "x" else cfg.ly
        checks = ou_selftest(
            params,
            n_paths=n_paths or cfg.trajectories,
            n_steps=cfg.grid_steps,
            length=length,
            seed=cfg.seed,
            expected_bandwidth=expected_bandwidth,
        )
        print(f"# plane {label}: variance={params.variance!r} bandwidth={params.bandwidth!r}")
        for c in checks:
            print(c.line())
            ok &= c.passed
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key = value configuration file")
    common.add_argument("--out", dest="output_path", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--seed", type=lambda s: int(s, 0))
    common.add_argument("--trajectories", type=int)
    common.add_argument("--grid-steps", dest="grid_steps", type=int)
    common.add_argument("--workers", help="process count or 'max'")
    for name in ("lx", "ly", "sigma_x", "gamma_x", "sigma_y", "gamma_y", "phi", "xi", "chi", "c0_re", "c0_im", "c1_re", "c1_im"):
        common.add_argument("--" + name.replace("_", "-"), dest=name, type=float)

    parser = argparse.ArgumentParser(prog="holonoise", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gate-check", parents=[common], help="verify loop areas and the composed holonomy")
    sub.add_parser("analytic", parents=[common], help="closed-form averaged state, purity and fidelity")
    sub.add_parser("mc-run", parents=[common], help="run one Monte Carlo ensemble")
    p = sub.add_parser("sweep", parents=[common], help="tabulate purity/fidelity over a parameter grid")
    p.add_argument("--sweep", metavar="VAR:START:STOP:COUNT")
    p = sub.add_parser("ou-selftest", parents=[common], help="statistical checks of the OU sampler")
    p.add_argument("--paths", type=int, help="number of paths (default: --trajectories)")
    p.add_argument("--expected-bandwidth", type=float, help="bandwidth assumed by the expectations (sensitivity check)")
    return parser


def _resolve_config(args) -> RunConfig:
    values = load_config(args.config) if args.config else {}
    for key in _KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = str(flag) if key in _STR_KEYS else flag
    cfg = RunConfig(**values)
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {cfg.format!r}")
    if cfg.trajectories < 0 or cfg.grid_steps < 1:
        raise ConfigError("trajectories must be >= 0 and grid_steps >= 1")
    if cfg.workers != "max" and not cfg.workers.isdigit():
        raise ConfigError(f"workers must be a positive integer or 'max', got {cfg.workers!r}")
    return cfg


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
        if args.command == "gate-check":
            return cmd_gate_check(cfg)
        if args.command == "analytic":
            return cmd_analytic(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg, SweepSpec.parse(args.sweep) if args.sweep else None)
        if cfg.trajectories < 1 and args.command == "mc-run":
            raise ConfigError("mc-run needs trajectories >= 1")
        if args.command == "mc-run":
            return cmd_mc_run(cfg)
        return cmd_ou_selftest(cfg, args.paths, args.expected_bandwidth)
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
