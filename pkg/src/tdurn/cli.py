"""Command-line driver: ``tdurn {classify,simulate,ensemble,verify}``.

Settings come from an optional flat ``key = value`` file (``--config``) and
are overridden by flags.  Keys are the :class:`RunConfig` field names plus the
family parameters ``c``, ``a`` and ``r``.  Errors go to stderr prefixed with
``error[<kind>]:``; exit status is 2 for configuration errors, 1 for a failed
``verify`` and 0 otherwise.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .ensemble import EnsembleConfig, run_ensemble
from .sequence import Family, SequenceSpec, read_custom_table
from .theory import classify, verify_suite
from .urn import simulate, write_path_csv

SUBCOMMANDS = ("classify", "simulate", "ensemble", "verify")
PARAM_KEYS = ("c", "a", "r")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    family: str = "constant"
    params: dict = field(default_factory=dict)
    tau0: float = 2.0
    t0: float = 1.0
    table: Optional[str] = None
    horizon: int = 1000
    trials: int = 1000
    seed: int = 0
    eps: float = 1e-3
    checkpoints: Optional[tuple] = None
    mono_cut: float = 0.5
    out: Optional[str] = None
    format: str = "json"
    dump_paths: bool = False
    dump_dir: str = "paths"
    workers: int = 1
    quick: bool = False
    evidence: bool = False

    def spec(self) -> SequenceSpec:
        try:
            if self.family == Family.CUSTOM.value:
                if not self.table:
                    raise ConfigError("family=custom needs table=<path>")
                return read_custom_table(self.table, self.tau0)
            return SequenceSpec.from_name(self.family, self.tau0, **self.params)
        except ConfigError:
            raise
        except (ValueError, KeyError, TypeError, OSError) as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        if self.format not in ("json", "csv"):
            raise ConfigError("format must be json or csv")
        if self.format == "csv" and self.subcommand != "ensemble":
            raise ConfigError("csv output is only available for ensemble")
        if self.workers < 0:
            raise ConfigError("workers must be >= 0")
        if self.subcommand in ("classify", "verify"):
            if self.subcommand == "classify":
                self.spec()
            return
        spec = self.spec()
        if not 0.0 <= self.t0 <= spec.tau0:
            raise ConfigError(f"t0 must lie in [0, tau0] = [0, {spec.tau0}]")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if self.subcommand == "ensemble":
            try:
                self.ensemble_config(spec)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    def ensemble_config(self, spec: SequenceSpec) -> EnsembleConfig:
        return EnsembleConfig(spec, self.t0, self.horizon, self.trials, base_seed=self.seed, eps=self.eps,
                              checkpoints=self.checkpoints, mono_cut=self.mono_cut, dump_paths=self.dump_paths,
                              dump_dir=self.dump_dir)


_CASTS = {
    "tau0": float, "t0": float, "horizon": int, "trials": int, "seed": int, "eps": float, "mono_cut": float,
    "workers": int, "c": float, "a": float, "r": float,
}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_checkpoints(text: str) -> Optional[tuple]:
    text = text.strip()
    if not text:
        return None
    try:
        return tuple(sorted(int(x) for x in text.split(",") if x.strip()))
    except ValueError as exc:
        raise ConfigError(f"bad checkpoints {text!r}") from exc


def _coerce(key: str, value):
    if value is None:
        return None
    try:
        if key in _CASTS:
            return _CASTS[key](value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {value!r}") from exc
    if key == "checkpoints":
        return _parse_checkpoints(value) if isinstance(value, str) else value
    if key in ("dump_paths", "quick", "evidence") and isinstance(value, str):
        return _parse_bool(value)
    return value


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name for f in fields(RunConfig)} | set(PARAM_KEYS)
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in known or key == "params":
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def write_config_file(path, echo: dict) -> None:
    Path(path).write_text("".join(f"{k} = {v}\n" for k, v in echo.items()), encoding="utf-8")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("sequence")
    g.add_argument("--config", help="flat key = value file; flags override it")
    g.add_argument("--family", choices=[f.value for f in Family])
    g.add_argument("--c", type=float, help="Constant: sigma_n = c")
    g.add_argument("--a", type=float, help="LogPower / PowerLaw / DecayPower exponent")
    g.add_argument("--r", type=float, help="Geometric ratio")
    g.add_argument("--tau0", type=float)
    g.add_argument("--table", help="custom family: two-column n / sigma file")
    g = common.add_argument_group("run")
    g.add_argument("--t0", type=float, help="initial white mass")
    g.add_argument("--horizon", type=int)
    g.add_argument("--trials", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--eps", type=float, help="domination threshold (default 1e-3)")
    g.add_argument("--checkpoints", help="comma-separated horizons (default N/4,N/2,N)")
    g.add_argument("--mono-cut", dest="mono_cut", type=float, help="monopoly proxy cut as a fraction of N")
    g.add_argument("--workers", type=int, help="processes for ensembles (0 = all CPUs)")
    g = common.add_argument_group("output")
    g.add_argument("--out", help="write the report here instead of stdout")
    g.add_argument("--format", choices=("json", "csv"))
    g.add_argument("--dump-paths", dest="dump_paths", action="store_const", const=True)
    g.add_argument("--dump-dir", dest="dump_dir")

    parser = _Parser(prog="tdurn", description="Time-dependent Polya urn toolkit.")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)
    p = sub.add_parser("classify", parents=[common], help="regime verdict for a sequence")
    p.add_argument("--evidence", action="store_const", const=True, help="include condition evidence")
    sub.add_parser("simulate", parents=[common], help="one trajectory summary")
    sub.add_parser("ensemble", parents=[common], help="Monte Carlo ensemble report")
    p = sub.add_parser("verify", parents=[common], help="run the oracle suite")
    p.add_argument("--quick", action="store_const", const=True, help="reduced trial counts")
    return parser


def resolve_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    merged = {}
    if ns.config:
        merged.update(read_config_file(ns.config))
    for key, value in vars(ns).items():
        if key in ("config", "subcommand") or value is None:
            continue
        merged[key] = value
    params = {k: _coerce(k, merged.pop(k)) for k in PARAM_KEYS if k in merged}
    kwargs = {k: _coerce(k, v) for k, v in merged.items()}
    kwargs.pop("subcommand", None)
    cfg = RunConfig(subcommand=ns.subcommand, params=params, **kwargs)
    cfg.family = cfg.family.lower()
    cfg.validate()
    return cfg


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    if hasattr(o, "tolist"):
        return o.tolist()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(type(o).__name__)


def run(cfg: RunConfig) -> int:
    if cfg.subcommand == "classify":
        _emit(classify(cfg.spec()).to_json(evidence=cfg.evidence), cfg.out)
        return 0
    if cfg.subcommand == "simulate":
        spec = cfg.spec()
        summary = simulate(spec, cfg.t0, cfg.horizon, cfg.seed, record_path=cfg.dump_paths)
        if cfg.dump_paths:
            Path(cfg.dump_dir).mkdir(parents=True, exist_ok=True)
            write_path_csv(Path(cfg.dump_dir) / f"path_seed{cfg.seed}.csv", summary)
        doc = summary.to_dict()
        doc["spec"] = spec.describe()
        _emit(_json(doc), cfg.out)
        return 0
    if cfg.subcommand == "ensemble":
        report = run_ensemble(cfg.ensemble_config(cfg.spec()), workers=cfg.workers)
        if cfg.table:
            report.provenance["config"]["table"] = cfg.table
        _emit(report.to_csv() if cfg.format == "csv" else report.to_json(), cfg.out)
        return 0
    results = verify_suite(quick=cfg.quick, seed=cfg.seed, workers=cfg.workers)
    _emit(_json({"passed": all(r.passed for r in results), "checks": [r.to_dict() for r in results]}), cfg.out)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("error[verify]: failed checks: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    try:
        cfg = resolve_config(sys.argv[1:] if argv is None else list(argv))
    except ConfigError as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg)
    except (ValueError, OSError) as exc:
        print(f"error[config]: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
