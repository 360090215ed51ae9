"""Command-line driver: build psi for a density pair and write bins.csv / report.json."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

from . import distributions as dist
from .construction import ConstructionError
from .distributions import AssumptionViolation, DensitySpec
from .pipeline import (
    EXAMPLE_BOUND,
    EXAMPLE_EPSILON,
    EXAMPLE_N,
    EXAMPLE_S,
    PAIRS,
    build_auto,
    build_examples,
    pair_densities,
)
from .svg import line_chart
from .verification import DEFAULT_PROBES, BinTables, bin_tables, build_report

log = logging.getLogger("dualdensity")

EXIT_OK, EXIT_USAGE, EXIT_CLAIMS = 0, 1, 2
CSV_HEADER = ["space", "l", "center", "target_mass", "approx_mass", "exact_mass", "abs_error"]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    pair: str = "gaussian-gaussian"
    mode: str = "examples"
    epsilon: float | None = None
    epsilon_star: float | None = None
    n: int = EXAMPLE_N
    s: int = EXAMPLE_S
    xb: float = EXAMPLE_BOUND
    pb: float = EXAMPLE_BOUND
    probes_per_bin: int = DEFAULT_PROBES
    out: Path = Path("out")
    emit_svg: bool = False
    fx: DensitySpec | None = None  # only for pair == "custom"
    fp: DensitySpec | None = None

    def validate(self):
        if self.pair != "custom" and self.pair not in PAIRS:
            raise ConfigError(f"unknown pair {self.pair!r}; choose from {', '.join(PAIRS)} or custom")
        if self.pair == "custom" and (self.fx is None or self.fp is None):
            raise ConfigError("pair 'custom' needs both fx and fp")
        if self.mode == "auto":
            if self.epsilon is None and self.epsilon_star is None:
                raise ConfigError("auto mode needs --epsilon (or --epsilon-star)")
            eps = self.epsilon if self.epsilon is not None else self.epsilon_star / 2
            if not 0 < eps < 1:
                raise ConfigError("auto mode requires epsilon in (0, 1)")
        elif self.mode == "examples":
            if not 1 <= self.n <= 14:
                raise ConfigError("examples mode requires n in [1, 14]")
            if self.s < 1:
                raise ConfigError("examples mode requires s >= 1")
            if not (self.xb > 0 and self.pb > 0):
                raise ConfigError("bounds must be positive")
            if self.epsilon is not None and not self.epsilon > 0:
                raise ConfigError("epsilon must be positive")
        else:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.probes_per_bin < 2:
            raise ConfigError("probes-per-bin must be >= 2")


def parse_density(text: str) -> DensitySpec:
    """'gaussian:MEAN,STD', 'exponential:RATE,START' or 'mixture:W,M,S;W,M,S;...'."""
    try:
        kind, _, rest = text.partition(":")
        if kind == "gaussian":
            mean, std = (float(v) for v in rest.split(","))
            return dist.gaussian(mean, std)
        if kind == "exponential":
            rate, start = (float(v) for v in rest.split(","))
            return dist.exponential(rate, start)
        if kind == "mixture":
            comps = [tuple(float(v) for v in c.split(",")) for c in rest.split(";") if c]
            w, m, s = zip(*comps)
            return dist.gaussian_mixture(w, m, s)
    except ValueError as e:
        raise ConfigError(f"bad density {text!r}: {e}") from None
    raise ConfigError(f"bad density {text!r}")


def _fmt(v) -> str:
    return format(float(v), ".17g")


def write_bins_csv(path: Path, tables: BinTables, grid) -> None:
    J = grid.J
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for i in range(2 * J):
            l = i - J
            tgt, apx = tables.position_target[i], tables.position_approx[i]
            w.writerow(["position", l, _fmt((l + 0.5) * grid.dx), _fmt(tgt), _fmt(apx),
                        _fmt(tables.position_fine[i]), _fmt(abs(tgt - apx))])
        for i in range(2 * J):
            l = i - J
            tgt, apx = tables.momentum_target[i], tables.momentum_approx[i]
            w.writerow(["momentum", l, _fmt(l * grid.dp), _fmt(tgt), _fmt(apx),
                        _fmt(tables.momentum_exact[i]), _fmt(abs(tgt - apx))])


def write_svgs(out: Path, pair: str, tables: BinTables, grid) -> list[Path]:
    J = grid.J
    written = []
    xc = [(l + 0.5) * grid.dx for l in range(-J, J)]
    pc = [l * grid.dp for l in range(-J, J)]
    for space, xs, tgt, apx in (
        ("position", xc, tables.position_target, tables.position_approx),
        ("momentum", pc, tables.momentum_target, tables.momentum_approx),
    ):
        doc = line_chart(
            xs, {"target": tgt, "psi": apx},
            title=f"{pair}: {space} bin masses", xlabel="bin center", ylabel="mass per bin",
        )
        p = out / f"fig_{pair}_{space}.svg"
        p.write_text(doc)
        written.append(p)
    return written


def run(config: RunConfig) -> int:
    config.validate()
    if config.pair == "custom":
        d_x, d_p = config.fx, config.fp
    else:
        d_x, d_p = pair_densities(config.pair)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    if config.mode == "examples":
        eps = config.epsilon if config.epsilon is not None else EXAMPLE_EPSILON
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            c = build_examples(d_x, d_p, config.n, config.s, config.xb, config.pb, eps)
        for w in caught:
            log.warning("%s", w.message)
    else:
        c = build_auto(d_x, d_p, config.epsilon, epsilon_star=config.epsilon_star)

    tables = bin_tables(c)
    report = build_report(c, config.probes_per_bin, tables)
    report.extra["pair"] = config.pair
    write_bins_csv(out / "bins.csv", tables, c.grid)
    (out / "report.json").write_text(report.to_json())
    if config.emit_svg:
        write_svgs(out, config.pair, tables, c.grid)

    ok = report.claims_hold
    if config.epsilon_star is not None:
        ok = ok and report.cdf_claims_hold
    log.info("claim1=%.6g claim2=%.6g epsilon=%g", report.claim1_sum, report.claim2_sum, report.epsilon)
    return EXIT_OK if ok else EXIT_CLAIMS


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        values[key.strip().replace("-", "_")] = val.strip()
    return values


_CASTS = {
    "pair": str, "mode": str, "epsilon": float, "epsilon_star": float, "n": int, "s": int,
    "xb": float, "pb": float, "probes_per_bin": int, "out": Path,
    "emit_svg": lambda v: v if isinstance(v, bool) else str(v).lower() in ("1", "true", "yes", "on"),
    "fx": parse_density, "fp": parse_density,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dualdensity",
        description="Build one complex function whose position and momentum densities "
                    "approximate two given distributions.",
    )
    p.add_argument("--pair", help=f"one of {', '.join(PAIRS)}, or custom (with --fx/--fp)")
    p.add_argument("--mode", choices=["auto", "examples"])
    p.add_argument("--epsilon", type=float, help="error budget (auto: required; examples: step-II window)")
    p.add_argument("--epsilon-star", type=float, help="uniform cdf budget (auto mode recipe)")
    p.add_argument("--n", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--xb", type=float)
    p.add_argument("--pb", type=float)
    p.add_argument("--probes-per-bin", type=int)
    p.add_argument("--out")
    p.add_argument("--emit-svg", action="store_true", default=None)
    p.add_argument("--fx", help="custom position density, e.g. gaussian:0,1")
    p.add_argument("--fp", help="custom momentum density, e.g. exponential:1,0")
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    merged = _read_config_file(args.config) if args.config else {}
    for key in _CASTS:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    unknown = set(merged) - set(_CASTS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    kwargs = {}
    for key, val in merged.items():
        try:
            kwargs[key] = _CASTS[key](val)
        except ValueError as e:
            raise ConfigError(f"bad value for {key}: {val!r} ({e})") from None
    return RunConfig(**kwargs)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        config = config_from_args(args)
        return run(config)
    except (ConfigError, AssumptionViolation, ConstructionError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"error: cannot write outputs: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
