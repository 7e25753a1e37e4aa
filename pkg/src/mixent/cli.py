"""Command-line front end: config ingestion, seeded runs, result persistence.

One tool, five subcommands (gibbs | collide | mix-sweep | appendix | verify).
A run is described by one JSON config file plus flag overrides; every run
writes its outputs plus a manifest with the resolved config, version, wall
times, and sha256 digests of each output file.

Exit codes: 0 success, 1 verification failure, 2 invalid input, 3 resource
cap exceeded.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .collisions import (
    CollisionSpec,
    run_collision_sequence,
)
from .combinatorics import (
    classical_mixing_increase_formula,
    insertion_factor,
    typicality_entropy_check,
)
from .errors import CapExceededError, MixentError
from .mixing import convergence_sweep, records_to_csv
from .serialize import (
    distribution_from_json,
    matrix_from_json,
    matrix_to_json,
)
from .states import (
    ClassicalDistribution,
    DensityOperator,
    HermitianOperator,
    InverseTemperature,
    UnitaryOperator,
    gibbs_state,
    random_haar_unitary,
    random_hermitian,
    relative_entropy,
    von_neumann_entropy,
)
from .verify import VerifyConfig, run_acceptance

LN2 = math.log(2.0)

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_INVALID = 2
EXIT_CAP = 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config resolution
# ---------------------------------------------------------------------------

class ExperimentConfig:
    """Resolved run description: defaults < config file < command-line flags."""

    def __init__(self, command: str, seed, units: str, dense_cap: int,
                 out_dir: Path, params: dict):
        if units not in ("nats", "bits"):
            raise ConfigError(f"units must be 'nats' or 'bits', got {units!r}")
        if dense_cap < 1:
            raise ConfigError(f"dense_cap must be positive, got {dense_cap}")
        self.command = command
        self.seed = None if seed is None else int(seed)
        self.units = units
        self.dense_cap = int(dense_cap)
        self.out_dir = Path(out_dir)
        self.params = params

    def require_seed(self) -> int:
        if self.seed is None:
            raise ConfigError(
                "this run draws random instances: provide a seed "
                "(--seed or config 'seed')"
            )
        return self.seed

    def snapshot(self) -> dict:
        return {
            "seed": self.seed,
            "units": self.units,
            "dense_cap": self.dense_cap,
            "command": {"name": self.command, "params": self.params},
        }


def resolve_config(args) -> ExperimentConfig:
    base = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    command = base.get("command", {})
    if command and not isinstance(command, dict):
        raise ConfigError("config 'command' must be an object")
    name = command.get("name")
    if name is not None and name != args.subcommand:
        raise ConfigError(
            f"config names command {name!r} but subcommand {args.subcommand!r} was invoked"
        )
    params = dict(command.get("params", {}))
    for key, value in vars(args).items():
        if key.startswith("param_") and value is not None:
            params[key[len("param_"):]] = value

    seed = args.seed if args.seed is not None else base.get("seed")
    units = args.units if args.units is not None else base.get("units", "nats")
    dense_cap = (
        args.dense_cap if args.dense_cap is not None else base.get("dense_cap", 4096)
    )
    return ExperimentConfig(
        command=args.subcommand,
        seed=seed,
        units=units,
        dense_cap=dense_cap,
        out_dir=Path(args.out_dir),
        params=params,
    )


def _load_matrix_param(params: dict, key: str):
    """A matrix parameter is an inline {dim, re, im} object or a file path."""
    value = params.get(key)
    if value is None:
        return None
    if isinstance(value, str):
        with open(value, encoding="utf-8") as fh:
            value = json.load(fh)
    return matrix_from_json(value)


def _load_state_param(params: dict, key: str):
    """A state is a distribution {p: [...]}, a matrix object, or a file path."""
    value = params.get(key)
    if value is None:
        raise ConfigError(f"missing required parameter {key!r}")
    if isinstance(value, str):
        with open(value, encoding="utf-8") as fh:
            value = json.load(fh)
    if "p" in value:
        return distribution_from_json(value)
    return DensityOperator(matrix_from_json(value))


# ---------------------------------------------------------------------------
# output plumbing
# ---------------------------------------------------------------------------

def _entropy_fields(prefix: str, nats: float, units: str) -> dict:
    fields = {f"{prefix}_nats": nats}
    if units == "bits":
        fields[f"{prefix}_bits"] = nats / LN2
    return fields


def _display(nats: float, units: str) -> str:
    if units == "bits":
        return f"{nats / LN2:.6f} bits"
    return f"{nats:.6f} nats"


class RunWriter:
    """Collects output files and finishes with a digest manifest."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.t0 = time.perf_counter()
        self.outputs = {}
        cfg.out_dir.mkdir(parents=True, exist_ok=True)

    def write_text(self, name: str, text: str):
        path = self.cfg.out_dir / name
        data = text.encode("utf-8")
        path.write_bytes(data)
        self.outputs[name] = hashlib.sha256(data).hexdigest()

    def write_json(self, name: str, obj: dict):
        self.write_text(name, json.dumps(obj, indent=2, sort_keys=True) + "\n")

    def finish(self, timings_ms: dict | None = None):
        manifest = {
            "tool_version": __version__,
            "config": self.cfg.snapshot(),
            "timings_ms": {
                "total": (time.perf_counter() - self.t0) * 1e3,
                **(timings_ms or {}),
            },
            "outputs": self.outputs,
        }
        path = self.cfg.out_dir / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")


def verify_manifest(out_dir: Path) -> bool:
    """Re-hash every output named in a run manifest."""
    manifest = json.loads((out_dir / "manifest.json").read_text(encoding="utf-8"))
    for name, digest in manifest["outputs"].items():
        path = out_dir / name
        if not path.exists():
            return False
        if hashlib.sha256(path.read_bytes()).hexdigest() != digest:
            return False
    return True


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gibbs(cfg: ExperimentConfig) -> int:
    writer = RunWriter(cfg)
    matrix = _load_matrix_param(cfg.params, "hamiltonian")
    if matrix is None:
        raise ConfigError("gibbs needs a 'hamiltonian' parameter")
    if "beta" not in cfg.params:
        raise ConfigError("gibbs needs a 'beta' parameter")
    beta = InverseTemperature(float(cfg.params["beta"]))
    h = HermitianOperator(matrix)
    rho = gibbs_state(h, beta)
    entropy = von_neumann_entropy(rho)
    out = {
        "units": cfg.units,
        "beta": beta.beta,
        "beta_flagged_nonpositive": beta.flagged_nonpositive,
        "state": matrix_to_json(rho.entries),
        **_entropy_fields("entropy", entropy, cfg.units),
    }
    writer.write_json("state.json", out)
    writer.finish()
    print(f"gibbs: d={h.dim} beta={beta.beta} S[rho] = {_display(entropy, cfg.units)}")
    if beta.flagged_nonpositive:
        print("note: beta <= 0, dissipation-positivity claims do not apply")
    return EXIT_OK


def _collide_instance(cfg: ExperimentConfig):
    matrix = _load_matrix_param(cfg.params, "hamiltonian")
    unitary = cfg.params.get("unitary", "haar")
    if matrix is None:
        d = int(cfg.params.get("dim", 0))
        if d < 2:
            raise ConfigError("collide needs 'hamiltonian' or a random-instance 'dim'")
        h = random_hermitian(cfg.require_seed(), d)
    else:
        h = HermitianOperator(matrix)
    if isinstance(unitary, str) and unitary == "haar":
        u = random_haar_unitary(cfg.require_seed() + 1, h.dim)
    else:
        if isinstance(unitary, str):
            with open(unitary, encoding="utf-8") as fh:
                unitary = json.load(fh)
        u = UnitaryOperator(matrix_from_json(unitary))
    return h, u


def cmd_collide(cfg: ExperimentConfig) -> int:
    writer = RunWriter(cfg)
    h, u = _collide_instance(cfg)
    try:
        beta = float(cfg.params["beta"])
        collisions = int(cfg.params["collisions"])
        reservoir = int(cfg.params["reservoir_size"])
    except KeyError as exc:
        raise ConfigError(f"collide needs parameter {exc}") from exc
    spec = CollisionSpec(
        h=h, beta=beta, u=u, collisions=collisions, reservoir_size=reservoir
    )
    ledger = run_collision_sequence(spec)
    writer.write_text("ledger.csv", ledger.to_csv())
    summary = {
        "units": cfg.units,
        "beta": ledger.beta,
        "beta_flagged_nonpositive": ledger.beta <= 0.0,
        "collisions": ledger.collisions,
        "reservoir_size": ledger.reservoir_size,
        "delta_e": ledger.delta_e,
        "commutator_fro": ledger.commutator_fro,
        "identity_residual": ledger.identity_residual,
        **_entropy_fields("dirr_s", ledger.dirr_s, cfg.units),
        **_entropy_fields("s_rel", ledger.s_rel, cfg.units),
        **_entropy_fields("s_rho", ledger.s_rho, cfg.units),
        **_entropy_fields("reservoir_s_info", ledger.reservoir_s_info, cfg.units),
    }
    writer.write_json("summary.json", summary)
    writer.finish()
    print(
        f"collide: beta*DeltaE = {ledger.dirr_s!r} vs S[sigma|rho] = {ledger.s_rel!r} "
        f"(scaled residual {ledger.identity_residual:.3e})"
    )
    print(
        f"collide: {collisions} collisions, reservoir entropy constant at "
        f"{_display(ledger.reservoir_s_info, cfg.units)}"
    )
    return EXIT_OK


def _resolve_n_list(params: dict) -> list:
    if "n_list" in params:
        raw = params["n_list"]
        if isinstance(raw, str):
            raw = [part for part in raw.split(",") if part]
        return [int(x) for x in raw]
    grid = params.get("n_grid")
    if grid:
        start = int(grid.get("start", 1))
        factor = int(grid.get("factor", 2))
        count = int(grid.get("count", 10))
        return [start * factor**k for k in range(count)]
    raise ConfigError("mix-sweep needs 'n_list' or 'n_grid'")


def _gap_plot_svg(records) -> str:
    """Minimal self-contained log-log polyline of gap(n); deterministic bytes."""
    points = [(r.n, r.gap) for r in records if r.gap > 0]
    width, height, margin = 640, 440, 60
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
        f'<rect width="{width}" height="{height}" fill="white"/>\n'
        f'<text x="{width // 2}" y="24" text-anchor="middle" font-size="15">'
        "entropy-of-mixing gap vs n (log-log)</text>\n"
    )
    if len(points) < 2:
        return head + '<text x="60" y="220" font-size="13">no positive gaps to plot</text>\n</svg>\n'
    xs = [math.log10(n) for n, _ in points]
    ys = [math.log10(g) for _, g in points]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    sx = lambda x: margin + (x - x0) / max(x1 - x0, 1e-12) * (width - 2 * margin)
    sy = lambda y: height - margin - (y - y0) / max(y1 - y0, 1e-12) * (height - 2 * margin)
    path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, ys))
    axes = (
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>\n'
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" '
        f'stroke="black"/>\n'
        f'<text x="{width // 2}" y="{height - 18}" text-anchor="middle" '
        f'font-size="13">log10 n in [{x0:.2f}, {x1:.2f}]</text>\n'
        f'<text x="18" y="{height // 2}" font-size="13" transform="rotate(-90 18 '
        f'{height // 2})" text-anchor="middle">log10 gap in [{y0:.2f}, {y1:.2f}]</text>\n'
    )
    return (
        head + axes
        + f'<polyline points="{path}" fill="none" stroke="#1f5fa8" stroke-width="2"/>\n'
        + "</svg>\n"
    )


def cmd_mix_sweep(cfg: ExperimentConfig) -> int:
    writer = RunWriter(cfg)
    sigma = _load_state_param(cfg.params, "sigma")
    rho = _load_state_param(cfg.params, "rho")
    n_list = _resolve_n_list(cfg.params)
    method = cfg.params.get("method", "auto")
    records, summary = convergence_sweep(
        sigma, rho, n_list, method=method, dense_cap=cfg.dense_cap
    )
    writer.write_text("records.csv", records_to_csv(records))
    writer.write_json("extrapolation.json", summary.as_dict())
    plot_lines = ["n,gap_nats"] + [f"{r.n},{r.gap!r}" for r in records]
    writer.write_text("gap_plot.csv", "\n".join(plot_lines) + "\n")
    if cfg.params.get("svg"):
        writer.write_text("plot.svg", _gap_plot_svg(records))
    writer.finish()
    last = records[-1]
    print(
        f"mix-sweep: {len(records)} points, method {last.method}; "
        f"final gap {last.gap:.3e} at n={last.n}"
    )
    print(
        f"mix-sweep: fitted {summary.model} decay, extrapolated limit "
        f"{summary.limit!r} vs S[sigma|rho] = {last.s_rel!r}"
    )
    return EXIT_OK


APPENDIX_DEFAULT_PAIRS = [
    ([0.25, 0.75], [0.75, 0.25]),
    ([0.5, 0.5], [0.9, 0.1]),
    ([0.1, 0.2, 0.7], [0.3, 0.4, 0.3]),
    ([0.05, 0.95], [0.5, 0.5]),
]


def cmd_appendix(cfg: ExperimentConfig) -> int:
    writer = RunWriter(cfg)
    rho = ClassicalDistribution(cfg.params.get("rho", {"p": [0.5, 0.5]})["p"])
    typicality_n = [int(n) for n in cfg.params.get("typicality_n", [100, 1000, 10_000])]
    insertion_n = [int(n) for n in cfg.params.get("insertion_n", [10, 100, 1000, 10_000])]
    insertion_rho = [float(r) for r in cfg.params.get(
        "insertion_rho", [0.05, 0.1, 0.25, 0.5, 0.9, 1.0]
    )]

    checks = [typicality_entropy_check(rho, n) for n in typicality_n]
    deficits = [c.deficit for c in checks]
    typicality_ok = all(b < a for a, b in zip(deficits, deficits[1:])) and all(
        d >= 0 for d in deficits
    )

    insertion_rows = []
    insertion_ok = True
    for n in insertion_n:
        for rho_a in insertion_rho:
            fac = insertion_factor(n, rho_a)
            bound = 2.0 / (n * rho_a)
            insertion_ok = insertion_ok and fac.rel_err < bound
            insertion_rows.append(
                {"n": n, "rho_a": rho_a, "exact": fac.exact, "limit": fac.limit,
                 "rel_err": fac.rel_err, "bound": bound}
            )

    if cfg.seed is not None:
        rng = np.random.default_rng(cfg.seed + 700)
        pairs = []
        for _ in range(int(cfg.params.get("pairs", 50))):
            d = int(rng.integers(2, 6))
            sig = rng.uniform(0.05, 1.0, size=d)
            ref = rng.uniform(0.05, 1.0, size=d)
            pairs.append((list(sig / sig.sum()), list(ref / ref.sum())))
    else:
        pairs = APPENDIX_DEFAULT_PAIRS
    max_formula_err = 0.0
    for sig_p, rho_p in pairs:
        sig_dist = ClassicalDistribution(sig_p)
        rho_dist = ClassicalDistribution(rho_p)
        direct = classical_mixing_increase_formula(sig_dist, rho_dist)
        operator = relative_entropy(sig_dist.as_density(), rho_dist.as_density())
        max_formula_err = max(max_formula_err, abs(direct - operator))
    formula_ok = max_formula_err < 1e-12

    all_ok = typicality_ok and insertion_ok and formula_ok

    def typicality_row(c):
        row = c.as_dict()
        if cfg.units == "bits":
            for key in ("lhs_per_symbol", "S_rho", "deficit"):
                row[f"{key}_bits"] = row[key] / LN2
        return row

    report = {
        "units": cfg.units,
        "typicality": [typicality_row(c) for c in checks],
        "typicality_ok": typicality_ok,
        "insertion": insertion_rows,
        "insertion_ok": insertion_ok,
        "increase_formula_pairs": len(pairs),
        "max_formula_err": max_formula_err,
        "formula_ok": formula_ok,
        "all_pass": all_ok,
    }
    writer.write_json("report.json", report)
    writer.finish()
    for c in checks:
        print(
            f"appendix: n={c.n} per-symbol {c.lhs_per_symbol:.6f} vs "
            f"S[rho]={c.s_rho:.6f} (deficit {c.deficit:.3e})"
        )
    print(f"appendix: all checks {'pass' if all_ok else 'FAIL'}")
    return EXIT_OK if all_ok else EXIT_VERIFY_FAIL


def cmd_verify(cfg: ExperimentConfig) -> int:
    writer = RunWriter(cfg)
    tolerances = cfg.params.get("tolerances", {})
    only = cfg.params.get("criteria")
    if only is not None:
        only = tuple(int(c) for c in only)
    vcfg = VerifyConfig(
        seed=cfg.require_seed(),
        dense_cap=cfg.dense_cap,
        tolerances={k: float(v) for k, v in tolerances.items()},
    )
    outcome = run_acceptance(vcfg, only=only)
    writer.write_json("verify_report.json", outcome.report)
    timings = {f"criterion_{r.cid}": r.elapsed_s * 1e3 for r in outcome.results}
    writer.finish(timings_ms=timings)
    for r in outcome.results:
        print(f"criterion {r.cid} {r.name}: {r.status.upper()} ({r.elapsed_s:.2f} s)")
    rep = outcome.report
    print(
        f"verify: {rep['passed']} passed, {rep['failed']} failed, "
        f"{rep['skipped']} skipped"
    )
    return EXIT_OK if outcome.all_pass else EXIT_VERIFY_FAIL


HANDLERS = {
    "gibbs": cmd_gibbs,
    "collide": cmd_collide,
    "mix-sweep": cmd_mix_sweep,
    "appendix": cmd_appendix,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(parser):
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--out-dir", default="mixent_out", help="output directory")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--units", choices=["nats", "bits"], default=None)
    parser.add_argument("--dense-cap", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixent",
        description="collision-model friction lab: dissipation identities and "
        "entropy-of-mixing convergence",
    )
    parser.add_argument("--version", action="version", version=f"mixent {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("gibbs", help="build a Gibbs state and report its entropy")
    _add_common(p)
    p.add_argument("--hamiltonian", dest="param_hamiltonian", help="matrix JSON file")
    p.add_argument("--beta", dest="param_beta", type=float)

    p = sub.add_parser("collide", help="run a collision sequence, emit the ledger")
    _add_common(p)
    p.add_argument("--hamiltonian", dest="param_hamiltonian", help="matrix JSON file")
    p.add_argument("--unitary", dest="param_unitary", help="matrix JSON file or 'haar'")
    p.add_argument("--beta", dest="param_beta", type=float)
    p.add_argument("--collisions", dest="param_collisions", type=int)
    p.add_argument("--reservoir-size", dest="param_reservoir_size", type=int)
    p.add_argument("--dim", dest="param_dim", type=int, help="random-instance dimension")

    p = sub.add_parser("mix-sweep", help="entropy-of-mixing convergence sweep")
    _add_common(p)
    p.add_argument("--sigma", dest="param_sigma", help="state JSON file")
    p.add_argument("--rho", dest="param_rho", help="state JSON file")
    p.add_argument("--n-list", dest="param_n_list", help="comma-separated n values")
    p.add_argument(
        "--method", dest="param_method", choices=["auto", "dense", "classical-exact"]
    )
    p.add_argument("--svg", dest="param_svg", action="store_const", const=True,
                   default=None, help="also write a line chart")

    p = sub.add_parser("appendix", help="typicality / insertion-factor checks")
    _add_common(p)

    p = sub.add_parser("verify", help="run the acceptance matrix")
    _add_common(p)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return HANDLERS[args.subcommand](cfg)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (MixentError, ConfigError, ValueError, KeyError, OSError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
