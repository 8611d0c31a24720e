"""Command-line front end.

Exit codes: 0 success, 2 invalid input (the message names the field),
3 I/O failure, 4 run finished but flagged invalid (outputs kept).
"""

from __future__ import annotations

import csv
import json
import math
import sys
from pathlib import Path
from typing import Literal, Optional

import click
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .dynamics.experiment import Engine, ExperimentConfig, format_float, run_experiment, summary_json
from .dynamics.states import DOWN, UP, BoundPairSpec, Preparation, WavepacketSpec, default_geometry
from .effective import reduce_to_impurity_chain
from .model import ModelParams, PairKind
from .spectrum import BranchNotFoundError, BranchType, bandwidth, extract_branch, fit_cosine_band
from .transport import analytic_T12, negf_transmission, planewave_scattering, resonance_V

EXIT_OK, EXIT_INVALID, EXIT_IO, EXIT_FLAGGED = 0, 2, 3, 4

TRANSMISSION_COLUMNS = ("k", "V", "T_analytic", "T_negf", "T_planewave", "V_R_plus", "V_R_minus")


class ScatterConfig(BaseModel):
    """One scattering experiment. Energies in units of kappa, times in 1/kappa."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: Literal["onsite-bose", "nn-bose", "fermi-singlet"]
    kappa: float = 1.0
    u: float
    v: float = 0.0
    n_sites: int = Field(ge=4)
    k0: float
    sigma: float = Field(default=8.0, ge=2.0)
    center: Optional[int] = None
    pair_position: Optional[int] = None
    preparation: Literal["bare", "dressed"] = "bare"
    engine: Literal["full", "effective", "impurity"] = "full"
    incident_spin: Literal["up", "down"] = "up"
    dt: float = Field(default=0.05, gt=0)
    tol: float = Field(default=1e-9, ge=1e-12, le=1e-6)
    stop_sigmas: float = Field(default=2.5, gt=0)
    t_total: Optional[float] = Field(default=None, gt=0)
    record_every: int = Field(default=10, ge=1)
    edge_tolerance: float = Field(default=1e-6, gt=0)
    series_csv: Optional[str] = None
    summary_json: Optional[str] = None

    @field_validator("kappa")
    @classmethod
    def _kappa_nonzero(cls, x):
        if x == 0 or not math.isfinite(x):
            raise ValueError("must be finite and nonzero")
        return x

    @field_validator("k0")
    @classmethod
    def _k0_range(cls, x):
        if not 0 < abs(x) < math.pi:
            raise ValueError("|k0| must lie in (0, pi)")
        return x


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def load_scatter_config(path) -> ScatterConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise click.FileError(str(path), hint=str(exc)) from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"not valid JSON ({exc})") from exc
    try:
        return ScatterConfig.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        field = ".".join(str(p) for p in err["loc"]) or "config"
        raise ConfigError(field, err["msg"]) from exc


def to_experiment(cfg: ScatterConfig, engine: str | None = None) -> ExperimentConfig:
    """Translate a validated config into domain objects, naming the field on failure."""
    kind = PairKind(cfg.kind)
    try:
        params = ModelParams(cfg.kappa, cfg.u * cfg.kappa, cfg.v * cfg.kappa, cfg.n_sites, kind.statistics)
    except ValueError as exc:
        raise ConfigError("v" if cfg.v and kind is PairKind.FERMI_SINGLET else "n_sites", str(exc)) from exc
    c0, p0 = default_geometry(cfg.sigma)
    center = c0 if cfg.center is None else cfg.center
    position = p0 if cfg.pair_position is None else cfg.pair_position
    wp = WavepacketSpec(cfg.k0, cfg.sigma, center)
    bp = BoundPairSpec(kind, position, Preparation(cfg.preparation))
    try:
        return ExperimentConfig(
            params, wp, bp,
            engine=Engine(engine or cfg.engine),
            incident_spin=UP if cfg.incident_spin == "up" else DOWN,
            dt=cfg.dt, tol=cfg.tol, stop_sigmas=cfg.stop_sigmas, record_every=cfg.record_every,
            edge_tolerance=cfg.edge_tolerance, t_total=cfg.t_total,
        )
    except ValueError as exc:
        field = "center" if "center" in str(exc) else "pair_position"
        raise ConfigError(field, str(exc)) from exc


def parse_grid(text: str, name: str) -> np.ndarray:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            num = int(num)
            if num < 1:
                raise ValueError
            return np.linspace(float(start), float(stop), num)
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise click.BadParameter(f"expected start:stop:num or a comma list, got {text!r}", param_hint=name)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(x) for x in row])


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Bound-pair coherent-shift toolkit."""


@main.command()
@click.option("--kappa", type=float, default=1.0, show_default=True)
@click.option("--u", "u", type=float, required=True, help="On-site interaction.")
@click.option("--v", "v", type=float, default=0.0, show_default=True, help="Nearest-neighbour interaction.")
@click.option("--branch", type=click.Choice([b.name.lower().replace("_", "-") for b in BranchType]),
              default="onsite", show_default=True)
@click.option("--k-grid", default="-3.14159265358979:3.14159265358979:101", show_default=True)
@click.option("--n0", type=int, default=200, show_default=True, help="Relative-coordinate cutoff.")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def spectrum(kappa, u, v, branch, k_grid, n0, out):
    """Bound-pair branch E(k) and its weights on r=0 and r=1 as CSV; fit summary on stdout."""
    ks = parse_grid(k_grid, "--k-grid")
    try:
        params = ModelParams(kappa, u, v, n_sites=2 * n0 + 1)
    except ValueError as exc:
        raise click.BadParameter(str(exc), param_hint="--kappa/--u/--v")
    if n0 < 2:
        raise click.BadParameter("must be >= 2", param_hint="--n0")
    try:
        br = extract_branch(params, BranchType[branch.upper().replace("-", "_")], ks, n0)
    except BranchNotFoundError as exc:
        _fail(EXIT_INVALID, f"--branch: {exc}")
    try:
        br.to_csv(out)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    c0, c1 = fit_cosine_band(br.k_grid, br.energies)
    click.echo(json.dumps({"c0": c0, "c1": c1, "bandwidth": bandwidth(br)}, sort_keys=True))


@main.command()
@click.option("--kind", type=click.Choice([k.value for k in PairKind]), default="onsite-bose", show_default=True)
@click.option("--kappa", type=float, default=1.0, show_default=True)
@click.option("--v", "v_values", type=float, multiple=True, help="Coupling V (repeatable).")
@click.option("--v-grid", default=None, help="start:stop:num or comma list of V.")
@click.option("--k-grid", required=True, help="start:stop:num or comma list, each in (0, pi).")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def transmission(kind, kappa, v_values, v_grid, k_grid, out):
    """Transmission from the closed form, NEGF and wave matching over a (k, V) grid."""
    ks = parse_grid(k_grid, "--k-grid")
    if np.any((ks <= 0) | (ks >= math.pi)):
        raise click.BadParameter("every k must lie in (0, pi)", param_hint="--k-grid")
    vs = list(v_values) + (list(parse_grid(v_grid, "--v-grid")) if v_grid else [])
    if not vs:
        raise click.BadParameter("give --v or --v-grid", param_hint="--v")
    if kappa == 0:
        raise click.BadParameter("must be nonzero", param_hint="--kappa")
    pk = PairKind(kind)
    if pk is PairKind.FERMI_SINGLET and any(vs):
        raise click.BadParameter("the singlet pair has no V coupling", param_hint="--v")
    rows = []
    for v in vs:
        chain = reduce_to_impurity_chain(ModelParams(kappa, 0.0, v, 2, pk.statistics), pk)
        for k in ks:
            t_an = analytic_T12(kappa, v, k) if pk is PairKind.ONSITE_BOSE else 1.0
            vr = resonance_V(kappa, k) if pk is PairKind.ONSITE_BOSE else (math.nan, math.nan)
            rows.append((k, v, t_an, negf_transmission(chain, k).T, planewave_scattering(chain, k).T, *vr))
    try:
        _write_rows(out, TRANSMISSION_COLUMNS, rows)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))


@main.command()
@click.option("--kappa", type=float, default=1.0, show_default=True)
@click.option("--k", "k", type=float, default=None, help="Single momentum in (0, pi).")
@click.option("--k-grid", default=None, help="start:stop:num or comma list.")
@click.option("--json", "as_json", is_flag=True, help="Print {v_plus, v_minus} for --k as JSON.")
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="CSV for --k-grid.")
def resonance(kappa, k, k_grid, as_json, out):
    """Couplings V_R with unit transmission through the on-site pair."""
    if kappa == 0:
        raise click.BadParameter("must be nonzero", param_hint="--kappa")
    if (k is None) == (k_grid is None):
        raise click.BadParameter("give exactly one of --k and --k-grid", param_hint="--k")
    ks = np.array([k]) if k is not None else parse_grid(k_grid, "--k-grid")
    if np.any((ks <= 0) | (ks >= math.pi)):
        raise click.BadParameter("every k must lie in (0, pi)", param_hint="--k" if k is not None else "--k-grid")
    rows = [(kk, *resonance_V(kappa, kk)) for kk in ks]
    if out:
        try:
            _write_rows(out, ("k", "V_R_plus", "V_R_minus"), rows)
        except OSError as exc:
            _fail(EXIT_IO, str(exc))
    if as_json or not out:
        if len(rows) == 1:
            click.echo(json.dumps({"k": rows[0][0], "v_plus": rows[0][1], "v_minus": rows[0][2]}))
        else:
            click.echo(json.dumps([{"k": r[0], "v_plus": r[1], "v_minus": r[2]} for r in rows]))


def _output_paths(cfg: ScatterConfig, config_path: Path, out_dir):
    base = Path(out_dir) if out_dir else Path(".")
    stem = config_path.stem
    series = Path(cfg.series_csv) if cfg.series_csv else base / f"{stem}_series.csv"
    summary = Path(cfg.summary_json) if cfg.summary_json else base / f"{stem}_summary.json"
    return series, summary


def _load_or_exit(config_path) -> ScatterConfig:
    try:
        return load_scatter_config(config_path)
    except ConfigError as exc:
        _fail(EXIT_INVALID, str(exc))
    except click.FileError as exc:
        _fail(EXIT_IO, exc.format_message())


@main.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None,
              help="Directory for outputs not named in the config (default: current directory).")
def scatter(config_path, out_dir):
    """Run one wavepacket-on-pair experiment; write a time-series CSV and a summary JSON."""
    cfg = _load_or_exit(config_path)
    try:
        exp = to_experiment(cfg)
    except ConfigError as exc:
        _fail(EXIT_INVALID, str(exc))
    result = run_experiment(exp)
    series, summary = _output_paths(cfg, config_path, out_dir)
    try:
        result.write_series_csv(series)
        result.write_summary_json(summary)
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    s = result.summary
    click.echo(f"p_shifted={format_float(s['p_shifted'])} shift={format_float(s['shift_estimate'])} "
               f"valid={str(s['valid']).lower()}")
    if not result.valid:
        _fail(EXIT_FLAGGED, f"edge occupancy {s['edge_occupancy']:.3e} exceeds {s['edge_tolerance']:.1e}; "
                            f"outputs written and flagged")


@main.command("compare-effective")
@click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Comparison JSON.")
def compare_effective(config_path, out):
    """Run the full, effective and impurity-chain engines on one config and compare."""
    cfg = _load_or_exit(config_path)
    runs = {}
    for engine in ("full", "effective", "impurity"):
        try:
            exp = to_experiment(cfg, engine)
        except ConfigError as exc:
            _fail(EXIT_INVALID, str(exc))
        runs[engine] = run_experiment(exp).summary
    keep = ("p_incident", "p_reflected", "p_shifted", "p_pair_broken", "shift_estimate",
            "edge_occupancy", "valid", "dimension")
    report = {
        "kind": cfg.kind,
        "runs": {e: {k: s[k] for k in keep} for e, s in runs.items()},
        "analytic_T12_at_k0": runs["full"]["analytic_T12_at_k0"],
        "packet_averaged_T": runs["full"]["packet_averaged_T"],
        "full_minus_effective": runs["full"]["p_shifted"] - runs["effective"]["p_shifted"],
        "impurity_minus_packet_average": runs["impurity"]["p_shifted"] - runs["full"]["packet_averaged_T"],
        "valid": all(s["valid"] for s in runs.values()),
        "channel_definition": runs["full"]["channel_definition"],
    }
    try:
        Path(out).write_text(summary_json(report))
    except OSError as exc:
        _fail(EXIT_IO, str(exc))
    if not report["valid"]:
        _fail(EXIT_FLAGGED, "at least one run exceeded the edge-occupancy tolerance; outputs written and flagged")


def run_cli(argv=None) -> int:
    """Invoke the CLI in-process and return its exit code."""
    try:
        main.main(args=argv, standalone_mode=False)
    except click.exceptions.UsageError as exc:
        exc.show()
        return EXIT_INVALID
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    return EXIT_OK


if __name__ == "__main__":
    main()
