"""Config ingestion, deterministic result serialization, run manifests.

One YAML document describes a whole experiment in three sections:
``community`` (components, tower lines, retailers, cells), ``hazard``
(scenario event, fragility and restoration tables), and ``experiment``
(replicates, policies, crew budget, SA schedule). The schema is documented
in the README. Loading validates everything and reports all problems at
once, with line information for parse errors.

Result files are locale-independent CSV with all floats at 17 significant
digits, so a rerun with the same seed is byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

import yaml

from . import __version__
from .annealing import AnnealingSchedule
from .community import Community, CommunityValidationError, validate_community
from .experiment import ExperimentConfig, ExperimentResult, HazardModel
from .hazard import (
    DAMAGE_STATE_NAMES,
    DurationSpec,
    FragilityCurve,
    RestorationModel,
    SeismicScenario,
)

_STATE_KEYS = DAMAGE_STATE_NAMES[1:]  # slight..complete


class ConfigError(ValueError):
    """Invalid experiment config; carries every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid config:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class ConfigBundle:
    community: Community
    hazard: HazardModel
    experiment: ExperimentConfig
    semantic: dict  # normalized config used for hashing and round-trips

    def config_hash(self) -> str:
        payload = json.dumps(self.semantic, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """Provenance record for one experiment run."""

    config_hash: str
    master_seed: int
    tool_version: str
    replicates: int
    policy_summary: Mapping[str, Mapping[str, float]]
    scenario_hashes: tuple[str, ...]
    wall_clock_seconds: float


def _parse_hazard(raw: Mapping, out_errors: list[str]) -> HazardModel | None:
    errors: list[str] = []
    try:
        attenuation = raw.get("attenuation") or {}
        scenario = SeismicScenario(
            magnitude=float(raw["magnitude"]),
            epicenter=tuple(float(v) for v in raw["epicenter"]),
            c0=float(attenuation["c0"]),
            c1=float(attenuation["c1"]),
            c2=float(attenuation["c2"]),
            sigma_ln=float(raw.get("sigma_ln", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        out_errors.append(f"hazard scenario: {exc}")
        return None

    fragilities = {}
    for kind, entry in (raw.get("fragility") or {}).items():
        try:
            medians = tuple(float(entry[s][0]) for s in _STATE_KEYS)
            betas = tuple(float(entry[s][1]) for s in _STATE_KEYS)
            fragilities[kind] = FragilityCurve(medians=medians, betas=betas)
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            errors.append(f"hazard fragility for '{kind}': {exc}")
    if not fragilities:
        errors.append("hazard: missing fragility table")

    table = {}
    for kind, entry in (raw.get("restoration") or {}).items():
        try:
            specs = []
            for s in _STATE_KEYS:
                cell = entry[s]
                if isinstance(cell, (int, float)):
                    specs.append(DurationSpec(median=float(cell)))
                else:
                    specs.append(DurationSpec(
                        median=float(cell["median"]),
                        dispersion=float(cell.get("dispersion", 0.0)),
                    ))
            table[kind] = tuple(specs)
        except (KeyError, TypeError, ValueError) as exc:
            errors.append(f"hazard restoration for '{kind}': {exc}")
    if not table:
        errors.append("hazard: missing restoration table")
    if errors:
        out_errors.extend(errors)
        return None
    try:
        restoration = RestorationModel(table=table)
    except ValueError as exc:
        out_errors.append(f"hazard restoration: {exc}")
        return None
    return HazardModel(
        scenario=scenario,
        fragilities=fragilities,
        restoration=restoration,
        deterministic_durations=bool(raw.get("deterministic_durations", False)),
    )


def _parse_experiment(raw: Mapping, errors: list[str]) -> ExperimentConfig | None:
    sa_raw = raw.get("sa") or {}
    try:
        schedule = AnnealingSchedule(
            t0=float(sa_raw.get("t0", 2000.0)),
            cooling=float(sa_raw.get("gamma", 0.95)),
            iterations=int(sa_raw.get("iterations", 100)),
            boltzmann=float(sa_raw.get("boltzmann", 1.0)),
            pool_size=int(sa_raw["pool_size"]) if "pool_size" in sa_raw else None,
            refresh_fraction=float(sa_raw.get("refresh_fraction", 0.25)),
            refresh_every=int(sa_raw.get("refresh_every", 25)),
        )
        return ExperimentConfig(
            replicates=int(raw.get("replicates", 20)),
            master_seed=int(raw.get("master_seed", 0)),
            policies=tuple(raw.get("policies", ["base", "rollout-sa"])),
            crew_budget=int(raw.get("crew_budget", 3)),
            grid_resolution_days=float(raw.get("grid_resolution_days", 1.0)),
            sa_schedule=schedule,
            heuristic_kind=str(raw.get("heuristic", "random_permutation")),
            histogram_bins=int(raw.get("histogram_bins", 10)),
            workers=int(raw.get("workers", 1)),
            oracle_cap=int(raw.get("oracle_cap", 1_000_000)),
            cumulative_objective=bool(raw.get("cumulative_objective", False)),
        )
    except (TypeError, ValueError) as exc:
        errors.append(f"experiment: {exc}")
        return None


def load_config_dict(doc: Mapping) -> ConfigBundle:
    """Validate a parsed config document into a ConfigBundle."""
    errors: list[str] = []
    if not isinstance(doc, Mapping):
        raise ConfigError(["config document must be a mapping"])
    for section in ("community", "hazard", "experiment"):
        if section not in doc:
            errors.append(f"missing section '{section}'")
        elif doc[section] is not None and not isinstance(doc[section], Mapping):
            errors.append(f"section '{section}' must be a mapping")
    if errors:
        raise ConfigError(errors)

    community = None
    try:
        community = validate_community(doc["community"])
    except CommunityValidationError as exc:
        errors.extend(f"community: {e}" for e in exc.errors)

    hazard = _parse_hazard(doc["hazard"] or {}, errors)
    experiment = _parse_experiment(doc["experiment"] or {}, errors)

    if hazard is not None:
        raw_community = doc["community"] or {}
        kinds = {
            c.get("kind") for c in raw_community.get("components", []) or []
            if c.get("kind")
        }
        if raw_community.get("tower_lines"):
            kinds.add("tower_line_segment")
        for kind in sorted(kinds):
            if kind not in hazard.fragilities:
                errors.append(f"hazard: no fragility curve for kind '{kind}'")
            if kind not in hazard.restoration.table:
                errors.append(f"hazard: no restoration entry for kind '{kind}'")
    if experiment is not None:
        from .rollout import POLICY_NAMES
        for p in experiment.policies:
            if p not in POLICY_NAMES:
                errors.append(
                    f"experiment: unknown policy '{p}' (choose from {POLICY_NAMES})"
                )

    if errors:
        raise ConfigError(errors)
    assert community is not None and hazard is not None and experiment is not None
    return ConfigBundle(
        community=community,
        hazard=hazard,
        experiment=experiment,
        semantic=_normalize(doc),
    )


def load_config(path: str | Path) -> ConfigBundle:
    """Load and validate a YAML experiment config from disk."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError([f"cannot read {path}: {exc}"]) from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError([f"YAML parse error{where}: {exc}"]) from exc
    return load_config_dict(doc)


def _normalize(value):
    """Canonical plain-python form of a config document (for hashing)."""
    if isinstance(value, Mapping):
        return {str(k): _normalize(v) for k, v in sorted(value.items())}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, float)):
        f = float(value)
        return int(f) if f.is_integer() else f
    return str(value)


def dump_config(bundle: ConfigBundle, path: str | Path) -> None:
    """Serialize the normalized config back to YAML (round-trip safe)."""
    Path(path).write_text(
        yaml.safe_dump(bundle.semantic, sort_keys=True), newline="\n"
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def build_manifest(bundle: ConfigBundle, result: ExperimentResult) -> RunManifest:
    summary = {}
    for policy in result.policies:
        vals = result.histogram.values[policy]
        summary[policy] = {
            "mean_f": float(vals.mean()),
            "std_f": float(vals.std()),
            "min_f": float(vals.min()),
            "max_f": float(vals.max()),
        }
    return RunManifest(
        config_hash=bundle.config_hash(),
        master_seed=bundle.experiment.master_seed,
        tool_version=__version__,
        replicates=bundle.experiment.replicates,
        policy_summary=summary,
        scenario_hashes=tuple(rec.scenario_hash for rec in result.replicates),
        wall_clock_seconds=result.wall_clock_seconds,
    )


def write_results(result: ExperimentResult, manifest: RunManifest,
                  out_dir: str | Path,
                  population_cap: float | None = None) -> list[Path]:
    """Write curves.csv, rewards.csv, and manifest.json into ``out_dir``.

    curves.csv columns: time_days, then per policy mean/lower/upper bands
    (mean +- one std, clipped to [0, population] when a cap is given), then
    the per-replicate curves, policy-major.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    curves = result.curves
    policies = result.policies
    n_reps = len(result.replicates)

    curves_path = out / "curves.csv"
    with curves_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["time_days"]
        for p in policies:
            header += [f"{p}_mean", f"{p}_lower", f"{p}_upper"]
        for p in policies:
            header += [f"{p}_rep{r:03d}" for r in range(n_reps)]
        writer.writerow(header)
        for i, t in enumerate(curves.grid):
            row = [_fmt(t)]
            for p in policies:
                m = curves.mean[p][i]
                s = curves.std[p][i]
                lo, hi = m - s, m + s
                if population_cap is not None:
                    lo = min(max(lo, 0.0), population_cap)
                    hi = min(max(hi, 0.0), population_cap)
                row += [_fmt(m), _fmt(lo), _fmt(hi)]
            for p in policies:
                row += [_fmt(curves.replicate_curves[p][r, i]) for r in range(n_reps)]
            writer.writerow(row)

    rewards_path = out / "rewards.csv"
    with rewards_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["replicate", "policy", "F"])
        for rec in result.replicates:
            for p in policies:
                writer.writerow([rec.index, p, _fmt(rec.rewards[p].value)])

    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n",
        newline="\n",
    )
    return [curves_path, rewards_path, manifest_path]
