"""Scenario earthquake: intensity sampling, damage states, repair durations.

Ground motion uses a deliberately small parametric attenuation,

    ln(IM) = c0 + c1 * Mw - c2 * ln(R_km + 1) + eps,   eps ~ N(0, sigma_ln),

with R the epicentral distance. It stands in for a full GMPE; the coefficients
are configuration data. Residuals are sampled independently per component.

Damage states follow the usual lognormal fragility ladder,
P(DS >= ds) = Phi(ln(IM / median_ds) / beta_ds), sampled by inverting the
ladder with a single uniform draw. Repair durations come from a per
(kind, state) table of lognormal medians and dispersions; a switch makes
them deterministic at the median.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Mapping

import numpy as np

from .community import Community


class DamageState(IntEnum):
    NONE = 0
    SLIGHT = 1
    MODERATE = 2
    EXTENSIVE = 3
    COMPLETE = 4


DAMAGE_STATE_NAMES = ("none", "slight", "moderate", "extensive", "complete")
_DAMAGED_STATES = (DamageState.SLIGHT, DamageState.MODERATE,
                   DamageState.EXTENSIVE, DamageState.COMPLETE)


@dataclass(frozen=True)
class SeismicScenario:
    """Scenario event magnitude, epicenter, and attenuation coefficients."""

    magnitude: float
    epicenter: tuple[float, float]
    c0: float
    c1: float
    c2: float
    sigma_ln: float = 0.0

    def __post_init__(self):
        if len(self.epicenter) != 2:
            raise ValueError("epicenter must be an (x, y) pair")
        if not 0.0 < self.magnitude <= 10.0:
            raise ValueError(f"magnitude must be in (0, 10], got {self.magnitude}")
        if self.sigma_ln < 0.0:
            raise ValueError("sigma_ln must be nonnegative")
        if self.c2 <= 0.0:
            raise ValueError("attenuation coefficient c2 must be positive")


@dataclass(frozen=True)
class FragilityCurve:
    """Lognormal exceedance parameters per damage state, slight..complete."""

    medians: tuple[float, float, float, float]
    betas: tuple[float, float, float, float]

    def __post_init__(self):
        if any(b <= 0 for b in self.betas):
            raise ValueError("fragility dispersions must be positive")
        if any(m <= 0 for m in self.medians):
            raise ValueError("fragility medians must be positive")
        if not all(a < b for a, b in zip(self.medians, self.medians[1:])):
            raise ValueError(
                f"fragility medians must be strictly increasing, got {self.medians}"
            )


@dataclass(frozen=True)
class DurationSpec:
    """Repair duration in days: lognormal median and dispersion (0 = fixed)."""

    median: float
    dispersion: float = 0.0


@dataclass(frozen=True)
class RestorationModel:
    """(component kind, damage state) -> repair duration distribution."""

    table: Mapping[str, tuple[DurationSpec, DurationSpec, DurationSpec, DurationSpec]]

    def __post_init__(self):
        for kind, specs in self.table.items():
            if len(specs) != 4:
                raise ValueError(f"{kind}: need durations for slight..complete")
            meds = [s.median for s in specs]
            if any(m <= 0 for m in meds):
                raise ValueError(f"{kind}: repair durations must be positive")
            if any(a > b for a, b in zip(meds, meds[1:])):
                raise ValueError(
                    f"{kind}: durations must be nondecreasing in damage state"
                )

    def sample_duration(self, kind: str, state: DamageState,
                        rng: np.random.Generator, deterministic: bool = False) -> float:
        if state == DamageState.NONE:
            return 0.0
        spec = self.table[kind][int(state) - 1]
        if deterministic or spec.dispersion == 0.0:
            return spec.median
        return spec.median * math.exp(spec.dispersion * rng.standard_normal())


@dataclass(frozen=True)
class DamageScenario:
    """Sampled damage states and repair durations for one replicate."""

    states: Mapping[str, DamageState]
    durations: Mapping[str, float]
    seed: int | None = None
    damaged: frozenset[str] = field(default_factory=frozenset)

    def scenario_hash(self) -> str:
        """Content hash used to verify common-random-numbers pairing."""
        h = hashlib.sha256()
        for cid in sorted(self.states):
            h.update(cid.encode())
            h.update(bytes([int(self.states[cid])]))
            h.update(np.float64(self.durations.get(cid, 0.0)).tobytes())
        return h.hexdigest()


def make_damage_scenario(states: Mapping[str, DamageState],
                         durations: Mapping[str, float],
                         seed: int | None = None) -> DamageScenario:
    """Assemble a DamageScenario, checking the zero-duration invariant."""
    for cid, state in states.items():
        dur = durations.get(cid, 0.0)
        if state == DamageState.NONE and dur != 0.0:
            raise ValueError(f"{cid}: undamaged component with nonzero repair duration")
        if state != DamageState.NONE and dur <= 0.0:
            raise ValueError(f"{cid}: damaged component needs a positive repair duration")
    damaged = frozenset(cid for cid, s in states.items() if s != DamageState.NONE)
    return DamageScenario(states=dict(states), durations=dict(durations),
                          seed=seed, damaged=damaged)


def _as_rng(rng) -> tuple[np.random.Generator, int | None]:
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None:
        return np.random.default_rng(), None
    return np.random.default_rng(rng), int(rng)


def compute_intensity(scenario: SeismicScenario,
                      location: tuple[float, float],
                      rng: np.random.Generator | int | None = None) -> float:
    """Ground-motion intensity (g) at a site, with lognormal residual."""
    gen, _ = _as_rng(rng)
    r_km = math.hypot(location[0] - scenario.epicenter[0],
                      location[1] - scenario.epicenter[1]) / 1000.0
    ln_im = scenario.c0 + scenario.c1 * scenario.magnitude - scenario.c2 * math.log(r_km + 1.0)
    if scenario.sigma_ln > 0.0:
        ln_im += scenario.sigma_ln * gen.standard_normal()
    return math.exp(ln_im)


def _phi(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def exceedance_probabilities(intensity: float, fragility: FragilityCurve) -> np.ndarray:
    """P(DS >= ds) for ds = slight..complete, forced onto a nonincreasing ladder."""
    if intensity <= 0.0:
        return np.zeros(4)
    probs = np.array([
        _phi(math.log(intensity / m) / b)
        for m, b in zip(fragility.medians, fragility.betas)
    ])
    # crossing curves (unequal betas) would yield negative state probabilities
    return np.minimum.accumulate(probs)


def damage_state_probabilities(intensity: float, fragility: FragilityCurve) -> np.ndarray:
    """Probability of each damage state none..complete; sums to 1."""
    exceed = exceedance_probabilities(intensity, fragility)
    padded = np.concatenate(([1.0], exceed, [0.0]))
    return padded[:-1] - padded[1:]


def sample_damage_state(intensity: float, fragility: FragilityCurve,
                        rng: np.random.Generator | int | None = None) -> DamageState:
    """Draw a damage state by inverting the exceedance ladder with one uniform."""
    gen, _ = _as_rng(rng)
    exceed = exceedance_probabilities(intensity, fragility)
    u = gen.random()
    for state in reversed(_DAMAGED_STATES):
        if u < exceed[int(state) - 1]:
            return state
    return DamageState.NONE


def sample_scenario(community: Community,
                    scenario: SeismicScenario,
                    fragilities: Mapping[str, FragilityCurve],
                    restoration: RestorationModel,
                    rng: np.random.Generator | int,
                    deterministic_durations: bool = False) -> DamageScenario:
    """Sample per-component damage and repair durations for one replicate.

    Components are visited in sorted id order so a given generator state
    always produces the same scenario.
    """
    gen, seed = _as_rng(rng)
    missing = sorted({
        c.kind for c in community.components.values()
        if c.kind not in fragilities or c.kind not in restoration.table
    })
    if missing:
        raise ValueError(f"no fragility/restoration binding for kinds: {missing}")

    states: dict[str, DamageState] = {}
    durations: dict[str, float] = {}
    for cid in sorted(community.components):
        comp = community.components[cid]
        im = compute_intensity(scenario, comp.location, gen)
        state = sample_damage_state(im, fragilities[comp.kind], gen)
        states[cid] = state
        durations[cid] = restoration.sample_duration(
            comp.kind, state, gen, deterministic_durations
        )
    return make_damage_scenario(states, durations, seed=seed)
