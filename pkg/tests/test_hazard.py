"""Intensity attenuation, fragility sampling, scenario assembly."""

import math

import numpy as np
import pytest

import restopt as r
from restopt.hazard import DamageState


FRAG = r.FragilityCurve(medians=(0.3, 0.5, 0.8, 1.2), betas=(0.5, 0.5, 0.5, 0.5))


def scenario(sigma=0.0, c0=-1.0, c1=0.5, c2=1.0, mag=6.9, epicenter=(0.0, 0.0)):
    return r.SeismicScenario(magnitude=mag, epicenter=epicenter,
                             c0=c0, c1=c1, c2=c2, sigma_ln=sigma)


class TestIntensity:
    def test_equidistant_sites_identical_without_residual(self):
        s = scenario(sigma=0.0)
        a = r.compute_intensity(s, (12_000.0, 0.0))
        b = r.compute_intensity(s, (0.0, 12_000.0))
        assert a == b

    def test_hand_evaluated_attenuation(self):
        # ln IM = -1.0 + 0.5 * 6.9 - ln(12 + 1) -> IM = exp(2.45) / 13
        s = scenario(sigma=0.0, c0=-1.0, c1=0.5, c2=1.0, mag=6.9)
        im = r.compute_intensity(s, (12_000.0, 0.0))
        assert im == pytest.approx(math.exp(2.45) / 13.0, abs=1e-12)
        assert im == pytest.approx(0.891, abs=5e-4)

    def test_fixed_seed_bit_identical(self):
        s = scenario(sigma=0.4)
        a = r.compute_intensity(s, (5_000.0, 3_000.0), rng=99)
        b = r.compute_intensity(s, (5_000.0, 3_000.0), rng=99)
        assert a == b

    def test_strictly_decreasing_in_distance(self):
        s = scenario(sigma=0.0)
        values = [r.compute_intensity(s, (d, 0.0)) for d in
                  np.linspace(100.0, 60_000.0, 40)]
        assert all(x > y for x, y in zip(values, values[1:]))
        assert all(v > 0 for v in values)

    def test_invalid_scenario_parameters(self):
        with pytest.raises(ValueError):
            scenario(mag=0.0)
        with pytest.raises(ValueError):
            scenario(mag=11.0)
        with pytest.raises(ValueError):
            r.SeismicScenario(6.9, (0, 0), c0=0.0, c1=0.5, c2=1.0, sigma_ln=-0.1)


class TestDamageStates:
    def test_vanishing_intensity_means_no_damage(self):
        probs = r.damage_state_probabilities(1e-9, FRAG)
        assert probs[0] == pytest.approx(1.0, abs=1e-12)
        rng = np.random.default_rng(0)
        states = [r.sample_damage_state(1e-9, FRAG, rng) for _ in range(200)]
        assert all(s == DamageState.NONE for s in states)

    def test_median_intensity_exceeds_slight_half_the_time(self):
        probs = r.damage_state_probabilities(FRAG.medians[0], FRAG)
        assert 1.0 - probs[0] == pytest.approx(0.5, abs=1e-12)

    def test_sampled_frequencies_match_analytic_ladder(self):
        # oracle: exceedance ladder evaluated directly with erf
        im = 0.5
        draws = 100_000
        exceed = [0.5 * (1.0 + math.erf(math.log(im / m) / (b * math.sqrt(2.0))))
                  for m, b in zip(FRAG.medians, FRAG.betas)]
        expected = np.diff([1.0] + exceed + [0.0]) * -1.0
        rng = np.random.default_rng(314)
        counts = np.zeros(5)
        for _ in range(draws):
            counts[int(r.sample_damage_state(im, FRAG, rng))] += 1
        freq = counts / draws
        for k in range(5):
            sigma = math.sqrt(expected[k] * (1 - expected[k]) / draws)
            assert abs(freq[k] - expected[k]) <= 3.0 * sigma + 1e-12, (
                f"state {k}: {freq[k]} vs {expected[k]}"
            )

    def test_probability_vector_sums_to_one(self):
        for im in np.geomspace(1e-4, 50.0, 200):
            probs = r.damage_state_probabilities(float(im), FRAG)
            assert abs(probs.sum() - 1.0) <= 1e-12
            assert (probs >= -1e-15).all()

    def test_exceedance_nondecreasing_in_intensity(self):
        grid = np.geomspace(1e-3, 10.0, 120)
        prev = np.zeros(4)
        for im in grid:
            cur = r.exceedance_probabilities(float(im), FRAG)
            assert (cur >= prev - 1e-12).all()
            prev = cur

    def test_ladder_stays_valid_with_unequal_betas(self):
        # crossing raw curves must not create negative state probabilities
        frag = r.FragilityCurve(medians=(0.3, 0.5, 0.8, 1.2),
                                betas=(0.4, 1.6, 0.3, 1.2))
        for im in np.geomspace(1e-3, 20.0, 100):
            probs = r.damage_state_probabilities(float(im), frag)
            assert (probs >= -1e-15).all()
            assert abs(probs.sum() - 1.0) <= 1e-12

    def test_fragility_validation(self):
        with pytest.raises(ValueError):
            r.FragilityCurve(medians=(0.5, 0.4, 0.8, 1.2), betas=(0.5,) * 4)
        with pytest.raises(ValueError):
            r.FragilityCurve(medians=(0.3, 0.5, 0.8, 1.2), betas=(0.5, 0.0, 0.5, 0.5))


class TestRestoration:
    def test_durations_nondecreasing_required(self):
        with pytest.raises(ValueError):
            r.RestorationModel(table={"bridge": tuple(
                r.DurationSpec(m) for m in (5.0, 3.0, 10.0, 20.0))})

    def test_no_damage_means_zero_duration(self):
        model = r.RestorationModel(table={"bridge": tuple(
            r.DurationSpec(m) for m in (1.0, 3.0, 10.0, 30.0))})
        rng = np.random.default_rng(0)
        assert model.sample_duration("bridge", DamageState.NONE, rng) == 0.0
        assert model.sample_duration("bridge", DamageState.MODERATE, rng) == 3.0

    def test_deterministic_switch_pins_median(self):
        model = r.RestorationModel(table={"bridge": tuple(
            r.DurationSpec(m, 0.5) for m in (1.0, 3.0, 10.0, 30.0))})
        rng = np.random.default_rng(1)
        sampled = {model.sample_duration("bridge", DamageState.COMPLETE, rng)
                   for _ in range(10)}
        assert len(sampled) > 1
        fixed = {model.sample_duration("bridge", DamageState.COMPLETE, rng,
                                       deterministic=True) for _ in range(10)}
        assert fixed == {30.0}


class TestScenarioSampling:
    def test_zero_intensity_leaves_everything_standing(self, gilroy, gilroy_bundle):
        calm = r.SeismicScenario(magnitude=6.9, epicenter=(-8485.3, -8485.3),
                                 c0=-40.0, c1=0.5, c2=1.0, sigma_ln=0.0)
        scn = r.sample_scenario(gilroy, calm, gilroy_bundle.hazard.fragilities,
                                gilroy_bundle.hazard.restoration, 3)
        assert scn.damaged == frozenset()

    def test_fixed_seed_reproduces_scenario(self, gilroy, gilroy_bundle):
        hz = gilroy_bundle.hazard
        a = r.sample_scenario(gilroy, hz.scenario, hz.fragilities, hz.restoration, 21)
        b = r.sample_scenario(gilroy, hz.scenario, hz.fragilities, hz.restoration, 21)
        assert a.states == b.states
        assert a.durations == b.durations
        assert a.scenario_hash() == b.scenario_hash()

    def test_forced_complete_damage(self, gilroy_bundle):
        community = r.validate_community({
            "components": [{"id": "only", "kind": "bridge", "location": [0.0, 0.0]}],
        })
        # epicenter on top of the component with a hot attenuation: IM >> m_complete
        hot = r.SeismicScenario(magnitude=9.0, epicenter=(0.0, 0.0),
                                c0=5.0, c1=1.0, c2=0.1, sigma_ln=0.0)
        frag = {"bridge": r.FragilityCurve(medians=(0.3, 0.5, 0.8, 1.2),
                                           betas=(0.5,) * 4)}
        rest = r.RestorationModel(table={"bridge": tuple(
            r.DurationSpec(m) for m in (2.0, 6.0, 20.0, 60.0))})
        scn = r.sample_scenario(community, hot, frag, rest, 5,
                                deterministic_durations=True)
        assert scn.damaged == {"only"}
        assert scn.states["only"] == DamageState.COMPLETE
        assert scn.durations["only"] == 60.0

    def test_missing_binding_is_reported(self, gilroy, gilroy_bundle):
        hz = gilroy_bundle.hazard
        frag = dict(hz.fragilities)
        frag.pop("bridge")
        with pytest.raises(ValueError, match="bridge"):
            r.sample_scenario(gilroy, hz.scenario, frag, hz.restoration, 1)

    def test_scenario_invariants(self, gilroy, gilroy_bundle):
        hz = gilroy_bundle.hazard
        scn = r.sample_scenario(gilroy, hz.scenario, hz.fragilities,
                                hz.restoration, 77)
        for cid, state in scn.states.items():
            if state == DamageState.NONE:
                assert scn.durations[cid] == 0.0
                assert cid not in scn.damaged
            else:
                assert scn.durations[cid] > 0.0
                assert cid in scn.damaged
