"""Scenario configs: initials, validation, JSON files, built-ins, execution dispatch."""

import json

import numpy as np
import pytest

from hfon import (
    ConfigurationError,
    InitialSpec,
    Phase,
    ScenarioConfig,
    builtin_scenarios,
    execute_scenario,
    parse_scenario,
    ramp_initials,
    seeded_initials,
)

BUILTIN_NAMES = [
    "example1-leader",
    "example1-local",
    "example2-3level-leader",
    "example2-3level-local",
    "example2-4level-leader",
    "example2-4level-local",
    "example3",
]


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return path


def small_blfg_doc(**overrides):
    doc = {
        "schema_version": 1,
        "name": "small",
        "kind": "blfg",
        "n": 3,
        "steps": 2,
        "d": 0.6,
        "b": 0.01,
        "scheme": "local",
        "leader": 10.0,
        "initial": {"centers": "ramp", "low": 5.0, "high": 25.0, "sigma": 1.0},
    }
    doc.update(overrides)
    return doc


class TestInitials:
    def test_ramp_endpoints_and_spot_values(self):
        x = ramp_initials(156)
        assert x[0] == 5.0
        assert x[1] == 5.129032258064516
        assert x[41] == 10.29032258064516
        assert x[155] == 25.0

    def test_ramp_small_counts(self):
        assert ramp_initials(1).tolist() == [5.0]
        assert ramp_initials(2).tolist() == [5.0, 25.0]
        assert ramp_initials(3, low=0.0, high=1.0).tolist() == [0.0, 0.5, 1.0]
        with pytest.raises(ConfigurationError):
            ramp_initials(0)

    def test_seeded_reproducible(self):
        c1, s1 = seeded_initials(50, seed=123)
        c2, s2 = seeded_initials(50, seed=123)
        assert np.array_equal(c1, c2)
        assert np.array_equal(s1, s2)
        c3, _ = seeded_initials(50, seed=124)
        assert not np.array_equal(c1, c3)

    def test_seeded_ranges(self):
        centers, sigmas = seeded_initials(500, seed=0)
        assert centers.min() >= 5.0 and centers.max() <= 25.0
        assert sigmas.min() > 0.0 and sigmas.max() < 1.0


class TestInitialSpec:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            InitialSpec(centers="linspace", low=0, high=1, sigma=1.0)
        with pytest.raises(ConfigurationError):
            InitialSpec(centers="ramp", low=2.0, high=1.0, sigma=1.0)
        with pytest.raises(ConfigurationError):
            InitialSpec(centers="ramp", low=0.0, high=1.0, sigma=-1.0)
        with pytest.raises(ConfigurationError):
            InitialSpec(centers="ramp", low=0.0, high=1.0, sigma="gaussian")

    def test_needs_seed(self):
        assert not InitialSpec("ramp", 5.0, 25.0, 1.0).needs_seed
        assert InitialSpec("ramp", 5.0, 25.0, "uniform").needs_seed
        assert InitialSpec("uniform", 5.0, 25.0, 1.0).needs_seed

    def test_deterministic_spec_ignores_seed(self):
        centers, sigmas = InitialSpec("ramp", 5.0, 25.0, 1.0).build(4, None)
        assert centers.tolist() == ramp_initials(4).tolist()
        assert sigmas.tolist() == [1.0] * 4

    def test_seed_required_for_random_parts(self):
        with pytest.raises(ConfigurationError):
            InitialSpec("uniform", 5.0, 25.0, 1.0).build(4, None)

    def test_draw_order_matches_seeded_initials(self):
        # uniform centers then uniform sigmas, one generator, ascending ids
        centers, sigmas = InitialSpec("uniform", 5.0, 25.0, "uniform").build(30, 77)
        ref_c, ref_s = seeded_initials(30, 77)
        assert np.array_equal(centers, ref_c)
        assert np.array_equal(sigmas, ref_s)

    def test_ramp_with_seeded_sigmas(self):
        centers, sigmas = InitialSpec("ramp", 5.0, 25.0, "uniform").build(8, 5)
        assert np.array_equal(centers, ramp_initials(8))
        assert np.array_equal(sigmas, np.random.default_rng(5).uniform(0.0, 1.0, 8))


class TestScenarioConfig:
    def test_missing_key_is_named(self):
        with pytest.raises(ConfigurationError, match="'steps'"):
            ScenarioConfig(
                name="x",
                kind="blfg",
                initial=InitialSpec("ramp", 5, 25, 1.0),
                b=0.01,
                n=3,
                d=0.6,
                scheme="local",
                leader=10.0,
            )

    def test_rejects_unknown_kind_and_scheme(self):
        init = InitialSpec("ramp", 5, 25, 1.0)
        with pytest.raises(ConfigurationError):
            ScenarioConfig(name="x", kind="mesh", initial=init, b=0.1)
        with pytest.raises(ConfigurationError):
            ScenarioConfig(
                name="x", kind="blfg", initial=init, b=0.1, n=3, d=0.6,
                scheme="external", leader=10.0, steps=5,
            )

    def test_flat_runs_are_local_only(self):
        init = InitialSpec("ramp", 5, 25, 1.0)
        with pytest.raises(ConfigurationError):
            ScenarioConfig(
                name="x", kind="bcfon", initial=init, b=0.1, n=3, d=0.6,
                steps=5, scheme="leader",
            )

    def test_requires_b(self):
        with pytest.raises(ConfigurationError, match="'b'"):
            ScenarioConfig(
                name="x", kind="bcfon", initial=InitialSpec("ramp", 5, 25, 1.0),
                b=None, n=3, d=0.6, steps=5,
            )

    def test_echo_key_order(self):
        scenarios = builtin_scenarios()
        assert list(scenarios["example1-local"].echo()) == [
            "schema_version", "name", "kind", "n", "steps", "d", "b", "scheme",
            "leader", "initial",
        ]
        assert list(scenarios["example3"].echo()) == [
            "schema_version", "name", "kind", "n", "b", "phases", "initial", "seed",
        ]


class TestParseScenario:
    def test_builtin_names(self):
        assert sorted(builtin_scenarios()) == BUILTIN_NAMES
        config = parse_scenario("example1-local")
        assert config.kind == "blfg"
        assert config.n == 156
        assert config.scheme == "local"

    def test_builtin_echo_round_trips(self, tmp_path):
        for name, config in builtin_scenarios().items():
            path = write_scenario(tmp_path, config.echo(), name=f"{name}.json")
            assert parse_scenario(path) == config

    def test_file_parsing(self, tmp_path):
        path = write_scenario(tmp_path, small_blfg_doc())
        config = parse_scenario(path)
        assert config.name == "small"
        assert config.steps == 2

    def test_name_falls_back_to_file_stem(self, tmp_path):
        doc = small_blfg_doc()
        del doc["name"]
        path = write_scenario(tmp_path, doc, name="renamed.json")
        assert parse_scenario(path).name == "renamed"

    def test_unknown_source(self, tmp_path):
        with pytest.raises(ConfigurationError, match="example3"):
            parse_scenario(tmp_path / "missing.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="not valid JSON"):
            parse_scenario(path)

    @pytest.mark.parametrize(
        "mutate, fragment",
        [
            (lambda d: d.update(extra=1), "'extra'"),
            (lambda d: d.update(schema_version=2), "'schema_version'"),
            (lambda d: d.pop("kind"), "'kind'"),
            (lambda d: d.pop("initial"), "'initial'"),
            (lambda d: d["initial"].pop("low"), "'low'"),
            (lambda d: d["initial"].update(shape=1), "'shape'"),
            (lambda d: d.update(b={}), "malformed"),
        ],
    )
    def test_malformed_documents_name_the_problem(self, tmp_path, mutate, fragment):
        doc = small_blfg_doc()
        mutate(doc)
        path = write_scenario(tmp_path, doc)
        with pytest.raises(ConfigurationError, match=fragment):
            parse_scenario(path)

    def test_malformed_phases(self, tmp_path):
        doc = {
            "schema_version": 1,
            "kind": "bottomup",
            "n": 4,
            "b": 0.5,
            "phases": [{"d": 0.5}],
            "initial": {"centers": "ramp", "low": 0.0, "high": 1.0, "sigma": 1.0},
        }
        path = write_scenario(tmp_path, doc)
        with pytest.raises(ConfigurationError, match="phase"):
            parse_scenario(path)
        doc["phases"] = []
        path = write_scenario(tmp_path, doc)
        with pytest.raises(ConfigurationError, match="phases"):
            parse_scenario(path)


class TestExecute:
    def test_blfg_dispatch(self, tmp_path):
        config = parse_scenario(write_scenario(tmp_path, small_blfg_doc()))
        run = execute_scenario(config)
        # ramp of 3 on [5, 25] is isolated at d = 0.6; each averages with the leader
        assert run.record.centers[0].tolist() == [5.0, 15.0, 25.0]
        assert run.record.centers[1].tolist() == [7.5, 12.5, 17.5]
        assert run.record.sigmas[1].tolist() == [1.0, 1.0, 1.0]
        assert run.seed is None
        assert run.td_state is None

    def test_seed_argument_overrides_config(self):
        config = ScenarioConfig(
            name="x", kind="bcfon", initial=InitialSpec("uniform", 5, 25, "uniform"),
            b=0.5, n=10, d=0.5, steps=3, seed=7,
        )
        assert execute_scenario(config).seed == 7
        run = execute_scenario(config, seed=9)
        assert run.seed == 9
        ref_c, ref_s = seeded_initials(10, 9)
        assert np.array_equal(run.initial.centers, ref_c)
        assert np.array_equal(run.initial.sigmas, ref_s)

    def test_topdown_builds_per_group_profiles(self):
        config = ScenarioConfig(
            name="x", kind="topdown", initial=InitialSpec("ramp", 5, 25, 1.0),
            b=0.01, d=0.6, scheme="local", leader=10.0, steps=2, group_sizes=(2, 2),
        )
        run = execute_scenario(config)
        assert run.td_state is not None
        ramp2 = ramp_initials(2).tolist()
        assert run.initial.centers.tolist() == ramp2 * 3
        assert run.record.levels.tolist() == [1, 1, 1, 1, 2, 2]

    def test_bottomup_dispatch(self):
        config = ScenarioConfig(
            name="x", kind="bottomup", initial=InitialSpec("ramp", 0, 10, 1.0),
            b=0.5, n=4, phases=(Phase(0.9, 2), Phase(0.1, 3)),
        )
        run = execute_scenario(config)
        assert run.record.n_samples == 6
        assert [s.d for s in run.record.phases] == [0.9, 0.1]
