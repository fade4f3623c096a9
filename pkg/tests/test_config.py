from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpsim.backends.base import AblationFlags
from fpsim.backends.llm import LlmBackendConfig
from fpsim.backends.mock import MockBackendConfig
from fpsim.config import dump_config, parse_config, parse_config_text, write_config
from fpsim.exceptions import ConfigError
from fpsim.persona import TRAIT_NAMES, SamplingRule, TraitProfile
from fpsim.simulator import InterventionSchedule, SimulationConfig

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_minimal_defaults():
    cfg = parse_config_text("topic: moon landing was staged\n")
    assert (cfg.n_agents, cfg.horizon, cfg.contacts_per_day, cfg.run_seed) == (30, 15, (2, 5), 0)
    assert cfg.n_initially_infected == 1
    assert cfg.backend == "mock"
    assert str(cfg.intervention) == "none"


def test_every_k_expansion():
    cfg = parse_config_text("topic: t\nintervention: every_k(1,3)\n")
    assert cfg.intervention.days_for(cfg.horizon) == [1, 4, 7, 10, 13]


@pytest.mark.parametrize(
    "text, line, fragment",
    [
        ("topic: t\ncontacts_per_day: [2, 30]\n", 2, "c_max=30"),
        ("topic: t\nn_agents: 30\nhorizon: 0\n", 3, "horizon"),
        ("n_agents: 30\n", 1, "topic"),
        ("topic: t\ncolour: red\n", 2, "unknown key"),
        ("topic: t\nintervention: sometimes\n", 2, "intervention"),
        ("topic: t\nhorizon: 5\nintervention: on_days(9)\n", 3, "outside"),
        ("topic: t\nmock:\n  official_weight: 0.2\n", 2, "official_weight"),
        ("topic: t\nn_agents: many\n", 2, "integer"),
        ("topic: t\ntrait_profile: gullible\n", 2, "gullible"),
        ("topic: [unclosed\n", 2, "invalid YAML"),
    ],
)
def test_errors_are_line_anchored(text, line, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config_text(text, source="c.yaml")
    assert info.value.line == line
    assert fragment in str(info.value)
    assert str(info.value).startswith("c.yaml:")


def test_api_key_rejected(monkeypatch):
    monkeypatch.setenv("FPS_API_KEY", "sk-env")
    with pytest.raises(ConfigError) as info:
        parse_config_text("topic: t\nllm:\n  model_name: m\n  api_key: sk-secret\n")
    assert info.value.line == 4
    assert "FPS_API_KEY" in str(info.value)
    assert "sk-secret" not in str(info.value)


def test_api_key_never_written(tmp_path, monkeypatch):
    monkeypatch.setenv("FPS_API_KEY", "sk-env-value")
    cfg = SimulationConfig(topic="t", llm=LlmBackendConfig(api_key="sk-inline"))
    text = dump_config(cfg)
    assert "api_key" not in text and "sk-" not in text


@pytest.mark.parametrize("path", sorted(CONFIG_DIR.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_configs_parse(path):
    cfg = parse_config(path)
    assert cfg.topic


def test_missing_file():
    with pytest.raises(ConfigError):
        parse_config("/nonexistent/config.yaml")


def test_name_pool_relative_to_file(tmp_path):
    (tmp_path / "names.txt").write_text("Ann\nBob\n", encoding="utf-8")
    (tmp_path / "c.yaml").write_text("topic: t\nname_pool: names.txt\n", encoding="utf-8")
    cfg = parse_config(tmp_path / "c.yaml")
    assert Path(cfg.name_pool) == tmp_path / "names.txt"


rules = st.sampled_from(list(SamplingRule))
profiles = st.one_of(
    st.sampled_from(["random", "credulous", "skeptical"]).map(TraitProfile.from_name),
    st.fixed_dictionaries({n: rules for n in TRAIT_NAMES}).map(
        lambda d: TraitProfile.from_mapping({k: v.value for k, v in d.items()})
    ),
)
schedules = st.one_of(
    st.just(InterventionSchedule.none()),
    st.lists(st.integers(1, 10), min_size=1, max_size=4).map(InterventionSchedule.on_days),
    st.builds(InterventionSchedule.every_k, st.integers(1, 10), st.integers(1, 5)),
)


@st.composite
def configs(draw):
    n = draw(st.integers(2, 60))
    c_max = draw(st.integers(1, n - 1))
    c_min = draw(st.integers(1, c_max))
    return SimulationConfig(
        topic=draw(st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")), min_size=1, max_size=40).filter(str.strip)),
        n_agents=n,
        horizon=draw(st.integers(10, 40)),
        contacts_per_day=(c_min, c_max),
        n_initially_infected=draw(st.integers(0, n)),
        trait_profile=draw(profiles),
        intervention=draw(schedules),
        backend=draw(st.sampled_from(["mock", "llm"])),
        run_seed=draw(st.integers(0, 2**64 - 1)),
        symmetric_contacts=draw(st.booleans()),
        long_term_char_cap=draw(st.integers(1, 5000)),
        ablation=AblationFlags(draw(st.booleans()), draw(st.booleans()), draw(st.booleans())),
        mock=MockBackendConfig(
            official_weight=draw(st.floats(1, 10)),
            recall_days=draw(st.integers(1, 5)),
            short_term_persuades=draw(st.booleans()),
            seed=draw(st.integers(0, 1000)),
        ),
        llm=LlmBackendConfig(
            model_name=draw(st.sampled_from(["m1", "gpt-x"])),
            temperature=draw(st.floats(0, 2)),
            max_retries=draw(st.integers(0, 5)),
        ),
    )


@settings(max_examples=60, deadline=None)
@given(cfg=configs())
def test_round_trip(cfg):
    assert parse_config_text(dump_config(cfg)) == cfg


def test_round_trip_file(tmp_path):
    cfg = parse_config(CONFIG_DIR / "intervention_every3.yaml")
    write_config(cfg, tmp_path / "c.yaml")
    assert parse_config(tmp_path / "c.yaml") == cfg
