import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fpsim.exceptions import ConfigError
from fpsim.persona import (
    PROFILES,
    TRAIT_NAMES,
    Education,
    Polarity,
    TraitProfile,
    generate_persona,
    generate_population,
    load_name_pool,
    parse_name_pool,
    sample_traits,
    susceptibility_score,
)

from .conftest import make_persona

POOL = ["Ada", "Bo", "Cy"]


def test_all_force_high_gives_all_high():
    tv = sample_traits(np.random.default_rng(0), TraitProfile.uniform("force_high"))
    assert all(getattr(tv, n) is Polarity.HIGH for n in TRAIT_NAMES)


@pytest.mark.parametrize("seed", range(20))
def test_credulous_forces_agreeableness_and_neuroticism(seed):
    tv = sample_traits(np.random.default_rng(seed), TraitProfile.credulous())
    assert tv.agreeableness is Polarity.HIGH
    assert tv.neuroticism is Polarity.HIGH


def test_profiles_match_definitions():
    cred = PROFILES["credulous"].as_dict()
    assert cred["agreeableness"] == cred["neuroticism"] == "force_high"
    assert {cred[n] for n in ("openness", "conscientiousness", "extraversion")} == {"random_5050"}
    skep = PROFILES["skeptical"].as_dict()
    assert skep["agreeableness"] == skep["neuroticism"] == "force_low"
    assert TraitProfile.from_name("credulous").name == "credulous"


def test_random_openness_is_fair():
    rng = np.random.default_rng(2024)
    profile = TraitProfile.random()
    highs = sum(sample_traits(rng, profile).openness is Polarity.HIGH for _ in range(10_000))
    assert abs(highs / 10_000 - 0.5) <= 0.02


def test_ages_in_range_and_deterministic():
    rng = np.random.default_rng(5)
    ages = [generate_persona(rng, TraitProfile(), POOL).age for _ in range(2000)]
    assert min(ages) >= 18 and max(ages) <= 64
    # both endpoints are reachable
    assert {18, 64} <= set(ages)
    a = generate_persona(np.random.default_rng(9), TraitProfile(), POOL)
    b = generate_persona(np.random.default_rng(9), TraitProfile(), POOL)
    assert a == b


def test_education_roughly_uniform():
    rng = np.random.default_rng(1)
    edus = [generate_persona(rng, TraitProfile(), POOL).education for _ in range(5000)]
    for level in Education:
        assert abs(edus.count(level) / 5000 - 0.2) < 0.03


def test_population_ids_unique():
    people = generate_population(np.random.default_rng(0), 30, TraitProfile())
    assert sorted(p.id for p in people) == list(range(30))


def test_empty_pool_rejected():
    with pytest.raises(ConfigError):
        generate_persona(np.random.default_rng(0), TraitProfile(), [])


def test_age_validation():
    with pytest.raises(ValueError):
        make_persona(age=17)


@pytest.mark.parametrize(
    "agree, neuro, edu, expected",
    [
        ("high", "high", "bachelor", 0.80),
        ("low", "low", "bachelor", 0.20),
        ("high", "high", "primary", 0.90),
        ("high", "high", "doctorate", 0.70),
        ("low", "low", "doctorate", 0.10),
    ],
)
def test_susceptibility_examples(agree, neuro, edu, expected):
    p = make_persona(agree=agree, neuro=neuro, education=edu)
    assert susceptibility_score(p) == pytest.approx(expected)


polarity = st.sampled_from(list(Polarity))
education = st.sampled_from(list(Education))


@given(agree=polarity, neuro=polarity, edu=education)
def test_susceptibility_bounded_and_monotone(agree, neuro, edu):
    p = make_persona(agree=agree.value, neuro=neuro.value, education=edu.value)
    s = susceptibility_score(p)
    assert 0.05 <= s <= 0.95
    up = make_persona(agree="high", neuro=neuro.value, education=edu.value)
    assert susceptibility_score(up) >= s
    up = make_persona(agree=agree.value, neuro="high", education=edu.value)
    assert susceptibility_score(up) >= s
    order = list(Education)
    if edu is not order[-1]:
        more = make_persona(agree=agree.value, neuro=neuro.value, education=order[order.index(edu) + 1].value)
        assert susceptibility_score(more) <= s


@settings(max_examples=30)
@given(seed=st.integers(0, 2**32 - 1))
def test_credulous_mean_susceptibility_exceeds_skeptical(seed):
    def mean(profile):
        people = generate_population(np.random.default_rng(seed), 30, profile, POOL)
        return np.mean([susceptibility_score(p) for p in people])

    assert mean(TraitProfile.credulous()) > mean(TraitProfile.skeptical())


@settings(max_examples=25)
@given(seed=st.integers(0, 2**32 - 1))
def test_forced_dimensions_never_vary(seed):
    profile = TraitProfile.from_mapping({"openness": "force_low", "extraversion": "force_high"})
    rng = np.random.default_rng(seed)
    for _ in range(20):
        tv = sample_traits(rng, profile)
        assert tv.openness is Polarity.LOW and tv.extraversion is Polarity.HIGH


def test_profile_mapping_errors():
    with pytest.raises(ConfigError):
        TraitProfile.from_mapping({"charisma": "force_high"})
    with pytest.raises(ConfigError):
        TraitProfile.from_mapping({"openness": "sometimes"})
    with pytest.raises(ConfigError):
        TraitProfile.from_name("gullible")


def test_name_pool_parsing(tmp_path):
    assert parse_name_pool("Ann\n\n  Bob \n") == ["Ann", "Bob"]
    assert len(load_name_pool()) > 50
    f = tmp_path / "names.txt"
    f.write_text("\n\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_name_pool(f)


def test_describe_lists_five_traits():
    text = make_persona().traits.describe()
    assert text.count(",") == 4
    assert "high agreeableness" in text
