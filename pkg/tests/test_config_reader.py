from pathlib import Path

import pytest

from config_reader import NormalizationScope, PipelineConfig, format_duration, load_config, parse_duration
from exceptions import ConfigError

DATA_DIR = Path(__file__).resolve().parent.parent / 'Data'


def test_defaults():
    config = PipelineConfig()
    assert config.window_length == 3600
    assert config.stride == 3600
    assert config.delta == 3
    assert config.alphabet.boundaries == (0.25, 0.5, 0.75)
    assert config.epsilon_on == 0.0
    assert config.tolerance == 0.05
    assert config.scope is NormalizationScope.PER_CHANNEL
    assert config.add_unmetered


def test_bundled_config_holds_the_defaults():
    assert load_config(DATA_DIR / 'config.json').to_dict() == PipelineConfig().to_dict()


@pytest.mark.parametrize('text, seconds', [('15m', 900), ('1h', 3600), ('90s', 90), ('1d', 86400), ('600', 600),
                                           (1800, 1800), (' 2h ', 7200)])
def test_parse_duration(text, seconds):
    assert parse_duration(text) == seconds


@pytest.mark.parametrize('text', ['', '1.5h', '-15m', '0', '15 minutes', True])
def test_bad_duration(text):
    with pytest.raises(ConfigError):
        parse_duration(text)


@pytest.mark.parametrize('seconds, text', [(3600, '1h'), (900, '15m'), (90, '90s'), (86400, '1d'), (5400, '90m')])
def test_format_duration(seconds, text):
    assert format_duration(seconds) == text


def test_round_trip_through_canonical_form():
    config = PipelineConfig.from_dict({'window': '30m', 'stride': '900', 'delta': 2, 'alphabet': {'symbols': 5},
                                       'epsilon_on': 0.1, 'scope': 'global', 'add_unmetered': False})
    document = config.to_dict()
    assert document['stride'] == '15m'
    assert PipelineConfig.from_dict(document).to_dict() == document
    assert PipelineConfig.from_dict(document).canonical_json() == config.canonical_json()


def test_hash_ignores_worker_count():
    assert PipelineConfig(processes=1).config_hash() == PipelineConfig(processes=8).config_hash()
    assert PipelineConfig(delta=2).config_hash() != PipelineConfig().config_hash()


@pytest.mark.parametrize('document', [
    {'windows': '1h'},
    {'window': '1h', 'stride': '2h'},
    {'delta': 0},
    {'delta': 2.5},
    {'alphabet': {'symbols': 1}},
    {'alphabet': 4},
    {'epsilon_on': -0.1},
    {'epsilon_on': 'high'},
    {'tolerance': 1.5},
    {'scope': 'house'},
    {'processes': 0},
])
def test_invalid_documents(document):
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict(document)


def test_overrides():
    config = PipelineConfig(processes=1).with_overrides(window='2h', delta=4, alphabet=3, epsilon_on=0.2)
    assert (config.window_length, config.stride, config.delta, config.alphabet.size, config.epsilon_on) == \
        (7200, 7200, 4, 3, 0.2)
    overlapping = PipelineConfig(stride=900).with_overrides(window='2h')
    assert overlapping.stride == 900
    assert PipelineConfig().with_overrides(stride='15m').stride == 900


def test_invalid_json(tmp_path):
    path = tmp_path / 'config.json'
    path.write_text('{"window": ', encoding='utf-8')
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text('[1, 2]', encoding='utf-8')
    with pytest.raises(ConfigError):
        load_config(path)


def test_missing_config_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / 'absent.json')
