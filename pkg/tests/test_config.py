import pytest

from src.config import Config, load_config_file, normalize_key
from src.errors import ConfigError

ALLOWED = {'seed', 'n-quarters', 'out-dir', 'extra'}


def test_normalize_key():
    assert normalize_key('N_QUARTERS') == 'n-quarters'
    assert normalize_key('--out-dir') == 'out-dir'
    assert normalize_key(' Seed ') == 'seed'


def test_load_config_file(tmp_path):
    path = tmp_path / 'run.env'
    path.write_text("# scenario\nSEED=7\nn_quarters = 48\nOUT_DIR='output/run 1'\n", encoding='utf-8')
    assert load_config_file(str(path), ALLOWED) == {'seed': '7', 'n-quarters': '48', 'out-dir': 'output/run 1'}


def test_unknown_key(tmp_path):
    path = tmp_path / 'run.env'
    path.write_text("SEED=7\nCOLOUR=blue\n", encoding='utf-8')
    with pytest.raises(ConfigError, match='COLOUR'):
        load_config_file(str(path), ALLOWED)


def test_key_without_value(tmp_path):
    path = tmp_path / 'run.env'
    path.write_text("SEED\n", encoding='utf-8')
    with pytest.raises(ConfigError, match='no value'):
        load_config_file(str(path), ALLOWED)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as info:
        load_config_file(str(tmp_path / 'absent.env'), ALLOWED)
    assert info.value.exit_code == 2


def test_validate_creates_directories(tmp_path, monkeypatch):
    monkeypatch.setattr(Config, 'OUTPUT_DIR', str(tmp_path / 'out'))
    monkeypatch.setattr(Config, 'LOG_DIR', str(tmp_path / 'logs'))
    assert Config.validate()
    assert (tmp_path / 'out').is_dir()
    assert (tmp_path / 'logs').is_dir()


@pytest.mark.parametrize("attribute, value", [
    ('FLAT_BAND', -0.1),
    ('THRESHOLD', 1.0),
    ('MIN_TRAIN', 4),
    ('WORKERS', 0),
])
def test_validate_rejects(monkeypatch, attribute, value):
    monkeypatch.setattr(Config, attribute, value)
    with pytest.raises(ConfigError):
        Config.validate()
