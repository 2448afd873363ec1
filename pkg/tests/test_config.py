# -*- encoding: utf-8

import pytest

from parlsm import constants
from parlsm.config import (
    KEY_TYPES, RunConfig, load_config_file, parse_config, parse_flag
)
from parlsm.errors import ConfigurationError


def write_config(tmpdir, text):
    path = tmpdir.join('config.yml')
    path.write(text)
    return str(path)


def test_defaults():
    config = parse_config(environ={})
    assert config.command == 'price-parallel'
    assert (config.spot, config.strike, config.rate, config.vol) == (36, 40, 0.06, 0.2)
    assert (config.n_paths, config.n_iterations, config.group_size) == (100_000, 100, 10)
    assert config.seed == constants.DEFAULT_SEED
    assert config.schedule().count == 50
    assert config.fd_grid().upper_spot(config.strike) == 160


def test_every_key_has_a_type():
    assert set(KEY_TYPES) == set(RunConfig().to_dict())


class TestPrecedence:

    def test_file_overrides_defaults(self, tmpdir):
        path = write_config(tmpdir, 'n_paths: 2000\nn_iterations: 10\nvol: 0.4\n')
        config = parse_config(path=path, environ={})
        assert (config.n_paths, config.n_iterations, config.vol) == (2000, 10, 0.4)

    def test_environment_overrides_the_file(self, tmpdir):
        path = write_config(tmpdir, 'seed: 5\n')
        assert parse_config(path=path, environ={'AMC_SEED': '6'}).seed == 6

    def test_flags_override_everything(self, tmpdir):
        path = write_config(tmpdir, 'seed: 5\n')
        config = parse_config(path=path, flags={'seed': '7'}, environ={'AMC_SEED': '6'})
        assert config.seed == 7

    def test_unset_flags_are_ignored(self):
        assert parse_config(flags={'--seed': None}, environ={}).seed == constants.DEFAULT_SEED

    def test_bad_environment_seed(self):
        with pytest.raises(ConfigurationError) as err:
            parse_config(environ={'AMC_SEED': 'lucky'})
        assert err.value.key == 'seed'


class TestConfigFile:

    def test_empty_file(self, tmpdir):
        assert load_config_file(write_config(tmpdir, '')) == {}

    def test_dashes_in_keys(self, tmpdir):
        assert load_config_file(write_config(tmpdir, 'n-paths: 1000\n')) == {'n_paths': 1000}

    def test_whole_floats_are_integers(self, tmpdir):
        assert load_config_file(write_config(tmpdir, 'n_paths: 1000.0\n')) == {'n_paths': 1000}

    def test_study_points(self, tmpdir):
        values = load_config_file(write_config(tmpdir, 'study_points: [1000, 2000, 4000]\n'))
        assert values == {'study_points': (1000, 2000, 4000)}

    @pytest.mark.parametrize('text, key', [
        ('colour: blue\n', 'colour'),
        ('market:\n  spot: 36\n', 'market'),
        ('n_paths: many\n', 'n_paths'),
        ('n_paths: 1000.5\n', 'n_paths'),
        ('boundary_weights: 1\n', 'boundary_weights'),
        ('vol: yes\n', 'vol'),
        ('spot:\n', 'spot'),
        ('study_points: [1000, two]\n', 'study_points'),
        ('- spot\n- 36\n', 'config'),
        ('spot: [36\n', 'config'),
    ])
    def test_bad_files(self, tmpdir, text, key):
        with pytest.raises(ConfigurationError) as err:
            load_config_file(write_config(tmpdir, text))
        assert err.value.key == key

    def test_optional_keys_may_be_empty(self, tmpdir):
        assert load_config_file(write_config(tmpdir, 'beta:\n')) == {'beta': None}

    def test_missing_file(self, tmpdir):
        with pytest.raises(ConfigurationError) as err:
            load_config_file(str(tmpdir.join('missing.yml')))
        assert err.value.key == 'config'


@pytest.mark.parametrize('flag, text, expected', [
    ('--n-paths', '20000', ('n_paths', 20_000)),
    ('--n-paths', '1e5', ('n_paths', 100_000)),
    ('--vol', '0.4', ('vol', 0.4)),
    ('--boundary-weights', 'no', ('boundary_weights', False)),
    ('--lsm-parallel-paths', 'true', ('lsm_parallel_paths', True)),
    ('--study-points', '1000,4000,16000', ('study_points', (1000, 4000, 16_000))),
    ('--beta', '', ('beta', None)),
    ('--basis', 'spot', ('basis', 'spot')),
    ('--ridge-mode', 'column', ('ridge_mode', 'column')),
    ('output_dir', 'out', ('output_dir', 'out')),
])
def test_parse_flag(flag, text, expected):
    assert parse_flag(flag, text) == expected


@pytest.mark.parametrize('flag, text', [
    ('--colour', 'blue'),
    ('--vol', 'high'),
    ('--workers', '2.5'),
    ('--boundary-weights', 'maybe'),
])
def test_bad_flags(flag, text):
    with pytest.raises(ConfigurationError):
        parse_flag(flag, text)


@pytest.mark.parametrize('kwargs, key', [
    ({'workers': 0}, 'workers'),
    ({'n_paths': 1001}, 'n_paths'),
    ({'spot': -36}, 'spot'),
    ({'vol': -0.2}, 'vol'),
    ({'group_size': 0}, 'group_size'),
    ({'basis': 'laguerre'}, 'basis'),
    ({'lam': 3.0}, 'lam'),
    ({'beta': 0.0}, 'beta'),
    ({'beta_shrink': 2.0}, 'beta_shrink'),
    ({'seed': 2 ** 64}, 'seed'),
    ({'bootstrap': 'warm_start'}, 'warm_start_file'),
    ({'fd_s_max': 40.0}, 'fd_s_max'),
    ({'fd_method': 'explicit'}, 'fd_method'),
    ({'ridge_mode': 'lasso'}, 'ridge_mode'),
    ({'format': 'xml'}, 'format'),
    ({'study_points': (1000, 1000, 2000)}, 'study_points'),
    ({'command': 'price-everything'}, 'command'),
])
def test_invalid_configs_are_rejected(kwargs, key):
    with pytest.raises(ConfigurationError) as err:
        RunConfig(**kwargs)
    assert err.value.key == key


def test_uneven_paths_are_fine_for_lsm():
    assert RunConfig(command='price-lsm', n_paths=1001).n_paths == 1001


def test_setup_carries_the_settings():
    config = RunConfig(n_paths=2000, n_iterations=10, workers=3, seed=9, basis='spot')
    setup = config.setup(engine='lsm')
    assert setup.engine == 'lsm'
    assert (setup.n_paths, setup.n_iterations, setup.workers, setup.seed) == (2000, 10, 3, 9)
    assert setup.basis_spec().functions == 'spot'
