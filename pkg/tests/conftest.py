"""Shared fixtures: the Flask app, its clients, and problem bundles."""

import shutil
from pathlib import Path

import pytest

from app import create_app
from app.extensions import db
from app.services.pddl_io import ProblemBundle, load_bundle
from app.services.scenarios import ScenarioSpec, generate

FIXTURES = Path(__file__).parent / 'fixtures'


@pytest.fixture
def app():
    app = create_app('testing')
    with app.app_context():
        db.create_all()
        yield app
        db.session.remove()
        db.drop_all()


@pytest.fixture
def client(app):
    return app.test_client()


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture(scope='session')
def corridor():
    """Robot side of the corridor: rubble blocks p1-p2, clearing it costs 3."""
    return load_bundle(FIXTURES / 'corridor').robot_model


@pytest.fixture
def corridor_dir(tmp_path):
    return Path(shutil.copytree(FIXTURES / 'corridor', tmp_path / 'corridor'))


@pytest.fixture
def hallway_dir(tmp_path):
    """Robot and human problems as separate files."""
    return Path(shutil.copytree(FIXTURES / 'hallway', tmp_path / 'hallway'))


@pytest.fixture
def hallway_overlay_dir(tmp_path):
    """The same difference given as an overlay."""
    return Path(shutil.copytree(FIXTURES / 'hallway_overlay', tmp_path / 'hallway_overlay'))


@pytest.fixture
def hallway_bundle():
    return ProblemBundle.load(FIXTURES / 'hallway')


def scenario(family, **params):
    delta = params.pop('delta_size', None)
    seed = params.pop('seed', 0)
    return generate(ScenarioSpec(family, {k: str(v) for k, v in params.items()}, delta, seed))


# generated bundles exercised across planner and search tests
SCENARIOS = {
    'usar': ('usar-grid', {}),
    'usar-grid': ('usar-grid', {'layout': 'grid', 'width': 3, 'height': 2, 'rubble': 1, 'delta_size': 4}),
    'rover': ('rover-martian', {}),
    'rover-large': ('rover-martian', {'waypoints': 5, 'objectives': 2, 'delta_size': 7}),
    'barman': ('barman-bar', {}),
    'barman-shots': ('barman-bar', {'shots': 3, 'delta_size': 6}),
    'random': ('random', {'seed': 3, 'delta_size': 5}),
}


def scenario_problem(name):
    family, params = SCENARIOS[name]
    return load_bundle(scenario(family, **params))


@pytest.fixture(scope='session')
def usar_problem():
    return load_bundle(scenario('usar-grid'))


@pytest.fixture(scope='session')
def rover_problem():
    return load_bundle(scenario('rover-martian'))


@pytest.fixture(scope='session')
def barman_problem():
    return load_bundle(scenario('barman-bar'))


@pytest.fixture
def usar_dir(tmp_path):
    return scenario('usar-grid').write(tmp_path / 'usar')
