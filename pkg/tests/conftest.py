"""
Pytest configuration and fixtures for testing.
"""
import pytest
from app import create_app
from app.services import AnalysisService, BuilderService, DecoderService, SimulationService


@pytest.fixture
def app(tmp_path):
    """Create application for testing."""
    app = create_app('testing')
    app.config['TESTING'] = True
    app.config['QEC_RESULTS_DIR'] = str(tmp_path / 'results')
    return app


@pytest.fixture
def client(app):
    """Create test client."""
    return app.test_client()


@pytest.fixture
def runner(app):
    """Create CLI runner."""
    return app.test_cli_runner()


@pytest.fixture
def app_context(app):
    """Create application context."""
    with app.app_context():
        yield


@pytest.fixture(scope='session')
def builder():
    """Builder with default settings, shared across tests."""
    return BuilderService()


@pytest.fixture(scope='session')
def exrec1(builder):
    """Level-1 CNOT exRec."""
    return builder.build_cnot_exrec(1)


@pytest.fixture
def decoder():
    return DecoderService()


@pytest.fixture(scope='session')
def simulation():
    return SimulationService(workers=1, chunk_size=50)


@pytest.fixture
def analysis():
    return AnalysisService()
