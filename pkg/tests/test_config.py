"""
Tests for configuration module.
"""
import pytest
from unittest.mock import patch
from app import create_app
from app.config import Config, DevelopmentConfig, ProductionConfig, TestingConfig, get_config


class TestConfig:
    """Tests for Config class."""

    def test_config_has_required_attributes(self):
        """Test that Config has all required attributes."""
        for name in ('SECRET_KEY', 'PORT', 'LOG_LEVEL', 'QEC_WORKERS', 'QEC_DECODER_MODE',
                     'QEC_EC_AFTER_MEMORY', 'QEC_MAX_LEVEL', 'QEC_RESULTS_DIR',
                     'QEC_TAIL_WARNING_FRACTION', 'QEC_WILSON_MIN_FAILURES'):
            assert hasattr(Config, name)

    def test_truncation_orders(self):
        """Test that default truncation orders are 6, 10 and 21."""
        assert Config.TRUNCATION_ORDERS == {1: 6, 2: 10, 3: 21}

    def test_p_grid_bounds(self):
        """Test that the default p grid spans 1e-7 to 1e-4."""
        assert Config.P_GRID_MIN == 1e-7
        assert Config.P_GRID_MAX == 1e-4


class TestDevelopmentConfig:
    """Tests for DevelopmentConfig."""

    def test_debug_is_true(self):
        """Test that debug mode is enabled in development."""
        assert DevelopmentConfig.DEBUG is True

    def test_testing_is_false(self):
        """Test that testing mode is disabled in development."""
        assert DevelopmentConfig.TESTING is False


class TestProductionConfig:
    """Tests for ProductionConfig."""

    def test_debug_is_false(self):
        """Test that debug mode is disabled in production."""
        assert ProductionConfig.DEBUG is False


class TestTestingConfig:
    """Tests for TestingConfig."""

    def test_testing_is_true(self):
        """Test that testing mode is enabled in testing."""
        assert TestingConfig.TESTING is True

    def test_single_worker(self):
        """Test that tests run campaigns inline."""
        assert TestingConfig.QEC_WORKERS == 1


class TestGetConfig:
    """Tests for get_config function."""

    def test_production(self):
        """Test that FLASK_ENV=production selects ProductionConfig."""
        with patch.dict('os.environ', {'FLASK_ENV': 'production'}):
            assert get_config() is ProductionConfig

    def test_default_is_development(self):
        """Test that anything else selects DevelopmentConfig."""
        with patch.dict('os.environ', {'FLASK_ENV': 'staging'}):
            assert get_config() is DevelopmentConfig


class TestCreateApp:
    """Tests for the application factory."""

    def test_services_attached(self, app):
        """Test that all services are attached to the app."""
        assert app.builder is not None
        assert app.decoder.mode == 'literal'
        assert app.simulation.workers == 1
        assert app.analysis.wilson_min_failures == 10

    def test_invalid_decoder_mode_rejected(self):
        """Test that an unknown decoder mode stops app creation."""
        with patch.object(TestingConfig, 'QEC_DECODER_MODE', 'greedy'):
            with pytest.raises(RuntimeError):
                create_app('testing')
