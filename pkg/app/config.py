import os


def _env_bool(name, default='false'):
    return os.environ.get(name, default).strip().lower() in ('1', 'true', 'yes', 'on')


def _env_float(name):
    value = os.environ.get(name)
    return float(value) if value else None


class Config:
    """Base configuration."""
    SECRET_KEY = os.environ.get('SECRET_KEY', 'dev-secret-key-change-in-production')
    SQLALCHEMY_TRACK_MODIFICATIONS = False

    # Database
    SQLALCHEMY_DATABASE_URI = os.environ.get('DATABASE_URL', 'sqlite:///dev.db')

    # Fix for Render PostgreSQL URLs (postgres:// -> postgresql://)
    if SQLALCHEMY_DATABASE_URI and SQLALCHEMY_DATABASE_URI.startswith('postgres://'):
        SQLALCHEMY_DATABASE_URI = SQLALCHEMY_DATABASE_URI.replace('postgres://', 'postgresql://', 1)

    # Planning engine
    MEGA_NODE_CAP = int(os.environ.get('MEGA_NODE_CAP', 1_000_000))
    MEGA_TIME_CAP = _env_float('MEGA_TIME_CAP')  # seconds per planner call, None = no cap
    MEGA_ALLOW_COST_EDITS = _env_bool('MEGA_ALLOW_COST_EDITS')
    MEGA_LITERAL_TIES = _env_bool('MEGA_LITERAL_TIES')
    MEGA_WORKERS = int(os.environ.get('MEGA_WORKERS', 1))
    MEGA_SWEEP_PROCESSES = int(os.environ.get('MEGA_SWEEP_PROCESSES', 1))
    MEGA_BRUTE_FORCE_MAX_DELTA = int(os.environ.get('MEGA_BRUTE_FORCE_MAX_DELTA', 12))

    # App
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'INFO')
    MAX_BUNDLE_SIZE = 1 * 1024 * 1024  # 1MB
    MAX_CONTENT_LENGTH = MAX_BUNDLE_SIZE
    RUNS_PER_PAGE = 20


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True
    LOG_LEVEL = os.environ.get('LOG_LEVEL', 'DEBUG')


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False

    # Enforce HTTPS in production
    PREFERRED_URL_SCHEME = 'https'


class TestingConfig(Config):
    """Testing configuration."""
    TESTING = True
    SQLALCHEMY_DATABASE_URI = 'sqlite:///:memory:'
    MEGA_NODE_CAP = 200_000
    MEGA_TIME_CAP = None
    LOG_LEVEL = 'WARNING'


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig,
}
