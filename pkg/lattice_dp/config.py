import os


def _env_flag(name, default):
    return os.environ.get(name, default).lower() in ['true', 'on', '1']


class BaseConfig:
    """
    Base configuration class using environment variables
    """

    # Application settings
    APP_NAME = os.environ.get('APP_NAME', 'lattice-dp')

    # Logging Configuration
    LOG_TO_STDOUT = _env_flag('LOG_TO_STDOUT', 'false')
    LOG_JSON = _env_flag('LOG_JSON', 'false')
    LOGGING_LEVEL = os.environ.get('LOGGING_LEVEL', 'INFO').upper()

    # Parallelism
    THREADS = int(os.environ.get('LATTICE_DP_THREADS', min(8, os.cpu_count() or 1)))

    # Numerics
    REL_TOL = float(os.environ.get('REL_TOL', 1e-9))
    NORM_SEARCH_BUDGET = int(os.environ.get('NORM_SEARCH_BUDGET', 200))
    SIGN_ENUMERATION_LIMIT = int(os.environ.get('SIGN_ENUMERATION_LIMIT', 16))

    # Defect searches
    SEARCH_RESTARTS = int(os.environ.get('SEARCH_RESTARTS', 8))
    SEARCH_MAX_ITERS = int(os.environ.get('SEARCH_MAX_ITERS', 200))
    SEARCH_TOL = float(os.environ.get('SEARCH_TOL', 1e-9))
    SPLIT_EXHAUSTIVE_LIMIT = int(os.environ.get('SPLIT_EXHAUSTIVE_LIMIT', 20))
    SDP_EXHAUSTIVE_LIMIT = int(os.environ.get('SDP_EXHAUSTIVE_LIMIT', 12))

    # Enumeration caps
    ASSIGNMENT_ENUMERATION_LIMIT = int(os.environ.get('ASSIGNMENT_ENUMERATION_LIMIT', 10 ** 7))
    PIPELINE_BRUTEFORCE_LIMIT = int(os.environ.get('PIPELINE_BRUTEFORCE_LIMIT', 10 ** 5))
    SUBSET_ENUMERATION_CAP = int(os.environ.get('SUBSET_ENUMERATION_CAP', 25))
    MONTE_CARLO_SAMPLES = int(os.environ.get('MONTE_CARLO_SAMPLES', 10 ** 6))

    @classmethod
    def init_app(cls):
        """
        Log the loaded configuration.
        """
        from . import logger

        logger.debug(f"{cls.APP_NAME} initialized with {cls.__name__}")
        logger.debug(f"LOGGING_LEVEL: {cls.LOGGING_LEVEL}")
        logger.debug(f"THREADS: {cls.THREADS}")
        logger.debug(f"SEARCH_RESTARTS: {cls.SEARCH_RESTARTS}")


class DevelopmentConfig(BaseConfig):
    """
    Development-specific configuration
    """
    DEBUG = True


class ProductionConfig(BaseConfig):
    """
    Production-specific configuration
    """
    DEBUG = False
    LOGGING_LEVEL = os.environ.get('LOGGING_LEVEL', 'WARNING').upper()


class TestingConfig(BaseConfig):
    """
    Testing-specific configuration
    """
    TESTING = True
    LOGGING_LEVEL = 'WARNING'
    THREADS = 2
    MONTE_CARLO_SAMPLES = 20000


def get_config(config_name):
    """
    Factory function to return the appropriate configuration class

    :param config_name: Name of the configuration ('development', 'production', 'testing')
    :return: Configuration class
    """
    config_mapping = {
        'development': DevelopmentConfig,
        'production': ProductionConfig,
        'testing': TestingConfig
    }

    return config_mapping.get(config_name.lower(), DevelopmentConfig)
