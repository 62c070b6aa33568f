import logging
import os
import sys

import structlog

logger = structlog.get_logger()

_active_config = None


def create_app(config_name=None):
    """
    Application factory: select the configuration class and configure logging.

    Args:
        config_name (str, optional): Name of the configuration environment.
                                     Defaults to the LATTICE_DP_ENV variable, then 'development'.

    Returns:
        type: The active configuration class
    """
    from .config import get_config

    global _active_config

    config_name = config_name or os.environ.get('LATTICE_DP_ENV', 'development')
    config_class = get_config(config_name)
    _setup_logging(config_class)
    config_class.init_app()
    _active_config = config_class

    logger.debug(f"Starting lattice-dp in {config_name} mode")
    return config_class


def current_config():
    """
    Return the configuration selected by create_app, falling back to the environment.
    """
    if _active_config is not None:
        return _active_config

    from .config import get_config
    return get_config(os.environ.get('LATTICE_DP_ENV', 'development'))


def _setup_logging(config_class):
    """
    Configure structlog. Output goes to stderr so stdout carries only JSON reports.

    Args:
        config_class: Configuration class providing LOGGING_LEVEL and LOG_JSON
    """
    level = logging.getLevelName(config_class.LOGGING_LEVEL)
    if not isinstance(level, int):
        level = logging.INFO

    renderer = structlog.processors.JSONRenderer() if config_class.LOG_JSON \
        else structlog.dev.ConsoleRenderer(colors=False)
    stream = sys.stdout if config_class.LOG_TO_STDOUT else sys.stderr

    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt='iso'),
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        logger_factory=structlog.PrintLoggerFactory(file=stream),
        cache_logger_on_first_use=False,
    )
