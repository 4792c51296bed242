"""
Report output shared by the management commands
"""
import json
import logging

from django.core.management.base import CommandError

from wcond_modules.errors import ConfigError, InstanceError

logger = logging.getLogger(__name__)

# Exit codes of the management commands
EXIT_VIOLATIONS = 1
EXIT_INVALID_INPUT = 2

INPUT_ERRORS = (InstanceError, ConfigError)


def dumps(data) -> str:
    """JSON text in insertion order, so equal reports give equal bytes"""
    return json.dumps(data, indent=2) + "\n"


def write_json(data, path):
    with open(path, "w") as handle:
        handle.write(dumps(data))
    logger.info("Report written to %s", path)


def invalid_input(error: Exception) -> CommandError:
    if isinstance(error, InstanceError) and error.field:
        return CommandError(f"{error} (field: {error.field})", returncode=EXIT_INVALID_INPUT)
    return CommandError(str(error), returncode=EXIT_INVALID_INPUT)


def violations_found(count: int) -> CommandError:
    return CommandError(f"{count} property violations found", returncode=EXIT_VIOLATIONS)

