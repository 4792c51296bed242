import logging
logger = logging.getLogger(__name__)

from django.conf import settings
from rest_framework.views import APIView
from rest_framework.response import Response
from rest_framework import status

# Import operator toolkit modules for processing
from wcond_modules.classify import classify_all
from wcond_modules.errors import ConfigError, InstanceError
from wcond_modules.instances import parse_instance
from wcond_modules.spectra import spectrum_report
from wcond_modules.unit_square import unit_square_report
from wcond_modules.verification import RunConfig, parse_p_grid, run_campaign


def _option(data, key, cast):
    """Read an optional request field, converting it with `cast`"""
    value = data.get(key)
    if value is None:
        return None
    try:
        return cast(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be a valid {cast.__name__}")


def _bad_request(error):
    body = {"error": str(error)}
    if getattr(error, "field", None):
        body["field"] = error.field
    return Response(body, status=status.HTTP_400_BAD_REQUEST)


def _server_error(e):
    logger.exception("Request failed")
    return Response(
        {"error": f"Error processing request: {str(e)}"},
        status=status.HTTP_500_INTERNAL_SERVER_ERROR
    )


def _request_body(request):
    if not isinstance(request.data, dict):
        raise InstanceError("request body must be a JSON object")
    return request.data


class ClassifyView(APIView):
    """
    API endpoint that classifies an operator instance into the partial
    normality classes
    """
    def post(self, request, format=None):
        try:
            data = _request_body(request)
            if "instance" not in data:
                raise InstanceError("instance is required", field="instance")
            T = parse_instance(data["instance"])

            config = RunConfig.from_settings(
                tol=_option(data, "tol", float),
                p_grid=parse_p_grid(data.get("p")),
                max_power=_option(data, "maxPower", int),
            )
            report = classify_all(T, config)
            return Response(report.to_dict())

        except (InstanceError, ConfigError) as e:
            return _bad_request(e)
        except Exception as e:
            return _server_error(e)


class SpectrumView(APIView):
    """
    API endpoint that returns the spectral report of an operator instance
    """
    def post(self, request, format=None):
        try:
            data = _request_body(request)
            if "instance" not in data:
                raise InstanceError("instance is required", field="instance")
            T = parse_instance(data["instance"])

            config = RunConfig.from_settings(
                tol=_option(data, "tol", float),
                depth=_option(data, "depth", int),
            )
            report = spectrum_report(T, config.tol, config.depth)
            return Response(report.to_dict())

        except (InstanceError, ConfigError) as e:
            return _bad_request(e)
        except Exception as e:
            return _server_error(e)


class VerifyView(APIView):
    """
    API endpoint that runs a small seeded verification campaign
    """
    def post(self, request, format=None):
        try:
            data = _request_body(request)
            instances = _option(data, "instances", int)
            limit = settings.WCOND["MAX_API_INSTANCES"]
            if instances is None:
                instances = limit
            if instances > limit:
                raise ConfigError(f"instances must be at most {limit}")

            config = RunConfig.from_settings(
                seed=_option(data, "seed", int),
                instance_count=instances,
                max_points=_option(data, "maxPoints", int),
                max_atoms=_option(data, "maxAtoms", int),
            )
            outcome = run_campaign(config)
            return Response(outcome.to_dict())

        except (InstanceError, ConfigError) as e:
            return _bad_request(e)
        except Exception as e:
            return _server_error(e)


class UnitSquareView(APIView):
    """
    API endpoint that reproduces the unit-square operator report
    """
    def get(self, request, format=None):
        try:
            grid = _option(request.query_params, "grid", int)
            if grid is None:
                grid = settings.WCOND["GRID"]
            if grid > settings.WCOND["MAX_API_GRID"]:
                raise ConfigError(f"grid must be at most {settings.WCOND['MAX_API_GRID']}")
            report = unit_square_report(grid, settings.WCOND["ORACLE_GRID"], settings.WCOND["TOL"])
            return Response(report.to_dict())

        except (ConfigError, ValueError) as e:
            return _bad_request(e)
        except Exception as e:
            return _server_error(e)
