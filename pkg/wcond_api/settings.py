"""
Django settings for the wcond_api project.
"""

import os
from pathlib import Path

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.environ.get('SECRET_KEY', 'django-insecure-wcond-api-dev-key-not-for-production')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = int(os.environ.get('DEBUG', 1))

ALLOWED_HOSTS = os.environ.get('ALLOWED_HOSTS', 'localhost,127.0.0.1,testserver').split(',')

CORS_ALLOW_ALL_ORIGINS = True

CORS_ALLOW_METHODS = [
    "GET",
    "OPTIONS",
    "POST",
]

CORS_ALLOW_HEADERS = [
    "accept",
    "accept-encoding",
    "content-type",
    "origin",
    "user-agent",
    "x-requested-with",
]

# Application definition
INSTALLED_APPS = [
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'rest_framework',
    'corsheaders',
    'operators',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'corsheaders.middleware.CorsMiddleware',
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'wcond_api.urls'

WSGI_APPLICATION = 'wcond_api.wsgi.application'

# No database config since every computation is in memory
DATABASES = {}

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

# Rest Framework settings
REST_FRAMEWORK = {
    'DEFAULT_AUTHENTICATION_CLASSES': [],
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.AllowAny',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'UNAUTHENTICATED_USER': None,
}

# Operator toolkit defaults; every key can be overridden from the environment
WCOND = {
    'TOL': float(os.environ.get('WCOND_TOL', 1e-8)),
    'P_GRID': [float(p) for p in os.environ.get('WCOND_P_GRID', '0.5,1,2,3.7').split(',')],
    'MAX_POWER': int(os.environ.get('WCOND_MAX_POWER', 8)),
    'SEED': int(os.environ.get('WCOND_SEED', 42)),
    'INSTANCES': int(os.environ.get('WCOND_INSTANCES', 200)),
    'MAX_POINTS': int(os.environ.get('WCOND_MAX_POINTS', 12)),
    'MAX_ATOMS': int(os.environ.get('WCOND_MAX_ATOMS', 4)),
    'DEPTH': int(os.environ.get('WCOND_DEPTH', 5)),
    'GRID': int(os.environ.get('WCOND_GRID', 256)),
    'ORACLE_GRID': int(os.environ.get('WCOND_ORACLE_GRID', 8)),
    'WORKERS': int(os.environ.get('WCOND_WORKERS', min(4, os.cpu_count() or 1))),
    # Upper bounds for requests served over HTTP
    'MAX_API_INSTANCES': int(os.environ.get('WCOND_MAX_API_INSTANCES', 50)),
    'MAX_API_GRID': int(os.environ.get('WCOND_MAX_API_GRID', 512)),
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {name}: {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'wcond_modules': {
            'handlers': ['console'],
            'level': os.environ.get('WCOND_LOG_LEVEL', 'WARNING'),
        },
        'operators': {
            'handlers': ['console'],
            'level': os.environ.get('WCOND_LOG_LEVEL', 'WARNING'),
        },
    },
}
