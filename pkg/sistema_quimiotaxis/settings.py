"""
Django settings for sistema_quimiotaxis project.

The project has no database and no HTTP surface: Django provides the settings
layer, logging configuration and the management-command CLI
(``python manage.py run|sweep|kernels|ladder|sigma_ladder``).

Values come from the environment (optionally a ``.env`` file at BASE_DIR).
"""

import math
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals; nothing here is signed or served.
SECRET_KEY = os.getenv('SECRET_KEY', 'quimiotaxis-local')

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'quimiotaxis',
]

# Sin base de datos: los resultados se escriben como CSV/JSON.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = True

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST (solo serializers para validar configuraciones)

REST_FRAMEWORK = {
    'STRICT_JSON': True,
}

# SIMULACION

SIMULACION_VERSION = '0.1.0'
SIMULACION_OUTPUT_DIR = Path(os.getenv('SIMULACION_OUTPUT_DIR', BASE_DIR / 'resultados'))
SIMULACION_WORKERS = int(os.getenv('SIMULACION_WORKERS', '1'))
# Classical 2D critical mass; an external benchmark constant, not model content.
SIMULACION_CRITICAL_MASS = float(os.getenv('SIMULACION_CRITICAL_MASS', str(8 * math.pi)))
SIMULACION_LOG_LEVEL = os.getenv('SIMULACION_LOG_LEVEL', 'INFO')

# LOGGING

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'simple': {
            'format': '{levelname} {asctime} {name} {message}',
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
        'quimiotaxis': {
            'handlers': ['console'],
            'level': SIMULACION_LOG_LEVEL,
            'propagate': False,
        },
    },
}
