"""
Django settings for tdmix_site project.

The project has no web surface: Django provides the settings layer, the
management-command CLI, the template engine (SVG data maps) and the test
runner for the ``curation`` app.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.0/ref/settings/
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

load_dotenv(BASE_DIR / ".env")


# Not used for any signing; Django only requires it to be set.
SECRET_KEY = os.getenv("DJANGO_SECRET_KEY", "django-insecure-tdmix-local-only")

DEBUG = False

ALLOWED_HOSTS: list[str] = []


# Application definition

INSTALLED_APPS = [
    "curation",
]

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [],
        },
    },
]


# Artifacts live on disk as line-delimited JSON; no database is configured.
DATABASES: dict = {}


# Internationalization

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Logging

CURATION_LOG_LEVEL = os.getenv("CURATION_LOG_LEVEL", "INFO").upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "console": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "console",
        },
    },
    "loggers": {
        "curation": {
            "handlers": ["console"],
            "level": CURATION_LOG_LEVEL,
            "propagate": False,
        },
    },
}


# Pipeline defaults. A config file (flat KEY=value) and command-line flags
# override these, in that order.

CURATION = {
    "WORKDIR": os.getenv("CURATION_WORKDIR", str(BASE_DIR / "work")),
    "SEED": int(os.getenv("CURATION_SEED", "13")),
    "WORKERS": int(os.getenv("CURATION_WORKERS", "1")),
    "DATA_FORMAT": "vectors",
    "EPOCHS": 6,
    "LEARNING_RATE": 0.1,
    "BATCH_SIZE": 32,
    "HIDDEN_WIDTH": 32,
    "OPTIMIZER": "sgd",
    "L2": 0.0,
    "GRAD_CLIP": None,
    "MIXUP_ALPHA": 0.4,
    "MIX_SPACE": "hidden",
    "MIXUP_BATCH_SIZE": 32,
    "FRACTION": 0.33,
    "AUM_K_EASY": 80.0,
    "AUM_K_AMBIGUOUS": 80.0,
    "THRESHOLD_MODE": "total",
    "N_BINS": 10,
    "ABLATION_SEEDS": "1,2,3,4,5",
    "RANDOM_POOL": "union",
}

# Percentile k for the easy-to-learn filter, per task family.
AUM_K_PRESETS = {
    "snli": 80.0,
    "qqp": 80.0,
    "swag": 50.0,
}


DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"
