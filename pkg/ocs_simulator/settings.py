"""
Settings du simulateur OCS.

Toutes les valeurs réglables viennent de l'environnement (ou de `.env`)
via python-decouple. Les modules de calcul (sampling, protocol, optim, tasks)
n'importent jamais ces settings : seul le harness les lit.
"""

from pathlib import Path

from decouple import Csv, config

BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = config("SECRET_KEY", default="ocs-simulator-local-only")
DEBUG = config("DEBUG", default=False, cast=bool)
ALLOWED_HOSTS = config("ALLOWED_HOSTS", default="localhost,127.0.0.1", cast=Csv())

INSTALLED_APPS = [
    "django.contrib.admin",
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "django.contrib.sessions",
    "django.contrib.messages",
    "django.contrib.staticfiles",
    # Applications
    "sampling",
    "protocol",
    "optim",
    "tasks",
    "harness",
]

MIDDLEWARE = [
    "django.middleware.security.SecurityMiddleware",
    "django.contrib.sessions.middleware.SessionMiddleware",
    "django.middleware.common.CommonMiddleware",
    "django.middleware.csrf.CsrfViewMiddleware",
    "django.contrib.auth.middleware.AuthenticationMiddleware",
    "django.contrib.messages.middleware.MessageMiddleware",
    "django.middleware.clickjacking.XFrameOptionsMiddleware",
]

ROOT_URLCONF = "ocs_simulator.urls"

TEMPLATES = [
    {
        "BACKEND": "django.template.backends.django.DjangoTemplates",
        "DIRS": [],
        "APP_DIRS": True,
        "OPTIONS": {
            "context_processors": [
                "django.template.context_processors.request",
                "django.contrib.auth.context_processors.auth",
                "django.contrib.messages.context_processors.messages",
            ],
        },
    },
]

WSGI_APPLICATION = "ocs_simulator.wsgi.application"

DATABASES = {
    "default": {
        "ENGINE": "django.db.backends.sqlite3",
        "NAME": config("SIM_DB_PATH", default=str(BASE_DIR / "db.sqlite3")),
    }
}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

LANGUAGE_CODE = "fr-fr"
TIME_ZONE = "UTC"
USE_I18N = True
USE_TZ = True

STATIC_URL = "static/"
STATIC_ROOT = BASE_DIR / "staticfiles"

# =========================================================
# Simulateur
# =========================================================
# Largeur (bits) d'un scalaire transmis ; jamais précisée par la méthode.
SIM_FLOAT_WIDTH = config("SIM_FLOAT_WIDTH", default=32, cast=int)
# Les diffusions maître -> clients sont gratuites sauf étude de sensibilité.
SIM_COUNT_DOWNLINK = config("SIM_COUNT_DOWNLINK", default=False, cast=bool)
SIM_DEFAULT_PARALLEL = config("SIM_DEFAULT_PARALLEL", default=1, cast=int)
SIM_DIVERGENCE_THRESHOLD = config("SIM_DIVERGENCE_THRESHOLD", default=1e12, cast=float)
SIM_LOG_LEVEL = config("SIM_LOG_LEVEL", default="INFO")

# =========================================================
# Logging
# =========================================================
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "simple": {
            "format": "%(asctime)s %(levelname)s %(name)s | %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "simple",
        },
    },
    "root": {"handlers": ["console"], "level": "WARNING"},
    "loggers": {
        app: {"handlers": ["console"], "level": SIM_LOG_LEVEL, "propagate": False}
        for app in ("sampling", "protocol", "optim", "tasks", "harness")
    },
}
