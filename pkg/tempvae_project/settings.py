"""
Django settings for tempvae_project project.

The project has no HTTP surface: it is driven through management commands
(`python manage.py gen|train|activity|backtest|score|garch_fit`).
Model defaults live in TEMPVAE and can be overridden per run with a
key=value config file and command-line flags.

For the full list of settings and their values, see
https://docs.djangoproject.com/en/4.2/ref/settings/
"""
import os
from pathlib import Path
from dotenv import load_dotenv
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = str(os.getenv("SECRET_KEY"))

DEBUG = os.getenv("DEBUG", "False") == "True"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "django.contrib.auth",
    "django.contrib.contenttypes",
    "rest_framework",
    "nncore",
    "tempvae",
    "market",
    "benchmarks",
    "evaluation",
    "runs",
]


# Database
# https://docs.djangoproject.com/en/4.2/ref/settings/#databases

if os.getenv("POSTGRES_HOST"):
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.postgresql",
            "HOST": os.environ["POSTGRES_HOST"],
            "NAME": os.environ["POSTGRES_DB"],
            "USER": os.environ["POSTGRES_USER"],
            "PASSWORD": os.environ["POSTGRES_PASSWORD"],
        }
    }
else:
    DATABASES = {
        "default": {
            "ENGINE": "django.db.backends.sqlite3",
            "NAME": BASE_DIR / "db.sqlite3",
        }
    }


# Internationalization
# https://docs.djangoproject.com/en/4.2/topics/i18n/

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Default primary key field type
# https://docs.djangoproject.com/en/4.2/ref/settings/#default-auto-field

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"


LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": os.getenv("TEMPVAE_LOG_LEVEL", "INFO"),
    },
}


# Model defaults.
TEMPVAE = {
    "latent_dim": 10,
    "rnn_dim": 16,
    "prior_rnn_dim": 16,
    "mlp_hidden": (16, 16),
    "window": 21,
    "beta_final": 1.0,
    "beta_decay_rate": 0.96,
    "beta_decay_steps": 20,
    "dropout_rate": 0.1,
    "l2_lambda": 0.01,
    "learning_rate": 1e-3,
    "lr_decay_rate": 0.96,
    "lr_decay_steps": 500,
    "epochs": 1000,
    "batch_size": 256,
    "mc_samples": 1,
    "train_frac": 0.66,
    "checkpoint_every": 50,
}

# Applied on top of TEMPVAE when a run sets high_dim.
TEMPVAE_HIGH_DIM = {
    "rnn_dim": 80,
    "prior_rnn_dim": 16,
    "mlp_hidden": (60, 30),
    "learning_rate": 1e-4,
    "beta_decay_steps": 100,
}

VAR_SAMPLES = 1000
VAR_LEVELS = (0.95, 0.99)
HS_WINDOW = 180
CSV_FLOAT_FORMAT = "%.12g"
