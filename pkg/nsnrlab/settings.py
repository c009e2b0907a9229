from pathlib import Path
import os


BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals; nothing here is served or signed.
SECRET_KEY = os.getenv("SECRET_KEY", "nsnrlab-local-key")
DEBUG = os.getenv("DEBUG", "False") == "True"

INSTALLED_APPS = [
    "core.apps.CoreConfig",
]

# Results are CSV files; there is no database.
DATABASES = {}

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# ===== Experiment defaults (env overrides, flags override both) =====
NSNR_TOOL_VERSION = "0.3.0"
NSNR_DIM = int(os.getenv("NSNR_DIM", "10"))
NSNR_TRIALS = int(os.getenv("NSNR_TRIALS", "1000"))
NSNR_SEED = int(os.getenv("NSNR_SEED", "20240601"))
NSNR_WORKERS = int(os.getenv("NSNR_WORKERS", "1"))
NSNR_REDRAW_CAP = int(os.getenv("NSNR_REDRAW_CAP", "100"))

# Random-truth scenario: C = gain * e1 e1^T + Wishart(I, dof) / dof
NSNR_WISHART_DOF = int(os.getenv("NSNR_WISHART_DOF", "20"))
NSNR_LOW_RANK_GAIN = float(os.getenv("NSNR_LOW_RANK_GAIN", "100.0"))

NSNR_LAMBDA_STEP = float(os.getenv("NSNR_LAMBDA_STEP", "0.02"))

# ===== Brute-force oracle =====
NSNR_ORACLE_RANDOM = int(os.getenv("NSNR_ORACLE_RANDOM", "100000"))
NSNR_ORACLE_REFINE_STEPS = int(os.getenv("NSNR_ORACLE_REFINE_STEPS", "200"))
NSNR_ORACLE_TOL = float(os.getenv("NSNR_ORACLE_TOL", "1e-10"))

# ===== Logging (stderr; command results go to stdout) =====
NSNR_LOG_LEVEL = os.getenv("NSNR_LOG_LEVEL", "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "{levelname} {asctime} {name} {message}",
            "style": "{",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "loggers": {
        "core": {
            "handlers": ["console"],
            "level": NSNR_LOG_LEVEL,
            "propagate": False,
        },
    },
}
