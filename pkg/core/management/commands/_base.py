# core/management/commands/_base.py: shared option handling for the experiment commands
"""
Option values resolve as: explicit flag > --config key=value file > settings.
Flags are parsed as plain strings and converted here, so the same converter
serves the command line, the config file and call_command().
"""
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import ConfigInvalid, NsnrError
from core.models import EstimatorKind, TruthKind
from core.services.estimators import EstimatorSpec

# options that never go into CSV metadata (they do not change results)
_NOT_CONFIG = {"out", "workers", "config"}


# -----------------------------
# Converters
# -----------------------------
def to_int(raw):
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"expected an integer, got {raw!r}")


def to_float(raw):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigInvalid(f"expected a number, got {raw!r}")


def to_int_list(raw):
    if isinstance(raw, (list, tuple)):
        return [to_int(v) for v in raw]
    items = [p for p in str(raw).replace(" ", "").split(",") if p]
    if not items:
        raise ConfigInvalid("expected a comma-separated list of integers")
    return [to_int(p) for p in items]


def to_truth(raw):
    try:
        return TruthKind(str(raw).strip().lower())
    except ValueError:
        choices = ", ".join(TruthKind.values)
        raise ConfigInvalid(f"unknown scenario {raw!r} (choose from {choices})")


def to_estimator(token) -> EstimatorSpec:
    if isinstance(token, EstimatorSpec):
        return token
    text = str(token).strip().lower()
    if text in ("lw", "ledoit_wolf", "ledoit-wolf"):
        return EstimatorSpec(kind=EstimatorKind.LEDOIT_WOLF)
    return EstimatorSpec(kind=EstimatorKind.DIAG_LOAD, lam=to_float(text)).validate()


def to_estimator_list(raw):
    if isinstance(raw, (list, tuple)):
        return [to_estimator(v) for v in raw]
    items = [p for p in str(raw).replace(" ", "").split(",") if p]
    if not items:
        raise ConfigInvalid("expected a comma-separated list of lambdas and/or 'lw'")
    return [to_estimator(p) for p in items]


def read_config_file(path) -> dict:
    """key=value lines; blank lines and '#' comments ignored; dashes in keys become underscores."""
    values = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigInvalid(f"cannot read config file {path}: {exc}") from exc
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigInvalid(f"{path}:{number}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        values[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return values


# -----------------------------
# Base command
# -----------------------------
class ExperimentCommand(BaseCommand):
    """Subclasses declare options with self.option(...) inside add_options()."""

    def add_arguments(self, parser):
        self._options = {}
        parser.add_argument("--config", default=None, help="key=value file with defaults for any flag")
        self.option(parser, "--workers", to_int, lambda: None, "worker threads (results do not depend on it)")
        self.add_options(parser)

    def add_options(self, parser):
        raise NotImplementedError

    def option(self, parser, flag, convert, default, help_text):
        dest = flag.lstrip("-").replace("-", "_")
        self._options[dest] = (convert, default)
        parser.add_argument(flag, dest=dest, default=None, help=help_text)

    def resolve(self, options) -> dict:
        from_file = read_config_file(options["config"]) if options.get("config") else {}
        unknown = set(from_file) - set(self._options)
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {', '.join(sorted(unknown))}")
        resolved = {}
        for dest, (convert, default) in self._options.items():
            raw = options.get(dest)
            if raw is None:
                raw = from_file.get(dest)
            if raw is None:
                resolved[dest] = default()
                continue
            resolved[dest] = convert(raw)
        return resolved

    def config_of(self, opts: dict) -> dict:
        """Options that shape the result, for the CSV header."""
        out = {}
        for key, value in opts.items():
            if key in _NOT_CONFIG:
                continue
            if isinstance(value, (list, tuple)):
                value = ",".join(v.label if isinstance(v, EstimatorSpec) else str(v) for v in value)
            elif isinstance(value, EstimatorSpec):
                value = value.label
            out[key] = value
        return out

    def handle(self, *args, **options):
        try:
            opts = self.resolve(options)
            self.run(opts)
        except NsnrError as exc:
            raise CommandError(str(exc)) from exc
        except OSError as exc:
            raise CommandError(f"I/O error: {exc}") from exc

    def run(self, opts: dict):
        raise NotImplementedError
