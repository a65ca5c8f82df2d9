"""Plain-text key-value documents used for channels, codebooks and experiment configs.

Format: one ``key = value`` pair per line; blank lines and ``#`` comments are
ignored.  Values are parsed as JSON when possible (numbers, lists, booleans,
quoted strings) and kept as bare strings otherwise.  Unknown keys are always
errors at the schema layer: a typo must never silently change an experiment.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError


def parse_kv_text(text: str) -> dict:
    doc: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in doc:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        try:
            doc[key] = json.loads(value)
        except json.JSONDecodeError:
            doc[key] = value
    return doc


def format_kv_text(doc: dict) -> str:
    lines = []
    for key, value in doc.items():
        if isinstance(value, str):
            lines.append(f"{key} = {value}")
        else:
            lines.append(f"{key} = {json.dumps(value)}")
    return "\n".join(lines) + "\n"


_CONFIG_KEYS = {
    "channel",
    "channel_file",
    "overlap",
    "flip",
    "noise",
    "n_grid",
    "R_grid",
    "delta",
    "delta_source",
    "delta_cond",
    "epsilon_target",
    "trials",
    "seed",
    "variants",
    "ordering",
    "distinct_codewords",
    "exact",
    "m_max",
    "dim_budget",
    "set_budget",
    "work_budget",
}

_VARIANTS = ("rank_one", "subspace", "pgm")
_ORDERINGS = ("lexicographic", "worst_case")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description (see README for the file schema)."""

    channel: str
    channel_file: str | None = None
    channel_params: dict = field(default_factory=dict)
    n_grid: tuple[int, ...] = (4, 6)
    r_grid: tuple[float, ...] = (0.3,)
    delta: float = 0.3
    delta_source: float | None = None
    delta_cond: float | None = None
    epsilon_target: float = 0.1
    trials: int = 1000
    seed: int = 0
    variants: tuple[str, ...] = ("rank_one",)
    ordering: str = "lexicographic"
    distinct_codewords: bool = False
    exact: str = "auto"
    m_max: int = 64
    dim_budget: int | None = None
    set_budget: int | None = None
    work_budget: int | None = None


def _as_tuple(value, caster, key):
    if not isinstance(value, list):
        raise ConfigError(f"'{key}' must be a JSON list")
    try:
        return tuple(caster(v) for v in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"'{key}' has a non-{caster.__name__} entry") from exc


def experiment_config_from_document(doc: dict) -> ExperimentConfig:
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "channel" not in doc:
        raise ConfigError("config requires a 'channel' key")
    channel = doc["channel"]
    if not isinstance(channel, str):
        raise ConfigError("'channel' must be a builtin name or 'file'")
    channel_file = doc.get("channel_file")
    if channel == "file" and not channel_file:
        raise ConfigError("channel = file requires 'channel_file'")
    if channel != "file" and channel_file:
        raise ConfigError("'channel_file' is only valid with channel = file")

    params = {k: float(doc[k]) for k in ("overlap", "flip", "noise") if k in doc}

    kwargs: dict = {"channel": channel, "channel_file": channel_file, "channel_params": params}
    if "n_grid" in doc:
        kwargs["n_grid"] = _as_tuple(doc["n_grid"], int, "n_grid")
    if "R_grid" in doc:
        kwargs["r_grid"] = _as_tuple(doc["R_grid"], float, "R_grid")
    for key, caster in (
        ("delta", float),
        ("delta_source", float),
        ("delta_cond", float),
        ("epsilon_target", float),
        ("trials", int),
        ("seed", int),
        ("m_max", int),
        ("dim_budget", int),
        ("set_budget", int),
        ("work_budget", int),
    ):
        if key in doc:
            try:
                kwargs[key] = caster(doc[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"'{key}' must be a {caster.__name__}") from exc
    if "variants" in doc:
        variants = _as_tuple(doc["variants"], str, "variants")
        bad = set(variants) - set(_VARIANTS)
        if bad:
            raise ConfigError(f"unknown variants {sorted(bad)}; valid: {_VARIANTS}")
        kwargs["variants"] = variants
    if "ordering" in doc:
        if doc["ordering"] not in _ORDERINGS:
            raise ConfigError(f"ordering must be one of {_ORDERINGS}")
        kwargs["ordering"] = doc["ordering"]
    if "distinct_codewords" in doc:
        if not isinstance(doc["distinct_codewords"], bool):
            raise ConfigError("'distinct_codewords' must be true or false")
        kwargs["distinct_codewords"] = doc["distinct_codewords"]
    if "exact" in doc:
        value = doc["exact"]
        if isinstance(value, bool):
            value = "always" if value else "never"
        if value not in ("auto", "always", "never"):
            raise ConfigError("'exact' must be auto, always, never, true or false")
        kwargs["exact"] = value

    cfg = ExperimentConfig(**kwargs)
    if cfg.trials < 0:
        raise ConfigError("'trials' must be >= 0")
    if any(n < 1 for n in cfg.n_grid):
        raise ConfigError("'n_grid' entries must be >= 1")
    if any(r < 0 for r in cfg.r_grid):
        raise ConfigError("'R_grid' entries must be >= 0")
    return cfg


def load_experiment_config(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return experiment_config_from_document(parse_kv_text(text))
