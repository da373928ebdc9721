"""Plain-text ``key = value`` configuration files.

Keys mirror the field names of LoopConfig, RegressorConfig, LocalEmConfig and
SynthConfig (lower_snake_case, flat namespace); ``#`` starts a comment. A
``seed`` entry applies to every component that carries one. Regressor fields
may also be written with a ``regressor_`` prefix; local-EM fields with
``local_em_``.
"""

from __future__ import annotations

from dataclasses import fields

from .correction import LocalEmConfig, Method
from .data import SynthConfig
from .errors import ConfigError, InputError
from .pipeline import LoopConfig
from .regressor import RegressorConfig


def parse_config_text(text: str) -> dict:
    """Parse key = value lines into a {str: str} dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        out[key] = value
    return out


def load_config_file(path) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc


def _coerce(value: str, target_type):
    if target_type is bool:
        low = value.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if target_type is int:
        return int(value)
    if target_type is float:
        return float(value)
    if target_type is Method:
        return Method(value)
    if target_type is tuple:
        return tuple(float(p) for p in value.split(":"))
    return value


_LOOP_FIELDS = {f.name: f.type for f in fields(LoopConfig) if f.name not in ("regressor", "local_em", "method")}
_REG_FIELDS = {f.name: f.type for f in fields(RegressorConfig)}
_LOCAL_FIELDS = {f.name: f.type for f in fields(LocalEmConfig)}
_SYNTH_FIELDS = {f.name: f.type for f in fields(SynthConfig)}

_TYPE_NAMES = {"int": int, "float": float, "str": str, "bool": bool, "tuple": tuple, "Method": Method}


def _field_type(annotation):
    if isinstance(annotation, type):
        return annotation
    return _TYPE_NAMES.get(str(annotation), str)


def build_loop_config(entries: dict) -> LoopConfig:
    """Assemble a LoopConfig (with nested regressor/local-EM) from flat entries."""
    loop_kwargs = {}
    reg_kwargs = {}
    local_kwargs = {}
    for key, raw in entries.items():
        base = key
        if key.startswith("regressor_"):
            base = key[len("regressor_"):]
            target = ("reg", base)
        elif key.startswith("local_em_"):
            base = key[len("local_em_"):]
            target = ("local", base)
        elif key == "method":
            target = ("loop", key)
        elif key in _LOOP_FIELDS:
            target = ("loop", key)
        elif key in _REG_FIELDS:
            target = ("reg", key)
        elif key in _LOCAL_FIELDS:
            target = ("local", key)
        elif key in _SYNTH_FIELDS:
            continue  # synth-only key, handled by build_synth_config
        else:
            raise ConfigError(f"unknown config key {key!r}")
        kind, name = target
        try:
            if kind == "loop":
                ftype = Method if name == "method" else _field_type(_LOOP_FIELDS[name])
                loop_kwargs[name] = _coerce(raw, ftype)
            elif kind == "reg":
                if name not in _REG_FIELDS:
                    raise ConfigError(f"unknown regressor key {key!r}")
                reg_kwargs[name] = _coerce(raw, _field_type(_REG_FIELDS[name]))
            else:
                if name not in _LOCAL_FIELDS:
                    raise ConfigError(f"unknown local_em key {key!r}")
                local_kwargs[name] = _coerce(raw, _field_type(_LOCAL_FIELDS[name]))
        except (ValueError, InputError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc

    if "seed" in entries:
        reg_kwargs.setdefault("seed", int(entries["seed"]))
    try:
        return LoopConfig(
            regressor=RegressorConfig(**reg_kwargs),
            local_em=LocalEmConfig(**local_kwargs),
            **loop_kwargs,
        )
    except (InputError, ConfigError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def build_synth_config(entries: dict) -> SynthConfig:
    kwargs = {}
    for key, raw in entries.items():
        if key in _SYNTH_FIELDS:
            try:
                kwargs[key] = _coerce(raw, _field_type(_SYNTH_FIELDS[key]))
            except (ValueError, InputError) as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    try:
        return SynthConfig(**kwargs)
    except InputError as exc:
        raise ConfigError(str(exc)) from exc
