"""Plain-text experiment configs: [section] headers and key = value lines.

Errors carry the offending line number (or the missing field's name and
section) so configs can be fixed without reading the parser.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ConfigError(ValueError):
    pass


_REQUIRED = object()


@dataclass
class ExperimentConfig:
    path: str
    sections: dict[str, dict[str, tuple[str, int]]] = field(default_factory=dict)

    @classmethod
    def from_text(cls, text: str, path: str = "<string>") -> "ExperimentConfig":
        cfg = cls(path=path)
        section = None
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("["):
                if not line.endswith("]") or len(line) < 3:
                    raise ConfigError(f"{path}:{lineno}: malformed section header {raw.strip()!r}")
                section = line[1:-1].strip()
                cfg.sections.setdefault(section, {})
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            if section is None:
                raise ConfigError(f"{path}:{lineno}: key before any [section] header")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key:
                raise ConfigError(f"{path}:{lineno}: empty key")
            if key in cfg.sections[section]:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r} in [{section}]")
            cfg.sections[section][key] = (value, lineno)
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_text(fh.read(), path=str(path))

    def _raw(self, section: str, key: str, default):
        sec = self.sections.get(section)
        if sec is None or key not in sec:
            if default is _REQUIRED:
                raise ConfigError(
                    f"{self.path}: missing required field {key!r} in [{section}]"
                )
            return None
        return sec[key]

    def get_str(self, section: str, key: str, default=_REQUIRED) -> str | None:
        raw = self._raw(section, key, default)
        if raw is None:
            return default if default is not _REQUIRED else None
        return raw[0]

    def get_int(self, section: str, key: str, default=_REQUIRED) -> int | None:
        raw = self._raw(section, key, default)
        if raw is None:
            return default if default is not _REQUIRED else None
        try:
            return int(raw[0])
        except ValueError:
            raise ConfigError(
                f"{self.path}:{raw[1]}: field {key!r} in [{section}] must be an integer, got {raw[0]!r}"
            )

    def get_float(self, section: str, key: str, default=_REQUIRED) -> float | None:
        raw = self._raw(section, key, default)
        if raw is None:
            return default if default is not _REQUIRED else None
        try:
            return float(raw[0])
        except ValueError:
            raise ConfigError(
                f"{self.path}:{raw[1]}: field {key!r} in [{section}] must be a number, got {raw[0]!r}"
            )

    def get_bool(self, section: str, key: str, default=_REQUIRED) -> bool | None:
        raw = self._raw(section, key, default)
        if raw is None:
            return default if default is not _REQUIRED else None
        val = raw[0].lower()
        if val in ("true", "yes", "1", "on"):
            return True
        if val in ("false", "no", "0", "off"):
            return False
        raise ConfigError(
            f"{self.path}:{raw[1]}: field {key!r} in [{section}] must be a boolean, got {raw[0]!r}"
        )

    def get_floats(self, section: str, key: str, default=_REQUIRED) -> list[float] | None:
        raw = self._raw(section, key, default)
        if raw is None:
            return default if default is not _REQUIRED else None
        try:
            return [float(tok) for tok in raw[0].replace(",", " ").split()]
        except ValueError:
            raise ConfigError(
                f"{self.path}:{raw[1]}: field {key!r} in [{section}] must be a list of numbers, got {raw[0]!r}"
            )

    def positive(self, value: float, section: str, key: str) -> float:
        if value <= 0:
            raise ConfigError(
                f"{self.path}: field {key!r} in [{section}] must be positive, got {value}"
            )
        return value
