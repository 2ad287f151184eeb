"""Flat ``key = value`` run configuration."""

from dataclasses import dataclass, field

from .io import parse_metadata


class ConfigError(ValueError):
    """Invalid configuration or argument value."""


@dataclass(frozen=True)
class RunConfig:
    settings: dict = field(default_factory=dict)

    @classmethod
    def from_text(cls, text, allowed, source="<config>"):
        try:
            settings = parse_metadata(text, source=source)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        unknown = sorted(set(settings) - set(allowed))
        if unknown:
            raise ConfigError(f"{source}: unknown key(s): {', '.join(unknown)}")
        return cls(settings)

    @classmethod
    def from_file(cls, path, allowed):
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), allowed, source=str(path))


def parse_bits(text):
    """``"8"`` -> 8, ``"unlimited"`` -> None."""
    t = str(text).strip().lower()
    if t in ("unlimited", "none", "inf"):
        return None
    try:
        bits = int(t)
    except ValueError:
        raise ConfigError(f"invalid bit depth {text!r}") from None
    if not 1 <= bits <= 16:
        raise ConfigError(f"bit depth must lie in 1..16, got {bits}")
    return bits


def parse_bits_list(text):
    """``"1..16"``, ``"1,4,8"`` or mixes such as ``"1..4,unlimited"``."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            lo, hi = parse_bits(lo), parse_bits(hi)
            if lo is None or hi is None or lo > hi:
                raise ConfigError(f"invalid bit range {part!r}")
            out.extend(range(lo, hi + 1))
        elif part:
            out.append(parse_bits(part))
    if not out:
        raise ConfigError("empty bit list")
    return out
