"""Parser for manifold and field registry keys and tolerance overrides."""
import re
from typing import Dict, List, Sequence, Tuple
import logging

from tgfield.utils.errors import BadConfig, UnknownRegistryKey

logger = logging.getLogger(__name__)

NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"


class RegistryKey:
    """A parsed registry key: family name plus numeric parameters."""

    def __init__(self, family: str, params: Tuple[float, ...], raw: str):
        self.family = family
        self.params = params
        self.raw = raw

    def int_param(self, index: int) -> int:
        value = self.params[index]
        if value != int(value):
            raise BadConfig(f"{self.raw}: parameter {index + 1} must be an integer")
        return int(value)

    def __eq__(self, other):
        return isinstance(other, RegistryKey) and (self.family, self.params) == (other.family, other.params)

    def __repr__(self):
        return f"RegistryKey(family='{self.family}', params={self.params})"


class RegistryParser:
    """Parser for the `family[:p1,p2]` keys accepted by --manifold and --field."""

    # family -> number of numeric parameters
    MANIFOLDS = {"sphere": 1, "flat": 1, "warped": 2}
    FIELDS = {
        "hopf": 1,
        "tg2d": 2,
        "flat-tg": 2,
        "flat-parallel": 0,
        "flat-radial": 0,
        "coord-unit": 1,
    }

    @staticmethod
    def _parse(key: str, families: Dict[str, int], kind: str) -> RegistryKey:
        key = key.strip()
        match = re.fullmatch(r"([a-z][a-z0-9-]*)(?::(.*))?", key)
        if not match:
            raise UnknownRegistryKey(f"Malformed {kind} key: {key!r}")

        family, rest = match.group(1), match.group(2)
        if family not in families:
            raise UnknownRegistryKey(f"Unknown {kind} family {family!r} (known: {', '.join(sorted(families))})")

        expected = families[family]
        parts: List[str] = [] if rest is None or rest == "" else [p.strip() for p in rest.split(",")]
        if len(parts) != expected:
            raise UnknownRegistryKey(f"{kind} key {key!r} takes {expected} parameter(s), got {len(parts)}")
        for part in parts:
            if not re.fullmatch(NUMBER, part):
                raise UnknownRegistryKey(f"{kind} key {key!r}: {part!r} is not a number")

        return RegistryKey(family, tuple(float(p) for p in parts), key)

    @staticmethod
    def parse_manifold(key: str) -> RegistryKey:
        """
        Parse a manifold key.

        Args:
            key: e.g. "sphere:3", "flat:2", "warped:0.5,0.785"

        Returns:
            RegistryKey
        """
        return RegistryParser._parse(key, RegistryParser.MANIFOLDS, "manifold")

    @staticmethod
    def parse_field(key: str) -> RegistryKey:
        """
        Parse a field key.

        Args:
            key: e.g. "hopf:1", "tg2d:0.5,0", "flat-tg:1,0", "flat-parallel"

        Returns:
            RegistryKey
        """
        return RegistryParser._parse(key, RegistryParser.FIELDS, "field")

    @staticmethod
    def parse_tolerances(items: Sequence[str]) -> Dict[str, float]:
        """
        Parse repeated `--tol name=value` overrides.

        Args:
            items: Strings of the form "MainEq=1e-9"

        Returns:
            Mapping of check name to tolerance
        """
        tolerances = {}
        for item in items or []:
            match = re.fullmatch(rf"\s*([A-Za-z][\w.:-]*)\s*=\s*({NUMBER})\s*", item)
            if not match:
                raise BadConfig(f"Could not parse tolerance override: {item!r}")
            value = float(match.group(2))
            if value <= 0:
                raise BadConfig(f"Tolerance {match.group(1)} must be positive")
            tolerances[match.group(1)] = value
        if tolerances:
            logger.info(f"Tolerance overrides: {tolerances}")
        return tolerances
