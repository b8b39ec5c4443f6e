from typing import Any, Dict, Type

from ..errors import ConfigError
from .base import Potential
from .builtin import DoubleWell, LinearForce, Quartic

BUILTIN_POTENTIALS: Dict[str, Type[Potential]] = {
    Quartic.name: Quartic,
    DoubleWell.name: DoubleWell,
    LinearForce.name: LinearForce,
}


def get_potential(name: str, params: Dict[str, Any] | None = None) -> Potential:
    """Instantiate a built-in potential by name, or a user potential given as 'file:<path>'."""
    params = params or {}
    if name.startswith("file:"):
        from ..potential_loader import potential_file_loader

        cls = potential_file_loader.load_potential_from_file(name[len("file:"):])
    else:
        try:
            cls = BUILTIN_POTENTIALS[name]
        except KeyError:
            known = ", ".join(sorted(BUILTIN_POTENTIALS))
            raise ConfigError(f"unknown potential {name!r} (known: {known}, or file:<path>)") from None
    try:
        return cls(**params)
    except TypeError as e:
        raise ConfigError(f"bad parameters for potential {name!r}: {e}") from e


__all__ = ["Potential", "Quartic", "DoubleWell", "LinearForce", "BUILTIN_POTENTIALS", "get_potential"]
