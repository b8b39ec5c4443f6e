"""
File-based potential loader: user potentials are Python files defining a
Potential subclass, selected in a config as "file:<path>".
"""
import importlib.util
import logging
import os
from typing import Dict, List, Optional, Type

from . import config
from .errors import ConfigError
from .potentials.base import Potential

logger = logging.getLogger(__name__)


class PotentialFileLoader:
    """Loads Potential subclasses from Python files in a directory."""

    def __init__(self, potentials_dir: Optional[str] = None):
        self.potentials_dir = potentials_dir or config.POTENTIALS_DIR
        self._cache: Dict[str, Type[Potential]] = {}

    def get_potential_files(self) -> List[str]:
        if not os.path.isdir(self.potentials_dir):
            return []
        return sorted(
            f for f in os.listdir(self.potentials_dir)
            if f.endswith(".py") and not f.startswith("__")
        )

    def resolve(self, filename: str) -> str:
        if os.path.isabs(filename) or os.path.exists(filename):
            return filename
        return os.path.join(self.potentials_dir, filename)

    def load_potential_from_file(self, filename: str) -> Type[Potential]:
        """Import the file and return its first Potential subclass."""
        filepath = os.path.abspath(self.resolve(filename))
        if filepath in self._cache:
            return self._cache[filepath]
        if not os.path.exists(filepath):
            raise ConfigError(f"potential file not found: {filepath}")

        module_name = "rmgauss_user_" + os.path.splitext(os.path.basename(filepath))[0]
        spec = importlib.util.spec_from_file_location(module_name, filepath)
        if spec is None or spec.loader is None:
            raise ConfigError(f"cannot import potential file {filepath}")

        module = importlib.util.module_from_spec(spec)
        try:
            spec.loader.exec_module(module)
        except Exception as e:
            raise ConfigError(f"failed to execute potential file {filepath}: {e}") from e

        potential_class: Optional[Type[Potential]] = None
        for attr_name in dir(module):
            attr = getattr(module, attr_name)
            if isinstance(attr, type) and issubclass(attr, Potential) and attr is not Potential \
                    and attr.__module__ == module_name:
                potential_class = attr
                break

        if potential_class is None:
            raise ConfigError(f"no Potential subclass found in {filepath}")

        logger.info("loaded potential %s from %s", potential_class.name, filepath)
        self._cache[filepath] = potential_class
        return potential_class

    def get_all_potentials(self) -> Dict[str, Type[Potential]]:
        potentials = {}
        for filename in self.get_potential_files():
            try:
                potentials[filename] = self.load_potential_from_file(filename)
            except ConfigError as e:
                logger.warning("skipping %s: %s", filename, e)
        return potentials


potential_file_loader = PotentialFileLoader()
