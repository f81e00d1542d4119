"""Run manifests: everything needed to rerun a command bit for bit"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List

from fcpd import __version__

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    command: str
    params: Dict[str, Any]
    seeds: List[int] = field(default_factory=list)
    version: str = __version__
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunManifest':
        return cls(**data)

    def same_run(self, other: 'RunManifest') -> bool:
        """Equal up to the timestamp, i.e. reruns must reproduce the numbers"""
        return (self.command, self.params, self.seeds, self.version) == \
               (other.command, other.params, other.seeds, other.version)

    def write_beside(self, output_path: str) -> str:
        """Write ``<output_path>.manifest.json`` and return its path"""
        path = f"{output_path}.manifest.json"
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w') as f:
            json.dump(self.to_dict(), f, indent=2, default=str)
        logger.info(f"Manifest saved to {path}")
        return path


def read_manifest(path: str) -> RunManifest:
    with open(path) as f:
        return RunManifest.from_dict(json.load(f))
