"""
Utility functions for reproducible runs: seeded streams, content hashes and manifests.
"""
import hashlib
import json
import os
import platform
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """
    Independent generator for one trial.

    Args:
        master_seed: Campaign seed
        trial_index: Index of the trial within the campaign

    Returns:
        A PCG64 generator whose stream depends only on (master_seed, trial_index)
    """
    seq = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index),))
    return np.random.default_rng(seq)


def chunk_ranges(trials: int, chunk_size: int) -> List[Tuple[int, int]]:
    """Split ``range(trials)`` into consecutive [start, stop) chunks."""
    chunk_size = max(1, int(chunk_size))
    return [(start, min(start + chunk_size, trials)) for start in range(0, trials, chunk_size)]


def content_hash(text: str) -> str:
    """Git-style blob hash of a text artifact."""
    data = text.encode('utf-8')
    header = f'blob {len(data)}\0'.encode('utf-8')
    return hashlib.sha1(header + data).hexdigest()


def log_grid(p_min: float, p_max: float, points: int) -> List[float]:
    """Log-spaced p values, inclusive of both ends."""
    if not 0 < p_min < p_max < 1:
        raise ValueError('grid bounds must satisfy 0 < p_min < p_max < 1')
    return [float(p) for p in np.logspace(np.log10(p_min), np.log10(p_max), int(points))]


@dataclass
class RunManifest:
    """Everything needed to repeat a command's statistical output."""
    command: str
    config: Dict = field(default_factory=dict)
    seed: Optional[int] = None
    workers: int = 1
    template_hashes: Dict[str, str] = field(default_factory=dict)
    totals: Dict = field(default_factory=dict)
    started_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished_at: Optional[str] = None
    python: str = field(default_factory=platform.python_version)

    def finish(self, **totals) -> 'RunManifest':
        self.totals.update(totals)
        self.finished_at = datetime.now(timezone.utc).isoformat()
        return self

    def to_dict(self) -> dict:
        return asdict(self)

    def write(self, path: str) -> str:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True, default=str)
        return path


def manifest_path(out_path: str) -> str:
    root, _ = os.path.splitext(out_path)
    return root + '.manifest.json'


def hash_templates(named_texts: Iterable[Tuple[str, str]]) -> Dict[str, str]:
    return {name: content_hash(text) for name, text in named_texts}
