"""
core/artifacts.py
=================
Artifact Writer

Every file carries the config hash of the run that produced it:
CSV files start with a ``# config_hash=<hash>`` line, JSON files have a
``config_hash`` key. Files are named ``<command>_c<val>_k<val>.<ext>``.
"""

import json
import logging
import queue
import threading
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from core.errors import ValidationError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'


def artifact_stem(command: str, c: float, k: float) -> str:
    """e.g. ``spectrum_c1_k0.25``."""
    return f"{command}_c{c:g}_k{k:g}"


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return [_to_jsonable(item) for item in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and value != value:
        return None
    return value


class ArtifactStore:
    """
    Output directory of one run.

    Provides CSV/JSON writers that stamp the config hash, and a record of
    every path written (for the run summary).
    """

    def __init__(self, out_dir: str, config_hash: str):
        self.root = Path(out_dir)
        self.config_hash = config_hash
        self.written = []
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ValidationError(f"cannot create output directory '{out_dir}': {exc}") from exc

    def path(self, name: str) -> Path:
        return self.root / name

    # ===== WRITERS =====

    def write_frame(self, name: str, frame: pd.DataFrame) -> Path:
        """CSV with the provenance line first and full float precision."""
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8', newline='') as handle:
            handle.write(f"# config_hash={self.config_hash}\n")
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        self.written.append(target)
        logger.debug("wrote %s (%d rows)", target, len(frame))
        return target

    def write_json(self, name: str, payload: Dict) -> Path:
        target = self.path(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        data = {'config_hash': self.config_hash, **_to_jsonable(payload)}
        target.write_text(json.dumps(data, indent=2, sort_keys=True) + '\n', encoding='utf-8')
        self.written.append(target)
        logger.debug("wrote %s", target)
        return target

    def write_echo(self, echo: Dict) -> Path:
        """The resolved configuration, always written."""
        return self.write_json('config_echo.json', echo)


def read_frame(path: Path) -> pd.DataFrame:
    """Read a CSV written by ArtifactStore (the provenance line is skipped)."""
    return pd.read_csv(path, comment='#')


def read_json(path: Path) -> Dict:
    try:
        return json.loads(Path(path).read_text(encoding='utf-8'))
    except FileNotFoundError as exc:
        raise ValidationError(f"file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {path}: {exc}") from exc


# ===== SNAPSHOT HAND-OFF =====

class SnapshotWriter:
    """
    Writes evolution snapshots on a background thread.

    The time stepper hands samples over through a bounded queue; put()
    blocks when the queue is full. Files are written in submission order
    as ``<stem>/snapshot_<index>.csv`` with columns x,u.
    """

    _STOP = object()

    def __init__(self, store: ArtifactStore, stem: str, points: np.ndarray, maxsize: int = 8):
        self.store = store
        self.stem = stem
        self.points = np.asarray(points, dtype=float)
        self.queue: queue.Queue = queue.Queue(maxsize=maxsize)
        self.error: Optional[BaseException] = None
        self.index = []
        self._thread = threading.Thread(target=self._drain, name='snapshot-writer', daemon=True)
        self._thread.start()

    def put(self, index: int, t: float, samples: np.ndarray) -> None:
        if self.error is not None:
            raise self.error
        self.queue.put((index, t, np.array(samples, dtype=float, copy=True)))

    __call__ = put

    def _drain(self) -> None:
        while True:
            item = self.queue.get()
            try:
                if item is self._STOP:
                    return
                index, t, samples = item
                name = f"{self.stem}/snapshot_{index:05d}.csv"
                self.store.write_frame(name, pd.DataFrame({'x': self.points, 'u': samples}))
                self.index.append({'index': index, 't': t, 'file': name})
            except BaseException as exc:
                self.error = exc
                logger.error("snapshot writer failed: %s", exc)
            finally:
                self.queue.task_done()

    def close(self) -> None:
        """Flush pending snapshots and stop the thread."""
        self.queue.put(self._STOP)
        self._thread.join()
        if self.error is not None:
            raise self.error

    def __enter__(self) -> 'SnapshotWriter':
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
