import threading
from collections import defaultdict


class ProgressTracker:
    """Thread-safe per-suite status and pass/fail tallies"""

    def __init__(self):
        self._progress = defaultdict(dict)
        self._lock = threading.Lock()

    def update(self, suite, status, detail=None):
        with self._lock:
            self._progress[suite]['status'] = status
            if detail is not None:
                self._progress[suite]['detail'] = detail

    def record(self, suite, passed, residual):
        """Counts one finished trial of a suite"""
        with self._lock:
            entry = self._progress[suite]
            key = 'passed' if passed else 'failed'
            entry[key] = entry.get(key, 0) + 1
            entry['max_residual'] = max(entry.get('max_residual', 0.0), abs(float(residual)))

    def get(self, suite):
        with self._lock:
            return dict(self._progress.get(suite, {}))

    def reset(self, suite=None):
        with self._lock:
            if suite is not None:
                if suite in self._progress:
                    del self._progress[suite]
            else:
                self._progress.clear()

    def all(self):
        with self._lock:
            return {k: dict(v) for k, v in self._progress.items()}

    def total_failures(self):
        with self._lock:
            return sum(entry.get('failed', 0) for entry in self._progress.values())
