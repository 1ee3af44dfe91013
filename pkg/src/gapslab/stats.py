"""Process-wide work counters reported in run manifests."""
import threading
from collections import Counter

_lock = threading.Lock()
_counts = Counter()


def bump(name, n=1):
    with _lock:
        _counts[name] += n


def snapshot():
    with _lock:
        return dict(sorted(_counts.items()))


def reset():
    with _lock:
        _counts.clear()
