import time


class TTLCache:
    def __init__(self, ttl=60.0):
        self.ttl = ttl
        self._store = {}

    def get(self, key, default=None):
        entry = self._store.get(key)
        if entry is None or entry[1] < time.monotonic():
            return default
        return entry[0]

    def put(self, key, value):
        self._store[key] = (value, time.monotonic() + self.ttl)
