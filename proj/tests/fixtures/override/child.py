from base import Versioned
from collections import OrderedDict


class Snapshot(Versioned):
    def save(self, path: str) -> None:  # type: ignore[override]
        pass

    def load(self, path: bytes) -> dict:  # type: ignore[override]
        pass


class Ordered(OrderedDict):
    def popitem(self, last: str) -> tuple:  # type: ignore[override]
        pass
