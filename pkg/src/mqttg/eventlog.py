"""CSV event log mirroring the broker console.

One row per connect/disconnect/publish/location event:
timestamp, client_id, event, lat, lon, elev, distance_m, speed_kmh.
Geolocation columns stay empty when the packet carried none.
"""

from __future__ import annotations

import csv
import threading
from datetime import datetime, timezone
from typing import IO, Iterable

from .codec import GeoLocation

COLUMNS = ("timestamp", "client_id", "event", "lat", "lon", "elev", "distance_m", "speed_kmh")


class EventLog:
    def __init__(self, streams: Iterable[IO[str]] = (), write_header: bool = True):
        self._streams = list(streams)
        self._lock = threading.Lock()
        if write_header:
            self._write(COLUMNS)

    def _write(self, row) -> None:
        with self._lock:
            for stream in self._streams:
                csv.writer(stream).writerow(row)
                stream.flush()

    def emit(
        self,
        client_id: str,
        event: str,
        geo: GeoLocation | None = None,
        distance_m: float | None = None,
        speed_kmh: float | None = None,
    ) -> None:
        def num(value):
            return "" if value is None else f"{value:.6f}"

        row = (
            datetime.now(timezone.utc).isoformat(timespec="milliseconds"),
            client_id,
            event,
            num(geo.latitude if geo else None),
            num(geo.longitude if geo else None),
            num(geo.elevation if geo else None),
            num(distance_m),
            num(speed_kmh),
        )
        self._write(row)
