import socket
import threading
import time
from pathlib import Path

import pytest
import uvicorn

from specrepo.model import (
    Band,
    DeviceProfile,
    GeoPoint,
    Journey,
    JourneyMetadata,
    PowerSweep,
)

DATA_DIR = Path(__file__).parent / "data"


def make_sweep(t=0.0, lat=0.0, lon=0.0, powers=(-90.0,)):
    return PowerSweep(timestamp=t, location=GeoPoint(lat, lon), powers=tuple(powers))


def make_journey(
    sweeps=None,
    band=(470_000_000, 694_000_000),
    bin_count=None,
    journey_id="j-test",
    country="Testland",
    city="Testville",
    notes="",
    collected="2016-05-01",
    kind="rfexplorer",
):
    if sweeps is None:
        sweeps = (
            make_sweep(t=0.0, lat=8.5, lon=-71.2, powers=(-90.0,) * 28),
            make_sweep(t=1.0, lat=8.5001, lon=-71.2001, powers=(-85.0,) * 28),
        )
    if bin_count is None:
        bin_count = len(sweeps[0].powers) if sweeps else 1
    return Journey(
        id=journey_id,
        metadata=JourneyMetadata(
            country=country, city=city, notes=notes, collected_utc=collected
        ),
        device=DeviceProfile(kind=kind),
        band=Band(*band),
        bin_count=bin_count,
        sweeps=tuple(sweeps),
    )


class ServerHandle:
    def __init__(self, server: uvicorn.Server, thread: threading.Thread, port: int):
        self.server = server
        self.thread = thread
        self.port = port
        self.base_url = f"http://127.0.0.1:{port}"

    def stop(self):
        self.server.should_exit = True
        self.thread.join(timeout=10)


def run_server(app) -> ServerHandle:
    """Run a FastAPI app on a real socket in a background thread."""
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    config = uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
    server = uvicorn.Server(config)
    thread = threading.Thread(
        target=server.run, kwargs={"sockets": [sock]}, daemon=True
    )
    thread.start()
    deadline = time.time() + 10
    while not server.started:
        if time.time() > deadline:
            raise RuntimeError("server did not start")
        time.sleep(0.01)
    return ServerHandle(server, thread, port)


@pytest.fixture
def tmp_store(tmp_path):
    from specrepo.store import JourneyStore

    return JourneyStore(tmp_path / "store")
