import threading
import time

import pytest

pytest.importorskip("segbridge")

from segbridge import BridgeConfig, build_server  # noqa: E402


@pytest.fixture()
def verdict(request):
    """One-line pass report that survives pytest's fd-level capture."""
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def _pass(name: str, detail: str = "") -> None:
        line = f"[acceptance] {name}: PASS"
        if detail:
            line += f" ({detail})"
        if reporter is not None:
            reporter.write_line(line)
        else:
            print(line)

    return _pass


@pytest.fixture(scope="module")
def serve():
    """Factory that stands up real servers on ephemeral ports.

    Returns start(model, **config_overrides) -> endpoint URL; every
    server started through it is shut down at module teardown.
    """
    running = []

    def start(model, **overrides) -> str:
        config = BridgeConfig(port=0, **overrides)
        server = build_server(config, model, log_level="warning")
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        deadline = time.time() + 15
        while not server.started:
            if not thread.is_alive():
                raise RuntimeError("server thread exited before startup")
            if time.time() > deadline:
                raise TimeoutError("server did not start within 15s")
            time.sleep(0.01)
        running.append((server, thread))
        port = server.servers[0].sockets[0].getsockname()[1]
        return f"http://127.0.0.1:{port}"

    yield start
    for server, _ in running:
        server.should_exit = True
    for _, thread in running:
        thread.join(timeout=5)
