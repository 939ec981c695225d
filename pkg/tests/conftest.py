import pytest


@pytest.fixture
def announce(request):
    """Print a line to the real terminal, bypassing pytest's capture."""
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def _announce(line: str) -> None:
        if capman is not None:
            with capman.global_and_fixture_disabled():
                print(line, flush=True)
        else:
            print(line, flush=True)

    return _announce
