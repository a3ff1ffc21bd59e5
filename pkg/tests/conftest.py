import pytest

from stubchat import StubChatServer


@pytest.fixture
def stub_chat():
    server = StubChatServer().start()
    yield server
    server.stop()


@pytest.fixture
def no_retry_sleep(monkeypatch):
    import raymap.chatclient

    monkeypatch.setattr(raymap.chatclient.time, "sleep", lambda _s: None)
