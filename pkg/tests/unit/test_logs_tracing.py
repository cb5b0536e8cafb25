# Copyright 2025 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
import json
import logging
from collections.abc import Generator
from unittest.mock import MagicMock, patch

import pytest
from google.auth.credentials import Credentials
from opentelemetry.sdk.trace import ReadableSpan, TracerProvider
from opentelemetry.sdk.trace.export import SpanExportResult

from app.utils import logs
from app.utils.logs import StructuredLogger
from app.utils.tracing import LoggingSpanExporter, setup_tracing


@pytest.fixture(autouse=True)
def mock_google_auth_default() -> Generator[None, None, None]:
    """Mock the google.auth.default function for testing."""
    mock_credentials = MagicMock(spec=Credentials)
    with patch("google.auth.default", return_value=(mock_credentials, "mock-project-id")):
        yield


@pytest.fixture
def mock_cloud_client() -> Generator[MagicMock, None, None]:
    with patch("app.utils.logs._cloud_client", MagicMock()) as client:
        yield client


def test_local_logger_writes_json(caplog: pytest.LogCaptureFixture) -> None:
    logger = StructuredLogger("llq.test", cloud=False)
    with caplog.at_level(logging.INFO, logger="llq.test"):
        logger.log_struct({"event": "sat", "leaves": 2})
    assert json.loads(caplog.records[0].getMessage()) == {"event": "sat", "leaves": 2}


def test_debug_is_skipped_below_level(caplog: pytest.LogCaptureFixture) -> None:
    logger = StructuredLogger("llq.quiet", cloud=False)
    with caplog.at_level(logging.WARNING, logger="llq.quiet"):
        assert not logger.enabled("DEBUG")
        logger.log_struct({"event": "normalize"}, severity="DEBUG")
    assert caplog.records == []


def test_cloud_logger_forwards_entries(mock_cloud_client: MagicMock) -> None:
    logger = StructuredLogger("llq.cloud", cloud=True)
    logger.log_struct({"event": "consequence"}, severity="WARNING")
    mock_cloud_client.logger.assert_called_once_with("llq.cloud")
    mock_cloud_client.logger.return_value.log_struct.assert_called_once_with(
        {"event": "consequence"}, severity="WARNING"
    )
    assert logger.enabled("DEBUG")


def test_get_logger_is_cached() -> None:
    assert logs.get_logger("llq.cached") is logs.get_logger("llq.cached")


def _span(name: str, **attributes: str) -> ReadableSpan:
    provider = TracerProvider()
    tracer = provider.get_tracer("test")
    with tracer.start_as_current_span(name, attributes=attributes) as span:
        pass
    return span


def test_exporter_logs_each_span() -> None:
    logger = MagicMock()
    exporter = LoggingSpanExporter(logger=logger)
    span = _span("sat", level="L1star")
    assert exporter.export([span]) == SpanExportResult.SUCCESS
    [call] = logger.log_struct.call_args_list
    entry = call.args[0]
    assert entry["name"] == "sat"
    assert entry["attributes"] == {"level": "L1star"}
    assert entry["trace_id"] == format(span.get_span_context().trace_id, "x")


def test_exporter_truncates_large_attributes() -> None:
    logger = MagicMock()
    exporter = LoggingSpanExporter(logger=logger, max_attribute_bytes=2048)
    exporter.export([_span("consequence", goal="|- p", theory="p |- q\n" * 1000)])
    entry = logger.log_struct.call_args.args[0]
    assert entry["attributes"] == {"goal": "|- p", "theory": "<truncated>"}
    assert entry["attributes_truncated_from"] > 2048


def test_setup_tracing_disabled() -> None:
    assert setup_tracing(False) is None


def test_setup_tracing_installs_provider() -> None:
    with patch("app.utils.tracing.trace.set_tracer_provider") as install:
        provider = setup_tracing(True)
    assert isinstance(provider, TracerProvider)
    install.assert_called_once_with(provider)
