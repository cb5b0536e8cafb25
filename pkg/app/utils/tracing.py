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
from collections.abc import Sequence
from typing import Any

from opentelemetry import trace
from opentelemetry.exporter.cloud_trace import CloudTraceSpanExporter
from opentelemetry.sdk.trace import ReadableSpan, TracerProvider
from opentelemetry.sdk.trace.export import (
    BatchSpanProcessor,
    SimpleSpanProcessor,
    SpanExporter,
    SpanExportResult,
)

from app.utils.logs import StructuredLogger, get_logger

# Cloud Logging rejects entries above 256 KB.
MAX_ATTRIBUTE_BYTES = 250 * 1024


class LoggingSpanExporter(SpanExporter):
    """
    A span exporter that writes each finished span as a structured log entry.

    Entries go through :mod:`app.utils.logs`, so they reach Google Cloud Logging
    when cloud logging is enabled and the local log stream otherwise.
    """

    def __init__(
        self,
        logger: StructuredLogger | None = None,
        max_attribute_bytes: int = MAX_ATTRIBUTE_BYTES,
        debug: bool = False,
    ) -> None:
        """
        Initialize the exporter.

        :param logger: Structured logger receiving the span entries
        :param max_attribute_bytes: Attribute payloads above this size are truncated
        :param debug: Enable debug mode for additional logging
        """
        self.logger = logger or get_logger(__name__)
        self.max_attribute_bytes = max_attribute_bytes
        self.debug = debug

    def export(self, spans: Sequence[ReadableSpan]) -> SpanExportResult:
        """
        Export the spans as log entries.

        :param spans: A sequence of spans to export
        :return: The result of the export operation
        """
        for span in spans:
            span_context = span.get_span_context()
            span_dict = json.loads(span.to_json())
            span_dict["trace_id"] = format(span_context.trace_id, "x")
            span_dict["span_id"] = format(span_context.span_id, "x")
            span_dict = self._process_large_attributes(span_dict)
            if self.debug:
                print(span_dict)
            self.logger.log_struct(span_dict, severity="INFO")
        return SpanExportResult.SUCCESS

    def shutdown(self) -> None:
        pass

    def _process_large_attributes(self, span_dict: dict[str, Any]) -> dict[str, Any]:
        """
        Replace attribute values by a truncation marker when the attributes
        exceed the size limit of a log entry.

        :param span_dict: The span data dictionary
        :return: The updated span dictionary
        """
        attributes = span_dict.get("attributes") or {}
        size = len(json.dumps(attributes).encode())
        if size > self.max_attribute_bytes:
            span_dict["attributes"] = {
                key: value if len(json.dumps(value).encode()) <= 1024 else "<truncated>"
                for key, value in attributes.items()
            }
            span_dict["attributes_truncated_from"] = size
        return span_dict


def setup_tracing(enabled: bool, cloud: bool = False) -> TracerProvider | None:
    """Install a tracer provider exporting spans to the log, and to Cloud Trace if ``cloud``."""
    if not enabled:
        return None
    provider = TracerProvider()
    provider.add_span_processor(SimpleSpanProcessor(LoggingSpanExporter()))
    if cloud:
        provider.add_span_processor(BatchSpanProcessor(CloudTraceSpanExporter()))
    trace.set_tracer_provider(provider)
    return provider
