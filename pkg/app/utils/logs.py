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
"""Structured logging.

Events are dictionaries emitted with ``log_struct``. With
``LLQ_CLOUD_LOGGING=true`` they go to Google Cloud Logging; otherwise they are
written as one JSON line per event through the standard ``logging`` module.
"""

import json
import logging
from typing import Any

from google.cloud import logging as google_cloud_logging

from app import config

_SEVERITIES = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}

_cloud_client: google_cloud_logging.Client | None = None


def _client() -> google_cloud_logging.Client:
    global _cloud_client
    if _cloud_client is None:
        _cloud_client = google_cloud_logging.Client()
    return _cloud_client


class StructuredLogger:
    """Thin wrapper giving every module the same ``log_struct`` interface."""

    def __init__(self, name: str, cloud: bool | None = None) -> None:
        self.name = name
        self.local = logging.getLogger(name)
        use_cloud = config.CLOUD_LOGGING if cloud is None else cloud
        self.cloud = _client().logger(name) if use_cloud else None

    def enabled(self, severity: str = "DEBUG") -> bool:
        return self.cloud is not None or self.local.isEnabledFor(_SEVERITIES[severity])

    def log_struct(self, payload: dict[str, Any], severity: str = "INFO") -> None:
        if self.cloud is not None:
            self.cloud.log_struct(payload, severity=severity)
            return
        level = _SEVERITIES[severity]
        if self.local.isEnabledFor(level):
            self.local.log(level, json.dumps(payload, default=str, sort_keys=True))


_loggers: dict[str, StructuredLogger] = {}


def get_logger(name: str) -> StructuredLogger:
    if name not in _loggers:
        _loggers[name] = StructuredLogger(name)
    return _loggers[name]


def setup_logging(level: str = config.LOG_LEVEL) -> None:
    logging.basicConfig(level=_SEVERITIES.get(level.upper(), logging.WARNING))
