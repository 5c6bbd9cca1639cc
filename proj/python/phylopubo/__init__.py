# Copyright 2026 The phylopubo Authors
# SPDX-License-Identifier: Apache-2.0

from ._core import *  # noqa: F401,F403
from ._core import Error

__all__ = [name for name in dir() if not name.startswith("_")]
