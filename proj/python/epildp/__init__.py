# Copyright (C) 2026 epildp contributors
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
"""Python bindings for the epildp library."""

from ._epildp import (
    Blowup,
    BoundaryX,
    ConfigError,
    DomainError,
    Error,
    IoError,
    Model,
    NoConvergence,
    NonHyperbolic,
    NotBistable,
    ParseError,
    RepairExhausted,
    SingularSystem,
    ensemble,
    explicit_euler,
    find_equilibria,
    lagrangian,
    lagrangian_sis,
    load_model,
    nsfd,
    parse_model,
    reproduction_numbers,
    run_cli,
    simulate,
    sis,
    sis_exact,
    siv,
    tau_select,
    vbar,
)

__version__ = "0.1.0"
