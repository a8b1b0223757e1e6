# Copyright (c) 2026 SDA Planner Contributors
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

"""Python bindings for the plan diagnosis and repair engine."""

import json

from . import _core
from ._core import KB, SdaError, emit_report, fingerprint, parse_plan, render_prompt

__all__ = [
    "KB",
    "SdaError",
    "bootstrap_kb",
    "diagnose",
    "emit_report",
    "fingerprint",
    "parse_plan",
    "render_prompt",
    "repair",
    "run_batch",
    "run_episode",
    "Recorder",
]


def _source(scenario):
    if isinstance(scenario, dict):
        return json.dumps(scenario)
    return str(scenario)


def _table(table):
    if table is None or isinstance(table, str):
        return table
    return json.dumps(table)


def run_episode(scenario, strategy="sda", proposer=None, table=None, kb=None, base_dir="", with_log=True):
    """Runs one episode. `scenario` is a path or a scenario dict; `proposer`
    is a callable (kind, instruction, context_dict) -> str."""
    fn = _wrap(proposer)
    raw = _core.run_episode(_source(scenario), strategy, fn, _table(table), kb and str(kb), str(base_dir), with_log)
    return json.loads(raw)


def diagnose(scenario, proposer=None, table=None, kb=None, base_dir=""):
    raw = _core.diagnose(_source(scenario), _wrap(proposer), _table(table), kb and str(kb), str(base_dir))
    return None if raw is None else json.loads(raw)


def repair(scenario, proposer=None, table=None, kb=None, base_dir=""):
    raw = _core.repair(_source(scenario), _wrap(proposer), _table(table), kb and str(kb), str(base_dir))
    return None if raw is None else json.loads(raw)


def run_batch(directory, strategies=("sda", "local", "global", "none", "sda_no_tree"), jobs=1, kb=None):
    return json.loads(_core.run_batch(str(directory), list(strategies), jobs, kb and str(kb)))


def bootstrap_kb(skills, proposer, reversibility=None):
    """Builds a KB from effect and dependency answers for each skill."""
    return _core.bootstrap_kb(set(skills), _wrap(proposer), reversibility)


def _wrap(proposer):
    if proposer is None:
        return None

    def call(kind, instruction, context):
        return proposer(kind, instruction, json.loads(context))

    return call


class Recorder:
    """Wraps a proposer callable and keeps every exchange as a scripted-table
    entry."""

    def __init__(self, proposer):
        self._proposer = proposer
        self.entries = []

    def __call__(self, kind, instruction, context):
        response = self._proposer(kind, instruction, context)
        entry = {
            "fingerprint": fingerprint(kind, instruction, json.dumps(context)),
            "kind": kind,
            "response": response,
        }
        if entry not in self.entries:
            self.entries.append(entry)
        return response
