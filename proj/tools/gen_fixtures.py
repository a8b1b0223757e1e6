#!/usr/bin/env python3
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

"""Writes the scenario fixtures and the error suite.

Each recipe describes a task and a deterministic stand-in for the language
model. The stand-in is run once per strategy through the engine, every
exchange is recorded, and the recording is stored in the scenario as its
scripted table, so later runs need no callbacks.

Usage: gen_fixtures.py [--build-dir build] [--check]
"""

import argparse
import copy
import itertools
import json
import pathlib
import re
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
STRATEGIES = ["sda", "local", "global", "none", "sda_no_tree"]
STEP_RE = re.compile(r"^\((.+), (.+)\)$")


def render(plan):
    return "".join(f"{i}. ({a}, {o})\n" for i, (a, o) in enumerate(plan, 1))


def parse_step(text):
    m = STEP_RE.match(text)
    return [m.group(1), m.group(2)]


# ---------------------------------------------------------------- recipes


def conflict(sid, a, c, b, d, start="countertop", extra=None, open_first=None):
    """Picks a, opens container c, then tries to pick b while still holding a."""
    plan = []
    objects = {a: {"position": start}, c: {"opened": "false"}, b: {"position": start}, d: {}, start: {}}
    agent_at = start
    if open_first:
        objects[open_first] = {"opened": "false"}
        objects[a]["position"] = open_first
        plan.append(["open", open_first])
        agent_at = open_first
    plan += [["find", a], ["pick up", a], ["find", c], ["open", c], ["find", b], ["pick up", b],
             ["put down", a], ["find", d], ["put down", b]]
    objects.update(extra or {})
    return {
        "id": sid,
        "instruction": f"Put the {a} in the {c} and the {b} on the {d}",
        "agent": {"position": agent_at, "holding": "nothing"},
        "objects": objects,
        "plan": plan,
        "goals": [[f"position({a})", c], [f"position({b})", d]],
        "suggest": [["put down", a]],
        "tags": ["deep", "holding-conflict"],
    }


def lost(sid, a, src, dst):
    """Puts a down too early and later tries to put it into dst."""
    return {
        "id": sid,
        "instruction": f"Move a {a} from a {src} to a {dst}",
        "agent": {"position": src, "holding": "nothing"},
        "objects": {a: {"position": src}, src: {}, dst: {"opened": "false"}},
        "plan": [["find", a], ["pick up", a], ["find", src], ["put down", a], ["find", dst], ["open", dst],
                 ["put down", a], ["close", dst]],
        "goals": [[f"position({a})", dst], [f"opened({dst})", "false"]],
        "suggest": [["pick up", a]],
        "tags": ["deep", "lost-holding"],
    }


def hold_then(sid, first, wanted, device):
    """Holds the wrong object when picking the wanted one, then uses a device."""
    return {
        "id": sid,
        "instruction": f"Turn on the {device} while holding the {wanted}",
        "agent": {"position": "doorway", "holding": "nothing"},
        "objects": {first: {"position": "shelf"}, wanted: {"position": "desk"}, device: {"toggled": "off"},
                    "shelf": {}, "desk": {}, "doorway": {}},
        "plan": [["find", first], ["pick up", first], ["find", wanted], ["pick up", wanted], ["find", device],
                 ["turn on", device]],
        "goals": [["agent.holding", wanted], [f"toggled({device})", "on"]],
        "suggest": [["put down", first]],
        "tags": ["deep", "holding-conflict"],
    }


def slice_conflict(sid, food, item, target):
    """Slices with the knife, then tries to pick another item still holding it."""
    return {
        "id": sid,
        "instruction": f"Slice the {food} and put the {item} on the {target}",
        "agent": {"position": "doorway", "holding": "nothing"},
        "objects": {"knife": {"position": "drawer"}, food: {"sliced": "false", "position": "countertop"},
                    item: {"position": "countertop"}, target: {}, "drawer": {}, "countertop": {}, "doorway": {}},
        "plan": [["find", "knife"], ["pick up", "knife"], ["find", food], ["slice", food], ["find", item],
                 ["pick up", item], ["put down", "knife"], ["find", target], ["put down", item]],
        "goals": [[f"sliced({food})", "true"], [f"position({item})", target]],
        "suggest": [["put down", "knife"]],
        "tags": ["deep", "irreversible"],
    }


def prep(sid, item, container):
    """Opens a container without walking to it first."""
    return {
        "id": sid,
        "instruction": f"Put the {item} in the {container}",
        "agent": {"position": "doorway", "holding": "nothing"},
        "objects": {item: {"position": "table"}, container: {"opened": "false"}, "table": {}, "doorway": {}},
        "plan": [["find", item], ["pick up", item], ["open", container], ["put down", item]],
        "goals": [[f"position({item})", container], [f"opened({container})", "true"]],
        "suggest": [],
        "tags": ["prep-only"],
    }


def env_move(sid, item, target, tick):
    """The agent is pushed away right before a pick-up."""
    return {
        "id": sid,
        "instruction": f"Bring the {item} to the {target}",
        "agent": {"position": "doorway", "holding": "nothing"},
        "objects": {item: {"position": "shelf"}, target: {}, "shelf": {}, "doorway": {}},
        "plan": [["find", item], ["pick up", item], ["find", target], ["put down", item]],
        "goals": [[f"position({item})", target]],
        "perturbations": [{"at_tick": tick, "set": [["agent.position", "doorway"]]}],
        "suggest": [],
        "tags": ["environment"],
    }


def fixtures():
    fig2 = {
        "id": "fig2_kitchen",
        "instruction": "Put the pan in the fridge and the tomato on the countertop",
        "agent": {"position": "cabinet", "holding": "nothing"},
        "objects": {"cabinet": {"opened": "false"}, "pan": {"position": "cabinet"}, "fridge": {"opened": "false"},
                    "tomato": {"position": "sink"}, "countertop": {}, "sink": {}},
        "plan": [["open", "cabinet"], ["find", "pan"], ["pick up", "pan"], ["find", "fridge"], ["open", "fridge"],
                 ["find", "tomato"], ["pick up", "tomato"], ["put down", "pan"], ["find", "countertop"],
                 ["put down", "tomato"]],
        "goals": [["position(pan)", "fridge"], ["position(tomato)", "countertop"]],
        "suggest": [["put down", "pan"]],
        "tags": ["deep", "worked-example"],
    }
    case2 = lost("case2_credit_card", "credit card", "dining table", "drawer")
    case2["tags"] = ["deep", "case-study"]
    env1 = {
        "id": "env_error_01",
        "instruction": "Place the soap on the rack",
        "agent": {"position": "doorway", "holding": "nothing"},
        "objects": {"soap": {"position": "countertop"}, "rack": {}, "countertop": {}, "floor": {}, "doorway": {}},
        "plan": [["find", "soap"], ["pick up", "soap"], ["find", "rack"], ["put down", "soap"]],
        "goals": [["position(soap)", "rack"]],
        "perturbations": [{"at_tick": 1, "set": [["position(soap)", "floor"], ["agent.position", "countertop"]]}],
        "suggest": [],
        "tags": ["environment"],
    }
    env2 = {
        "id": "env_error_02",
        "instruction": "Put the pan on the stove",
        "agent": {"position": "doorway", "holding": "nothing"},
        "objects": {"pan": {"position": "cabinet"}, "stove": {}, "cabinet": {}, "doorway": {}},
        "plan": [["find", "pan"], ["pick up", "pan"], ["find", "stove"], ["put down", "pan"]],
        "goals": [["position(pan)", "stove"]],
        "perturbations": [{"at_tick": 3, "set": [["agent.holding", "nothing"]]}],
        "suggest": [["pick up", "pan"]],
        "tags": ["environment", "escalation"],
    }
    irr = slice_conflict("irreversible_01", "tomato", "apple", "plate")
    prep1 = prep("prep_only_01", "cup", "cabinet")
    return [fig2, case2, env1, env2, irr, prep1]


def suite():
    s = [
        conflict("s01_pan_fridge", "pan", "fridge", "tomato", "countertop", open_first="cabinet",
                 extra={"cabinet": {"opened": "false"}}),
        conflict("s02_mug_cabinet", "mug", "cabinet", "apple", "table"),
        conflict("s03_book_drawer", "book", "drawer", "pen", "desk"),
        conflict("s04_bowl_microwave", "bowl", "microwave", "egg", "sink"),
        lost("s05_credit_card", "credit card", "dining table", "drawer"),
        lost("s06_keys", "keys", "sofa", "safe"),
        lost("s07_watch", "watch", "dresser", "box"),
        hold_then("s08_tissue_lamp", "box", "tissue box", "lamp"),
        hold_then("s09_remote_tv", "pillow", "remote", "television"),
        hold_then("s10_phone_lamp", "book", "phone", "desk lamp"),
        slice_conflict("s11_slice_bread", "bread", "apple", "plate"),
        slice_conflict("s12_slice_potato", "potato", "cup", "shelf"),
        prep("s13_prep_cup", "cup", "cabinet"),
        prep("s14_prep_egg", "egg", "fridge"),
        prep("s15_prep_towel", "towel", "drawer"),
        prep("s16_prep_plate", "plate", "microwave"),
        env_move("s17_env_soap", "soap", "rack", 1),
        env_move("s18_env_vase", "vase", "table", 1),
        env_move("s19_env_bottle", "bottle", "fridge", 1),
        env_move("s20_env_spoon", "spoon", "drawer", 1),
    ]
    # Two suite tasks come from the proposer instead of a fixed plan.
    s[1]["decompose"] = True
    s[12]["decompose"] = True
    return s


# ---------------------------------------------------------------- stand-in


class StandIn:
    """Deterministic replacement for the language model of one recipe."""

    def __init__(self, recipe, choices):
        self.recipe = recipe
        self.choices = choices  # choose fingerprint -> index
        self.seen = []

    def __call__(self, kind, instruction, context):
        import sda_planner as sda

        mode = context.get("mode")
        if kind == "decompose" and mode in (None, "global"):
            return render(self.recipe["plan"])
        if kind == "decompose" and mode == "local":
            failed = parse_step(context["failed"])
            rest = [parse_step(x) for x in context.get("remaining", [])]
            return render([["find", failed[1]], failed] + rest)
        if kind == "decompose" and mode == "window":
            window = [parse_step(x) for x in context["window"]]
            return render(self.recipe["suggest"] + window)
        if kind == "suggest":
            return render(self.recipe["suggest"]) if self.recipe["suggest"] else "1. (find, %s)\n" % (
                parse_step(context["failed"])[1])
        if kind == "choose":
            fp = sda.fingerprint(kind, instruction, json.dumps(context))
            self.seen.append((fp, len(context["options"])))
            return str(self.choices.get(fp, 0))
        raise RuntimeError(f"unexpected request {kind} {context}")


def scenario_doc(recipe, kb_rel):
    doc = {
        "id": recipe["id"],
        "instruction": recipe["instruction"],
        "kb": kb_rel,
        "tags": recipe["tags"],
        "agent": recipe["agent"],
        "objects": recipe["objects"],
        "goals": recipe["goals"],
    }
    if not recipe.get("decompose"):
        doc["fixed_plan"] = recipe["plan"]
    if recipe.get("perturbations"):
        doc["perturbations"] = recipe["perturbations"]
    return doc


def search_choices(sda, doc, recipe, base_dir):
    """Depth-first over choose answers until the sda episode succeeds."""
    choices = {}
    for _ in range(200):
        stand_in = StandIn(recipe, choices)
        result = sda.run_episode(doc, "sda", stand_in, base_dir=str(base_dir), with_log=False)
        if result["success"]:
            return choices
        for i in range(len(stand_in.seen) - 1, -1, -1):
            fp, n = stand_in.seen[i]
            if choices.get(fp, 0) < n - 1:
                choices[fp] = choices.get(fp, 0) + 1
                for later, _ in stand_in.seen[i + 1:]:
                    choices.pop(later, None)
                break
        else:
            return choices  # no alternative left; the caller reports the failure
    return choices


def skip_paths_fail(sda, doc, base_dir):
    """No continuation that only drops steps from the first failure onward
    reaches every goal."""
    none = sda.run_episode(doc, "none", base_dir=str(base_dir), table=[], with_log=True)
    fails = [e["payload"]["t"] for e in none["log"] if e["event"] == "step_fail"]
    if not fails:
        return False
    plan = doc["fixed_plan"]
    first = fails[0] - 1
    tail = list(range(first, len(plan)))
    for r in range(len(tail) + 1):
        for dropped in itertools.combinations(tail, r):
            trial = copy.deepcopy(doc)
            trial["fixed_plan"] = [s for i, s in enumerate(plan) if i not in dropped]
            if not trial["fixed_plan"]:
                continue
            res = sda.run_episode(trial, "none", base_dir=str(base_dir), table=[], with_log=False)
            if res["success"]:
                return False
    return True


def build(sda, recipe, out_dir, kb_rel):
    doc = scenario_doc(recipe, kb_rel)
    choices = search_choices(sda, doc, recipe, out_dir)
    entries = []
    results = {}
    for strategy in STRATEGIES:
        recorder = sda.Recorder(StandIn(recipe, choices))
        results[strategy] = sda.run_episode(doc, strategy, recorder, base_dir=str(out_dir), with_log=False)
        for e in recorder.entries:
            if e not in entries:
                entries.append(e)
    entries.sort(key=lambda e: (e["kind"], e["fingerprint"]))
    doc["scripted"] = entries
    # The frozen table must reproduce the live run exactly.
    for strategy in STRATEGIES:
        replay = sda.run_episode(doc, strategy, base_dir=str(out_dir), with_log=False)
        if replay != results[strategy]:
            raise SystemExit(f"{recipe['id']}: scripted replay differs under {strategy}")
    return doc, results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--build-dir", default=str(ROOT / "build"))
    ap.add_argument("--check", action="store_true", help="compare with the files on disk instead of writing")
    args = ap.parse_args()
    sys.path.insert(0, str(pathlib.Path(args.build_dir) / "python"))
    import sda_planner as sda

    stale = []
    summary = {s: 0 for s in STRATEGIES}
    targets = [(fixtures(), ROOT / "data" / "scenarios", False), (suite(), ROOT / "data" / "suite", True)]
    for recipes, out_dir, is_suite in targets:
        out_dir.mkdir(parents=True, exist_ok=True)
        for recipe in recipes:
            doc, results = build(sda, recipe, out_dir, "../kb/alfred_kb.json")
            line = " ".join(f"{s}={'ok' if results[s]['success'] else '--'}({results[s]['corrections']})"
                            for s in STRATEGIES)
            print(f"{recipe['id']:<24} {line}")
            if is_suite:
                for s in STRATEGIES:
                    summary[s] += results[s]["success"]
                if not results["sda"]["success"]:
                    raise SystemExit(f"{recipe['id']}: sda does not solve the task")
                if results["none"]["success"] or not skip_paths_fail(sda, dict(doc, fixed_plan=recipe["plan"]),
                                                                     out_dir):
                    raise SystemExit(f"{recipe['id']}: a skip path reaches the goal")
            text = json.dumps(doc, indent=2) + "\n"
            path = out_dir / f"{recipe['id']}.json"
            if args.check:
                if not path.exists() or path.read_text() != text:
                    stale.append(path)
            else:
                path.write_text(text)
    print("suite successes:", summary)
    if stale:
        raise SystemExit("stale fixtures: " + ", ".join(str(p) for p in stale))


if __name__ == "__main__":
    main()
