"""Executable plan contract: steps, dependencies, preconditions, failure policy."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

from .preconditions import PreconditionSyntaxError, parse_precondition, referenced_steps

ACTIONS = ("call_tool", "fly_to", "land_and_deploy", "loiter", "report")
ON_FAIL = ("trigger_reflection", "abort", "skip")


class PolicyGraphError(ValueError):
    pass


@dataclass(frozen=True)
class PlanStep:
    step_id: int
    action: str
    tool_name: str | None = None
    args: dict = field(default_factory=dict)
    preconditions: tuple[str, ...] = ()
    on_fail: str = "trigger_reflection"

    def to_wire(self) -> dict:
        return {
            "step_id": self.step_id,
            "action": self.action,
            "tool_name": self.tool_name,
            "args": self.args,
            "preconditions": list(self.preconditions),
            "on_fail": self.on_fail,
        }


@dataclass(frozen=True)
class PolicyGraph:
    plan_id: str
    goal: str
    steps: tuple[PlanStep, ...]
    dependencies: dict[str, list[str]] = field(default_factory=dict)

    def step(self, step_id: int) -> PlanStep:
        for s in self.steps:
            if s.step_id == step_id:
                return s
        raise KeyError(step_id)

    def to_wire(self) -> dict:
        return {
            "plan_id": self.plan_id,
            "goal": self.goal,
            "steps": [s.to_wire() for s in self.steps],
            "dependencies": {k: list(v) for k, v in self.dependencies.items()},
        }


def policy_graph_from_wire(doc: dict) -> PolicyGraph:
    try:
        steps = tuple(
            PlanStep(
                step_id=int(s["step_id"]),
                action=str(s["action"]),
                tool_name=s.get("tool_name"),
                args=dict(s.get("args", {})),
                preconditions=tuple(s.get("preconditions", [])),
                on_fail=str(s.get("on_fail", "trigger_reflection")),
            )
            for s in doc["steps"]
        )
        deps = {str(k): [str(v) for v in vs] for k, vs in doc.get("dependencies", {}).items()}
        return PolicyGraph(
            plan_id=str(doc["plan_id"]),
            goal=str(doc.get("goal", "")),
            steps=steps,
            dependencies=deps,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise PolicyGraphError(f"malformed policy graph: {exc}") from exc


def encode_policy_graph(graph: PolicyGraph) -> str:
    return json.dumps(graph.to_wire(), sort_keys=True)


def decode_policy_graph(text: str) -> PolicyGraph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PolicyGraphError(f"invalid policy graph JSON: {exc.msg}") from exc
    return policy_graph_from_wire(doc)


def validate_policy_graph(
    graph: PolicyGraph, tool_names: Sequence[str] | None = None
) -> list[str]:
    """Return all contract violations (empty list means the graph is executable)."""
    violations: list[str] = []
    ids = [s.step_id for s in graph.steps]
    known = set(ids)
    if len(ids) != len(known):
        violations.append("duplicate step ids")
    if not graph.steps:
        violations.append("graph has no steps")
    for s in graph.steps:
        if s.action not in ACTIONS:
            violations.append(f"step {s.step_id}: unknown action {s.action!r}")
        if s.on_fail not in ON_FAIL:
            violations.append(f"step {s.step_id}: unknown on_fail {s.on_fail!r}")
        if s.action == "call_tool" and not s.tool_name:
            violations.append(f"step {s.step_id}: call_tool requires tool_name")
        if s.action != "call_tool" and s.tool_name:
            violations.append(f"step {s.step_id}: tool_name only valid for call_tool")
        if (
            s.action == "call_tool"
            and s.tool_name
            and tool_names is not None
            and s.tool_name not in tool_names
        ):
            violations.append(f"step {s.step_id}: unknown tool {s.tool_name!r}")
        for expr in s.preconditions:
            try:
                for ref in referenced_steps(expr):
                    if ref not in known:
                        violations.append(
                            f"step {s.step_id}: precondition references unknown step_{ref}"
                        )
            except PreconditionSyntaxError as exc:
                violations.append(f"step {s.step_id}: {exc}")
    # dependency references and acyclicity
    adjacency: dict[int, list[int]] = {i: [] for i in known}
    for key, parents in graph.dependencies.items():
        try:
            child = int(key)
        except ValueError:
            violations.append(f"dependency key {key!r} is not a step id")
            continue
        if child not in known:
            violations.append(f"dependency key references unknown step_{key}")
            continue
        for parent in parents:
            try:
                pid = int(parent)
            except ValueError:
                violations.append(f"dependency value {parent!r} is not a step id")
                continue
            if pid not in known:
                violations.append(f"dependency of step {child} references unknown step_{parent}")
                continue
            adjacency[child].append(pid)
    # cycle check (child depends on parent: walk parent links)
    state: dict[int, int] = {}

    def visit(node: int) -> bool:
        if state.get(node) == 1:
            return False
        if state.get(node) == 2:
            return True
        state[node] = 1
        for dep in adjacency.get(node, []):
            if not visit(dep):
                return False
        state[node] = 2
        return True

    for node in sorted(known):
        if not visit(node):
            violations.append("dependency cycle detected")
            break
    return violations


def topological_order(graph: PolicyGraph) -> list[int]:
    """Deterministic execution order: Kahn's algorithm, smallest step id first."""
    known = {s.step_id for s in graph.steps}
    parents: dict[int, set[int]] = {i: set() for i in known}
    for key, deps in graph.dependencies.items():
        child = int(key)
        for parent in deps:
            parents[child].add(int(parent))
    order: list[int] = []
    remaining = dict(parents)
    while remaining:
        ready = sorted(i for i, ps in remaining.items() if not ps)
        if not ready:
            raise PolicyGraphError("dependency cycle detected")
        nxt = ready[0]
        order.append(nxt)
        del remaining[nxt]
        for ps in remaining.values():
            ps.discard(nxt)
    return order
