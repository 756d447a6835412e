"""Prompt assembly: world model, goal, tool catalog, retrieved context."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from ..perception.worldmodel import WorldModel, encode_world_model

RESPONSE_SCHEMA_INSTRUCTION = (
    "Answer with a single JSON object with keys: detections (list of "
    '{"object_id", "self_reported_confidence"} with confidences scaled 0 to 1), '
    'severity ("normal" or "critical"), surrounding_features (text), '
    "recommended_actions (list of strings), rationale (text)."
)

PLAN_SCHEMA_INSTRUCTION = (
    "Answer with a single JSON object describing the plan with keys: plan_id, "
    "goal, steps (list of {step_id, action, tool_name, args, preconditions, "
    "on_fail}), dependencies (map of step_id to list of prerequisite step_ids)."
)


@dataclass(frozen=True)
class Prompt:
    kind: str                    # respond | plan
    goal: str
    world: WorldModel
    tools: tuple[dict, ...] = ()
    context: tuple = ()          # learning.ContextSnippet entries
    feedback: tuple[str, ...] = ()

    @property
    def text(self) -> str:
        lines = ["# MISSION GOAL", self.goal, "", "# WORLD MODEL", encode_world_model(self.world)]
        if self.tools:
            lines += ["", "# AVAILABLE TOOLS"]
            for tool in self.tools:
                args = ", ".join(sorted(tool.get("args", {})))
                lines.append(f"- {tool['name']}({args}): {tool.get('description', '')}")
        if self.context:
            lines += ["", "# CONTEXT"]
            for snippet in self.context:
                lines.append(f"- [{snippet.mission_id}] {snippet.text}")
        if self.feedback:
            lines += ["", "# EXECUTION FEEDBACK"]
            for note in self.feedback:
                lines.append(f"- {note}")
        lines += [
            "",
            "# RESPONSE FORMAT",
            PLAN_SCHEMA_INSTRUCTION if self.kind == "plan" else RESPONSE_SCHEMA_INSTRUCTION,
        ]
        return "\n".join(lines)

    def with_feedback(self, note: str) -> "Prompt":
        return replace(self, feedback=self.feedback + (note,))


def build_prompt(
    world: WorldModel,
    goal: str,
    context: Sequence = (),
    tools: Sequence[dict] = (),
    kind: str = "respond",
) -> Prompt:
    return Prompt(
        kind=kind,
        goal=goal,
        world=world,
        tools=tuple(tools),
        context=tuple(context),
    )
