"""Minimal boolean expression language over prior step outputs.

Grammar: `step_<k>.<field> OP literal` terms joined by `and`, with OP one of
<, <=, >, >=, ==. Literals are numbers, single/double-quoted strings, or
true/false.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

_TERM_RE = re.compile(
    r"^\s*step_(?P<step>\d+)\.(?P<field>[A-Za-z_][A-Za-z0-9_]*)\s*"
    r"(?P<op><=|>=|==|<|>)\s*(?P<lit>.+?)\s*$"
)

_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
}


class PreconditionSyntaxError(ValueError):
    pass


class IncompleteStepError(RuntimeError):
    """A referenced step has no completed outcome yet."""


@dataclass(frozen=True)
class Comparison:
    step_id: int
    field: str
    op: str
    literal: object

    def render(self) -> str:
        lit = f'"{self.literal}"' if isinstance(self.literal, str) else str(self.literal)
        return f"step_{self.step_id}.{self.field} {self.op} {lit}"


@dataclass(frozen=True)
class Precondition:
    terms: tuple[Comparison, ...]
    source: str


def _parse_literal(text: str):
    if (text.startswith('"') and text.endswith('"')) or (
        text.startswith("'") and text.endswith("'")
    ):
        return text[1:-1]
    low = text.lower()
    if low == "true":
        return True
    if low == "false":
        return False
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError as exc:
        raise PreconditionSyntaxError(f"unparseable literal {text!r}") from exc


def parse_precondition(text: str) -> Precondition:
    if not text or not text.strip():
        raise PreconditionSyntaxError("empty precondition expression")
    terms = []
    for chunk in re.split(r"\s+and\s+", text.strip()):
        m = _TERM_RE.match(chunk)
        if m is None:
            raise PreconditionSyntaxError(f"cannot parse term {chunk!r}")
        terms.append(
            Comparison(
                step_id=int(m.group("step")),
                field=m.group("field"),
                op=m.group("op"),
                literal=_parse_literal(m.group("lit")),
            )
        )
    return Precondition(terms=tuple(terms), source=text)


def referenced_steps(text: str) -> set[int]:
    return {c.step_id for c in parse_precondition(text).terms}


def evaluate_precondition(
    text: str, outputs_by_step: dict[int, dict]
) -> tuple[bool, list[str]]:
    """Evaluate against completed step outputs.

    Returns (verdict, diagnostics). A missing field makes the term false with
    a diagnostic; a missing step entirely raises IncompleteStepError.
    """
    pre = parse_precondition(text)
    diagnostics: list[str] = []
    verdict = True
    for term in pre.terms:
        if term.step_id not in outputs_by_step:
            raise IncompleteStepError(
                f"precondition references step_{term.step_id} with no completed outcome"
            )
        outputs = outputs_by_step[term.step_id]
        if term.field not in outputs:
            diagnostics.append(
                f"step_{term.step_id} has no output field {term.field!r}"
            )
            verdict = False
            continue
        value = outputs[term.field]
        try:
            ok = _OPS[term.op](value, term.literal)
        except TypeError:
            diagnostics.append(
                f"cannot compare step_{term.step_id}.{term.field}={value!r} with {term.literal!r}"
            )
            verdict = False
            continue
        if not ok:
            diagnostics.append(f"{term.render()} is false (actual {value!r})")
            verdict = False
    return verdict, diagnostics
