"""Prompt templates with {description}, {errors} and {common_mistakes} slots."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence, Union

TEMPLATE_FILES = ("system.txt", "modeling.txt", "refinement.txt", "common_mistakes.txt")


class TemplateMissing(FileNotFoundError):
    pass


def _read(directory: Union[str, Path, None], name: str) -> str:
    if directory is None:
        node = resources.files("bpmnbench") / "prompts" / name
    else:
        node = Path(directory) / name
    try:
        return node.read_text("utf-8")
    except (FileNotFoundError, IsADirectoryError) as exc:
        raise TemplateMissing(name) from exc


@dataclass(frozen=True)
class PromptSet:
    system: str
    modeling: str
    refinement: str
    common_mistakes: str

    @classmethod
    def load(cls, directory: Union[str, Path, None] = None) -> "PromptSet":
        texts = [_read(directory, n) for n in TEMPLATE_FILES]
        mistakes = "\n".join(ln for ln in texts[3].splitlines()
                             if ln.strip() and not ln.lstrip().startswith("#"))
        return cls(texts[0].strip(), texts[1].strip(), texts[2].strip(), mistakes)

    def render_modeling(self, description: str) -> str:
        return self.modeling.replace("{description}", description.strip())

    def render_refinement(self, errors: Optional[Sequence[str]]) -> Optional[str]:
        if not errors:
            return None
        listed = "\n".join(f"- {e}" for e in errors)
        return (self.refinement
                .replace("{common_mistakes}", self.common_mistakes)
                .replace("{errors}", listed))

    def render(self, description: str, errors: Optional[Sequence[str]] = None):
        return self.system, self.render_modeling(description), self.render_refinement(errors)
