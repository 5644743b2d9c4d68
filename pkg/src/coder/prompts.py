"""Three-layer prompt composition: system / project / task.

The system prompt ships with the package. The project prompt is an
arbitrary markdown file chosen per domain. The task is inline text or a
task.md in the working directory.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigurationError
from .messages import Message, system, user
from .sandbox import resolve_sandbox_path

LAYER_DELIMITER = "\n\n---\n\n"
TASK_FILE_DEFAULT = "task.md"


class MissingTaskError(ConfigurationError):
    """No inline task and no task file in the working directory."""


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    task_text: str
    project_text: str | None = None
    task_source: str = "inline"
    project_source: str | None = None

    def __post_init__(self) -> None:
        if not self.system_text.strip():
            raise ConfigurationError("system prompt must be non-empty")
        if not self.task_text.strip():
            raise ConfigurationError("task text must be non-empty")


def default_system_prompt() -> str:
    return resources.files("coder.assets").joinpath("system_prompt.md").read_text("utf-8")


def bundled_project_prompt(name: str = "cpmpy") -> str:
    return resources.files("coder.assets").joinpath(f"{name}.md").read_text("utf-8")


def load_bundle(
    workdir: str | Path,
    task: str | None = None,
    task_file: str = TASK_FILE_DEFAULT,
    project_prompt: str | Path | None = None,
    system_text: str | None = None,
) -> PromptBundle:
    """Assemble the three layers.

    The task file is resolved through the sandbox (it belongs to the
    workdir); the project prompt is read unrestricted since it may live
    anywhere ("coder --project regex.md").
    """
    workdir = Path(workdir)
    if task is not None and task.strip():
        task_text, task_source = task, "inline"
    else:
        candidate = resolve_sandbox_path(workdir, task_file)
        if not candidate.is_file():
            raise MissingTaskError(
                f"no task given and no {task_file} in {workdir}"
            )
        task_text, task_source = candidate.read_text("utf-8"), str(candidate)

    project_text: str | None = None
    project_source: str | None = None
    if project_prompt is not None:
        project_path = Path(project_prompt)
        if not project_path.is_file():
            raise ConfigurationError(f"project prompt not found: {project_path}")
        project_text = project_path.read_text("utf-8")
        project_source = str(project_path)

    return PromptBundle(
        system_text=system_text if system_text is not None else default_system_prompt(),
        task_text=task_text,
        project_text=project_text,
        task_source=task_source,
        project_source=project_source,
    )


def compose(bundle: PromptBundle) -> list[Message]:
    """[system(system + delimiter + project), user(task)] and nothing else."""
    system_content = bundle.system_text
    if bundle.project_text is not None:
        system_content = system_content + LAYER_DELIMITER + bundle.project_text
    return [system(system_content), user(bundle.task_text)]
