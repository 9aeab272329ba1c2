"""Pull the BPMN-XML document out of a chat answer."""
from __future__ import annotations

import re

_THINK = re.compile(r"<think>.*?(?:</think>|\Z)", re.DOTALL | re.IGNORECASE)
_FENCE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)
_SPAN = re.compile(
    r"(?:<\?xml[^>]*\?>\s*)?<(?:[A-Za-z_][\w.\-]*:)?definitions\b.*?</(?:[A-Za-z_][\w.\-]*:)?definitions\s*>",
    re.DOTALL,
)


def strip_thinking(text: str) -> str:
    return _THINK.sub("", text)


def extract_xml(text: str) -> str:
    """First fenced block, else the first definitions span, else the whole text."""
    text = strip_thinking(text or "")
    m = _FENCE.search(text)
    if m:
        return m.group(1).strip()
    m = _SPAN.search(text)
    if m:
        return m.group(0).strip()
    return text.strip()
