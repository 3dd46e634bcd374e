"""MQTT topic name/filter validation and wildcard matching."""

from __future__ import annotations


def topic_name_valid(topic: str) -> bool:
    """A publishable topic: non-empty, no wildcards, no NUL, fits a string."""
    if not topic or "\x00" in topic:
        return False
    if "+" in topic or "#" in topic:
        return False
    return len(topic.encode("utf-8")) <= 65535


def topic_filter_valid(topic_filter: str) -> bool:
    """A subscription filter: '+' alone in a level, '#' alone in the last."""
    if not topic_filter or "\x00" in topic_filter:
        return False
    if len(topic_filter.encode("utf-8")) > 65535:
        return False
    levels = topic_filter.split("/")
    for i, level in enumerate(levels):
        if "#" in level:
            if level != "#" or i != len(levels) - 1:
                return False
        if "+" in level and level != "+":
            return False
    return True


def topic_matches(topic_filter: str, topic: str) -> bool:
    """Wildcard match of a concrete topic against a filter.

    '+' matches exactly one level, '#' the remainder (including zero
    levels). Filters starting with a wildcard never match topics whose
    first level starts with '$'.
    """
    filter_levels = topic_filter.split("/")
    topic_levels = topic.split("/")
    if topic_levels[0].startswith("$") and filter_levels[0] in ("+", "#"):
        return False
    i = 0
    for i, flevel in enumerate(filter_levels):
        if flevel == "#":
            return True
        if i >= len(topic_levels):
            return False
        if flevel != "+" and flevel != topic_levels[i]:
            return False
    return len(filter_levels) == len(topic_levels)
