"""Collects one status line per acceptance criterion for the terminal summary."""

LINES: list[str] = []


def record(label: str, ok: bool, detail: str = "") -> None:
    line = f"{label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
    LINES.append(line)
    print(line)
