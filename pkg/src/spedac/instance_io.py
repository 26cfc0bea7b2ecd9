"""Plain-text instance files.

Format (0-based ids, LF line endings, single spaces):

    SPEDAC 1
    n m c s t
    tail head weight     (m arc lines)
    arcA arcB penalty    (c conflict lines)

parse_instance(render_instance(x)) reproduces x exactly.  Syntax
problems raise ParseError with the offending line number; structural
problems surface as InvariantError from the core model, naming the
violated rule.
"""

from __future__ import annotations

from pathlib import Path

from .core import ArcRecord, ConflictRecord, Instance

FORMAT_HEADER = "SPEDAC 1"


class ParseError(ValueError):
    """Syntactically invalid instance text."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


def _ints(line_no: int, line: str, count: int, what: str) -> list[int]:
    parts = line.split()
    if len(parts) != count:
        raise ParseError(line_no, f"expected {count} fields for {what}, got {len(parts)}")
    values = []
    for part in parts:
        try:
            values.append(int(part))
        except ValueError:
            raise ParseError(line_no, f"expected integer, got {part!r}") from None
    return values


def parse_instance(text: str) -> Instance:
    """Parse instance text; see the module docstring for the format."""
    lines = text.splitlines()
    if not lines or lines[0].strip() != FORMAT_HEADER:
        found = lines[0].strip() if lines else "<empty file>"
        raise ParseError(1, f"expected header {FORMAT_HEADER!r}, got {found!r}")
    if len(lines) < 2:
        raise ParseError(2, "missing counts line 'n m c s t'")
    n, m, c, s, t = _ints(2, lines[1], 5, "counts 'n m c s t'")
    body = lines[2:]
    while body and not body[-1].strip():
        body.pop()
    if len(body) < m + c:
        raise ParseError(3 + len(body), f"expected {m} arc lines and {c} conflict lines,"
                                        f" file ends after {len(body)} body lines")
    if len(body) > m + c:
        raise ParseError(3 + m + c, f"unexpected extra line after {m} arc lines"
                                    f" and {c} conflict lines")
    arcs = []
    for i in range(m):
        tail, head, weight = _ints(3 + i, lines[2 + i], 3, "arc 'tail head weight'")
        arcs.append(ArcRecord(tail, head, weight))
    conflicts = []
    for i in range(c):
        a, b, penalty = _ints(
            3 + m + i, lines[2 + m + i], 3, "conflict 'arcA arcB penalty'"
        )
        conflicts.append(ConflictRecord(a, b, penalty))
    return Instance(
        vertex_count=n, arcs=tuple(arcs), conflicts=tuple(conflicts), source=s, sink=t
    )


def render_instance(instance: Instance) -> str:
    """Canonical text for an instance (LF endings, trailing newline)."""
    lines = [
        FORMAT_HEADER,
        f"{instance.vertex_count} {len(instance.arcs)} {len(instance.conflicts)}"
        f" {instance.source} {instance.sink}",
    ]
    lines.extend(f"{a.tail} {a.head} {a.weight}" for a in instance.arcs)
    lines.extend(f"{c.arc_a} {c.arc_b} {c.penalty}" for c in instance.conflicts)
    return "\n".join(lines) + "\n"


def load_instance(path: str | Path) -> Instance:
    return parse_instance(Path(path).read_text(encoding="ascii"))


def save_instance(instance: Instance, path: str | Path) -> None:
    Path(path).write_text(render_instance(instance), encoding="ascii", newline="\n")
