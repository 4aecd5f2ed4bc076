"""Line-based unified diffs with per-hunk accept/reject.

The diff comes from a longest-common-subsequence over lines, with ties
broken toward the earliest match in the original text so output is fully
deterministic. Texts are split on "\\n" only; joining the line list with
"\\n" is the exact inverse, so applying a patch is byte-faithful including
trailing-newline state.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

CONTEXT = "context"
DELETE = "delete"
INSERT = "insert"

PENDING = "pending"
ACCEPTED = "accepted"
REJECTED = "rejected"


class PatchError(Exception):
    """Inconsistent hunk coordinates or content."""

    def __init__(self, message: str, hunk_id: int | None = None):
        super().__init__(message)
        self.hunk_id = hunk_id


class StalePatchError(PatchError):
    """The text being patched is not the text the patch was computed from."""


@dataclass
class Hunk:
    id: int
    old_start: int  # 1-based; for old_len == 0, the line *before* the insert
    old_len: int
    new_start: int
    new_len: int
    lines: list[tuple[str, str]]  # (tag, line text without newline)
    state: str = PENDING


@dataclass
class PatchSet:
    asset_id: str
    original_digest: str
    hunks: list[Hunk] = field(default_factory=list)
    context_width: int = 3

    def decide(self, decisions: dict[int, str]) -> None:
        by_id = {h.id: h for h in self.hunks}
        for hunk_id, state in decisions.items():
            if state not in (ACCEPTED, REJECTED):
                raise ValueError(f"unknown decision {state!r}")
            if hunk_id not in by_id:
                raise PatchError(f"unknown hunk id {hunk_id}", hunk_id)
            by_id[hunk_id].state = state

    def set_all(self, state: str) -> None:
        for hunk in self.hunks:
            hunk.state = state

    def pending_ids(self) -> list[int]:
        return [h.id for h in self.hunks if h.state == PENDING]


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def unified_diff(a: str, b: str, context: int = 3, asset_id: str = "") -> PatchSet:
    if context < 0:
        raise ValueError("context must be >= 0")
    patchset = PatchSet(asset_id=asset_id, original_digest=text_digest(a),
                        context_width=context)
    if a == b:
        return patchset
    ops = _diff_ops(a.split("\n"), b.split("\n"))
    patchset.hunks = _group_hunks(ops, context)
    return patchset


def _diff_ops(la: list[str], lb: list[str]) -> list[tuple[str, str]]:
    """Edit script as (tag, line) ops covering both sequences."""
    n, m = len(la), len(lb)
    pre = 0
    while pre < n and pre < m and la[pre] == lb[pre]:
        pre += 1
    post = 0
    while post < n - pre and post < m - pre and la[n - 1 - post] == lb[m - 1 - post]:
        post += 1
    ops: list[tuple[str, str]] = [(CONTEXT, line) for line in la[:pre]]
    ops.extend(_lcs_ops(la[pre : n - post], lb[pre : m - post]))
    ops.extend((CONTEXT, line) for line in la[n - post : n])
    return ops


def _lcs_ops(la: list[str], lb: list[str]) -> list[tuple[str, str]]:
    n, m = len(la), len(lb)
    # lengths[i][j] = LCS length of la[i:], lb[j:]
    lengths = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row = lengths[i]
        below = lengths[i + 1]
        ai = la[i]
        for j in range(m - 1, -1, -1):
            if ai == lb[j]:
                row[j] = below[j + 1] + 1
            else:
                down = below[j]
                right = row[j + 1]
                row[j] = down if down >= right else right
    ops: list[tuple[str, str]] = []
    i = j = 0
    while i < n and j < m:
        if la[i] == lb[j] and lengths[i][j] == lengths[i + 1][j + 1] + 1:
            ops.append((CONTEXT, la[i]))
            i += 1
            j += 1
        elif lengths[i + 1][j] >= lengths[i][j + 1]:
            ops.append((DELETE, la[i]))
            i += 1
        else:
            ops.append((INSERT, lb[j]))
            j += 1
    ops.extend((DELETE, line) for line in la[i:])
    ops.extend((INSERT, line) for line in lb[j:])
    return ops


def _group_hunks(ops: list[tuple[str, str]], context: int) -> list[Hunk]:
    change_indices = [k for k, (tag, _) in enumerate(ops) if tag != CONTEXT]
    if not change_indices:
        return []
    # Merge change runs whose context windows touch.
    groups: list[tuple[int, int]] = []
    start = prev = change_indices[0]
    for k in change_indices[1:]:
        if k - prev - 1 <= 2 * context:
            prev = k
        else:
            groups.append((start, prev))
            start = prev = k
    groups.append((start, prev))

    # Prefix counts of a-lines / b-lines consumed before each op.
    a_before = [0] * (len(ops) + 1)
    b_before = [0] * (len(ops) + 1)
    for k, (tag, _) in enumerate(ops):
        a_before[k + 1] = a_before[k] + (tag != INSERT)
        b_before[k + 1] = b_before[k] + (tag != DELETE)

    hunks: list[Hunk] = []
    for first, last in groups:
        lo = max(0, first - context)
        hi = min(len(ops) - 1, last + context)
        lines = [ops[k] for k in range(lo, hi + 1)]
        old_len = sum(1 for tag, _ in lines if tag != INSERT)
        new_len = sum(1 for tag, _ in lines if tag != DELETE)
        old_start = a_before[lo] + 1 if old_len > 0 else a_before[lo]
        new_start = b_before[lo] + 1 if new_len > 0 else b_before[lo]
        hunks.append(
            Hunk(
                id=len(hunks),
                old_start=old_start,
                old_len=old_len,
                new_start=new_start,
                new_len=new_len,
                lines=lines,
            )
        )
    return hunks


def apply_selected(a: str, patchset: PatchSet) -> str:
    """Apply accepted hunks; rejected and pending hunks leave their region
    untouched. Refuses stale or inconsistent patches."""
    if text_digest(a) != patchset.original_digest:
        raise StalePatchError("original text does not match patch digest")
    la = a.split("\n")
    out: list[str] = []
    pos = 0
    for hunk in patchset.hunks:
        start = hunk.old_start - 1 if hunk.old_len > 0 else hunk.old_start
        if start < pos or start + hunk.old_len > len(la):
            raise PatchError(f"hunk {hunk.id} out of bounds", hunk.id)
        old_lines = [text for tag, text in hunk.lines if tag != INSERT]
        if len(old_lines) != hunk.old_len:
            raise PatchError(f"hunk {hunk.id} length mismatch", hunk.id)
        if la[start : start + hunk.old_len] != old_lines:
            raise PatchError(f"hunk {hunk.id} does not match original", hunk.id)
        out.extend(la[pos:start])
        if hunk.state == ACCEPTED:
            out.extend(text for tag, text in hunk.lines if tag != DELETE)
        else:
            out.extend(la[start : start + hunk.old_len])
        pos = start + hunk.old_len
    out.extend(la[pos:])
    return "\n".join(out)


_PREFIX_TAGS = {" ": CONTEXT, "-": DELETE, "+": INSERT}
_TAG_PREFIX = {CONTEXT: " ", DELETE: "-", INSERT: "+"}
_HEADER_RE = re.compile(r"^@@ -(\d+),(\d+) \+(\d+),(\d+) @@$")


def render_patch(patchset: PatchSet) -> str:
    """Unified-diff text: parse_patch(render_patch(p)) reproduces p's hunks."""
    parts: list[str] = []
    for hunk in patchset.hunks:
        parts.append(
            f"@@ -{hunk.old_start},{hunk.old_len} "
            f"+{hunk.new_start},{hunk.new_len} @@\n"
        )
        for tag, text in hunk.lines:
            parts.append(_TAG_PREFIX[tag] + text + "\n")
    return "".join(parts)


def parse_patch(
    text: str,
    asset_id: str = "",
    original_digest: str = "",
    context: int = 3,
) -> PatchSet:
    patchset = PatchSet(asset_id=asset_id, original_digest=original_digest,
                        context_width=context)
    if not text:
        return patchset
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    i = 0
    while i < len(lines):
        m = _HEADER_RE.match(lines[i])
        if not m:
            raise PatchError(f"expected hunk header at line {i + 1}")
        old_start, old_len, new_start, new_len = map(int, m.groups())
        i += 1
        hunk_lines: list[tuple[str, str]] = []
        seen_old = seen_new = 0
        while i < len(lines) and (seen_old < old_len or seen_new < new_len):
            line = lines[i]
            prefix, body = (line[0], line[1:]) if line else (" ", "")
            tag = _PREFIX_TAGS.get(prefix)
            if tag is None:
                raise PatchError(f"bad line prefix at line {i + 1}")
            hunk_lines.append((tag, body))
            seen_old += tag != INSERT
            seen_new += tag != DELETE
            i += 1
        if seen_old != old_len or seen_new != new_len:
            raise PatchError("hunk body does not match header counts")
        patchset.hunks.append(
            Hunk(
                id=len(patchset.hunks),
                old_start=old_start,
                old_len=old_len,
                new_start=new_start,
                new_len=new_len,
                lines=hunk_lines,
            )
        )
    return patchset
