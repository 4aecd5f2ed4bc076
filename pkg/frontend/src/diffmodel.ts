/** Parse the service's unified-diff text into renderable hunks. */

export type RowKind = "context" | "delete" | "insert";

export interface DiffRow {
  kind: RowKind;
  text: string;
}

export interface HunkView {
  id: number;
  header: string;
  rows: DiffRow[];
}

const HEADER = /^@@ -(\d+),(\d+) \+(\d+),(\d+) @@$/;

const PREFIX_KINDS: Record<string, RowKind> = {
  " ": "context",
  "-": "delete",
  "+": "insert",
};

export function parseUnifiedDiff(text: string): HunkView[] {
  const hunks: HunkView[] = [];
  if (!text) {
    return hunks;
  }
  const lines = text.split("\n");
  if (lines[lines.length - 1] === "") {
    lines.pop(); // trailing newline artifact
  }
  let current: HunkView | null = null;
  for (const line of lines) {
    const header = HEADER.exec(line);
    if (header) {
      current = { id: hunks.length, header: line, rows: [] };
      hunks.push(current);
      continue;
    }
    if (current === null) {
      throw new Error(`diff body before any hunk header: ${line}`);
    }
    const kind = PREFIX_KINDS[line[0] ?? " "];
    if (kind === undefined) {
      throw new Error(`bad diff line prefix: ${line}`);
    }
    current.rows.push({ kind, text: line.slice(1) });
  }
  return hunks;
}
