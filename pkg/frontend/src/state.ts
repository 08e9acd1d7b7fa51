/**
 * Editable state of one work item: the suggested findings with their
 * include/exclude toggles, manual span additions, the DI choice with
 * retained alternates, and notes. Drafts persist per unit so a refresh
 * mid-task loses nothing.
 */

import type { SubmissionBody, TaskPayload } from "./api.js";
import { scoreCategories, type CategoryName, type ScorePreview } from "./rules.js";

export type FindingSource = "suggested" | "manual";

export interface FindingState {
  id: number;
  category: CategoryName;
  span: [number, number] | null;
  included: boolean;
  source: FindingSource;
}

interface Draft {
  findings: FindingState[];
  di: 0 | 1 | null;
  alternates: number[];
  notes: string;
}

const DRAFT_PREFIX = "prescribe-draft:";

export class WorkItem {
  readonly unitId: string;
  readonly text: string;
  findings: FindingState[] = [];
  di: 0 | 1 | null = null;
  alternates: number[] = [];
  notes = "";
  cursor = 0;
  private nextId = 1;

  constructor(unitId: string, text: string) {
    this.unitId = unitId;
    this.text = text;
  }

  static fromTask(task: TaskPayload, storage?: Storage): WorkItem {
    if (task.done || !task.unit_id) throw new Error("no task to edit");
    const item = new WorkItem(task.unit_id, task.text ?? "");
    for (const f of task.assist?.findings ?? []) {
      item.findings.push({
        id: item.nextId++,
        category: f.category,
        span: f.span,
        included: true,
        source: "suggested",
      });
    }
    if (storage) item.restoreDraft(storage);
    return item;
  }

  move(delta: number): void {
    if (this.findings.length === 0) return;
    const n = this.findings.length;
    this.cursor = ((this.cursor + delta) % n + n) % n;
  }

  toggleAtCursor(): void {
    const f = this.findings[this.cursor];
    if (f) f.included = !f.included;
  }

  toggleById(id: number): void {
    const f = this.findings.find((x) => x.id === id);
    if (f) f.included = !f.included;
  }

  /** Returns an error message when the span collides within the category. */
  addManual(category: CategoryName, span: [number, number] | null): string | null {
    if (span) {
      for (const f of this.findings) {
        if (
          f.category === category &&
          f.included &&
          f.span &&
          span[0] < f.span[1] &&
          f.span[0] < span[1]
        ) {
          return `overlaps an existing ${category} span`;
        }
      }
    }
    this.findings.push({
      id: this.nextId++,
      category,
      span,
      included: true,
      source: "manual",
    });
    this.cursor = this.findings.length - 1;
    return null;
  }

  removeAtCursor(): void {
    const f = this.findings[this.cursor];
    if (!f) return;
    if (f.source === "manual") {
      this.findings.splice(this.cursor, 1);
      this.cursor = Math.max(0, Math.min(this.cursor, this.findings.length - 1));
    } else {
      f.included = false;
    }
  }

  setDi(value: 0 | 1): void {
    this.di = value;
    this.alternates = this.alternates.filter((a) => a !== value);
  }

  toggleAlternate(): void {
    if (this.di === null) return;
    const other = this.di === 1 ? 0 : 1;
    this.alternates = this.alternates.includes(other) ? [] : [other];
  }

  includedCategories(): CategoryName[] {
    return this.findings.filter((f) => f.included).map((f) => f.category);
  }

  preview(): ScorePreview {
    return scoreCategories(this.includedCategories());
  }

  canSubmit(): boolean {
    return this.di !== null;
  }

  submission(annotator: string): SubmissionBody {
    if (this.di === null) throw new Error("DI not chosen");
    return {
      unit_id: this.unitId,
      annotator,
      di: this.di,
      di_alternates: this.alternates,
      ag_findings: this.findings
        .filter((f) => f.included)
        .map((f) => ({ category: f.category, span: f.span })),
      notes: this.notes,
    };
  }

  private draftKey(): string {
    return `${DRAFT_PREFIX}${this.unitId}`;
  }

  saveDraft(storage: Storage): void {
    const draft: Draft = {
      findings: this.findings,
      di: this.di,
      alternates: this.alternates,
      notes: this.notes,
    };
    storage.setItem(this.draftKey(), JSON.stringify(draft));
  }

  restoreDraft(storage: Storage): boolean {
    const raw = storage.getItem(this.draftKey());
    if (!raw) return false;
    try {
      const draft = JSON.parse(raw) as Draft;
      this.findings = draft.findings;
      this.di = draft.di;
      this.alternates = draft.alternates;
      this.notes = draft.notes;
      this.nextId = Math.max(0, ...this.findings.map((f) => f.id)) + 1;
      return true;
    } catch {
      return false;
    }
  }

  clearDraft(storage: Storage): void {
    storage.removeItem(this.draftKey());
  }
}

/** Map UTF-8 byte offsets (the wire format for spans) to JS string indices. */
export function byteToCharIndex(text: string): Map<number, number> {
  const encoder = new TextEncoder();
  const map = new Map<number, number>();
  let byte = 0;
  let chars = 0;
  map.set(0, 0);
  for (const ch of text) {
    byte += encoder.encode(ch).length;
    chars += ch.length; // UTF-16 code units, for slicing
    map.set(byte, chars);
  }
  return map;
}
