/**
 * Annotation controller: fetch task, edit with keyboard, submit,
 * reconcile the client preview against the server echo, advance.
 *
 * The client never computes a stored verdict. After each submit the
 * server's computed score/level/toxicity is displayed; if the local
 * preview disagreed, a banner says so and the annotator sees the
 * authoritative values.
 */

import { ApiClient, ApiError, type SubmitResponse, type TaskPayload } from "./api.js";
import { WorkItem } from "./state.js";
import type { CategoryName } from "./rules.js";
import { CATEGORY_NAMES } from "./rules.js";
import {
  renderCodebook,
  renderDiControls,
  renderEcho,
  renderFindingList,
  renderHighlights,
  renderInlineError,
  renderPreview,
  renderProgress,
} from "./view.js";

export interface AppElements {
  text: HTMLElement;
  findings: HTMLElement;
  di: HTMLElement;
  preview: HTMLElement;
  echo: HTMLElement;
  codebook: HTMLElement;
  progress: HTMLElement;
  error: HTMLElement;
  notes: HTMLTextAreaElement;
  submit: HTMLButtonElement;
}

export class AnnotationApp {
  item: WorkItem | null = null;
  lastEcho: SubmitResponse | null = null;
  mismatch = false;
  done = false;
  busy = false;
  private readonly aborter = new AbortController();

  constructor(
    private readonly api: ApiClient,
    private readonly annotator: string,
    private readonly elements: AppElements,
    private readonly storage: Storage,
  ) {}

  /** Detach document-level listeners (used by tests and route changes). */
  dispose(): void {
    this.aborter.abort();
  }

  async start(): Promise<void> {
    renderCodebook(this.elements.codebook);
    this.bindKeyboard();
    this.elements.submit.addEventListener("click", () => void this.submit());
    this.elements.notes.addEventListener("input", () => {
      if (this.item) {
        this.item.notes = this.elements.notes.value;
        this.item.saveDraft(this.storage);
      }
    });
    await this.loadNext();
  }

  async loadNext(): Promise<void> {
    let task: TaskPayload;
    try {
      task = await this.api.nextTask(this.annotator);
    } catch (err) {
      renderInlineError(this.elements.error, describe(err));
      return;
    }
    if (task.done) {
      this.done = true;
      this.item = null;
      renderProgress(this.elements.progress, "all units annotated; nothing pending");
      this.elements.text.textContent = "";
      this.elements.findings.textContent = "";
      this.render();
      return;
    }
    this.item = WorkItem.fromTask(task, this.storage);
    renderProgress(
      this.elements.progress,
      `unit ${task.position}/${task.total}: ${task.unit_id}`,
    );
    this.elements.notes.value = this.item.notes;
    renderInlineError(this.elements.error, null);
    this.render();
  }

  render(): void {
    if (this.item) {
      const handlers = { onToggleFinding: (id: number) => this.toggle(id) };
      renderHighlights(this.elements.text, this.item, handlers);
      renderFindingList(this.elements.findings, this.item, handlers);
      renderDiControls(this.elements.di, this.item);
      renderPreview(this.elements.preview, this.item);
      this.elements.submit.disabled = !this.item.canSubmit();
    } else {
      this.elements.submit.disabled = true;
      this.elements.preview.textContent = "";
      this.elements.di.textContent = "";
    }
    renderEcho(this.elements.echo, this.lastEcho, this.mismatch);
  }

  private toggle(id: number): void {
    if (!this.item) return;
    this.item.toggleById(id);
    this.item.saveDraft(this.storage);
    this.render();
  }

  addFindingFromSelection(category: CategoryName, span: [number, number] | null): void {
    if (!this.item) return;
    const error = this.item.addManual(category, span);
    renderInlineError(this.elements.error, error);
    if (!error) this.item.saveDraft(this.storage);
    this.render();
  }

  async submit(): Promise<void> {
    if (!this.item || !this.item.canSubmit() || this.busy) return;
    this.busy = true;
    const preview = this.item.preview();
    try {
      const echo = await this.api.submit(this.item.submission(this.annotator));
      this.lastEcho = echo;
      this.mismatch =
        echo.computed.score !== preview.score || echo.computed.level !== preview.level;
      this.item.clearDraft(this.storage);
      renderInlineError(this.elements.error, null);
      await this.loadNext();
    } catch (err) {
      // keep all local state; offer retry by leaving the item in place
      renderInlineError(this.elements.error, `submit failed, state kept: ${describe(err)}`);
      this.item.saveDraft(this.storage);
      this.render();
    } finally {
      this.busy = false;
    }
  }

  private bindKeyboard(): void {
    document.addEventListener(
      "keydown",
      (event) => {
        if (!this.item || this.done) return;
        if (document.activeElement === this.elements.notes) {
          if (event.key === "Escape") this.elements.notes.blur();
          return;
        }
        const item = this.item;
        switch (event.key) {
          case "j":
          case "ArrowDown":
            item.move(1);
            break;
          case "k":
          case "ArrowUp":
            item.move(-1);
            break;
          case "x":
          case " ":
            item.toggleAtCursor();
            item.saveDraft(this.storage);
            break;
          case "Delete":
            item.removeAtCursor();
            item.saveDraft(this.storage);
            break;
          case "0":
            item.setDi(0);
            item.saveDraft(this.storage);
            break;
          case "1":
            item.setDi(1);
            item.saveDraft(this.storage);
            break;
          case "a":
            item.toggleAlternate();
            item.saveDraft(this.storage);
            break;
          case "n":
            this.elements.notes.focus();
            break;
          case "Enter":
            void this.submit();
            break;
          default: {
            // shift+digit adds a manual whole-unit finding of that category
            const digits = ")!@#$%^&*(";
            const pos = digits.indexOf(event.key);
            if (event.shiftKey && pos >= 0 && pos < CATEGORY_NAMES.length) {
              this.addFindingFromSelection(CATEGORY_NAMES[pos], null);
              break;
            }
            return;
          }
        }
        event.preventDefault();
        this.render();
      },
      { signal: this.aborter.signal },
    );
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.message}: ${JSON.stringify(err.detail)}`;
  return err instanceof Error ? err.message : String(err);
}
