/**
 * DOM rendering for the annotation pane: highlighted text with category
 * badges, the finding list, DI controls, the live preview, and the
 * post-submit reconciliation strip. Pure render-from-state; all
 * interaction handlers are injected by the controller.
 */

import type { WorkItem } from "./state.js";
import { byteToCharIndex } from "./state.js";
import { CATEGORIES, CATEGORY_NAMES, verdictOf } from "./rules.js";
import type { SubmitResponse } from "./api.js";

export interface ViewHandlers {
  onToggleFinding(id: number): void;
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export function renderHighlights(
  container: HTMLElement,
  item: WorkItem,
  handlers: ViewHandlers,
): void {
  container.textContent = "";
  const text = item.text;
  const byteMap = byteToCharIndex(text);
  const spanned = item.findings.filter((f) => f.span !== null);
  const edges = new Set<number>([0, text.length]);
  for (const f of spanned) {
    const [a, b] = f.span as [number, number];
    const ca = byteMap.get(a);
    const cb = byteMap.get(b);
    if (ca !== undefined) edges.add(ca);
    if (cb !== undefined) edges.add(cb);
  }
  const sorted = [...edges].sort((x, y) => x - y);
  for (let i = 0; i < sorted.length - 1; i++) {
    const [from, to] = [sorted[i], sorted[i + 1]];
    if (from === to) continue;
    const covering = spanned.filter((f) => {
      const ca = byteMap.get((f.span as [number, number])[0]);
      const cb = byteMap.get((f.span as [number, number])[1]);
      return ca !== undefined && cb !== undefined && ca <= from && to <= cb;
    });
    const segment = el(
      "span",
      covering.length
        ? covering.some((f) => f.included)
          ? "hl hl-on"
          : "hl hl-off"
        : "",
      text.slice(from, to),
    );
    if (covering.length) {
      segment.title = covering.map((f) => f.category).join(", ");
      segment.addEventListener("click", () => handlers.onToggleFinding(covering[0].id));
    }
    container.appendChild(segment);
  }
  const wholeUnit = item.findings.filter((f) => f.span === null);
  if (wholeUnit.length) {
    const strip = el("div", "whole-unit-tags");
    for (const f of wholeUnit) {
      const badge = el("span", `badge ${f.included ? "on" : "off"}`, f.category);
      badge.addEventListener("click", () => handlers.onToggleFinding(f.id));
      strip.appendChild(badge);
    }
    container.appendChild(strip);
  }
}

export function renderFindingList(
  container: HTMLElement,
  item: WorkItem,
  handlers: ViewHandlers,
): void {
  container.textContent = "";
  if (item.findings.length === 0) {
    container.appendChild(el("p", "empty", "no findings; add one or submit as-is"));
    return;
  }
  const list = el("ul", "finding-list");
  item.findings.forEach((f, idx) => {
    const row = el("li", idx === item.cursor ? "finding cursor" : "finding");
    row.dataset.findingId = String(f.id);
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = f.included;
    box.tabIndex = -1;
    box.addEventListener("change", () => handlers.onToggleFinding(f.id));
    row.appendChild(box);
    const kind = CATEGORIES[f.category].kind;
    row.appendChild(el("span", `cat cat-${kind}`, f.category));
    const where =
      f.span === null ? "whole unit" : `bytes ${f.span[0]}-${f.span[1]}`;
    row.appendChild(el("span", "where", `${where} (${f.source})`));
    list.appendChild(row);
  });
  container.appendChild(list);
}

export function renderDiControls(container: HTMLElement, item: WorkItem): void {
  container.textContent = "";
  const status =
    item.di === null
      ? "DI: not chosen (press 0 or 1)"
      : `DI: ${item.di}${item.alternates.length ? ` (alternate kept: ${item.alternates[0]})` : ""}`;
  container.appendChild(el("span", "di-status", status));
}

export function renderPreview(container: HTMLElement, item: WorkItem): void {
  const p = item.preview();
  container.textContent = "";
  container.appendChild(
    el(
      "span",
      "preview-line",
      `preview score ${p.score} level ${p.level}` +
        (item.di === null
          ? ""
          : ` toxic ${verdictOf(item.di, p.level) ? "yes" : "no"}`),
    ),
  );
  container.appendChild(
    el("span", "preview-note", " (server recomputation is authoritative)"),
  );
}

export function renderEcho(
  container: HTMLElement,
  echo: SubmitResponse | null,
  mismatch: boolean,
): void {
  container.textContent = "";
  const banner = el("div", "mismatch-banner");
  banner.id = "mismatch-banner";
  banner.style.display = mismatch ? "block" : "none";
  banner.textContent = mismatch
    ? "preview disagreed with the server; the stored values below are authoritative"
    : "";
  container.appendChild(banner);
  if (echo) {
    container.appendChild(
      el(
        "div",
        "echo-line",
        `stored: score ${echo.computed.score} level ${echo.computed.level} ` +
          `toxic ${echo.computed.toxic ? "yes" : "no"}${echo.revision ? " (revision)" : ""}`,
      ),
    );
  }
}

export function renderCodebook(container: HTMLElement): void {
  container.textContent = "";
  container.appendChild(el("h3", "", "codebook reference"));
  const table = el("table", "codebook");
  const head = el("tr");
  for (const h of ["category", "kind", "weight", "example"]) head.appendChild(el("th", "", h));
  table.appendChild(head);
  for (const name of CATEGORY_NAMES) {
    const info = CATEGORIES[name];
    const weight =
      info.kind === "AI" ? "1.0" : info.kind === "AC" ? "0.5" : "0.5 with AC, else 0";
    const row = el("tr");
    row.appendChild(el("td", "", name));
    row.appendChild(el("td", "", info.kind));
    row.appendChild(el("td", "", weight));
    row.appendChild(el("td", "", info.example));
    table.appendChild(row);
  }
  container.appendChild(table);
  const rules = el("ul", "rule-notes");
  for (const note of [
    "each category counts once per item",
    "catalyzers alone score 0 (override rule)",
    "false construct counts 0.5 only next to a catalyzer",
    "level: 0 at score 0, 1 up to score 1, 2 above 1",
    "toxic = DI 1 and level 1 or 2",
    "keys: j/k move, x toggle, 0/1 set DI, a alternate, n notes, Enter submit",
  ]) {
    rules.appendChild(el("li", "", note));
  }
  container.appendChild(rules);
}

export function renderProgress(container: HTMLElement, text: string): void {
  container.textContent = text;
}

export function renderInlineError(container: HTMLElement, message: string | null): void {
  container.textContent = message ?? "";
  container.style.display = message ? "block" : "none";
}
