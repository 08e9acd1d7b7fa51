/**
 * Agreement dashboard: pick a pair and a label kind, see Agr.%, CK, AC1
 * and the confusion matrix. Values render verbatim from the API; this
 * view never recomputes statistics.
 */

import { ApiClient, type AgreementResponse } from "./api.js";

export interface DashboardElements {
  pairA: HTMLInputElement;
  pairB: HTMLInputElement;
  kind: HTMLSelectElement;
  load: HTMLButtonElement;
  output: HTMLElement;
}

function fmt(value: number | null | undefined): string {
  if (value === null || value === undefined) return "undefined";
  return value.toFixed(4);
}

export class Dashboard {
  constructor(
    private readonly api: ApiClient,
    private readonly elements: DashboardElements,
  ) {}

  start(): void {
    this.elements.load.addEventListener("click", () => void this.load());
  }

  async load(): Promise<void> {
    const pair: [string, string] = [
      this.elements.pairA.value.trim(),
      this.elements.pairB.value.trim(),
    ];
    let data: AgreementResponse;
    try {
      data = await this.api.agreement(pair, this.elements.kind.value);
    } catch (err) {
      this.elements.output.textContent = `request failed: ${String(err)}`;
      return;
    }
    this.render(data);
  }

  render(data: AgreementResponse): void {
    const out = this.elements.output;
    out.textContent = "";
    if (data.insufficient_data) {
      const p = document.createElement("p");
      p.className = "empty-state";
      p.textContent = `not enough data: ${data.reason ?? "no aligned records"}`;
      out.appendChild(p);
      return;
    }
    const stats = document.createElement("table");
    stats.className = "stats";
    stats.innerHTML =
      "<tr><th>Pair</th><th>n</th><th>Agr.%</th><th>CK</th><th>AC1</th></tr>";
    const row = document.createElement("tr");
    row.innerHTML =
      `<td>${data.pair?.join(" & ")}</td><td>${data.n}</td>` +
      `<td>${(data.agreement_pct ?? 0).toFixed(2)}</td>` +
      `<td id="stat-ck">${fmt(data.cohen_kappa)}</td>` +
      `<td id="stat-ac1">${fmt(data.gwet_ac1)}</td>`;
    stats.appendChild(row);
    out.appendChild(stats);

    if (data.matrix) {
      const grid = document.createElement("table");
      grid.className = "confusion";
      const head = document.createElement("tr");
      head.innerHTML =
        "<th>a\\b</th>" + data.matrix.categories.map((c) => `<th>${c}</th>`).join("");
      grid.appendChild(head);
      data.matrix.counts.forEach((counts, i) => {
        const tr = document.createElement("tr");
        tr.innerHTML =
          `<th>${data.matrix!.categories[i]}</th>` +
          counts.map((c, j) => `<td class="${i === j ? "diag" : ""}">${c}</td>`).join("");
        grid.appendChild(tr);
      });
      out.appendChild(grid);
    }
  }
}
