/** Entry point: wire the annotation app or the dashboard by route. */

import { ApiClient } from "./api.js";
import { AnnotationApp, type AppElements } from "./app.js";
import { Dashboard } from "./dashboard.js";

function param(name: string): string | null {
  return new URLSearchParams(window.location.search).get(name);
}

function need(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

export function boot(): void {
  const annotator = param("annotator") ?? localStorage.getItem("prescribe-annotator") ?? "";
  const token = param("token") ?? localStorage.getItem("prescribe-token");
  if (param("annotator")) localStorage.setItem("prescribe-annotator", annotator);
  if (param("token")) localStorage.setItem("prescribe-token", token ?? "");
  const api = new ApiClient("", token);

  if (window.location.hash === "#dashboard") {
    document.body.classList.add("route-dashboard");
    const dashboard = new Dashboard(api, {
      pairA: need("pair-a") as HTMLInputElement,
      pairB: need("pair-b") as HTMLInputElement,
      kind: need("kind") as HTMLSelectElement,
      load: need("load") as HTMLButtonElement,
      output: need("dashboard-output"),
    });
    dashboard.start();
    return;
  }

  document.body.classList.add("route-annotate");
  if (!annotator) {
    need("progress").textContent =
      "no annotator id; open with ?annotator=YOURID (and ?token=... when auth is on)";
    return;
  }
  const elements: AppElements = {
    text: need("text-pane"),
    findings: need("finding-pane"),
    di: need("di-pane"),
    preview: need("preview-pane"),
    echo: need("echo-pane"),
    codebook: need("codebook-pane"),
    progress: need("progress"),
    error: need("inline-error"),
    notes: need("notes") as HTMLTextAreaElement,
    submit: need("submit") as HTMLButtonElement,
  };
  const app = new AnnotationApp(api, annotator, elements, window.localStorage);
  void app.start();
}

window.addEventListener("hashchange", () => window.location.reload());
boot();
