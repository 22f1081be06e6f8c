import { ApiClient, ApiError } from "./api";
import { batchTable, diagnosisTable, errorBanner, highlightHtml, severityTable } from "./render";
import { ReviewStore, serializeResults } from "./review";

const api = new ApiClient(
  (window as unknown as { SEVDX_API_URL?: string }).SEVDX_API_URL ?? "http://127.0.0.1:8000",
);
const store = new ReviewStore();

const $ = <T extends HTMLElement>(id: string): T => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el as T;
};

function showError(message: string, retry: () => void): void {
  const slot = $("errors");
  slot.innerHTML = errorBanner(message);
  slot.querySelector("[data-action=retry]")?.addEventListener("click", () => {
    slot.innerHTML = "";
    retry();
  });
}

async function submitSingle(): Promise<void> {
  const input = $<HTMLTextAreaElement>("specimen-text");
  const text = input.value;
  if (!text.trim()) {
    $("single-result").innerHTML = `<p class="validation">Enter a specimen text first.</p>`;
    return;
  }
  try {
    const res = await api.predict(text);
    store.loadSingle(res);
    $("single-result").innerHTML = [
      `<h3>Severity predictions</h3>`,
      severityTable(res.severities),
      `<h3>Diagnosis predictions</h3>`,
      diagnosisTable(res.diagnoses),
      `<h3>Word importance</h3>`,
      `<p class="highlighted">${highlightHtml(res.input, res.importances)}</p>`,
    ].join("\n");
  } catch (e) {
    showError(e instanceof ApiError ? e.message : String(e), submitSingle);
  }
}

async function uploadBatch(file: File): Promise<void> {
  try {
    const records = await api.batch(await file.text());
    store.loadBatch(records);
    renderBatch();
  } catch (e) {
    showError(e instanceof ApiError ? e.message : String(e), () => uploadBatch(file));
  }
}

function renderBatch(): void {
  $("batch-result").innerHTML = batchTable(store.all());
  $("batch-result")
    .querySelectorAll<HTMLTableRowElement>("tr[data-index]")
    .forEach((tr) => {
      tr.addEventListener("click", () => selectRow(Number(tr.dataset.index)));
    });
}

function selectRow(index: number): void {
  const row = store.all()[index];
  if (!row || row.response.error) return;
  $("row-detail").innerHTML = [
    severityTable(row.response.severities ?? []),
    diagnosisTable(row.response.diagnoses ?? []),
    `<p class="highlighted">${highlightHtml(row.input, row.response.importances ?? [])}</p>`,
    `<div class="review-actions" data-index="${index}">
       <button data-action="accept">Accept</button>
       <button data-action="flag">Flag</button>
       <input id="correct-labels" placeholder="corrected labels, ;-separated">
       <button data-action="correct">Save correction</button>
     </div>`,
  ].join("\n");
  const actions = $("row-detail").querySelector(".review-actions")!;
  actions.querySelector("[data-action=accept]")?.addEventListener("click", () => {
    store.accept(index);
    renderBatch();
  });
  actions.querySelector("[data-action=flag]")?.addEventListener("click", () => {
    store.flagForReview(index);
    renderBatch();
  });
  actions.querySelector("[data-action=correct]")?.addEventListener("click", () => {
    const labels = $<HTMLInputElement>("correct-labels")
      .value.split(";")
      .map((s) => s.trim())
      .filter(Boolean);
    try {
      store.correct(index, labels);
      renderBatch();
    } catch (e) {
      showError(String(e), () => selectRow(index));
    }
  });
}

function downloadResults(): void {
  const blob = new Blob([serializeResults(store.all())], { type: "application/json" });
  const a = document.createElement("a");
  a.href = URL.createObjectURL(blob);
  a.download = "review-results.json";
  a.click();
  URL.revokeObjectURL(a.href);
}

async function init(): Promise<void> {
  try {
    const [health, ont] = await Promise.all([api.health(), api.ontology()]);
    store.setOntology(ont);
    $("status").textContent = health.model_loaded
      ? `service up · ontology ${ont.version} · ${ont.diagnoses.length} labels`
      : "service up, but no model loaded";
  } catch (e) {
    showError(e instanceof ApiError ? e.message : String(e), init);
    return;
  }
  $("submit-single").addEventListener("click", () => void submitSingle());
  $<HTMLInputElement>("batch-file").addEventListener("change", (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (file) void uploadBatch(file);
  });
  $("download").addEventListener("click", downloadResults);
}

document.addEventListener("DOMContentLoaded", () => void init());
