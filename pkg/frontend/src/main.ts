/** Single-page design studio: scenario form, candidate table, history. */

import { ApiClient, ApiError } from "./api.js";
import { formatDeviation, formatValue, sortByAbsDeviation } from "./format.js";
import { compareScenarios, ScenarioHistory } from "./history.js";
import { applyReferencePreset } from "./preset.js";
import {
  Bounds, Candidate, DESIGN_VARS, InferRequest, InferResponse, ModelMeta,
  VAR_LABELS,
} from "./types.js";
import { emptyForm, ScenarioForm, validateScenario } from "./validation.js";

const serviceUrl =
  new URLSearchParams(location.search).get("api")
  ?? (window as { MIXDESIGN_API_URL?: string }).MIXDESIGN_API_URL
  ?? "";
const api = new ApiClient(serviceUrl);
const history = new ScenarioHistory(sessionStorage);

let form: ScenarioForm = emptyForm();
let bounds: Bounds = {};
let models: ModelMeta[] = [];
let lastResponse: InferResponse | null = null;
let sorted = false;
let inFlight = false;

function el<T extends HTMLElement>(id: string): T {
  return document.getElementById(id) as T;
}

function renderModelSelect(): void {
  const select = el<HTMLSelectElement>("model-select");
  select.innerHTML = "";
  for (const model of models) {
    const option = document.createElement("option");
    option.value = model.id;
    option.textContent = `${model.id} (${model.variant})`;
    select.appendChild(option);
  }
  if (models.length > 0 && !form.model) form.model = models[0].id;
  select.value = form.model;
}

function renderForm(errors: Record<string, string> = {}): void {
  const tbody = el<HTMLTableSectionElement>("form-rows");
  tbody.innerHTML = "";
  for (const row of form.rows) {
    const bound = bounds[row.name];
    const tr = document.createElement("tr");

    const nameCell = document.createElement("td");
    nameCell.textContent = VAR_LABELS[row.name as keyof typeof VAR_LABELS];
    tr.appendChild(nameCell);

    const toggleCell = document.createElement("td");
    const toggle = document.createElement("input");
    toggle.type = "checkbox";
    toggle.checked = row.fixed;
    toggle.addEventListener("change", () => {
      row.fixed = toggle.checked;
      renderForm();
    });
    toggleCell.appendChild(toggle);
    tr.appendChild(toggleCell);

    const valueCell = document.createElement("td");
    const input = document.createElement("input");
    input.type = "text";
    input.value = row.value;
    input.disabled = !row.fixed;
    input.addEventListener("input", () => {
      row.value = input.value;
    });
    valueCell.appendChild(input);
    if (bound) {
      const hint = document.createElement("span");
      hint.className = "hint";
      hint.textContent = `${bound.min}–${bound.max} ${bound.unit}`;
      valueCell.appendChild(hint);
    }
    if (errors[row.name]) {
      const message = document.createElement("span");
      message.className = "error";
      message.textContent = errors[row.name];
      valueCell.appendChild(message);
    }
    tr.appendChild(valueCell);
    tbody.appendChild(tr);
  }

  el<HTMLInputElement>("target-input").value = form.target;
  el<HTMLInputElement>("candidates-input").value = String(form.candidates);
  el<HTMLInputElement>("seed-input").value = String(form.seed);
  for (const field of ["target_strength", "candidates", "model"]) {
    const slot = el<HTMLSpanElement>(`error-${field}`);
    slot.textContent = errors[field] ?? "";
  }
}

function candidateTable(response: InferResponse): HTMLElement {
  const container = document.createElement("div");
  if (response.candidates.length === 0) {
    const empty = document.createElement("p");
    empty.className = "empty-state";
    empty.textContent = "No candidates returned for this scenario.";
    container.appendChild(empty);
    return container;
  }
  const fixedNames = new Set(Object.keys(
    lastRequest ? lastRequest.fixed : {}));
  const table = document.createElement("table");
  table.className = "candidates";
  const head = document.createElement("tr");
  for (const name of DESIGN_VARS) {
    const th = document.createElement("th");
    th.textContent = name;
    head.appendChild(th);
  }
  for (const label of ["predicted", "deviation"]) {
    const th = document.createElement("th");
    th.textContent = label;
    head.appendChild(th);
  }
  table.appendChild(head);

  const rows: Candidate[] = sorted
    ? sortByAbsDeviation(response.candidates)
    : response.candidates;
  for (const candidate of rows) {
    const tr = document.createElement("tr");
    for (const name of DESIGN_VARS) {
      const td = document.createElement("td");
      td.textContent = formatValue(candidate.design[name]);
      td.className = fixedNames.has(name) ? "cell-fixed" : "cell-inferred";
      tr.appendChild(td);
    }
    const predicted = document.createElement("td");
    predicted.textContent = `${formatValue(candidate.predicted_strength)} MPa`;
    tr.appendChild(predicted);
    const deviation = document.createElement("td");
    deviation.textContent = formatDeviation(candidate.deviation);
    deviation.className = candidate.deviation >= 0
      ? "deviation-over" : "deviation-under";
    tr.appendChild(deviation);
    table.appendChild(tr);
  }
  container.appendChild(table);
  return container;
}

let lastRequest: InferRequest | null = null;

function renderResults(): void {
  const panel = el<HTMLDivElement>("results");
  panel.innerHTML = "";
  if (!lastResponse) return;
  panel.appendChild(candidateTable(lastResponse));
}

function renderApiError(error: ApiError): void {
  const panel = el<HTMLDivElement>("results");
  panel.innerHTML = "";
  const box = document.createElement("pre");
  box.className = "api-error";
  box.textContent = `service error (${error.status}):\n`
    + JSON.stringify(error.detail, null, 2);
  panel.appendChild(box);
  if (error.detail && typeof error.detail === "object") {
    renderForm(error.detail as Record<string, string>);
  }
}

function renderHistory(): void {
  const list = el<HTMLUListElement>("history-list");
  list.innerHTML = "";
  for (const entry of history.list().slice().reverse()) {
    const item = document.createElement("li");
    const best = entry.response.candidates[0];
    const label = document.createElement("span");
    label.textContent = `#${entry.id} ${entry.request.model} target `
      + `${entry.request.target_strength} MPa`
      + (best ? ` (${formatDeviation(best.deviation)})` : "");
    item.appendChild(label);

    const pin = document.createElement("button");
    pin.textContent = entry.pinned ? "unpin" : "pin";
    pin.addEventListener("click", () => {
      history.togglePin(entry.id);
      renderHistory();
      renderCompare();
    });
    item.appendChild(pin);

    const resubmit = document.createElement("button");
    resubmit.textContent = "resubmit";
    resubmit.addEventListener("click", () => {
      void submitRequest(entry.request);
    });
    item.appendChild(resubmit);
    list.appendChild(item);
  }
}

function renderCompare(): void {
  const panel = el<HTMLDivElement>("compare");
  panel.innerHTML = "";
  const pinned = history.pinned();
  if (pinned.length < 2) {
    const note = document.createElement("p");
    note.className = "hint";
    note.textContent = "Pin at least two scenarios to compare them.";
    panel.appendChild(note);
    return;
  }
  const [a, b] = pinned.slice(-2);
  const diff = compareScenarios(a, b);
  const title = document.createElement("h3");
  title.textContent = `Comparing #${a.id} and #${b.id}`;
  panel.appendChild(title);
  const list = document.createElement("ul");
  const add = (text: string, highlight: boolean) => {
    const item = document.createElement("li");
    item.textContent = text;
    if (highlight) item.className = "diff-highlight";
    list.appendChild(item);
  };
  if (diff.identical) {
    add("Scenarios are identical.", false);
  }
  for (const name of diff.fixedSetDiffers) {
    add(`${name}: fixed in one scenario only`, true);
  }
  for (const name of diff.valueDiffers) {
    add(`${name}: ${a.request.fixed[name]} vs ${b.request.fixed[name]}`, true);
  }
  if (diff.targetDiffers) {
    add(`target: ${a.request.target_strength} vs `
      + `${b.request.target_strength} MPa`, true);
  }
  if (diff.modelDiffers) {
    add(`model: ${a.request.model} vs ${b.request.model}`, true);
  }
  add(`best deviation: ${formatDeviation(diff.deviations[0])} vs `
    + `${formatDeviation(diff.deviations[1])}`, false);
  panel.appendChild(list);
}

async function submitRequest(request: InferRequest): Promise<void> {
  if (inFlight) return;
  inFlight = true;
  el<HTMLButtonElement>("submit-button").disabled = true;
  try {
    const response = await api.infer(request);
    lastRequest = request;
    lastResponse = response;
    history.add(request, response);
    renderResults();
    renderHistory();
  } catch (error) {
    if (error instanceof ApiError) {
      renderApiError(error);
    } else {
      throw error;
    }
  } finally {
    inFlight = false;
    el<HTMLButtonElement>("submit-button").disabled = false;
  }
}

function onSubmit(): void {
  form.target = el<HTMLInputElement>("target-input").value;
  form.model = el<HTMLSelectElement>("model-select").value;
  form.candidates = Number(el<HTMLInputElement>("candidates-input").value);
  form.seed = Number(el<HTMLInputElement>("seed-input").value);
  const result = validateScenario(form, bounds);
  if (!result.ok || !result.request) {
    renderForm(result.errors);
    return;
  }
  renderForm();
  void submitRequest(result.request);
}

async function boot(): Promise<void> {
  try {
    models = await api.models();
    bounds = await api.bounds();
  } catch (error) {
    el<HTMLDivElement>("results").textContent =
      "Could not reach the mixdesign service. Start it with "
      + "`mixdesign serve --models <dir>` and reload.";
    return;
  }
  renderModelSelect();
  renderForm();
  renderHistory();
  renderCompare();
  el<HTMLButtonElement>("submit-button")
    .addEventListener("click", onSubmit);
  el<HTMLButtonElement>("preset-button").addEventListener("click", () => {
    form = applyReferencePreset(form);
    renderForm();
  });
  el<HTMLInputElement>("sort-toggle").addEventListener("change", (event) => {
    sorted = (event.target as HTMLInputElement).checked;
    renderResults();
  });
}

void boot();
