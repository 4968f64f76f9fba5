/**
 * Browser bootstrap: wires the DOM to the session controller.
 *
 * The page is a thin shell: a create-session form, the six modifier buttons,
 * undo/confirm/abandon, a proportional interval bar with the variant marker,
 * a numeric readout (the pluggable preview slot), the history timeline and a
 * connection banner.  All displayed values come from the controller's view,
 * which mirrors the server's responses verbatim.
 */

import { HttpTransport, SemdiffClient, PowerWord, DirectionWord } from "./api.js";
import { SessionController, SessionView } from "./controller.js";
import { barGeometry, statusLabel, variantLabel } from "./render.js";

const POWERS: PowerWord[] = ["slightly", "moderately", "significantly"];
const DIRECTIONS: DirectionWord[] = ["less", "greater"];

/** Preview renderers map the current variant to some visual; the default is a bar. */
export type PreviewRenderer = (view: SessionView, mount: HTMLElement) => void;

const defaultPreview: PreviewRenderer = (view, mount) => {
  const geometry = barGeometry(view);
  mount.innerHTML = "";
  const readout = document.createElement("div");
  readout.className = "variant-readout";
  readout.textContent = variantLabel(view);
  mount.appendChild(readout);
  if (geometry) {
    const bar = document.createElement("div");
    bar.className = "preview-bar";
    const fill = document.createElement("div");
    fill.className = "preview-fill";
    fill.style.width = `${geometry.markerPct}%`;
    bar.appendChild(fill);
    mount.appendChild(bar);
  }
};

export function mountApp(root: HTMLElement, baseUrl: string, preview: PreviewRenderer = defaultPreview): SessionController {
  const controller = new SessionController(new SemdiffClient(new HttpTransport(baseUrl)));

  root.innerHTML = `
    <div class="banner" id="banner" hidden></div>
    <form id="create-form">
      <label>base <input name="base" type="number" step="any" value="0"></label>
      <label>range <input name="range" type="number" step="any" value="1"></label>
      <label>step <input name="step" type="number" step="any" value="0.05"></label>
      <label>algorithm
        <select name="algorithm">
          <option value="tolerant" selected>tolerant</option>
          <option value="simple">simple</option>
        </select>
      </label>
      <label>w_slightly <input name="slightly" type="number" step="any" value="0.25"></label>
      <label>w_moderately <input name="moderately" type="number" step="any" value="0.35"></label>
      <label>w_significantly <input name="significantly" type="number" step="any" value="0.45"></label>
      <button type="submit">start session</button>
    </form>
    <div id="preview" class="preview"></div>
    <div class="bar" id="bar">
      <div class="bar-interval" id="bar-interval"></div>
      <div class="bar-marker" id="bar-marker"></div>
    </div>
    <div class="status" id="status"></div>
    <div class="modifiers" id="modifiers"></div>
    <div class="lifecycle">
      <button id="undo">undo</button>
      <button id="confirm">confirm</button>
      <button id="abandon">abandon</button>
    </div>
    <div class="toast" id="toast" hidden></div>
    <ol class="history" id="history"></ol>
  `;

  const el = <T extends HTMLElement>(id: string) => root.querySelector<T>(`#${id}`)!;
  const modifierBox = el<HTMLDivElement>("modifiers");
  const buttons: HTMLButtonElement[] = [];
  for (const power of POWERS) {
    for (const direction of DIRECTIONS) {
      const button = document.createElement("button");
      button.textContent = `${power} ${direction}`;
      button.dataset.power = power;
      button.dataset.direction = direction;
      button.addEventListener("click", () => void controller.press(power, direction));
      modifierBox.appendChild(button);
      buttons.push(button);
    }
  }

  el<HTMLFormElement>("create-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(event.target as HTMLFormElement);
    const num = (k: string) => Number(data.get(k));
    void controller
      .create({
        base: num("base"),
        range: num("range"),
        step: num("step"),
        algorithm: (data.get("algorithm") as "simple" | "tolerant") ?? "tolerant",
        weights: {
          slightly: num("slightly"),
          moderately: num("moderately"),
          significantly: num("significantly"),
        },
      })
      .then((ok) => {
        if (ok) void controller.startWatching();
      });
  });
  el<HTMLButtonElement>("undo").addEventListener("click", () => void controller.undo());
  el<HTMLButtonElement>("confirm").addEventListener("click", () => void controller.confirm());
  el<HTMLButtonElement>("abandon").addEventListener("click", () => void controller.abandon());

  controller.onChange((view) => {
    const banner = el<HTMLDivElement>("banner");
    banner.hidden = view.connection !== "lost";
    banner.textContent = "connection lost - showing last known state";

    const geometry = barGeometry(view);
    const intervalEl = el<HTMLDivElement>("bar-interval");
    const markerEl = el<HTMLDivElement>("bar-marker");
    if (geometry) {
      intervalEl.style.left = `${geometry.intervalLeftPct}%`;
      intervalEl.style.width = `${geometry.intervalWidthPct}%`;
      markerEl.style.left = `${geometry.markerPct}%`;
    }
    el<HTMLDivElement>("status").textContent = statusLabel(view);
    preview(view, el<HTMLDivElement>("preview"));

    for (const button of buttons) {
      button.disabled = !controller.inputEnabled;
    }
    el<HTMLButtonElement>("undo").disabled = !controller.undoEnabled;
    el<HTMLButtonElement>("confirm").disabled = !controller.confirmEnabled;
    el<HTMLButtonElement>("abandon").disabled = !controller.confirmEnabled;

    const toast = el<HTMLDivElement>("toast");
    toast.hidden = view.error === null;
    toast.textContent = view.error ? `${view.error.code}: ${view.error.message}` : "";

    const history = el<HTMLOListElement>("history");
    history.innerHTML = "";
    for (const entry of view.history) {
      const item = document.createElement("li");
      item.textContent =
        `#${entry.step_index} ${entry.power} ${entry.direction} -> ` +
        `${entry.variant} [${entry.interval[0].toFixed(4)}, ${entry.interval[1].toFixed(4)}]`;
      history.appendChild(item);
    }
  });

  return controller;
}

declare global {
  interface Window {
    semdiffMount?: typeof mountApp;
  }
}

if (typeof window !== "undefined") {
  window.semdiffMount = mountApp;
}
