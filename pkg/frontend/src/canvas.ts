/**
 * DOM canvas: palette, instance nodes with ports, lifted edges, suggestion
 * chips, level switcher, compare panel, and the live script preview.
 *
 * The whole view is rebuilt from CanvasState on every change; gestures are
 * delegated from the root element to the store, so the DOM never carries state
 * of its own beyond the drag bookkeeping attributes.
 */

import { ConnectionView, Suggestion } from "./api.js";
import { CanvasState, NodeView, SessionStore } from "./state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const NODE_WIDTH = 210;
const NODE_BASE_HEIGHT = 60;

export function shortLabel(owner: string): string {
  const segments = owner.split("/");
  const last = segments[segments.length - 1] ?? owner;
  const parts = last.split(":");
  return parts[parts.length - 1] ?? last;
}

export function edgeLabel(edge: ConnectionView): string {
  return `${shortLabel(edge.source)} → ${shortLabel(edge.target)}`;
}

function instanceOf(owner: string): string {
  return owner.split("/")[0] ?? owner;
}

export class Canvas {
  constructor(
    private readonly root: HTMLElement,
    private readonly store: SessionStore,
  ) {
    this.root.classList.add("vso-app");
    this.wireGestures();
    store.subscribe(() => this.render());
  }

  render(): void {
    const state = this.store.state;
    this.root.replaceChildren(
      this.renderPalette(state),
      this.renderCanvas(state),
      this.renderSidebar(state),
    );
  }

  private renderPalette(state: CanvasState): HTMLElement {
    const palette = el("aside", "palette");
    palette.append(el("h2", "", "Catalog"));
    for (const image of state.images) {
      const item = el("div", "palette-item", image.id);
      item.draggable = true;
      item.dataset.image = image.id;
      palette.append(item);
    }
    return palette;
  }

  private renderCanvas(state: CanvasState): HTMLElement {
    const wrap = el("main", "canvas-wrap");
    const switcher = el("div", "level-switcher");
    for (const level of ["OBJECT", "MODEL", "METHOD", "IP"] as const) {
      const button = el("button", "level-btn", level);
      button.dataset.level = level;
      if (state.level === level) {
        button.classList.add("active");
      }
      switcher.append(button);
    }
    wrap.append(switcher);

    const canvas = el("div", "canvas");
    canvas.append(this.renderEdges(state));
    for (const node of state.nodes) {
      canvas.append(this.renderNode(state, node));
    }
    wrap.append(canvas);
    return wrap;
  }

  private renderEdges(state: CanvasState): SVGSVGElement {
    const byInstance = new Map(state.nodes.map((n) => [n.instanceId, n]));
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("class", "edges");
    for (const edge of state.edges) {
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("class", "edge");
      group.dataset.source = edge.source;
      group.dataset.target = edge.target;
      const a = byInstance.get(instanceOf(edge.source));
      const b = byInstance.get(instanceOf(edge.target));
      if (a && b) {
        const same = a.instanceId === b.instanceId;
        const x1 = a.position.x + NODE_WIDTH;
        const y1 = a.position.y + NODE_BASE_HEIGHT / 2;
        const x2 = same ? x1 + 36 : b.position.x;
        const y2 = same ? y1 + 26 : b.position.y + NODE_BASE_HEIGHT / 2;
        const line = document.createElementNS(SVG_NS, "path");
        line.setAttribute(
          "d",
          same
            ? `M ${x1} ${y1} C ${x1 + 48} ${y1 - 24}, ${x1 + 48} ${y2 + 24}, ${x1} ${y2}`
            : `M ${x1} ${y1} L ${x2} ${y2}`,
        );
        group.append(line);
        const text = document.createElementNS(SVG_NS, "text");
        text.setAttribute("x", String((x1 + x2) / 2));
        text.setAttribute("y", String((y1 + y2) / 2 - 6));
        text.setAttribute("class", "edge-label");
        text.textContent = edgeLabel(edge);
        group.append(text);
      }
      svg.append(group);
    }
    return svg;
  }

  private renderNode(state: CanvasState, node: NodeView): HTMLElement {
    const image = state.images.find((i) => i.id === node.imageId);
    const box = el("div", "node");
    box.dataset.instance = node.instanceId;
    box.style.left = `${node.position.x}px`;
    box.style.top = `${node.position.y}px`;
    const header = el("header", "node-title", node.instanceId);
    box.append(header);

    const models = el("section", "models");
    for (const model of image?.models ?? []) {
      const row = el("label", "model-row");
      const toggle = document.createElement("input");
      toggle.type = "checkbox";
      toggle.className = "model-toggle";
      toggle.dataset.instance = node.instanceId;
      toggle.dataset.model = model.id;
      toggle.checked = node.enabledModels.includes(model.id);
      row.append(toggle, el("span", "model-name", model.id));
      if (toggle.checked && model.methods.length > 1) {
        const pick = document.createElement("select");
        pick.className = "method-pick";
        pick.dataset.instance = node.instanceId;
        pick.dataset.model = model.id;
        for (const method of model.methods) {
          const option = document.createElement("option");
          option.value = method;
          option.textContent = method;
          option.selected = node.methodChoice[model.id] === method;
          pick.append(option);
        }
        row.append(pick);
      }
      models.append(row);
    }
    box.append(models);

    const ports = el("section", "ports");
    for (const param of node.visibleInputs) {
      ports.append(this.renderPort("in", param.address, param.varname, state));
    }
    for (const param of node.visibleOutputs) {
      ports.append(this.renderPort("out", param.address, param.varname, state));
    }
    box.append(ports);
    return box;
  }

  private renderPort(
    direction: "in" | "out",
    address: string,
    varname: string,
    state: CanvasState,
  ): HTMLElement {
    const port = el("div", `port ${direction}`, `${direction === "in" ? "▸" : "◂"} ${varname}`);
    port.dataset.direction = direction;
    port.dataset.address = address;
    if (state.pendingSource === address) {
      port.classList.add("selected");
    }
    if (state.error && state.error.endpoints.includes(address)) {
      port.classList.add("error-endpoint");
    }
    return port;
  }

  private renderSidebar(state: CanvasState): HTMLElement {
    const side = el("aside", "side");

    const suggestions = el("section", "suggestions");
    suggestions.append(el("h2", "", `Suggestions (${state.suggestions.length})`));
    for (const suggestion of state.suggestions) {
      suggestions.append(this.renderSuggestion(suggestion));
    }
    side.append(suggestions);

    const compare = el("section", "compare");
    const compareHead = el("h2", "", "Configurations");
    const runTotal = el("button", "compare-run", "compare by total");
    runTotal.dataset.criterion = "total";
    const runCp = el("button", "compare-run", "compare by critical path");
    runCp.dataset.criterion = "critical-path";
    compare.append(compareHead, runTotal, runCp);
    if (state.reports.length > 0) {
      const table = el("table", "report-table");
      for (const report of state.reports) {
        const row = el("tr", "report-row");
        row.dataset.key = report.key;
        const value =
          state.compareCriterion === "total" ? report.total_time : report.critical_path_time;
        row.append(
          el("td", "report-key", report.key),
          el("td", "report-value", value.toFixed(2)),
          el("td", "report-packages", String(report.package_count)),
        );
        table.append(row);
      }
      compare.append(table);
    }
    side.append(compare);

    const script = el("section", "script");
    const generate = el("button", "generate", "generate");
    script.append(el("h2", "", "Workflow script"), generate);
    const pre = el("pre", "script-text");
    pre.textContent = state.scriptText ?? "";
    script.append(pre);
    if (state.scriptError) {
      script.append(el("div", "script-error", state.scriptError));
    }
    side.append(script);

    if (state.error) {
      const error = el("div", "error", `${state.error.code}: ${state.error.message}`);
      error.dataset.code = state.error.code;
      side.append(error);
    }
    const revision = el("div", "revision", `revision ${state.revision}`);
    side.append(revision);
    return side;
  }

  private renderSuggestion(suggestion: Suggestion): HTMLElement {
    const chip = el("div", "suggestion");
    chip.dataset.source = suggestion.source;
    chip.dataset.target = suggestion.target;
    chip.append(
      el(
        "span",
        "suggestion-text",
        `${shortLabel(suggestion.source)}:${suggestion.source_varname} → ` +
          `${shortLabel(suggestion.target)}:${suggestion.target_varname}`,
      ),
    );
    chip.append(el("button", "accept", "accept"));
    chip.append(el("button", "reject", "reject"));
    return chip;
  }

  /** All gestures are delegated so rebuilt DOM keeps working. */
  private wireGestures(): void {
    this.root.addEventListener("dragstart", (event) => {
      const item = closest(event.target, ".palette-item");
      if (item?.dataset.image) {
        this.root.dataset.dragImage = item.dataset.image;
        const transfer = (event as DragEvent).dataTransfer;
        transfer?.setData("text/plain", item.dataset.image);
      }
    });

    this.root.addEventListener("dragover", (event) => {
      if (closest(event.target, ".canvas")) {
        event.preventDefault();
      }
    });

    this.root.addEventListener("drop", (event) => {
      if (!closest(event.target, ".canvas")) {
        return;
      }
      event.preventDefault();
      const transfer = (event as DragEvent).dataTransfer;
      const imageId = transfer?.getData("text/plain") || this.root.dataset.dragImage;
      delete this.root.dataset.dragImage;
      if (!imageId) {
        return;
      }
      const mouse = event as MouseEvent;
      const position =
        typeof mouse.clientX === "number" && mouse.clientX > 0
          ? { x: mouse.clientX, y: mouse.clientY }
          : undefined;
      void this.store.dropImage(imageId, position);
    });

    this.root.addEventListener("click", (event) => {
      const levelButton = closest(event.target, ".level-btn");
      if (levelButton?.dataset.level) {
        void this.store.setLevel(levelButton.dataset.level as CanvasState["level"]);
        return;
      }
      const accept = closest(event.target, ".accept");
      if (accept) {
        const chip = closest(accept, ".suggestion");
        const suggestion = this.store.state.suggestions.find(
          (s) => s.source === chip?.dataset.source && s.target === chip?.dataset.target,
        );
        if (suggestion) {
          void this.store.acceptSuggestion(suggestion);
        }
        return;
      }
      const reject = closest(event.target, ".reject");
      if (reject) {
        const chip = closest(reject, ".suggestion");
        const suggestion = this.store.state.suggestions.find(
          (s) => s.source === chip?.dataset.source && s.target === chip?.dataset.target,
        );
        if (suggestion) {
          this.store.rejectSuggestion(suggestion);
        }
        return;
      }
      const port = closest(event.target, ".port");
      if (port?.dataset.address && port.dataset.direction) {
        void this.store.pickPort(port.dataset.direction as "in" | "out", port.dataset.address);
        return;
      }
      const compareRun = closest(event.target, ".compare-run");
      if (compareRun?.dataset.criterion) {
        void this.store.runCompare(compareRun.dataset.criterion as "total" | "critical-path");
        return;
      }
      if (closest(event.target, ".generate")) {
        void this.store.requestScript();
      }
    });

    this.root.addEventListener("change", (event) => {
      const toggle = closest(event.target, ".model-toggle") as HTMLInputElement | null;
      if (toggle?.dataset.instance && toggle.dataset.model) {
        void this.store.toggleModel(toggle.dataset.instance, toggle.dataset.model, toggle.checked);
        return;
      }
      const pick = closest(event.target, ".method-pick") as HTMLSelectElement | null;
      if (pick?.dataset.instance && pick.dataset.model) {
        void this.store.chooseMethod(pick.dataset.instance, pick.dataset.model, pick.value);
      }
    });

    // node repositioning: plain mouse drag, client-only state
    let dragging: { instanceId: string; dx: number; dy: number } | null = null;
    this.root.addEventListener("mousedown", (event) => {
      const title = closest(event.target, ".node-title");
      const node = closest(event.target, ".node");
      if (title && node?.dataset.instance) {
        const mouse = event as MouseEvent;
        const view = this.store.state.nodes.find((n) => n.instanceId === node.dataset.instance);
        if (view) {
          dragging = {
            instanceId: view.instanceId,
            dx: mouse.clientX - view.position.x,
            dy: mouse.clientY - view.position.y,
          };
        }
      }
    });
    this.root.addEventListener("mousemove", (event) => {
      if (dragging) {
        const mouse = event as MouseEvent;
        this.store.moveNode(dragging.instanceId, {
          x: mouse.clientX - dragging.dx,
          y: mouse.clientY - dragging.dy,
        });
      }
    });
    this.root.addEventListener("mouseup", () => {
      dragging = null;
    });
  }
}

function el(tag: string, className: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function closest(target: EventTarget | null, selector: string): HTMLElement | null {
  if (!(target instanceof Element)) {
    return null;
  }
  return target.closest(selector);
}
