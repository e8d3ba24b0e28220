import fs from "node:fs";
import path from "node:path";

import {
  EpEvent,
  PresetData,
  PresetName,
  Table,
  expectedFiles,
  loadPreset,
} from "./dataset.js";
import { PALETTE, Range, Svg, padRange } from "./svg.js";

export interface RenderResult {
  outFile: string;
  checksums: Record<string, string>;
}

/**
 * Render one preset's datasets from `inDir` into an SVG at `outFile`.
 * Never recomputes physics: everything drawn comes from the CSV rows, and
 * the sha256 of every consumed input is embedded in the image metadata.
 */
export function renderPreset(preset: PresetName, inDir: string, outFile: string): RenderResult {
  const data = loadPreset(preset, inDir);
  let svg: Svg;
  switch (preset) {
    case "fig2":
      svg = renderSpectrumPanels(data);
      break;
    case "fig2d":
      svg = renderBifurcation(data);
      break;
    case "fig4":
      svg = renderTraceGrid(data, "fig4", "fidelity F(t)");
      break;
    case "fig5":
      svg = renderTraceGrid(data, "fig5", "echo M(t)");
      break;
    case "fig6":
      svg = renderTraceGrid(data, "fig6", "echo M(t)");
      break;
  }
  const body = svg.render({ preset, inputs: data.checksums });
  fs.mkdirSync(path.dirname(path.resolve(outFile)), { recursive: true });
  fs.writeFileSync(outFile, body);
  return { outFile, checksums: data.checksums };
}

/** fig2: one complex-plane panel per gauge value, one color per coupling. */
function renderSpectrumPanels(data: PresetData): Svg {
  const hValues = ["0", "0.1", "0.2"];
  const epsValues = ["0", "0.001", "0.01", "0.1"];
  const svg = new Svg(960, 360);
  svg.text(12, 20, "ring spectra in the complex plane", 13);
  hValues.forEach((h, i) => {
    const tables = epsValues.map(
      (eps) => data.tables.get(`spectrum_h${h}_eps${eps}.csv`) as Table,
    );
    const re = tables.flatMap((t) => t.rows.map((row) => row[5]));
    const im = tables.flatMap((t) => t.rows.map((row) => row[6]));
    const box = { x: 60 + i * 300, y: 50, w: 240, h: 240 };
    const { sx, sy } = svg.axes(box, padRange(re), padRange(im), "Re E / kappa", "Im E");
    svg.text(box.x + box.w / 2, box.y - 8, `h = ${h}`, 12, "middle");
    tables.forEach((t, k) => {
      for (const row of t.rows) svg.circle(sx(row[5]), sy(row[6]), 2.2, PALETTE[k]);
    });
  });
  epsValues.forEach((eps, k) => {
    svg.circle(700 + 64 * k, 330, 3, PALETTE[k]);
    svg.text(708 + 64 * k, 334, `eps=${eps}`, 10);
  });
  return svg;
}

/** fig2d: eigenvalue loci along the coupling sweep with EP markers. */
function renderBifurcation(data: PresetData): Svg {
  const table = data.tables.get("bifurcation.csv") as Table;
  const events = data.events ?? [];
  const svg = new Svg(720, 420);
  svg.text(12, 20, "eigenvalue loci across the reality threshold", 13);
  const re = table.rows.map((row) => row[2]);
  const im = table.rows.map((row) => row[3]);
  const epsAll = table.rows.map((row) => row[0]);
  const epsRange = padRange(epsAll);
  const box = { x: 70, y: 50, w: 560, h: 300 };
  const { sx, sy } = svg.axes(box, padRange(re), padRange(im), "Re E / kappa", "Im E");
  for (const row of table.rows) {
    const frac = (row[0] - epsRange.min) / (epsRange.max - epsRange.min);
    const shade = Math.round(40 + 170 * (1 - frac));
    svg.circle(sx(row[2]), sy(row[3]), 1.6, `rgb(${shade},${shade},255)`);
  }
  events.forEach((ev: EpEvent, k: number) => {
    svg.cross(sx(ev.energy), sy(0), 6, "#d62728");
    svg.text(
      sx(ev.energy),
      sy(0) - 10,
      `EP ${k + 1}: eps in [${ev.eps_lo.toPrecision(4)}, ${ev.eps_hi.toPrecision(4)}]`,
      9,
      "middle",
      "#d62728",
    );
  });
  svg.text(70, 390, "darker = weaker coupling; crosses mark real-pair coalescences", 10);
  return svg;
}

/** fig4/fig5/fig6: 2x2 grid of time traces (panel rows from file naming). */
function renderTraceGrid(data: PresetData, preset: PresetName, yLabel: string): Svg {
  const files = expectedFiles(preset).map((w) => w.name);
  const svg = new Svg(900, 620);
  const title =
    preset === "fig4"
      ? "fidelity decay under the edge coupling"
      : "Loschmidt echo under a defective phase-slip reversal";
  svg.text(12, 20, title, 13);
  files.forEach((name, i) => {
    const table = data.tables.get(name) as Table;
    const t = table.rows.map((row) => row[0]);
    const v = table.rows.map((row) => row[1]);
    const col = i % 2;
    const row = Math.floor(i / 2);
    const box = { x: 70 + col * 430, y: 60 + row * 280, w: 350, h: 210 };
    const yRange: Range = { min: -0.02, max: 1.02 };
    const { sx, sy } = svg.axes(box, padRange(t), yRange, "t * kappa", yLabel);
    svg.polyline(
      t.map((ti, k) => [sx(ti), sy(v[k])] as [number, number]),
      PALETTE[row],
    );
    svg.text(box.x + box.w / 2, box.y - 8, panelTitle(name), 11, "middle");
  });
  return svg;
}

function panelTitle(file: string): string {
  return file
    .replace(/\.csv$/, "")
    .replace(/^(fidelity|echo_phase)_/, "")
    .replace(/_/g, "  ");
}
