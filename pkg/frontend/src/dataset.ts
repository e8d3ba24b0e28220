import fs from "node:fs";
import path from "node:path";
import crypto from "node:crypto";

/** Exact CSV headers emitted by the skinlab CLI, per schema. */
export const SCHEMAS = {
  spectrum: ["N", "kappa", "h", "epsilon", "index", "re_E", "im_E"],
  bifurcation: ["epsilon", "index", "re_E", "im_E"],
  trace: ["t", "value", "log_norm_1", "log_norm_2"],
} as const;

export type SchemaName = keyof typeof SCHEMAS;

export interface Table {
  file: string;
  schema: SchemaName;
  columns: string[];
  rows: number[][];
  /** `# key: value` metadata lines (trace files only). */
  meta: Record<string, string>;
  sha256: string;
}

export interface EpEvent {
  eps_lo: number;
  eps_hi: number;
  energy: number;
}

export class DatasetError extends Error {}

export function sha256Hex(buf: Buffer | string): string {
  return crypto.createHash("sha256").update(buf).digest("hex");
}

/** Parse one CSV body against its expected schema header. */
export function parseCsv(raw: string, schema: SchemaName, file: string): Table {
  const meta: Record<string, string> = {};
  const lines = raw.split(/\r?\n/).filter((l) => l.length > 0);
  let i = 0;
  while (i < lines.length && lines[i].startsWith("#")) {
    const m = lines[i].slice(1).match(/^\s*([^:]+):\s*(.*)$/);
    if (m) meta[m[1].trim()] = m[2];
    i += 1;
  }
  if (i >= lines.length) throw new DatasetError(`${file}: no header line found`);
  const header = lines[i].split(",");
  const expected = SCHEMAS[schema];
  if (header.length !== expected.length) {
    throw new DatasetError(
      `${file}: expected ${expected.length} columns (${expected.join(",")}), got ${header.length}`,
    );
  }
  for (let k = 0; k < expected.length; k += 1) {
    if (header[k] !== expected[k]) {
      throw new DatasetError(
        `${file}: schema mismatch in column ${k + 1}: expected "${expected[k]}", got "${header[k]}"`,
      );
    }
  }
  const rows: number[][] = [];
  for (let j = i + 1; j < lines.length; j += 1) {
    const parts = lines[j].split(",");
    if (parts.length !== expected.length) {
      throw new DatasetError(`${file}: row ${j + 1} has ${parts.length} fields`);
    }
    rows.push(parts.map(Number));
  }
  return { file, schema, columns: [...expected], rows, meta, sha256: sha256Hex(raw) };
}

export const PRESETS = ["fig2", "fig2d", "fig4", "fig5", "fig6"] as const;
export type PresetName = (typeof PRESETS)[number];

/** Input files each preset expects, mirroring the CLI's naming scheme. */
export function expectedFiles(preset: PresetName): { name: string; schema: SchemaName }[] {
  switch (preset) {
    case "fig2": {
      const out: { name: string; schema: SchemaName }[] = [];
      for (const h of ["0", "0.1", "0.2"]) {
        for (const eps of ["0", "0.001", "0.01", "0.1"]) {
          out.push({ name: `spectrum_h${h}_eps${eps}.csv`, schema: "spectrum" });
        }
      }
      return out;
    }
    case "fig2d":
      return [{ name: "bifurcation.csv", schema: "bifurcation" }];
    case "fig4": {
      const out: { name: string; schema: SchemaName }[] = [];
      for (const h of ["0", "0.3"]) {
        for (const state of ["eigenstate1", "site49"]) {
          out.push({ name: `fidelity_h${h}_eps0.3_${state}.csv`, schema: "trace" });
        }
      }
      return out;
    }
    case "fig5":
    case "fig6": {
      const start = preset === "fig5" ? "site1" : "site50";
      const out: { name: string; schema: SchemaName }[] = [];
      for (const h of ["0", "0.3"]) {
        for (const defect of ["50", "1"]) {
          out.push({ name: `echo_phase_h${h}_${start}_defect${defect}.csv`, schema: "trace" });
        }
      }
      return out;
    }
  }
}

export interface PresetData {
  tables: Map<string, Table>;
  events: EpEvent[] | null;
  /** sha256 of every consumed input, keyed by file name. */
  checksums: Record<string, string>;
}

/** Load and validate everything a preset needs from one directory. */
export function loadPreset(preset: PresetName, dir: string): PresetData {
  const wanted = expectedFiles(preset);
  const names = wanted.map((w) => w.name);
  if (preset === "fig2d") names.push("ep_events.json");
  const missing = names.filter((n) => !fs.existsSync(path.join(dir, n)));
  if (missing.length > 0) {
    throw new DatasetError(`missing input files in ${dir}: ${missing.join(", ")}`);
  }
  const tables = new Map<string, Table>();
  const checksums: Record<string, string> = {};
  for (const w of wanted) {
    const raw = fs.readFileSync(path.join(dir, w.name), "utf8");
    const table = parseCsv(raw, w.schema, w.name);
    tables.set(w.name, table);
    checksums[w.name] = table.sha256;
  }
  let events: EpEvent[] | null = null;
  if (preset === "fig2d") {
    const raw = fs.readFileSync(path.join(dir, "ep_events.json"), "utf8");
    checksums["ep_events.json"] = sha256Hex(raw);
    const parsed = JSON.parse(raw) as EpEvent[];
    for (const ev of parsed) {
      if (
        typeof ev.eps_lo !== "number" ||
        typeof ev.eps_hi !== "number" ||
        typeof ev.energy !== "number"
      ) {
        throw new DatasetError("ep_events.json: entries need eps_lo, eps_hi, energy");
      }
    }
    events = parsed;
  }
  return { tables, events, checksums };
}
