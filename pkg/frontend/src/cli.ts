import { pathToFileURL } from "node:url";

import { PRESETS, DatasetError, PresetName } from "./dataset.js";
import { renderPreset } from "./render.js";

const USAGE = `usage: render <preset> --in DIR --out FILE
presets: ${PRESETS.join(", ")}`;

export function main(argv: string[]): number {
  if (argv[0] !== "render" || argv.length < 2) {
    console.error(USAGE);
    return 2;
  }
  const preset = argv[1];
  let inDir = "";
  let outFile = "";
  for (let i = 2; i < argv.length; i += 1) {
    if (argv[i] === "--in") inDir = argv[++i] ?? "";
    else if (argv[i] === "--out") outFile = argv[++i] ?? "";
    else {
      console.error(`unknown argument: ${argv[i]}\n${USAGE}`);
      return 2;
    }
  }
  if (!inDir || !outFile) {
    console.error(USAGE);
    return 2;
  }
  if (!(PRESETS as readonly string[]).includes(preset)) {
    console.error(`unknown preset "${preset}"; known: ${PRESETS.join(", ")}`);
    return 1;
  }
  try {
    const result = renderPreset(preset as PresetName, inDir, outFile);
    console.log(result.outFile);
    return 0;
  } catch (err) {
    if (err instanceof DatasetError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
