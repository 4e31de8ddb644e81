#!/usr/bin/env node
/** plots <family-id> <csv> <out-image>: sweep CSV -> SVG figure. */

import { readFileSync, writeFileSync } from "fs";
import { pathToFileURL } from "url";
import { CsvError, parseSweepCsv } from "./csv.js";
import { FAMILIES, familyById } from "./families.js";
import { RenderError, renderFamily } from "./render.js";

export function main(argv: string[]): number {
  if (argv.length !== 3) {
    process.stderr.write(
      "usage: plots <family-id> <csv> <out-image>\n" +
        `families: ${Object.keys(FAMILIES).sort().join(", ")}\n`,
    );
    return 2;
  }
  const [familyId, csvPath, outPath] = argv;
  try {
    const family = familyById(familyId);
    const rows = parseSweepCsv(readFileSync(csvPath, "utf8"));
    writeFileSync(outPath, renderFamily(family, rows));
    return 0;
  } catch (err) {
    if (err instanceof CsvError || err instanceof RenderError || err instanceof Error) {
      process.stderr.write(`error: ${err.message}\n`);
      return 1;
    }
    throw err;
  }
}

if (process.argv[1] && import.meta.url === pathToFileURL(process.argv[1]).href) {
  process.exit(main(process.argv.slice(2)));
}
