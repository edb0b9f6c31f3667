/** CLI: render figure analogues from a results CSV.
 *
 * Usage: node dist/main.js <results.csv> <output-dir>
 */

import { renderSweepFigures } from "./render.js";

const [, , csvPath, outDir] = process.argv;
if (!csvPath || !outDir) {
  console.error("usage: main.js <results.csv> <output-dir>");
  process.exit(2);
}
try {
  const outcome = renderSweepFigures(csvPath, outDir);
  if (outcome.warning) {
    console.warn(`warning: ${outcome.warning}`);
  }
  for (const f of outcome.files) {
    console.log(`wrote ${f}`);
  }
} catch (err) {
  console.error(String(err));
  process.exit(1);
}
