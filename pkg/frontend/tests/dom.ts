import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

/** Load the real dashboard markup into the test DOM (scripts do not run). */
export function mountDashboard(): void {
  const here = dirname(fileURLToPath(import.meta.url));
  const html = readFileSync(join(here, "..", "index.html"), "utf-8");
  const body = html.match(/<body>([\s\S]*)<\/body>/);
  if (!body) {
    throw new Error("index.html has no <body>");
  }
  document.body.innerHTML = body[1];
}

export async function waitFor(
  predicate: () => boolean,
  timeoutMs = 10_000,
  label = "condition",
): Promise<void> {
  const start = Date.now();
  while (!predicate()) {
    if (Date.now() - start > timeoutMs) {
      throw new Error(`timed out waiting for ${label}`);
    }
    await new Promise((resolve) => setTimeout(resolve, 25));
  }
}
