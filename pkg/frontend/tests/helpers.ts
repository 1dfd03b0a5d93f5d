// Shared scaffolding for the end-to-end tests: a disposable image/manifest
// fixture on disk and a real `python3 -m dimeval serve` child process.

import { execFileSync, spawn, type ChildProcess } from "node:child_process";
import { existsSync, mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

export const METHODS = ["input", "gamma", "zerodce"] as const;
export const IMAGES = ["000.png", "001.png", "002.png", "003.png"] as const;
export const ATTRIBUTES = ["overall", "illumination", "noise_artifacts", "blurriness", "color"] as const;

const FIXTURE_SCRIPT = `
import json, sys
from pathlib import Path
import numpy as np
import dimeval

root = Path(sys.argv[1])
methods = ("input", "gamma", "zerodce")
images = ("000.png", "001.png", "002.png", "003.png")
rng = np.random.default_rng(20260815)
for mi, method in enumerate(methods):
    (root / method).mkdir(parents=True)
    for image_id in images:
        base = np.full((24, 24, 3), 0.2 + 0.3 * mi)
        dimeval.write_image(root / method / image_id, np.clip(base + 0.05 * rng.random((24, 24, 3)), 0, 1))
manifest = {"baseline": "input", "methods": {m: m for m in methods}, "images": list(images)}
(root / "manifest.json").write_text(json.dumps(manifest))
`;

export interface TestServer {
  base: string;
  logPath: string;
  fixtureDir: string;
  stop: () => void;
}

export function makeFixture(): string {
  const dir = mkdtempSync(join(tmpdir(), "bench-ui-e2e-"));
  execFileSync("python3", ["-c", FIXTURE_SCRIPT, dir]);
  return dir;
}

export function buildIfNeeded(): string {
  const frontendRoot = process.cwd(); // vitest runs from the package root
  if (!existsSync(join(frontendRoot, "dist", "index.html"))) {
    execFileSync("npm", ["run", "build"], { cwd: frontendRoot, stdio: "ignore" });
  }
  return join(frontendRoot, "dist");
}

export async function startServer(
  port: number,
  seed: number,
  opts: { staticDir?: string } = {},
): Promise<TestServer> {
  const fixtureDir = makeFixture();
  const logPath = join(fixtureDir, "votes.jsonl");
  const argv = [
    "-m",
    "dimeval",
    "serve",
    "--manifest",
    join(fixtureDir, "manifest.json"),
    "--votes-log",
    logPath,
    "--port",
    String(port),
    "--seed",
    String(seed),
  ];
  if (opts.staticDir) argv.push("--static-dir", opts.staticDir);
  const proc: ChildProcess = spawn("python3", argv, { stdio: ["ignore", "ignore", "pipe"] });
  let stderr = "";
  proc.stderr?.on("data", (chunk: Buffer) => {
    stderr += chunk.toString();
  });

  const base = `http://127.0.0.1:${port}`;
  for (let attempt = 0; ; attempt++) {
    if (proc.exitCode !== null) throw new Error(`server exited early:\n${stderr}`);
    try {
      const res = await fetch(`${base}/api/health`);
      if (res.ok) break;
    } catch {
      // not listening yet
    }
    if (attempt >= 100) throw new Error(`server never became healthy:\n${stderr}`);
    await new Promise((resolve) => setTimeout(resolve, 200));
  }

  return {
    base,
    logPath,
    fixtureDir,
    stop: () => {
      proc.kill("SIGTERM");
      rmSync(fixtureDir, { recursive: true, force: true });
    },
  };
}

export function replayViaCli(logPath: string, attribute: string): Array<{ method: string; rating: number; votes: number }> {
  const out = execFileSync(
    "python3",
    ["-m", "dimeval", "elo", "--votes", logPath, "--attribute", attribute, "--json"],
    { encoding: "utf8" },
  );
  const doc = JSON.parse(out) as { leaderboards: Record<string, Array<{ method: string; rating: number; votes: number }>> };
  return doc.leaderboards[attribute];
}
