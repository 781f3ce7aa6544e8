/** Spawns the real annotation service for the round-trip test.
 *
 * The machine evaluations come from the scripted judge over the corpus
 * fixture shared with the backend test suite, so the UI is exercised
 * against exactly the sessions the service builds in production code
 * paths. Requires the `ldpeval` console script on PATH (or LDPEVAL_BIN).
 */

import { execFile, spawn, type ChildProcess } from "node:child_process";
import { once } from "node:events";
import { promises as fs } from "node:fs";
import http from "node:http";
import os from "node:os";
import path from "node:path";
import { promisify } from "node:util";

import type { FetchLike } from "../src/api.js";

const execFileP = promisify(execFile);

export const BIN = process.env.LDPEVAL_BIN ?? "ldpeval";
const CLOCK = "2024-01-02T03:04:05+00:00";

function fixtureDir(): string {
  const root = process.env.REPO_ROOT;
  if (root === undefined) {
    throw new Error("REPO_ROOT is unset; run through vitest.config.ts");
  }
  return path.join(root, "tests", "fixtures", "hosting");
}

export interface WireRecord {
  method: string;
  path: string;
  status: number;
  bodyText: string;
}

/** fetch built on node:http, immune to DOM-environment replacements;
 * optionally records every raw response body for exact-JSON assertions. */
export function httpFetch(log?: WireRecord[]): FetchLike {
  return (url, init) =>
    new Promise((resolve, reject) => {
      const method = init?.method ?? "GET";
      const request = http.request(
        url,
        { method, headers: (init?.headers as Record<string, string>) ?? {} },
        (response) => {
          const chunks: Buffer[] = [];
          response.on("data", (chunk: Buffer) => chunks.push(chunk));
          response.on("end", () => {
            const bodyText = Buffer.concat(chunks).toString("utf-8");
            const status = response.statusCode ?? 500;
            log?.push({
              method,
              path: new URL(url).pathname,
              status,
              bodyText,
            });
            resolve(
              new Response(bodyText, {
                status,
                headers: { "content-type": "application/json" },
              }),
            );
          });
        },
      );
      request.on("error", reject);
      if (typeof init?.body === "string") {
        request.write(init.body);
      }
      request.end();
    });
}

export interface LiveService {
  baseUrl: string;
  tokens: { ui: string; api: string };
  stop(): Promise<void>;
}

export async function startService(): Promise<LiveService> {
  const tmp = await fs.mkdtemp(path.join(os.tmpdir(), "annotation-ui-"));
  const cfg = path.join(tmp, "settings.cfg");
  await fs.writeFile(
    cfg,
    [
      `runs_dir=${path.join(tmp, "runs")}`,
      "service_tokens=ui-token=ui-reviewer,api-token=api-reviewer",
      "",
    ].join("\n"),
  );

  // Machine evaluations for the fixture corpus, via the scripted judge.
  const corpus = fixtureDir();
  const judge = await execFileP(BIN, [
    "--config", cfg, "--mock", "--fixed-clock", CLOCK,
    "judge", "--corpus", corpus,
  ]);
  const evaluations = path.join(runDirFrom(judge.stdout), "evaluations.jsonl");

  const port = Number(process.env.LDPEVAL_TEST_PORT ?? "8693");
  const child = spawn(
    BIN,
    [
      "--config", cfg, "--mock",
      "serve", "--corpus", corpus, "--evaluations", evaluations,
      "--host", "127.0.0.1", "--port", String(port),
    ],
    { stdio: ["ignore", "ignore", "pipe"] },
  );
  let stderr = "";
  child.stderr?.on("data", (chunk) => {
    stderr += String(chunk);
  });

  const baseUrl = `http://127.0.0.1:${port}`;
  await waitHealthy(baseUrl, child, () => stderr);
  return {
    baseUrl,
    tokens: { ui: "ui-token", api: "api-token" },
    stop: () => stopChild(child),
  };
}

function runDirFrom(stdout: string): string {
  // summary lines end in "... -> {run_dir}"
  const match = [...stdout.matchAll(/-> (.+)$/gm)].at(-1);
  if (match?.[1] === undefined) {
    throw new Error(`no run directory in judge output:\n${stdout}`);
  }
  return match[1].trim();
}

async function waitHealthy(
  baseUrl: string,
  child: ChildProcess,
  stderr: () => string,
): Promise<void> {
  const fetchImpl = httpFetch();
  const deadline = Date.now() + 30_000;
  while (Date.now() < deadline) {
    if (child.exitCode !== null) {
      throw new Error(`service exited with ${child.exitCode}:\n${stderr()}`);
    }
    try {
      const response = await fetchImpl(`${baseUrl}/healthz`);
      if (response.ok) return;
    } catch {
      // not listening yet
    }
    await sleep(150);
  }
  throw new Error(`service not healthy within 30s:\n${stderr()}`);
}

async function stopChild(child: ChildProcess): Promise<void> {
  if (child.exitCode !== null) return;
  child.kill("SIGTERM");
  const exited = await Promise.race([
    once(child, "exit").then(() => true),
    sleep(5_000).then(() => false),
  ]);
  if (!exited) {
    child.kill("SIGKILL");
    await once(child, "exit");
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
