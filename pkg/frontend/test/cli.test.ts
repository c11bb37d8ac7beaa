import { mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { afterEach, describe, expect, it, vi } from "vitest";

import { run } from "../src/cli.js";

const FIXTURES = join(dirname(fileURLToPath(import.meta.url)), "..", "fixtures");

function tmp(): string {
  return mkdtempSync(join(tmpdir(), "plots-"));
}

afterEach(() => {
  vi.restoreAllMocks();
});

describe("plots CLI", () => {
  it("renders a fixture end to end", () => {
    const out = join(tmp(), "fig4.svg");
    const rc = run([
      "fig4-wigner",
      "--in",
      join(FIXTURES, "fig4_wigner.csv"),
      "--out",
      out,
    ]);
    expect(rc).toBe(0);
    expect(readFileSync(out, "utf-8")).toContain("</svg>");
  });

  it("returns 2 on unknown kind", () => {
    vi.spyOn(console, "error").mockImplementation(() => {});
    expect(run(["pie-chart", "--in", "a.csv", "--out", "b.svg"])).toBe(2);
  });

  it("returns 2 on missing flags", () => {
    vi.spyOn(console, "error").mockImplementation(() => {});
    expect(run(["fig4-wigner", "--in", "a.csv"])).toBe(2);
    expect(run(["fig4-wigner"])).toBe(2);
  });

  it("returns 2 on unreadable input", () => {
    vi.spyOn(console, "error").mockImplementation(() => {});
    expect(
      run(["fig4-wigner", "--in", "/nonexistent.csv", "--out", "b.svg"]),
    ).toBe(2);
  });

  it("returns 2 on a header-mutated CSV", () => {
    const err = vi.spyOn(console, "error").mockImplementation(() => {});
    const dir = tmp();
    const bad = join(dir, "bad.csv");
    writeFileSync(
      bad,
      readFileSync(join(FIXTURES, "fig4_wigner.csv"), "utf-8").replace(
        "x,p,W",
        "a,b,c",
      ),
    );
    expect(run(["fig4-wigner", "--in", bad, "--out", join(dir, "o.svg")])).toBe(2);
    expect(err.mock.calls.some((c) => String(c[0]).includes("invalid CSV"))).toBe(
      true,
    );
  });
});
