import { describe, expect, it } from "vitest";

import {
  addFirm,
  emptyDraft,
  formatPeerPanel,
  formatSimilarity,
  removeFirm,
  setN,
} from "../src/portfolio.js";

describe("portfolio draft", () => {
  it("starts empty with the requested n", () => {
    const draft = emptyDraft(10);
    expect(draft.members).toEqual([]);
    expect(draft.n).toBe(10);
  });

  it("rejects n below 1", () => {
    expect(() => emptyDraft(0)).toThrow();
    expect(() => setN(emptyDraft(), 0)).toThrow();
  });

  it("keeps members ordered and unique", () => {
    let draft = emptyDraft();
    draft = addFirm(draft, "b").draft;
    draft = addFirm(draft, "a").draft;
    const dup = addFirm(draft, "b");
    expect(dup.changed).toBe(false);
    expect(dup.draft.members).toEqual(["b", "a"]);
  });

  it("removal is a no-op for non-members", () => {
    const draft = addFirm(emptyDraft(), "x").draft;
    const edit = removeFirm(draft, "ghost");
    expect(edit.changed).toBe(false);
    expect(edit.draft).toBe(draft);
  });

  it("edits never mutate the previous draft", () => {
    const before = addFirm(emptyDraft(), "x").draft;
    addFirm(before, "y");
    removeFirm(before, "x");
    setN(before, 3);
    expect(before.members).toEqual(["x"]);
    expect(before.n).toBe(15);
  });
});

describe("formatting", () => {
  it("prints similarities to 4 decimals", () => {
    expect(formatSimilarity(1)).toBe("1.0000");
    expect(formatSimilarity(0.97531246)).toBe("0.9753");
    expect(formatSimilarity(-0.15389)).toBe("-0.1539");
  });

  it("renders one tab-separated line per peer", () => {
    const text = formatPeerPanel([
      { company_id: "a", name: "Alpha", similarity: 1 },
      { company_id: "b", name: "Beta", similarity: 0.54321 },
    ]);
    expect(text).toBe("a\tAlpha\t1.0000\nb\tBeta\t0.5432");
  });

  it("renders an empty list as an empty string", () => {
    expect(formatPeerPanel([])).toBe("");
  });
});
