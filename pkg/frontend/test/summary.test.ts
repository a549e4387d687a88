import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { activeHighlight, summaryViewModel } from "../src/summary.js";
import type { SummaryDoc } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function loadSummary(): SummaryDoc {
  return JSON.parse(readFileSync(join(FIXTURES, "summary.json"), "utf-8"));
}

describe("summary view model", () => {
  it("underlines exactly the sentences with data references", () => {
    const doc = loadSummary();
    const views = summaryViewModel(doc, null);
    const underlined = views.filter((v) => v.underlined).map((v) => v.index);
    const withRefs = doc.sentences
      .filter((s) => s.refs.length > 0)
      .map((s) => s.index);
    expect(underlined).toEqual(withRefs);
    // the fixture deliberately contains one reference-free sentence
    expect(underlined.length).toBeLessThan(doc.sentences.length);
  });

  it("hover state is carried by exactly one sentence", () => {
    const doc = loadSummary();
    const views = summaryViewModel(doc, 3);
    expect(views.filter((v) => v.hovered).map((v) => v.index)).toEqual([3]);
    expect(views[3].classes).toContain("hovered");
  });

  it("hovering a reference-free sentence highlights nothing", () => {
    const doc = loadSummary();
    const bare = doc.sentences.find((s) => s.refs.length === 0)!;
    expect(activeHighlight(doc, bare.index)).toBeNull();
    expect(activeHighlight(doc, null)).toBeNull();
  });

  it("hovering the early-2008 sentence yields its reference", () => {
    const doc = loadSummary();
    const early = doc.sentences.find((s) => s.text.includes("early 2008"))!;
    const ref = activeHighlight(doc, early.index)!;
    expect(ref.dimensions.sort()).toEqual(["Apple", "Google"]);
    expect(ref.start).toBe(ref.end); // the snapped boundary point
  });

  it("edited and unverifiable flags become view classes", () => {
    const doc = loadSummary();
    const flagged: SummaryDoc = {
      ...doc,
      sentences: doc.sentences.map((s, i) =>
        i === 0
          ? { ...s, flags: { edited: true, unverifiable: true } }
          : s,
      ),
    };
    const views = summaryViewModel(flagged, null);
    expect(views[0].classes).toContain("edited");
    expect(views[0].classes).toContain("unverifiable");
    expect(views[1].classes).not.toContain("edited");
  });
});
