/** Summary view model: underline rules, hover wiring, edit markers. */

import type { DataRef, Sentence, SummaryDoc } from "./types.js";

export interface SentenceView {
  index: number;
  text: string;
  level: string;
  underlined: boolean; // exactly the sentences that carry data references
  hovered: boolean;
  classes: string[];
  refs: DataRef[];
}

export function sentenceView(sentence: Sentence, hoveredIndex: number | null): SentenceView {
  const underlined = sentence.refs.length > 0;
  const hovered = hoveredIndex === sentence.index;
  const classes = ["sentence", `level-${sentence.level.toLowerCase()}`];
  if (underlined) classes.push("linked");
  if (hovered) classes.push("hovered");
  if (sentence.flags.edited) classes.push("edited");
  if (sentence.flags.unverifiable) classes.push("unverifiable");
  return {
    index: sentence.index,
    text: sentence.text,
    level: sentence.level,
    underlined,
    hovered,
    classes,
    refs: sentence.refs,
  };
}

export function summaryViewModel(doc: SummaryDoc, hoveredIndex: number | null): SentenceView[] {
  return doc.sentences.map((s) => sentenceView(s, hoveredIndex));
}

/** The highlight driving the chart for a hovered sentence (first ref wins;
 * multiple refs merge into one span over the union of dimensions). */
export function activeHighlight(doc: SummaryDoc, hoveredIndex: number | null): DataRef | null {
  if (hoveredIndex === null) return null;
  const sentence = doc.sentences.find((s) => s.index === hoveredIndex);
  if (!sentence || sentence.refs.length === 0) return null;
  const refs = sentence.refs;
  if (refs.length === 1) return refs[0];
  const dimensions = [...new Set(refs.flatMap((r) => r.dimensions))];
  return {
    dimensions,
    start: Math.min(...refs.map((r) => r.start)),
    end: Math.max(...refs.map((r) => r.end)),
    label: refs[0].label,
    kind: "range",
    patch_ids: refs.flatMap((r) => r.patch_ids),
  };
}
