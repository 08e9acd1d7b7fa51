/**
 * Client-side copy of the aggression scoring rules, used only for the
 * live preview while editing. The server echo stays authoritative for
 * everything persisted; after every submit the preview is reconciled
 * against the echo and any mismatch is surfaced to the annotator.
 */

export type CategoryKind = "AI" | "AC" | "FalseConstruct";

export type CategoryName =
  | "AggressiveNounDetPhrase"
  | "AggressiveVerbPhrase"
  | "AggressiveAdjPhrase"
  | "AggressiveAdvPhrase"
  | "StrongExpression"
  | "RhetoricalQuestion"
  | "Imperative"
  | "IronicExpression"
  | "FalseConstruct"
  | "ControversialContent";

export interface CategoryInfo {
  kind: CategoryKind;
  level: "Lexical" | "Syntactic" | "Discourse";
  example: string;
}

export const CATEGORIES: Record<CategoryName, CategoryInfo> = {
  AggressiveNounDetPhrase: {
    kind: "AI",
    level: "Lexical",
    example: "stereotyped or vulgar noun/determiner phrases",
  },
  AggressiveVerbPhrase: { kind: "AI", level: "Lexical", example: "fuck, hate, ..." },
  AggressiveAdjPhrase: { kind: "AI", level: "Lexical", example: "retarded, psycho, stupid, ..." },
  AggressiveAdvPhrase: { kind: "AC", level: "Lexical", example: "fucking, ..." },
  StrongExpression: { kind: "AC", level: "Syntactic", example: "should, must, definitely, ..." },
  RhetoricalQuestion: { kind: "AC", level: "Syntactic", example: "Doesn't everyone feel the same?" },
  Imperative: { kind: "AC", level: "Syntactic", example: "Shut the door, ..." },
  IronicExpression: { kind: "AC", level: "Discourse", example: "Clear as mud, ..." },
  FalseConstruct: {
    kind: "FalseConstruct",
    level: "Discourse",
    example: "counterfactual/stereotyping constructs; 0.5 base only with a catalyzer",
  },
  ControversialContent: {
    kind: "AI",
    level: "Discourse",
    example: "inappropriate content, jeering at others' misfortune",
  },
};

export const CATEGORY_NAMES = Object.keys(CATEGORIES) as CategoryName[];

/**
 * Weight table. Mutable on purpose: test builds corrupt it to prove the
 * preview-vs-echo reconciliation fires; production code never writes it.
 */
export const RULE_TABLE = {
  aiWeight: 1.0,
  acWeight: 0.5,
  falseConstructWeight: 0.5,
};

export interface ScorePreview {
  score: number;
  level: 0 | 1 | 2;
  counted: CategoryName[];
}

export function levelForScore(score: number): 0 | 1 | 2 {
  if (score === 0) return 0;
  return score <= 1 ? 1 : 2;
}

export function verdictOf(di: 0 | 1, level: 0 | 1 | 2): boolean {
  return di === 1 && (level === 1 || level === 2);
}

/**
 * Score a multiset of categories: each category counts once, catalyzers
 * alone score zero, a false construct becomes a 0.5 base only when a
 * catalyzer co-occurs.
 */
export function scoreCategories(names: CategoryName[]): ScorePreview {
  const unique = new Set(names);
  const ai: CategoryName[] = [];
  const ac: CategoryName[] = [];
  let falseConstruct = false;
  for (const name of unique) {
    const kind = CATEGORIES[name].kind;
    if (kind === "AI") ai.push(name);
    else if (kind === "AC") ac.push(name);
    else falseConstruct = true;
  }
  const fcBase = falseConstruct && ac.length > 0;
  if (ai.length === 0 && !fcBase) {
    return { score: 0, level: 0, counted: [] };
  }
  const score =
    ai.length * RULE_TABLE.aiWeight +
    ac.length * RULE_TABLE.acWeight +
    (fcBase ? RULE_TABLE.falseConstructWeight : 0);
  const counted = [...ai, ...ac, ...(fcBase ? (["FalseConstruct"] as CategoryName[]) : [])];
  counted.sort();
  return { score, level: levelForScore(score), counted };
}
