/** Directive model and its canonical serialization.
 *
 * The server treats directive.json as the artifact of record, so the
 * console must emit exactly the bytes the backend would: keys sorted,
 * no whitespace, non-ASCII escaped, trailing newline.
 */

export type ComparisonOp = "lt" | "le" | "eq" | "ge" | "gt" | "in";

export type Predicate =
  | { and: Predicate[] }
  | { or: Predicate[] }
  | { not: Predicate }
  | { feature: string; op: ComparisonOp; value: unknown }
  | { state_in: number[] }
  | { time_in: [number, number] }
  | { derived: "risk_score" | "transition_gap"; op: ComparisonOp; value: unknown };

export interface Directive {
  source: Predicate;
  target: Predicate;
  cap: number | null;
}

const OPS: ReadonlySet<string> = new Set(["lt", "le", "eq", "ge", "gt", "in"]);
const DERIVED: ReadonlySet<string> = new Set(["risk_score", "transition_gap"]);

export class DirectiveError extends Error {
  constructor(public path: string, message: string) {
    super(`${path}: ${message}`);
  }
}

/** Structural validation mirroring the server's grammar; throws with the
 * offending node's path so the composer can highlight it inline. */
export function validatePredicate(tree: unknown, nStates: number, path = "$"): void {
  if (typeof tree !== "object" || tree === null || Array.isArray(tree)) {
    throw new DirectiveError(path, "predicate node must be an object");
  }
  const node = tree as Record<string, unknown>;
  if ("and" in node || "or" in node) {
    const key = "and" in node ? "and" : "or";
    const children = node[key];
    if (!Array.isArray(children) || children.length === 0) {
      throw new DirectiveError(`${path}.${key}`, "expected a non-empty list");
    }
    children.forEach((child, i) => validatePredicate(child, nStates, `${path}.${key}[${i}]`));
  } else if ("not" in node) {
    validatePredicate(node.not, nStates, `${path}.not`);
  } else if ("feature" in node) {
    checkComparison(node, path);
  } else if ("state_in" in node) {
    const states = node.state_in;
    if (
      !Array.isArray(states) ||
      !states.every((s) => Number.isInteger(s) && s >= 0 && s < nStates)
    ) {
      throw new DirectiveError(`${path}.state_in`, `states must be integers in [0, ${nStates})`);
    }
  } else if ("time_in" in node) {
    const win = node.time_in;
    if (!Array.isArray(win) || win.length !== 2) {
      throw new DirectiveError(`${path}.time_in`, "expected [h1, h2]");
    }
  } else if ("derived" in node) {
    if (!DERIVED.has(String(node.derived))) {
      throw new DirectiveError(`${path}.derived`, `unknown quantity ${String(node.derived)}`);
    }
    checkComparison(node, path);
  } else {
    throw new DirectiveError(path, `unrecognised node keys ${Object.keys(node).sort().join(",")}`);
  }
}

function checkComparison(node: Record<string, unknown>, path: string): void {
  if (!OPS.has(String(node.op))) {
    throw new DirectiveError(`${path}.op`, `expected one of lt,le,eq,ge,gt,in`);
  }
  if (!("value" in node)) {
    throw new DirectiveError(path, "comparison node needs a value");
  }
  if (node.op === "in" && !Array.isArray(node.value)) {
    throw new DirectiveError(`${path}.value`, "op 'in' needs a list");
  }
}

export function validateDirective(d: Directive, nStates: number): void {
  if (d.cap !== null && (!Number.isInteger(d.cap) || d.cap < 1)) {
    throw new DirectiveError("$.cap", "cap must be a positive integer or null");
  }
  validatePredicate(d.source, nStates, "$.source");
  validatePredicate(d.target, nStates, "$.target");
}

/** JSON with sorted keys, no whitespace and \uXXXX escapes above ASCII:
 * byte-compatible with the backend's canonical writer. Integer-valued
 * numbers render without a decimal point on both sides. */
export function canonicalJson(value: unknown): string {
  if (value === null) return "null";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") {
    if (!Number.isFinite(value)) throw new DirectiveError("$", "non-finite number");
    return String(value);
  }
  if (typeof value === "string") return asciiString(value);
  if (Array.isArray(value)) return "[" + value.map(canonicalJson).join(",") + "]";
  const obj = value as Record<string, unknown>;
  const body = Object.keys(obj)
    .sort()
    .map((k) => `${asciiString(k)}:${canonicalJson(obj[k])}`)
    .join(",");
  return "{" + body + "}";
}

function asciiString(s: string): string {
  return JSON.stringify(s).replace(
    /[-￿]/g,
    (c) => "\\u" + c.charCodeAt(0).toString(16).padStart(4, "0"),
  );
}

export function serializeDirective(d: Directive): string {
  return canonicalJson({ cap: d.cap, source: d.source, target: d.target }) + "\n";
}

export function parseDirective(text: string): Directive {
  const doc = JSON.parse(text) as Record<string, unknown>;
  if (typeof doc !== "object" || doc === null || !("source" in doc) || !("target" in doc)) {
    throw new DirectiveError("$", "directive needs source and target");
  }
  return {
    source: doc.source as Predicate,
    target: doc.target as Predicate,
    cap: (doc.cap ?? null) as number | null,
  };
}
