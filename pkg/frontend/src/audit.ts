/**
 * Runs the audit bundle and serializes its result nodes into the wire form
 * the driver consumes. Read-only: nothing here mutates document content.
 *
 * Selector computation mirrors the native engine's preference order (unique
 * #id, then a unique tag.class chain, then an nth-child path up to body) so
 * both scanners report the same identity for the same node.
 */

export interface SerializedViolation {
  rule_id: string;
  criterion_tag: string;
  level_tags: string;
  impact: string;
  css_selector: string;
  dom_path: [string, number][];
  snippet: string;
  help_text: string;
}

const SNIPPET_CAP = 4096;
const SAFE_IDENT = /^[A-Za-z][\w-]*$/;
const CRITERION_TAG = /^wcag(\d)(\d)(\d+)$/;
const LEVEL_TAGS = new Set([
  "wcag2a", "wcag2aa", "wcag2aaa", "wcag21a", "wcag21aa", "wcag22a", "wcag22aa",
]);

export function elementIndex(el: Element): number {
  let index = 0;
  let node: ChildNode | null = el;
  while (node) {
    if (node.nodeType === 1) {
      index += 1;
    }
    node = node.previousSibling;
  }
  return index;
}

export function domPath(el: Element): [string, number][] {
  const path: [string, number][] = [];
  let node: Element | null = el;
  while (node) {
    path.unshift([node.tagName.toLowerCase(), elementIndex(node)]);
    node = node.parentElement;
  }
  return path;
}

function uniqueMatch(doc: Document, selector: string): boolean {
  try {
    return doc.querySelectorAll(selector).length === 1;
  } catch {
    return false;
  }
}

export function computeSelector(el: Element, doc: Document): string {
  const id = el.getAttribute("id");
  if (id && SAFE_IDENT.test(id) && uniqueMatch(doc, `#${id}`)) {
    return `#${id}`;
  }

  const classes = (el.getAttribute("class") ?? "").split(/\s+/).filter(Boolean);
  if (classes.length && classes.every((c) => SAFE_IDENT.test(c))) {
    const chain = el.tagName.toLowerCase() + "." + classes.join(".");
    if (uniqueMatch(doc, chain)) {
      return chain;
    }
  }

  const parts: string[] = [];
  let node: Element | null = el;
  while (node && node.tagName !== "HTML" && node.tagName !== "BODY") {
    const anchor = node.getAttribute("id");
    if (node !== el && anchor && SAFE_IDENT.test(anchor) && uniqueMatch(doc, `#${anchor}`)) {
      parts.unshift(`#${anchor}`);
      break;
    }
    let segment = node.tagName.toLowerCase();
    const siblings = node.parentElement ? node.parentElement.children.length : 1;
    if (siblings > 1) {
      segment += `:nth-child(${elementIndex(node)})`;
    }
    parts.unshift(segment);
    node = node.parentElement;
  }
  const candidate = parts.length ? parts.join(" > ") : el.tagName.toLowerCase();
  if (uniqueMatch(doc, candidate)) {
    return candidate;
  }

  const full: string[] = [];
  node = el;
  while (node) {
    full.unshift(`${node.tagName.toLowerCase()}:nth-child(${elementIndex(node)})`);
    node = node.parentElement;
  }
  return full.join(" > ");
}

interface AxeNodeResult {
  target?: unknown[];
  html?: string;
  impact?: string | null;
}

interface AxeViolation {
  id: string;
  impact?: string | null;
  tags?: string[];
  help?: string;
  description?: string;
  nodes?: AxeNodeResult[];
}

interface AxeResults {
  violations: AxeViolation[];
}

interface AxeRunner {
  run(context: unknown, options: unknown): Promise<AxeResults>;
}

export function serializeResults(results: AxeResults, doc: Document): SerializedViolation[] {
  const out: SerializedViolation[] = [];
  for (const violation of results.violations) {
    let criterion = "";
    const levels: string[] = [];
    for (const tag of violation.tags ?? []) {
      const match = CRITERION_TAG.exec(tag);
      if (match && !criterion) {
        criterion = `${match[1]}.${match[2]}.${match[3]}`;
      }
      if (LEVEL_TAGS.has(tag)) {
        levels.push(tag);
      }
    }
    for (const node of violation.nodes ?? []) {
      const rawTarget = String(node.target?.[0] ?? "");
      let el: Element | null = null;
      try {
        el = doc.querySelector(rawTarget);
      } catch {
        el = null;
      }
      out.push({
        rule_id: violation.id,
        criterion_tag: criterion,
        level_tags: levels.join(","),
        impact: node.impact ?? violation.impact ?? "serious",
        css_selector: el ? computeSelector(el, doc) : rawTarget,
        dom_path: el ? domPath(el) : [],
        snippet: String(node.html ?? "").slice(0, SNIPPET_CAP),
        help_text: violation.help ?? violation.description ?? "",
      });
    }
  }
  return out;
}

export const DEFAULT_TAGS = [
  "wcag2a", "wcag2aa", "wcag21a", "wcag21aa", "wcag22a", "wcag22aa",
];

export async function runAuditSerialize(
  tags: string[] = DEFAULT_TAGS,
  doc: Document = document
): Promise<string> {
  const axeRunner = (globalThis as { axe?: AxeRunner }).axe;
  if (!axeRunner) {
    return JSON.stringify({ error: "audit bundle missing" });
  }
  try {
    const options = tags.length
      ? { runOnly: { type: "tag", values: tags }, resultTypes: ["violations"] }
      : { resultTypes: ["violations"] };
    const results = await axeRunner.run(doc, options);
    return JSON.stringify(serializeResults(results, doc));
  } catch (error) {
    return JSON.stringify({ error: String(error) });
  }
}
