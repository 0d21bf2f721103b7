"use strict";
(() => {
  // src/audit.ts
  var SNIPPET_CAP = 4096;
  var SAFE_IDENT = /^[A-Za-z][\w-]*$/;
  var CRITERION_TAG = /^wcag(\d)(\d)(\d+)$/;
  var LEVEL_TAGS = /* @__PURE__ */ new Set([
    "wcag2a",
    "wcag2aa",
    "wcag2aaa",
    "wcag21a",
    "wcag21aa",
    "wcag22a",
    "wcag22aa"
  ]);
  function elementIndex(el) {
    let index = 0;
    let node = el;
    while (node) {
      if (node.nodeType === 1) {
        index += 1;
      }
      node = node.previousSibling;
    }
    return index;
  }
  function domPath(el) {
    const path = [];
    let node = el;
    while (node) {
      path.unshift([node.tagName.toLowerCase(), elementIndex(node)]);
      node = node.parentElement;
    }
    return path;
  }
  function uniqueMatch(doc, selector) {
    try {
      return doc.querySelectorAll(selector).length === 1;
    } catch (e) {
      return false;
    }
  }
  function computeSelector(el, doc) {
    var _a;
    const id = el.getAttribute("id");
    if (id && SAFE_IDENT.test(id) && uniqueMatch(doc, `#${id}`)) {
      return `#${id}`;
    }
    const classes = ((_a = el.getAttribute("class")) != null ? _a : "").split(/\s+/).filter(Boolean);
    if (classes.length && classes.every((c) => SAFE_IDENT.test(c))) {
      const chain = el.tagName.toLowerCase() + "." + classes.join(".");
      if (uniqueMatch(doc, chain)) {
        return chain;
      }
    }
    const parts = [];
    let node = el;
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
    const full = [];
    node = el;
    while (node) {
      full.unshift(`${node.tagName.toLowerCase()}:nth-child(${elementIndex(node)})`);
      node = node.parentElement;
    }
    return full.join(" > ");
  }
  function serializeResults(results, doc) {
    var _a, _b, _c, _d, _e, _f, _g, _h, _i;
    const out = [];
    for (const violation of results.violations) {
      let criterion = "";
      const levels = [];
      for (const tag of (_a = violation.tags) != null ? _a : []) {
        const match = CRITERION_TAG.exec(tag);
        if (match && !criterion) {
          criterion = `${match[1]}.${match[2]}.${match[3]}`;
        }
        if (LEVEL_TAGS.has(tag)) {
          levels.push(tag);
        }
      }
      for (const node of (_b = violation.nodes) != null ? _b : []) {
        const rawTarget = String((_d = (_c = node.target) == null ? void 0 : _c[0]) != null ? _d : "");
        let el = null;
        try {
          el = doc.querySelector(rawTarget);
        } catch (e) {
          el = null;
        }
        out.push({
          rule_id: violation.id,
          criterion_tag: criterion,
          level_tags: levels.join(","),
          impact: (_f = (_e = node.impact) != null ? _e : violation.impact) != null ? _f : "serious",
          css_selector: el ? computeSelector(el, doc) : rawTarget,
          dom_path: el ? domPath(el) : [],
          snippet: String((_g = node.html) != null ? _g : "").slice(0, SNIPPET_CAP),
          help_text: (_i = (_h = violation.help) != null ? _h : violation.description) != null ? _i : ""
        });
      }
    }
    return out;
  }
  var DEFAULT_TAGS = [
    "wcag2a",
    "wcag2aa",
    "wcag21a",
    "wcag21aa",
    "wcag22a",
    "wcag22aa"
  ];
  async function runAuditSerialize(tags = DEFAULT_TAGS, doc = document) {
    const axeRunner = globalThis.axe;
    if (!axeRunner) {
      return JSON.stringify({ error: "audit bundle missing" });
    }
    try {
      const options = tags.length ? { runOnly: { type: "tag", values: tags }, resultTypes: ["violations"] } : { resultTypes: ["violations"] };
      const results = await axeRunner.run(doc, options);
      return JSON.stringify(serializeResults(results, doc));
    } catch (error) {
      return JSON.stringify({ error: String(error) });
    }
  }

  // src/probe.ts
  function installProbe(win = window) {
    var _a;
    if (win.__a11yrepair) {
      return { installed: true, already: true };
    }
    const state = {
      installedAtEpochMs: Date.now(),
      lastMutationEpochMs: Date.now(),
      pendingRequests: 0,
      mutationCount: 0
    };
    const observer = new win.MutationObserver((mutations) => {
      state.mutationCount += mutations.length;
      state.lastMutationEpochMs = Date.now();
    });
    observer.observe((_a = win.document.documentElement) != null ? _a : win.document, {
      childList: true,
      subtree: true,
      attributes: true,
      characterData: true
    });
    const originalFetch = win.fetch;
    if (typeof originalFetch === "function") {
      win.fetch = function(...args) {
        state.pendingRequests += 1;
        const settle = () => {
          state.pendingRequests -= 1;
        };
        return originalFetch.apply(this, args).then(
          (response) => {
            settle();
            return response;
          },
          (error) => {
            settle();
            throw error;
          }
        );
      };
    }
    if (win.XMLHttpRequest) {
      const originalSend = win.XMLHttpRequest.prototype.send;
      win.XMLHttpRequest.prototype.send = function(...args) {
        state.pendingRequests += 1;
        this.addEventListener("loadend", () => {
          state.pendingRequests -= 1;
        });
        try {
          return originalSend.apply(this, args);
        } catch (error) {
          state.pendingRequests -= 1;
          throw error;
        }
      };
    }
    win.__a11yrepair = {
      readProbe() {
        return {
          installed: true,
          installedAtEpochMs: state.installedAtEpochMs,
          lastMutationEpochMs: state.lastMutationEpochMs,
          pendingRequests: state.pendingRequests,
          mutationCount: state.mutationCount,
          nowEpochMs: Date.now(),
          readyState: win.document.readyState
        };
      }
    };
    return { installed: true, already: false };
  }

  // src/inject.ts
  installProbe();
  window.__a11yrepairAudit = (tags, done) => {
    void runAuditSerialize(tags).then(done);
  };
})();
