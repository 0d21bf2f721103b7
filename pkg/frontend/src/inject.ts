/**
 * Payload entry point. Bundled (IIFE, no module syntax) and delivered as one
 * script string through the WebDriver execute-script command, concatenated
 * after the vendored audit bundle.
 *
 * Exposes in page context:
 *  - window.__a11yrepair.readProbe(): quiescence counters for the driver's
 *    stabilization poll
 *  - window.__a11yrepairAudit(tags, done): runs the audit and hands the
 *    serialized JSON to the driver's async-script callback
 */

import { runAuditSerialize } from "./audit";
import { installProbe } from "./probe";

installProbe();

(window as unknown as Record<string, unknown>).__a11yrepairAudit = (
  tags: string[],
  done: (payload: string) => void
): void => {
  void runAuditSerialize(tags).then(done);
};
