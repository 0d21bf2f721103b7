/**
 * DOM-mutation / network quiescence probe.
 *
 * Installed once per page; repeat installs are no-ops. Only fetch and
 * XMLHttpRequest are instrumented — images, fonts and other passive
 * resources are outside the quiescence signal. Requests started before the
 * probe was installed are invisible to it.
 */

export interface ProbeState {
  installed: true;
  installedAtEpochMs: number;
  lastMutationEpochMs: number;
  pendingRequests: number;
  mutationCount: number;
  nowEpochMs: number;
  readyState: DocumentReadyState;
}

export interface ProbeMissing {
  installed: false;
}

interface ProbeHandle {
  readProbe(): ProbeState;
}

declare global {
  interface Window {
    __a11yrepair?: ProbeHandle;
  }
}

export function installProbe(
  win: Window & typeof globalThis = window
): { installed: true; already: boolean } {
  if (win.__a11yrepair) {
    return { installed: true, already: true };
  }
  const state = {
    installedAtEpochMs: Date.now(),
    lastMutationEpochMs: Date.now(),
    pendingRequests: 0,
    mutationCount: 0,
  };

  const observer = new win.MutationObserver((mutations) => {
    state.mutationCount += mutations.length;
    state.lastMutationEpochMs = Date.now();
  });
  observer.observe(win.document.documentElement ?? win.document, {
    childList: true,
    subtree: true,
    attributes: true,
    characterData: true,
  });

  const originalFetch = win.fetch;
  if (typeof originalFetch === "function") {
    win.fetch = function (this: unknown, ...args: Parameters<typeof fetch>) {
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
    } as typeof fetch;
  }

  if (win.XMLHttpRequest) {
    const originalSend = win.XMLHttpRequest.prototype.send;
    win.XMLHttpRequest.prototype.send = function (
      this: XMLHttpRequest,
      ...args: Parameters<XMLHttpRequest["send"]>
    ) {
      state.pendingRequests += 1;
      this.addEventListener("loadend", () => {
        state.pendingRequests -= 1;
      });
      try {
        return originalSend.apply(this, args);
      } catch (error) {
        // send() threw before any request started: loadend never fires.
        state.pendingRequests -= 1;
        throw error;
      }
    };
  }

  win.__a11yrepair = {
    readProbe(): ProbeState {
      return {
        installed: true,
        installedAtEpochMs: state.installedAtEpochMs,
        lastMutationEpochMs: state.lastMutationEpochMs,
        pendingRequests: state.pendingRequests,
        mutationCount: state.mutationCount,
        nowEpochMs: Date.now(),
        readyState: win.document.readyState,
      };
    },
  };
  return { installed: true, already: false };
}

export function readProbe(
  win: Window & typeof globalThis = window
): ProbeState | ProbeMissing {
  if (win.__a11yrepair) {
    return win.__a11yrepair.readProbe();
  }
  return { installed: false };
}
