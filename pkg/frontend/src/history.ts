/** Scenario history: session-scoped, pinnable, comparable.
 *
 * Entries live in browser session storage only; nothing is persisted on
 * the server. The storage backend is injected so tests can run without a
 * browser.
 */

import { InferRequest, InferResponse } from "./types.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export interface HistoryEntry {
  id: number;
  savedAt: string;
  request: InferRequest;
  response: InferResponse;
  pinned: boolean;
}

export interface ScenarioDiff {
  /** Variables fixed in one scenario but not the other. */
  fixedSetDiffers: string[];
  /** Fixed in both but with different values. */
  valueDiffers: string[];
  targetDiffers: boolean;
  modelDiffers: boolean;
  /** Best (smallest-|deviation|) candidate deviation per entry. */
  deviations: number[];
  identical: boolean;
}

export class ScenarioHistory {
  private storage: StorageLike;
  private key: string;

  constructor(storage: StorageLike, key = "mixdesign-history") {
    this.storage = storage;
    this.key = key;
  }

  list(): HistoryEntry[] {
    const raw = this.storage.getItem(this.key);
    if (!raw) return [];
    try {
      return JSON.parse(raw) as HistoryEntry[];
    } catch {
      return [];
    }
  }

  private write(entries: HistoryEntry[]): void {
    this.storage.setItem(this.key, JSON.stringify(entries));
  }

  add(request: InferRequest, response: InferResponse): HistoryEntry {
    const entries = this.list();
    const id = entries.length ? entries[entries.length - 1].id + 1 : 1;
    const entry: HistoryEntry = {
      id,
      savedAt: new Date().toISOString(),
      request,
      response,
      pinned: false,
    };
    entries.push(entry);
    this.write(entries);
    return entry;
  }

  togglePin(id: number): void {
    const entries = this.list();
    for (const entry of entries) {
      if (entry.id === id) entry.pinned = !entry.pinned;
    }
    this.write(entries);
  }

  pinned(): HistoryEntry[] {
    return this.list().filter((entry) => entry.pinned);
  }

  get(id: number): HistoryEntry | undefined {
    return this.list().find((entry) => entry.id === id);
  }
}

function bestDeviation(entry: HistoryEntry): number {
  const deviations = entry.response.candidates.map((c) => c.deviation);
  if (deviations.length === 0) return NaN;
  return deviations.reduce((best, d) =>
    Math.abs(d) < Math.abs(best) ? d : best);
}

/** Pairwise comparison of two pinned scenarios. */
export function compareScenarios(
  a: HistoryEntry,
  b: HistoryEntry,
): ScenarioDiff {
  const fixedA = a.request.fixed;
  const fixedB = b.request.fixed;
  const names = new Set([...Object.keys(fixedA), ...Object.keys(fixedB)]);
  const fixedSetDiffers: string[] = [];
  const valueDiffers: string[] = [];
  for (const name of names) {
    const inA = name in fixedA;
    const inB = name in fixedB;
    if (inA !== inB) {
      fixedSetDiffers.push(name);
    } else if (fixedA[name] !== fixedB[name]) {
      valueDiffers.push(name);
    }
  }
  fixedSetDiffers.sort();
  valueDiffers.sort();
  const targetDiffers =
    a.request.target_strength !== b.request.target_strength;
  const modelDiffers = a.request.model !== b.request.model;
  return {
    fixedSetDiffers,
    valueDiffers,
    targetDiffers,
    modelDiffers,
    deviations: [bestDeviation(a), bestDeviation(b)],
    identical:
      fixedSetDiffers.length === 0 && valueDiffers.length === 0
      && !targetDiffers && !modelDiffers,
  };
}
