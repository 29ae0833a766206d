/** View model for the knowledge panel: watch the template count grow. */

import type { KbSummary } from "./types.js";

export interface KbPanelRow {
  apiId: string;
  description: string;
  signature: string;
  authored: number;
  learned: number;
  total: number;
}

export interface KbPanelModel {
  offline: boolean;
  kbVersion: number | null;
  learnedTotal: number;
  rows: KbPanelRow[];
}

export function offlinePanel(): KbPanelModel {
  return { offline: true, kbVersion: null, learnedTotal: 0, rows: [] };
}

export function buildKbPanel(summary: KbSummary): KbPanelModel {
  return {
    offline: false,
    kbVersion: summary.kb_version,
    learnedTotal: summary.learned_sc_count,
    rows: summary.apis.map((api) => ({
      apiId: api.api_id,
      description: api.description,
      signature: `${api.api_id}(${api.args.map((a) => `${a.name}: ${a.type}`).join(", ")})`,
      authored: api.sc_authored,
      learned: api.sc_learned,
      total: api.sc_total,
    })),
  };
}
