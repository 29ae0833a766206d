/** Session state: the fetched transcript and the view model derived from it.
 *
 * The UI is stateless beyond this transcript — replaying the same turns
 * always produces the identical view, and every user interaction maps to
 * exactly one turn submission.
 */

import type { OptionEntry, WireTurn } from "./types.js";

export type UiRenderKind = "bubble" | "options" | "argPrompt" | "executeBadge";

export interface UiTurnView {
  seq: number;
  side: "user" | "agent";
  kind: UiRenderKind;
  text: string;
  options?: OptionEntry[];
  /** Option lists are clickable only while they are the latest agent turn. */
  active?: boolean;
  badge?: string;
}

/** Merge fetched turns into the transcript: dedupe by seq, keep seq order. */
export function mergeTurns(existing: WireTurn[], incoming: WireTurn[]): WireTurn[] {
  const bySeq = new Map<number, WireTurn>();
  for (const t of existing) bySeq.set(t.seq, t);
  for (const t of incoming) bySeq.set(t.seq, t);
  return [...bySeq.values()].sort((a, b) => a.seq - b.seq);
}

export function executeBadgeText(api: string, args: Record<string, string>): string {
  const rendered = Object.entries(args)
    .map(([k, v]) => `${k}=${v}`)
    .join(", ");
  return `${api}(${rendered})`;
}

/** What a click on an option submits — exactly the 1-based index as text. */
export function optionSubmission(option: OptionEntry): string {
  return String(option.index);
}

export function toViews(turns: WireTurn[]): UiTurnView[] {
  const lastAgentSeq = turns.reduce(
    (acc, t) => (t.sender === "agent" ? Math.max(acc, t.seq) : acc),
    0,
  );
  return turns.map((t) => {
    const base = { seq: t.seq, side: t.sender } as const;
    switch (t.body.kind) {
      case "option_list":
        return {
          ...base,
          kind: "options" as const,
          text: t.body.prompt,
          options: t.body.options,
          active: t.seq === lastAgentSeq,
        };
      case "arg_prompt":
        return { ...base, kind: "argPrompt" as const, text: t.body.prompt };
      case "execute_notice":
        return {
          ...base,
          kind: "executeBadge" as const,
          text: t.body.text,
          badge: executeBadgeText(t.body.api, t.body.args),
        };
      default:
        return { ...base, kind: "bubble" as const, text: t.body.text };
    }
  });
}
