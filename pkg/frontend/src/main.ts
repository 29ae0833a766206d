/** Bootstrap: one session per tab, polling for agent turns, live KB panel. */

import { ServiceClient } from "./api.js";
import { buildKbPanel, offlinePanel } from "./kbpanel.js";
import { mergeTurns, toViews } from "./state.js";
import type { WireTurn } from "./types.js";
import { renderConversation, renderKbPanel } from "./view.js";

const POLL_MS = 1500;

async function boot() {
  const thread = document.getElementById("thread") as HTMLElement;
  const panel = document.getElementById("kb-panel") as HTMLElement;
  const form = document.getElementById("composer") as HTMLFormElement;
  const input = document.getElementById("composer-input") as HTMLInputElement;

  const client = new ServiceClient("");
  let turns: WireTurn[] = [];
  let sessionId: string | null = null;
  let busy = false;

  const redraw = () => renderConversation(thread, toViews(turns), submit);

  async function refreshPanel() {
    try {
      renderKbPanel(panel, buildKbPanel(await client.kbSummary()));
    } catch {
      renderKbPanel(panel, offlinePanel());
    }
  }

  async function submit(text: string) {
    if (!sessionId || busy || !text.trim()) return;
    busy = true;
    try {
      const res = await client.postTurn(sessionId, text);
      turns = mergeTurns(turns, res.turns);
      redraw();
      if (res.learned) await refreshPanel();
    } catch (err) {
      console.error("turn failed", err);
    } finally {
      busy = false;
    }
  }

  form.addEventListener("submit", (ev) => {
    ev.preventDefault();
    const text = input.value;
    input.value = "";
    void submit(text);
  });

  async function poll() {
    if (sessionId && !busy) {
      try {
        const latest = turns.length ? turns[turns.length - 1]!.seq : 0;
        const fresh = await client.transcript(sessionId, latest);
        if (fresh.length) {
          turns = mergeTurns(turns, fresh);
          redraw();
        }
      } catch {
        renderKbPanel(panel, offlinePanel());
      }
    }
    setTimeout(poll, POLL_MS);
  }

  try {
    sessionId = await client.createSession();
    await refreshPanel();
  } catch {
    renderKbPanel(panel, offlinePanel());
  }
  void poll();
}

void boot();
