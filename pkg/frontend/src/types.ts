/** Wire format shared with the service. Mirrors the server's documented schema. */

export interface OptionEntry {
  index: number; // 1-based; submitting String(index) is identical to typing it
  api_id: string;
  label: string;
}

export interface TextBody {
  kind: "text";
  text: string;
}

export interface OptionListBody {
  kind: "option_list";
  prompt: string;
  options: OptionEntry[];
}

export interface ArgPromptBody {
  kind: "arg_prompt";
  arg: string;
  type: string;
  prompt: string;
}

export interface ExecuteNoticeBody {
  kind: "execute_notice";
  api: string;
  args: Record<string, string>;
  text: string;
}

export type TurnBody = TextBody | OptionListBody | ArgPromptBody | ExecuteNoticeBody;

export interface WireTurn {
  session_id: string;
  seq: number;
  sender: "user" | "agent";
  body: TurnBody;
}

export interface TurnResponse {
  turns: WireTurn[];
  learned: boolean;
  kb_version: number;
}

export interface KbApiSummary {
  api_id: string;
  description: string;
  args: { name: string; type: string }[];
  sc_total: number;
  sc_authored: number;
  sc_learned: number;
}

export interface KbSummary {
  kb_version: number;
  api_count: number;
  sc_count: number;
  learned_sc_count: number;
  gazetteers: Record<string, number>;
  apis: KbApiSummary[];
}
