// Wire types mirrored from the gateway API (docs/gateway-api.md).

export type StepEventType =
  | 'status'
  | 'thought'
  | 'tool_call'
  | 'observation'
  | 'final_answer'
  | 'malformed'
  | 'approval_request';

export interface GatewayEvent {
  seq: number;
  type: StepEventType;
  status?: string;
  detail?: string;
  text?: string;
  source?: string;
  tool?: string;
  input?: string;
  raw?: string;
  reason?: string;
  pending_id?: string;
  address?: string;
  value?: number;
}

export interface SessionSummary {
  id: string;
  task: string;
  status: string;
  failure: string | null;
  show_cot: boolean;
  created_at: number;
}

export interface PropertyRecord {
  value: number | string | number[];
  unit: string;
  writable: boolean;
  limits: [number, number] | null;
  timestamp: number;
}

export interface MachineSnapshot {
  clock: number;
  records: Record<string, PropertyRecord>;
}

export interface PendingWrite {
  id: string;
  address: string;
  value: number;
  requested_by: string;
  state: string;
  error: string | null;
}

export interface LogbookEntry {
  id: number;
  timestamp: number;
  author: string;
  title: string;
  body: string;
  tags: string[];
  score?: number;
}
