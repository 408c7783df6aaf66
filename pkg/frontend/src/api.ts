// Gateway client. Every state mutation the console performs goes through
// these documented endpoints and nothing else; tests inject a recording
// fetch to enforce that.

import type {
  GatewayEvent,
  LogbookEntry,
  MachineSnapshot,
  PendingWrite,
  SessionSummary,
} from './types.js';
import { readSse, type SseHandle } from './sse.js';

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(
    private readonly base: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async json<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.base + path, init);
    if (!response.ok) {
      throw new Error(`${init?.method ?? 'GET'} ${path} -> ${response.status}`);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.json<T>(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  createSession(task: string, showCot: boolean): Promise<SessionSummary> {
    return this.post('/sessions', { task, show_cot: showCot });
  }

  listSessions(): Promise<SessionSummary[]> {
    return this.json('/sessions');
  }

  getSession(id: string): Promise<SessionSummary & { events: GatewayEvent[] }> {
    return this.json(`/sessions/${id}`);
  }

  /** Subscribe to a session's ordered event stream (full replay + follow). */
  async streamEvents(id: string, onEvent: (event: GatewayEvent) => void): Promise<SseHandle> {
    const response = await this.fetchFn(`${this.base}/sessions/${id}/events`);
    if (!response.ok) throw new Error(`GET /sessions/${id}/events -> ${response.status}`);
    return readSse(response, (payload) => {
      if (payload === '{}') return; // end marker
      onEvent(JSON.parse(payload) as GatewayEvent);
    });
  }

  pendingWrites(): Promise<PendingWrite[]> {
    return this.json('/writes');
  }

  resolveWrite(id: string, approve: boolean): Promise<PendingWrite> {
    return this.post(`/writes/${id}/resolve`, { decision: approve ? 'approve' : 'reject' });
  }

  snapshot(): Promise<MachineSnapshot> {
    return this.json('/machine/snapshot');
  }

  searchLogbook(query: string, k = 10): Promise<LogbookEntry[]> {
    const params = new URLSearchParams(query ? { q: query, k: String(k) } : { k: String(k) });
    return this.json(`/logbook?${params}`);
  }
}
