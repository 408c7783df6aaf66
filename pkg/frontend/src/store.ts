// Console state: one store, serialized updates, renders derive from it.

import type {
  GatewayEvent,
  MachineSnapshot,
  PendingWrite,
  LogbookEntry,
  SessionSummary,
} from './types.js';

export interface ConsoleState {
  sessions: SessionSummary[];
  activeSessionId: string | null;
  transcript: GatewayEvent[];
  cotVisible: boolean;
  machine: MachineSnapshot | null;
  approvals: PendingWrite[];
  logbook: LogbookEntry[];
  logbookQuery: string;
  connected: boolean;
}

export class ConsoleStore {
  state: ConsoleState = {
    sessions: [],
    activeSessionId: null,
    transcript: [],
    cotVisible: false,
    machine: null,
    approvals: [],
    logbook: [],
    logbookQuery: '',
    connected: true,
  };

  private listeners: Array<(state: ConsoleState) => void> = [];

  subscribe(listener: (state: ConsoleState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify() {
    for (const listener of this.listeners) listener(this.state);
  }

  setSessions(sessions: SessionSummary[]) {
    this.state.sessions = sessions;
    this.notify();
  }

  openSession(id: string) {
    this.state.activeSessionId = id;
    this.state.transcript = [];
    this.notify();
  }

  /** Append one stream event; ignores duplicates and stale sessions. */
  applyEvent(sessionId: string, event: GatewayEvent) {
    if (sessionId !== this.state.activeSessionId) return;
    const last = this.state.transcript[this.state.transcript.length - 1];
    if (last && event.seq <= last.seq) return; // replayed duplicate
    this.state.transcript = [...this.state.transcript, event];
    if (event.type === 'status') {
      const session = this.state.sessions.find((s) => s.id === sessionId);
      if (session && event.status) session.status = event.status;
    }
    this.notify();
  }

  /** Pure re-render switch; never refetches. */
  toggleCot() {
    if (this.state.activeSessionId === null) return;
    this.state.cotVisible = !this.state.cotVisible;
    this.notify();
  }

  /** Machine panel timestamps never move backward: stale polls are dropped. */
  setSnapshot(snapshot: MachineSnapshot) {
    const current = this.state.machine;
    if (current && snapshot.clock < current.clock) return;
    this.state.machine = snapshot;
    this.notify();
  }

  setApprovals(approvals: PendingWrite[]) {
    this.state.approvals = approvals;
    this.notify();
  }

  setLogbook(query: string, entries: LogbookEntry[]) {
    this.state.logbookQuery = query;
    this.state.logbook = entries;
    this.notify();
  }

  setConnected(connected: boolean) {
    if (this.state.connected !== connected) {
      this.state.connected = connected;
      this.notify();
    }
  }
}
