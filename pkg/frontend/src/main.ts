// Browser bootstrap: wires the store, gateway client, and DOM together.

import { GatewayClient } from './api.js';
import { ConsoleStore } from './store.js';
import {
  renderApprovals,
  renderBanner,
  renderLogbook,
  renderMachinePanel,
  renderSessionList,
  renderTranscript,
} from './render.js';

const POLL_INTERVAL_MS = 1000;

function mount(): void {
  const client = new GatewayClient('');
  const store = new ConsoleStore();
  const root = document.getElementById('console');
  if (!root) throw new Error('missing #console element');
  root.innerHTML = `
    <div id="banner"></div>
    <header>
      <form id="prompt-form">
        <input id="prompt" type="text" placeholder="Ask the operations assistant..." autocomplete="off" />
        <label><input id="allow-cot" type="checkbox" /> record chain of thought</label>
        <button type="submit">Submit</button>
      </form>
      <button id="toggle-cot">Show/hide chain of thought</button>
    </header>
    <main>
      <section id="sessions"></section>
      <section id="transcript"></section>
      <aside>
        <h2>Pending approvals</h2>
        <section id="approvals"></section>
        <h2>Machine</h2>
        <section id="machine"></section>
        <h2>Logbook</h2>
        <form id="logbook-form"><input id="logbook-query" type="text" placeholder="search the logbook" /></form>
        <section id="logbook"></section>
      </aside>
    </main>`;

  const sections = {
    banner: document.getElementById('banner')!,
    sessions: document.getElementById('sessions')!,
    transcript: document.getElementById('transcript')!,
    approvals: document.getElementById('approvals')!,
    machine: document.getElementById('machine')!,
    logbook: document.getElementById('logbook')!,
  };

  store.subscribe((state) => {
    sections.banner.innerHTML = renderBanner(state.connected);
    sections.sessions.innerHTML = renderSessionList(state);
    sections.transcript.innerHTML = renderTranscript(state.transcript, state.cotVisible);
    sections.approvals.innerHTML = renderApprovals(state.approvals);
    sections.machine.innerHTML = renderMachinePanel(state.machine);
    sections.logbook.innerHTML = renderLogbook(state.logbook);
  });

  async function follow(sessionId: string): Promise<void> {
    store.openSession(sessionId);
    try {
      const handle = await client.streamEvents(sessionId, (event) =>
        store.applyEvent(sessionId, event),
      );
      store.setConnected(true);
      await handle.closed;
    } catch {
      // the events endpoint replays from the start, so resuming is just re-subscribing
      store.setConnected(false);
      setTimeout(() => void follow(sessionId), 1000);
    }
  }

  document.getElementById('prompt-form')!.addEventListener('submit', (submitEvent) => {
    submitEvent.preventDefault();
    const input = document.getElementById('prompt') as HTMLInputElement;
    const allowCot = (document.getElementById('allow-cot') as HTMLInputElement).checked;
    const task = input.value.trim();
    if (!task) return;
    input.value = '';
    void client.createSession(task, allowCot).then((session) => {
      void client.listSessions().then((sessions) => store.setSessions(sessions));
      void follow(session.id);
    });
  });

  document.getElementById('toggle-cot')!.addEventListener('click', () => store.toggleCot());

  sections.sessions.addEventListener('click', (clickEvent) => {
    const item = (clickEvent.target as HTMLElement).closest('.session');
    if (item) void follow((item as HTMLElement).dataset.id!);
  });

  sections.approvals.addEventListener('click', (clickEvent) => {
    const button = clickEvent.target as HTMLElement;
    const id = button.dataset.id;
    if (!id) return;
    if (button.classList.contains('approve') || button.classList.contains('reject')) {
      void client
        .resolveWrite(id, button.classList.contains('approve'))
        .then(() => poll());
    }
  });

  document.getElementById('logbook-form')!.addEventListener('submit', (submitEvent) => {
    submitEvent.preventDefault();
    const query = (document.getElementById('logbook-query') as HTMLInputElement).value;
    void client.searchLogbook(query).then((entries) => store.setLogbook(query, entries));
  });

  async function poll(): Promise<void> {
    try {
      const [snapshot, approvals] = await Promise.all([client.snapshot(), client.pendingWrites()]);
      store.setSnapshot(snapshot);
      store.setApprovals(approvals);
      store.setConnected(true);
    } catch {
      store.setConnected(false);
    }
  }

  void client.listSessions().then((sessions) => store.setSessions(sessions));
  void poll();
  setInterval(() => void poll(), POLL_INTERVAL_MS);
}

if (typeof document !== 'undefined') {
  mount();
}
