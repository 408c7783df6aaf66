// Pure HTML renderers: state in, markup string out. Keeping these free of
// DOM APIs lets tests snapshot the exact markup without a browser.

import type { ConsoleState } from './store.js';
import type { GatewayEvent, MachineSnapshot, PendingWrite, LogbookEntry } from './types.js';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

const COT_TYPES = new Set(['thought', 'tool_call', 'observation', 'malformed']);

export function visibleEvents(events: GatewayEvent[], cotVisible: boolean): GatewayEvent[] {
  return cotVisible ? events : events.filter((e) => !COT_TYPES.has(e.type));
}

function renderEvent(event: GatewayEvent): string {
  switch (event.type) {
    case 'thought':
      return `<li class="event thought"><span class="tag">Thought</span><p>${escapeHtml(event.text ?? '')}</p></li>`;
    case 'tool_call':
      return (
        `<li class="event tool-call"><span class="tag">Action</span>` +
        `<code class="tool">${escapeHtml(event.tool ?? '')}</code>` +
        `<pre class="input">${escapeHtml(event.input ?? '')}</pre></li>`
      );
    case 'observation':
      return (
        `<li class="event observation"><span class="tag">Observation</span>` +
        `<span class="source">${escapeHtml(event.source ?? '')}</span>` +
        `<pre>${escapeHtml(event.text ?? '')}</pre></li>`
      );
    case 'final_answer':
      return `<li class="event final-answer"><span class="tag">Answer</span><p>${escapeHtml(event.text ?? '')}</p></li>`;
    case 'malformed':
      return `<li class="event malformed"><span class="tag">Malformed</span><pre>${escapeHtml(event.raw ?? '')}</pre></li>`;
    case 'approval_request':
      return (
        `<li class="event approval"><span class="tag">Approval needed</span>` +
        `<code>${escapeHtml(event.address ?? '')} := ${event.value}</code>` +
        `<span class="pending-id">${escapeHtml(event.pending_id ?? '')}</span></li>`
      );
    case 'status':
      return `<li class="event status" data-status="${escapeHtml(event.status ?? '')}">${escapeHtml(event.status ?? '')}${event.detail ? `: ${escapeHtml(event.detail)}` : ''}</li>`;
    default:
      return '';
  }
}

export function renderTranscript(events: GatewayEvent[], cotVisible: boolean): string {
  const items = visibleEvents(events, cotVisible).map(renderEvent).join('\n');
  return `<ul class="transcript" data-cot="${cotVisible ? 'visible' : 'hidden'}">\n${items}\n</ul>`;
}

function formatValue(value: number | string | number[]): string {
  if (Array.isArray(value)) return `[${value.join(', ')}]`;
  return String(value);
}

export function renderMachinePanel(snapshot: MachineSnapshot | null): string {
  if (!snapshot) return '<div class="machine-panel empty">no snapshot yet</div>';
  const rows = Object.entries(snapshot.records)
    .map(([address, record]) => {
      const cycling =
        typeof record.value === 'string' && record.value.startsWith('CYCLING')
          ? ' <span class="badge cycling">cycling</span>'
          : '';
      return (
        `<tr data-address="${escapeHtml(address)}"><td class="address">${escapeHtml(address)}</td>` +
        `<td class="value">${escapeHtml(formatValue(record.value))}${cycling}</td>` +
        `<td class="unit">${escapeHtml(record.unit)}</td>` +
        `<td class="access">${record.writable ? 'rw' : 'ro'}</td></tr>`
      );
    })
    .join('\n');
  return (
    `<table class="machine-panel" data-clock="${snapshot.clock}">` +
    `<thead><tr><th>address</th><th>value</th><th>unit</th><th></th></tr></thead>` +
    `<tbody>\n${rows}\n</tbody></table>`
  );
}

export function renderApprovals(pending: PendingWrite[]): string {
  if (pending.length === 0) return '<div class="approvals empty">no pending writes</div>';
  const items = pending
    .map(
      (write) =>
        `<li class="pending-write" data-id="${escapeHtml(write.id)}">` +
        `<code>${escapeHtml(write.address)} := ${write.value}</code>` +
        `<span class="requested-by">${escapeHtml(write.requested_by)}</span>` +
        `<button class="approve" data-id="${escapeHtml(write.id)}">Approve</button>` +
        `<button class="reject" data-id="${escapeHtml(write.id)}">Reject</button></li>`,
    )
    .join('\n');
  return `<ul class="approvals">\n${items}\n</ul>`;
}

export function renderLogbook(entries: LogbookEntry[]): string {
  if (entries.length === 0) return '<div class="logbook empty">no entries</div>';
  const items = entries
    .map(
      (entry) =>
        `<li class="logbook-entry" data-id="${entry.id}">` +
        `<span class="entry-id">#${entry.id}</span>` +
        `<span class="title">${escapeHtml(entry.title)}</span>` +
        `<p class="body">${escapeHtml(entry.body)}</p></li>`,
    )
    .join('\n');
  return `<ul class="logbook">\n${items}\n</ul>`;
}

export function renderSessionList(state: ConsoleState): string {
  if (state.sessions.length === 0) return '<div class="sessions empty">no sessions</div>';
  const items = state.sessions
    .map(
      (session) =>
        `<li class="session${session.id === state.activeSessionId ? ' active' : ''}" data-id="${escapeHtml(session.id)}">` +
        `<span class="status ${escapeHtml(session.status)}">${escapeHtml(session.status)}</span>` +
        `<span class="task">${escapeHtml(session.task)}</span></li>`,
    )
    .join('\n');
  return `<ul class="sessions">\n${items}\n</ul>`;
}

export function renderBanner(connected: boolean): string {
  return connected
    ? ''
    : '<div class="banner reconnect">connection lost; reconnecting and replaying the stream</div>';
}
