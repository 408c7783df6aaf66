// Minimal SSE reader over fetch streaming. Works in browsers and node 20+,
// unlike EventSource which node lacks; the gateway only needs `data:` lines.

export interface SseHandle {
  closed: Promise<void>;
  abort(): void;
}

export function readSse(
  response: Response,
  onData: (payload: string) => void,
): SseHandle {
  const controller = new AbortController();
  const closed = (async () => {
    if (!response.body) throw new Error('SSE response has no body');
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = '';
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let cut;
      while ((cut = buffer.indexOf('\n\n')) >= 0) {
        const frame = buffer.slice(0, cut);
        buffer = buffer.slice(cut + 2);
        for (const line of frame.split('\n')) {
          if (line.startsWith('data: ')) onData(line.slice(6));
        }
      }
    }
  })();
  return {
    closed,
    abort: () => controller.abort(),
  };
}
