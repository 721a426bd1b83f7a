/** Parse a ReadableStream as NDJSON, one JSON value per line. */
export async function* readNdjson(stream: ReadableStream<Uint8Array>): AsyncGenerator<unknown> {
  const reader = stream.getReader();
  const decoder = new TextDecoder();
  let buffer = "";
  try {
    for (;;) {
      const { value, done } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let idx: number;
      while ((idx = buffer.indexOf("\n")) >= 0) {
        const line = buffer.slice(0, idx).trim();
        buffer = buffer.slice(idx + 1);
        if (line) {
          yield JSON.parse(line);
        }
      }
    }
    const tail = buffer.trim();
    if (tail) {
      yield JSON.parse(tail);
    }
  } finally {
    reader.releaseLock();
  }
}
