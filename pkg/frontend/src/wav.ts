/** Minimal RIFF/WAVE decoder for the server's mono PCM16 responses. */

export interface DecodedWav {
  samples: Float32Array;
  sampleRate: number;
  channels: number;
}

/**
 * Decode a RIFF/WAVE blob into float samples in [-1, 1].
 * Supports PCM16 (format 1) and IEEE float32 (format 3).
 */
export function decodeWav(data: Uint8Array): DecodedWav {
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  if (data.byteLength < 12 || ascii(data, 0, 4) !== "RIFF" || ascii(data, 8, 12) !== "WAVE") {
    throw new Error("not a RIFF/WAVE blob");
  }
  let fmt: { format: number; channels: number; sampleRate: number; bits: number } | null = null;
  let raw: Uint8Array | null = null;
  let pos = 12;
  while (pos + 8 <= data.byteLength) {
    const chunkId = ascii(data, pos, pos + 4);
    const size = view.getUint32(pos + 4, true);
    const bodyStart = pos + 8;
    if (bodyStart + size > data.byteLength) {
      throw new Error(`truncated ${chunkId} chunk`);
    }
    if (chunkId === "fmt ") {
      fmt = {
        format: view.getUint16(bodyStart, true),
        channels: view.getUint16(bodyStart + 2, true),
        sampleRate: view.getUint32(bodyStart + 4, true),
        bits: view.getUint16(bodyStart + 14, true),
      };
    } else if (chunkId === "data") {
      raw = data.subarray(bodyStart, bodyStart + size);
    }
    pos = bodyStart + size + (size & 1); // chunks are word aligned
  }
  if (!fmt || raw === null) {
    throw new Error("missing fmt or data chunk");
  }
  let samples: Float32Array;
  if (fmt.format === 1 && fmt.bits === 16) {
    const n = raw.byteLength >> 1;
    const ints = new DataView(raw.buffer, raw.byteOffset, raw.byteLength);
    samples = new Float32Array(n);
    for (let i = 0; i < n; i++) {
      samples[i] = ints.getInt16(i * 2, true) / 32768;
    }
  } else if (fmt.format === 3 && fmt.bits === 32) {
    const n = raw.byteLength >> 2;
    const floats = new DataView(raw.buffer, raw.byteOffset, raw.byteLength);
    samples = new Float32Array(n);
    for (let i = 0; i < n; i++) {
      samples[i] = floats.getFloat32(i * 4, true);
    }
  } else {
    throw new Error(`unsupported WAV format ${fmt.format} at ${fmt.bits} bits`);
  }
  return { samples, sampleRate: fmt.sampleRate, channels: fmt.channels };
}

function ascii(data: Uint8Array, start: number, end: number): string {
  let out = "";
  for (let i = start; i < end; i++) {
    out += String.fromCharCode(data[i]);
  }
  return out;
}
