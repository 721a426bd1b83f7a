import { readNdjson } from "./ndjson.js";
import { decodeWav } from "./wav.js";

export interface ClientConfig {
  baseUrl: string;
  /** Per-request timeout in milliseconds; must be positive. Default 30000. */
  timeoutMs?: number;
  /** Extra attempts after a 5xx or network failure. Default 2. */
  retries?: number;
  /** Seed used when a call does not pass one. Default 0. */
  defaultSeed?: number;
  /** Items per /v1/batch request in iterDataset. Default 64. */
  batchSize?: number;
}

export interface StitchOptions {
  speaker?: string;
  seed?: number;
  distort?: boolean;
  outputRateHz?: number;
}

export interface StitchReport {
  speaker: string;
  exact: number;
  fuzzy: number;
  fallback: number;
  n_samples: number;
  tokens: [string, string, string, number][];
}

export interface StitchResult {
  samples: Float32Array;
  sampleRate: number;
  report: StitchReport;
}

export interface BankInfo {
  speakers: string[];
  vocab_size: number;
  sample_rate_hz: number;
}

export interface MtPair {
  id: string;
  src: string;
  tgt: string;
}

export type DatasetItem =
  | {
      id: string;
      samples: Float32Array;
      sampleRate: number;
      nFrames: number;
      targetText: string;
      report: StitchReport;
    }
  | { id: string; error: string };

/** The request was rejected by the server (HTTP 4xx); retrying will not help. */
export class RequestError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "RequestError";
  }
}

/** The server was unreachable or kept failing after the configured retries. */
export class ConnectionError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ConnectionError";
  }
}

export class StitchClient {
  private readonly baseUrl: string;
  private readonly timeoutMs: number;
  private readonly retries: number;
  private readonly defaultSeed: number;
  private readonly batchSize: number;

  constructor(config: ClientConfig) {
    this.baseUrl = config.baseUrl.replace(/\/+$/, "");
    this.timeoutMs = config.timeoutMs ?? 30_000;
    if (this.timeoutMs <= 0) {
      throw new Error(`timeoutMs must be positive, got ${this.timeoutMs}`);
    }
    this.retries = config.retries ?? 2;
    this.defaultSeed = config.defaultSeed ?? 0;
    this.batchSize = config.batchSize ?? 64;
  }

  /** POST /v1/stitch and decode the WAV response into float samples in [-1, 1]. */
  async stitch(text: string, options: StitchOptions = {}): Promise<StitchResult> {
    if (!text.trim()) {
      throw new RequestError(400, "empty text");
    }
    const response = await this.post("/v1/stitch", {
      text,
      speaker: options.speaker,
      seed: options.seed ?? this.defaultSeed,
      distort: options.distort,
      output_rate_hz: options.outputRateHz,
    });
    const report = JSON.parse(response.headers.get("X-Stitch-Report") ?? "{}") as StitchReport;
    const wav = decodeWav(new Uint8Array(await response.arrayBuffer()));
    return { samples: wav.samples, sampleRate: wav.sampleRate, report };
  }

  async bankInfo(): Promise<BankInfo> {
    const response = await this.request("GET", "/v1/bank");
    return (await response.json()) as BankInfo;
  }

  /**
   * Stream (audio, target text, id) items for a list of MT pairs.
   *
   * Pairs are sent through /v1/batch in chunks; input order is preserved and
   * per-item seeds derive from (seed, id) on the server, so iterating twice
   * with the same seed yields identical arrays. Items the server could not
   * stitch come back as { id, error } and iteration continues.
   */
  async *iterDataset(pairs: Iterable<MtPair>, seed?: number): AsyncGenerator<DatasetItem> {
    const masterSeed = seed ?? this.defaultSeed;
    const queue = Array.from(pairs);
    for (let start = 0; start < queue.length; start += this.batchSize) {
      const chunk = queue.slice(start, start + this.batchSize);
      const byId = new Map(chunk.map((p) => [p.id, p]));
      const response = await this.post("/v1/batch", {
        items: chunk.map((p) => ({ id: p.id, text: p.src })),
        seed: masterSeed,
      });
      if (!response.body) {
        throw new ConnectionError("batch response had no body");
      }
      for await (const parsed of readNdjson(response.body)) {
        const line = parsed as Record<string, unknown>;
        const id = String(line.id);
        if (typeof line.error === "string") {
          yield { id, error: line.error };
          continue;
        }
        const wavBytes = Uint8Array.from(atob(line.wav_base64 as string), (c) =>
          c.charCodeAt(0),
        );
        const wav = decodeWav(wavBytes);
        yield {
          id,
          samples: wav.samples,
          sampleRate: wav.sampleRate,
          nFrames: line.n_frames as number,
          targetText: byId.get(id)?.tgt ?? "",
          report: line.report as StitchReport,
        };
      }
    }
  }

  private post(path: string, body: unknown): Promise<Response> {
    return this.request("POST", path, JSON.stringify(body));
  }

  private async request(method: string, path: string, body?: string): Promise<Response> {
    let lastFailure: unknown = null;
    for (let attempt = 0; attempt <= this.retries; attempt++) {
      const controller = new AbortController();
      const timer = setTimeout(() => controller.abort(), this.timeoutMs);
      try {
        const response = await fetch(this.baseUrl + path, {
          method,
          headers: body === undefined ? undefined : { "Content-Type": "application/json" },
          body,
          signal: controller.signal,
        });
        if (response.ok) {
          return response;
        }
        const message = await errorMessage(response);
        if (response.status < 500) {
          throw new RequestError(response.status, message);
        }
        lastFailure = new ConnectionError(`HTTP ${response.status}: ${message}`);
      } catch (err) {
        if (err instanceof RequestError) {
          throw err;
        }
        lastFailure = err;
      } finally {
        clearTimeout(timer);
      }
    }
    throw new ConnectionError(
      `${method} ${path} failed after ${this.retries + 1} attempt(s): ${String(lastFailure)}`,
    );
  }
}

async function errorMessage(response: Response): Promise<string> {
  try {
    const parsed = (await response.json()) as { error?: string };
    return parsed.error ?? response.statusText;
  } catch {
    return response.statusText;
  }
}
