export {
  StitchClient,
  RequestError,
  ConnectionError,
  type ClientConfig,
  type StitchOptions,
  type StitchResult,
  type StitchReport,
  type BankInfo,
  type MtPair,
  type DatasetItem,
} from "./client.js";
export { decodeWav, type DecodedWav } from "./wav.js";
export { readNdjson } from "./ndjson.js";
