/**
 * Predictor server speaking the sliding-window harness's wire protocol.
 *
 * One-shot mode (default): read one patch PNG from stdin, write the mask
 * PNG to stdout, exit. Streaming mode (--stream): loop over 4-byte
 * big-endian length-prefixed PNG frames, one reply frame per request.
 * Patches are handled strictly one at a time (serial capability).
 *
 * node dist/serve.js --checkpoint DIR [--stream] [--threshold 0.5]
 * node dist/serve.js --stub identity [--stream]     # protocol test double
 */

import * as tf from '@tensorflow/tfjs';

import { loadCheckpoint } from './checkpoint';
import { modelInputSide, predictPatch } from './model';
import { decodeMaskPng, encodeMaskPng } from './png';

type Responder = (patchPng: Buffer) => Buffer;

export function identityResponder(): Responder {
  return (patchPng) => {
    const { width, height, mask } = decodeMaskPng(patchPng);
    return encodeMaskPng(mask, width, height);
  };
}

export function modelResponder(model: tf.LayersModel, threshold: number): Responder {
  const side = modelInputSide(model);
  return (patchPng) => {
    const { width, height, mask } = decodeMaskPng(patchPng);
    if (width !== side || height !== side) {
      throw new Error(`expected ${side}x${side} patch, got ${width}x${height}`);
    }
    const probs = predictPatch(model, Float32Array.from(mask), side);
    const out = new Uint8Array(probs.length);
    for (let i = 0; i < probs.length; i++) {
      out[i] = probs[i] >= threshold ? 1 : 0;
    }
    return encodeMaskPng(out, width, height);
  };
}

function readAll(stream: NodeJS.ReadableStream): Promise<Buffer> {
  return new Promise((resolve, reject) => {
    const chunks: Buffer[] = [];
    stream.on('data', (c) => chunks.push(Buffer.from(c)));
    stream.on('end', () => resolve(Buffer.concat(chunks)));
    stream.on('error', reject);
  });
}

/** Pull exactly n bytes from a chunked stream (null on clean EOF). */
class FrameReader {
  private chunks: Buffer[] = [];
  private length = 0;
  private ended = false;
  private wake: (() => void) | null = null;

  constructor(stream: NodeJS.ReadableStream) {
    stream.on('data', (c) => {
      this.chunks.push(Buffer.from(c));
      this.length += c.length;
      this.wake?.();
    });
    stream.on('end', () => {
      this.ended = true;
      this.wake?.();
    });
  }

  async read(n: number): Promise<Buffer | null> {
    while (this.length < n) {
      if (this.ended) {
        return null;
      }
      await new Promise<void>((resolve) => {
        this.wake = resolve;
      });
      this.wake = null;
    }
    const joined = Buffer.concat(this.chunks);
    this.chunks = [joined.subarray(n)];
    this.length = joined.length - n;
    return joined.subarray(0, n);
  }
}

export async function serveStream(
  responder: Responder,
  stdin: NodeJS.ReadableStream,
  stdout: NodeJS.WritableStream,
): Promise<void> {
  const reader = new FrameReader(stdin);
  for (;;) {
    const header = await reader.read(4);
    if (header === null) {
      return;
    }
    const payload = await reader.read(header.readUInt32BE(0));
    if (payload === null) {
      throw new Error('stream ended inside a frame');
    }
    const reply = responder(payload);
    const out = Buffer.alloc(4 + reply.length);
    out.writeUInt32BE(reply.length, 0);
    reply.copy(out, 4);
    stdout.write(out);
  }
}

export async function serveOnce(
  responder: Responder,
  stdin: NodeJS.ReadableStream,
  stdout: NodeJS.WritableStream,
): Promise<void> {
  stdout.write(responder(await readAll(stdin)));
}

export async function main(argv: string[]): Promise<void> {
  const stream = argv.includes('--stream');
  let responder: Responder;
  const stubIdx = argv.indexOf('--stub');
  const ckptIdx = argv.indexOf('--checkpoint');
  if (stubIdx >= 0) {
    if (argv[stubIdx + 1] !== 'identity') {
      throw new Error(`unknown stub ${argv[stubIdx + 1]}`);
    }
    responder = identityResponder();
  } else if (ckptIdx >= 0) {
    const { model } = await loadCheckpoint(argv[ckptIdx + 1]);
    const thrIdx = argv.indexOf('--threshold');
    responder = modelResponder(model, thrIdx >= 0 ? Number(argv[thrIdx + 1]) : 0.5);
  } else {
    throw new Error('usage: serve (--checkpoint DIR | --stub identity) [--stream] [--threshold T]');
  }
  if (stream) {
    await serveStream(responder, process.stdin, process.stdout);
  } else {
    await serveOnce(responder, process.stdin, process.stdout);
  }
}

if (require.main === module) {
  main(process.argv.slice(2)).catch((err) => {
    process.stderr.write(String(err && err.stack ? err.stack : err) + '\n');
    process.exit(1);
  });
}
