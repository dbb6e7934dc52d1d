/**
 * Truncated 3-layer variant of the network with hand-written float64
 * forward/backward passes, used to check the training-loop math against
 * central finite differences. Deliberately independent of tfjs: plain
 * number arrays keep full double precision, which a 1e-4 relative
 * tolerance needs.
 *
 * Architecture: conv3x3(1 -> hidden) -> ReLU -> conv3x3(hidden -> 2)
 * -> per-pixel softmax cross-entropy, 'same' zero padding throughout.
 */

export interface TruncatedParams {
  hidden: number;
  /** conv1 kernels, [hidden][3*3] */
  w1: number[][];
  b1: number[];
  /** conv2 kernels, [2][hidden*3*3] */
  w2: number[][];
  b2: number[];
}

export interface TruncatedGradients {
  w1: number[][];
  b1: number[];
  w2: number[][];
  b2: number[];
}

/** Deterministic rng (mulberry32); keeps the check reproducible. */
export function seededRandom(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function randomParams(hidden: number, seed: number): TruncatedParams {
  const rand = seededRandom(seed);
  const gauss = () => {
    const u = Math.max(rand(), 1e-12);
    return Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * rand());
  };
  const fill = (n: number, scale: number) =>
    Array.from({ length: n }, () => gauss() * scale);
  return {
    hidden,
    w1: Array.from({ length: hidden }, () => fill(9, 0.4)),
    b1: fill(hidden, 0.1),
    w2: Array.from({ length: 2 }, () => fill(hidden * 9, 0.4)),
    b2: fill(2, 0.1),
  };
}

function convSame(
  input: number[][], // [channels][side*side]
  kernels: number[][], // [outC][inC*3*3]
  bias: number[],
  side: number,
): number[][] {
  const inC = input.length;
  const out: number[][] = kernels.map(() => new Array(side * side).fill(0));
  for (let o = 0; o < kernels.length; o++) {
    for (let y = 0; y < side; y++) {
      for (let x = 0; x < side; x++) {
        let acc = bias[o];
        for (let c = 0; c < inC; c++) {
          for (let ky = -1; ky <= 1; ky++) {
            for (let kx = -1; kx <= 1; kx++) {
              const sy = y + ky;
              const sx = x + kx;
              if (sy < 0 || sy >= side || sx < 0 || sx >= side) {
                continue;
              }
              acc +=
                input[c][sy * side + sx] *
                kernels[o][c * 9 + (ky + 1) * 3 + (kx + 1)];
            }
          }
        }
        out[o][y * side + x] = acc;
      }
    }
  }
  return out;
}

/** Mean per-pixel softmax cross-entropy of the truncated network. */
export function truncatedLoss(
  params: TruncatedParams,
  input: number[],
  labels: number[],
  side: number,
): number {
  const h1 = convSame([input], params.w1, params.b1, side);
  const a1 = h1.map((plane) => plane.map((v) => Math.max(0, v)));
  const logits = convSame(a1, params.w2, params.b2, side);
  let loss = 0;
  const n = side * side;
  for (let p = 0; p < n; p++) {
    const z0 = logits[0][p];
    const z1 = logits[1][p];
    const m = Math.max(z0, z1);
    const logZ = m + Math.log(Math.exp(z0 - m) + Math.exp(z1 - m));
    const z = labels[p] === 1 ? z1 : z0;
    loss += logZ - z;
  }
  return loss / n;
}

/** Analytic gradients of truncatedLoss with respect to every parameter. */
export function truncatedGradients(
  params: TruncatedParams,
  input: number[],
  labels: number[],
  side: number,
): TruncatedGradients {
  const n = side * side;
  const h1 = convSame([input], params.w1, params.b1, side);
  const a1 = h1.map((plane) => plane.map((v) => Math.max(0, v)));
  const logits = convSame(a1, params.w2, params.b2, side);

  // d loss / d logits: (softmax - onehot) / n per pixel.
  const dLogits = [new Array(n).fill(0), new Array(n).fill(0)];
  for (let p = 0; p < n; p++) {
    const z0 = logits[0][p];
    const z1 = logits[1][p];
    const m = Math.max(z0, z1);
    const e0 = Math.exp(z0 - m);
    const e1 = Math.exp(z1 - m);
    const s0 = e0 / (e0 + e1);
    const s1 = e1 / (e0 + e1);
    dLogits[0][p] = (s0 - (labels[p] === 1 ? 0 : 1)) / n;
    dLogits[1][p] = (s1 - (labels[p] === 1 ? 1 : 0)) / n;
  }

  const grads: TruncatedGradients = {
    w1: params.w1.map((k) => k.map(() => 0)),
    b1: params.b1.map(() => 0),
    w2: params.w2.map((k) => k.map(() => 0)),
    b2: params.b2.map(() => 0),
  };
  const dA1: number[][] = a1.map(() => new Array(n).fill(0));

  for (let o = 0; o < 2; o++) {
    for (let y = 0; y < side; y++) {
      for (let x = 0; x < side; x++) {
        const g = dLogits[o][y * side + x];
        if (g === 0) {
          continue;
        }
        grads.b2[o] += g;
        for (let c = 0; c < params.hidden; c++) {
          for (let ky = -1; ky <= 1; ky++) {
            for (let kx = -1; kx <= 1; kx++) {
              const sy = y + ky;
              const sx = x + kx;
              if (sy < 0 || sy >= side || sx < 0 || sx >= side) {
                continue;
              }
              const ki = c * 9 + (ky + 1) * 3 + (kx + 1);
              grads.w2[o][ki] += g * a1[c][sy * side + sx];
              dA1[c][sy * side + sx] += g * params.w2[o][ki];
            }
          }
        }
      }
    }
  }

  for (let c = 0; c < params.hidden; c++) {
    for (let y = 0; y < side; y++) {
      for (let x = 0; x < side; x++) {
        const p = y * side + x;
        if (h1[c][p] <= 0) {
          continue; // ReLU gate
        }
        const g = dA1[c][p];
        if (g === 0) {
          continue;
        }
        grads.b1[c] += g;
        for (let ky = -1; ky <= 1; ky++) {
          for (let kx = -1; kx <= 1; kx++) {
            const sy = y + ky;
            const sx = x + kx;
            if (sy < 0 || sy >= side || sx < 0 || sx >= side) {
              continue;
            }
            grads.w1[c][(ky + 1) * 3 + (kx + 1)] += g * input[sy * side + sx];
          }
        }
      }
    }
  }
  return grads;
}

export interface GradCheckResult {
  maxRelativeError: number;
  checked: number;
}

/**
 * Compare every analytic gradient against central finite differences.
 * Relative error uses the standard symmetric denominator.
 */
export function gradientCheck(side = 8, hidden = 4, seed = 7, h = 1e-5): GradCheckResult {
  const rand = seededRandom(seed + 1);
  const input = Array.from({ length: side * side }, () => rand());
  const labels = Array.from({ length: side * side }, () => (rand() < 0.5 ? 0 : 1));
  const params = randomParams(hidden, seed);
  const analytic = truncatedGradients(params, input, labels, side);

  let worst = 0;
  let checked = 0;
  const probe = (vec: number[], grad: number[]) => {
    for (let i = 0; i < vec.length; i++) {
      const keep = vec[i];
      vec[i] = keep + h;
      const up = truncatedLoss(params, input, labels, side);
      vec[i] = keep - h;
      const down = truncatedLoss(params, input, labels, side);
      vec[i] = keep;
      const numeric = (up - down) / (2 * h);
      const denom = Math.max(Math.abs(numeric) + Math.abs(grad[i]), 1e-8);
      worst = Math.max(worst, Math.abs(numeric - grad[i]) / denom);
      checked++;
    }
  };
  params.w1.forEach((k, c) => probe(k, analytic.w1[c]));
  probe(params.b1, analytic.b1);
  params.w2.forEach((k, o) => probe(k, analytic.w2[o]));
  probe(params.b2, analytic.b2);
  return { maxRelativeError: worst, checked };
}
