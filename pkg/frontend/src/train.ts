/**
 * Toy-scale training loop: SGD with momentum on per-pixel 2-class
 * cross-entropy, a held-out validation split, and best-validation-loss
 * checkpointing (the saved model's validation loss never exceeds any
 * epoch's). CLI: node dist/train.js --patches DIR --out CKPT [options].
 */

import * as tf from '@tensorflow/tfjs';

import { saveCheckpoint } from './checkpoint';
import { Fcn8Config, toyConfig, DEFAULT_CONFIG } from './config';
import { PatchDataset, loadPatchDataset } from './data';
import { installFastConvFilterGradient } from './fastKernels';
import { buildModel } from './model';

export interface EpochRecord {
  epoch: number;
  trainLoss: number;
  validationLoss: number;
  trainPixelAccuracy: number;
}

export interface TrainResult {
  history: EpochRecord[];
  bestEpoch: number;
  bestValidationLoss: number;
}

function toTensors(ds: PatchDataset, from: number, to: number) {
  const pixels = ds.window * ds.window;
  const n = to - from;
  const x = tf.tensor4d(
    ds.images.subarray(from * pixels, to * pixels),
    [n, ds.window, ds.window, 1],
  );
  const yIdx = tf.tensor3d(
    Uint8Array.prototype.slice.call(ds.labels, from * pixels, to * pixels),
    [n, ds.window, ds.window],
    'int32',
  );
  return { x, y: tf.oneHot(yIdx, 2).asType('float32'), yIdx };
}

function crossEntropy(probs: tf.Tensor4D, oneHot: tf.Tensor4D): tf.Scalar {
  return tf.tidy(() => {
    const clipped = probs.clipByValue(1e-7, 1 - 1e-7);
    const ce = oneHot.mul(clipped.log()).sum(-1).neg();
    return ce.mean() as tf.Scalar;
  });
}

function pixelAccuracy(model: tf.LayersModel, x: tf.Tensor4D, yIdx: tf.Tensor3D, batch: number): number {
  const n = x.shape[0];
  let correct = 0;
  let total = 0;
  for (let i = 0; i < n; i += batch) {
    const hit = tf.tidy(() => {
      const xb = x.slice([i, 0, 0, 0], [Math.min(batch, n - i), -1, -1, -1]);
      const yb = yIdx.slice([i, 0, 0], [Math.min(batch, n - i), -1, -1]);
      const pred = (model.predict(xb) as tf.Tensor4D).argMax(-1);
      return pred.equal(yb).sum().dataSync()[0];
    });
    correct += hit;
    total += Math.min(batch, n - i) * x.shape[1] * x.shape[2];
  }
  return correct / total;
}

function meanLoss(model: tf.LayersModel, x: tf.Tensor4D, y: tf.Tensor4D, batch: number): number {
  const n = x.shape[0];
  let sum = 0;
  let seen = 0;
  for (let i = 0; i < n; i += batch) {
    const size = Math.min(batch, n - i);
    sum += tf.tidy(() => {
      const xb = x.slice([i, 0, 0, 0], [size, -1, -1, -1]);
      const yb = y.slice([i, 0, 0, 0], [size, -1, -1, -1]);
      return crossEntropy(model.predict(xb) as tf.Tensor4D, yb as tf.Tensor4D).dataSync()[0] * size;
    });
    seen += size;
  }
  return sum / seen;
}

/**
 * Train on a patch directory, holding out ``validationFraction`` of the
 * patches, and checkpoint the epoch with the lowest validation loss.
 * Stops early once ``targetAccuracy`` is reached on the training pixels
 * (the saved checkpoint is still the best-validation one).
 */
export async function trainToy(
  cfg: Fcn8Config,
  patchesDir: string,
  checkpointDir: string,
  options: {
    limit?: number;
    validationFraction?: number;
    targetAccuracy?: number;
    /** Run at least this many epochs before the target-accuracy early exit. */
    minEpochs?: number;
    log?: (line: string) => void;
  } = {},
): Promise<TrainResult> {
  const log = options.log ?? (() => undefined);
  installFastConvFilterGradient();
  const ds = loadPatchDataset(patchesDir, options.limit);
  if (ds.window !== cfg.inputSize) {
    throw new Error(
      `patches are ${ds.window}px but the model expects ${cfg.inputSize}px`,
    );
  }
  const valFraction = options.validationFraction ?? 0.1;
  const nVal = Math.max(1, Math.floor(ds.count * valFraction));
  const nTrain = ds.count - nVal;
  if (nTrain < 1) {
    throw new Error(`patch set too small: ${ds.count} patches`);
  }
  const train = toTensors(ds, 0, nTrain);
  const val = toTensors(ds, nTrain, ds.count);

  const model = buildModel(cfg);
  const optimizer = tf.train.momentum(cfg.learningRate, cfg.momentum);
  const history: EpochRecord[] = [];
  let bestValidationLoss = Infinity;
  let bestEpoch = -1;

  for (let epoch = 0; epoch < cfg.epochs; epoch++) {
    let epochLoss = 0;
    let seen = 0;
    for (let i = 0; i < nTrain; i += cfg.batchSize) {
      const size = Math.min(cfg.batchSize, nTrain - i);
      const stepLoss = tf.tidy(() => {
        const xb = train.x.slice([i, 0, 0, 0], [size, -1, -1, -1]);
        const yb = train.y.slice([i, 0, 0, 0], [size, -1, -1, -1]);
        const loss = optimizer.minimize(
          () => crossEntropy(model.apply(xb, { training: true }) as tf.Tensor4D, yb as tf.Tensor4D),
          true,
        ) as tf.Scalar;
        return loss.dataSync()[0];
      });
      epochLoss += stepLoss * size;
      seen += size;
    }
    const record: EpochRecord = {
      epoch,
      trainLoss: epochLoss / seen,
      validationLoss: meanLoss(model, val.x as tf.Tensor4D, val.y as tf.Tensor4D, cfg.batchSize),
      trainPixelAccuracy: pixelAccuracy(model, train.x as tf.Tensor4D, train.yIdx as tf.Tensor3D, cfg.batchSize),
    };
    history.push(record);
    log(
      `epoch ${epoch}: train loss ${record.trainLoss.toFixed(4)} ` +
        `val loss ${record.validationLoss.toFixed(4)} ` +
        `train pixel acc ${record.trainPixelAccuracy.toFixed(4)}`,
    );
    if (record.validationLoss < bestValidationLoss) {
      bestValidationLoss = record.validationLoss;
      bestEpoch = epoch;
      await saveCheckpoint(model, checkpointDir, {
        inputSize: cfg.inputSize,
        numClasses: cfg.numClasses,
        validationLoss: bestValidationLoss,
        epoch,
      });
    }
    if (
      options.targetAccuracy &&
      record.trainPixelAccuracy > options.targetAccuracy &&
      epoch + 1 >= (options.minEpochs ?? 0)
    ) {
      log(`reached target accuracy at epoch ${epoch}; stopping early`);
      break;
    }
  }
  train.x.dispose();
  train.y.dispose();
  train.yIdx.dispose();
  val.x.dispose();
  val.y.dispose();
  val.yIdx.dispose();
  optimizer.dispose();
  return { history, bestEpoch, bestValidationLoss };
}

interface CliArgs {
  [key: string]: string | boolean;
}

function parseArgs(argv: string[]): CliArgs {
  const out: CliArgs = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith('--')) {
      throw new Error(`unexpected argument ${arg}`);
    }
    const key = arg.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith('--')) {
      out[key] = argv[++i];
    } else {
      out[key] = true;
    }
  }
  return out;
}

export async function main(argv: string[]): Promise<void> {
  const args = parseArgs(argv);
  const patches = args['patches'];
  const out = args['out'];
  if (typeof patches !== 'string' || typeof out !== 'string') {
    throw new Error(
      'usage: train --patches DIR --out CKPT_DIR [--epochs N] [--window S] ' +
        '[--scale F] [--limit N] [--target-accuracy F] [--full]',
    );
  }
  const base = args['full'] ? DEFAULT_CONFIG : toyConfig();
  const cfg: Fcn8Config = {
    ...base,
    inputSize: args['window'] ? Number(args['window']) : base.inputSize,
    epochs: args['epochs'] ? Number(args['epochs']) : base.epochs,
    channelScale: args['scale'] ? Number(args['scale']) : base.channelScale,
  };
  const result = await trainToy(cfg, patches, out, {
    limit: args['limit'] ? Number(args['limit']) : undefined,
    targetAccuracy: args['target-accuracy'] ? Number(args['target-accuracy']) : undefined,
    minEpochs: args['min-epochs'] ? Number(args['min-epochs']) : undefined,
    log: (line) => process.stderr.write(line + '\n'),
  });
  process.stderr.write(
    `best epoch ${result.bestEpoch} (validation loss ${result.bestValidationLoss.toFixed(4)})\n`,
  );
}

if (require.main === module) {
  main(process.argv.slice(2)).catch((err) => {
    process.stderr.write(String(err && err.stack ? err.stack : err) + '\n');
    process.exit(1);
  });
}
