/**
 * FCN8 built on a VGG-16 encoder.
 *
 * The encoder is the five VGG convolutional blocks (3x3 convs + max pool,
 * the fully connected classifier discarded). The decoder scores pool3,
 * pool4 and the final block with 1x1 convolutions, upsamples the final
 * score by 4 and the pool4 score by 2 so all three sit at stride 8, adds
 * them, and upsamples the fused map by 8 back to the input size. Output is
 * a per-pixel class distribution of shape [H, W, numClasses].
 */

import * as tf from '@tensorflow/tfjs';

import { Fcn8Config, VGG16_LAYERS_PER_BLOCK, validateConfig } from './config';

/**
 * Bilinear interpolation weights for a transpose convolution of the given
 * upsampling factor (kernel 2f), one identity path per class: the standard
 * FCN decoder initialization, so training starts from a meaningful
 * upsampler instead of noise.
 */
function bilinearKernel(factor: number, classes: number): tf.Tensor4D {
  const size = 2 * factor;
  const center = (size - 1) / 2;
  const values = new Float32Array(size * size * classes * classes);
  for (let y = 0; y < size; y++) {
    for (let x = 0; x < size; x++) {
      const w =
        (1 - Math.abs(y - center) / factor) * (1 - Math.abs(x - center) / factor);
      for (let c = 0; c < classes; c++) {
        // layers kernel layout: [kh, kw, outChannels, inChannels]
        values[((y * size + x) * classes + c) * classes + c] = w;
      }
    }
  }
  return tf.tensor4d(values, [size, size, classes, classes]);
}

export function buildModel(cfg: Fcn8Config): tf.LayersModel {
  validateConfig(cfg);
  let seed = cfg.seed;
  const init = () =>
    tf.initializers.heNormal({ seed: seed++ });

  const input = tf.input({
    shape: [cfg.inputSize, cfg.inputSize, 1],
    name: 'patch',
  });

  let x: tf.SymbolicTensor = input;
  const poolOutputs: tf.SymbolicTensor[] = [];
  cfg.baseChannels.forEach((base, block) => {
    const filters = Math.max(1, Math.round(base * cfg.channelScale));
    for (let i = 0; i < VGG16_LAYERS_PER_BLOCK[block]; i++) {
      x = tf.layers
        .conv2d({
          filters,
          kernelSize: 3,
          padding: 'same',
          activation: 'relu',
          kernelInitializer: init(),
          name: `block${block + 1}_conv${i + 1}`,
        })
        .apply(x) as tf.SymbolicTensor;
    }
    x = tf.layers
      .maxPooling2d({ poolSize: 2, strides: 2, name: `block${block + 1}_pool` })
      .apply(x) as tf.SymbolicTensor;
    poolOutputs.push(x);
  });

  const [, , pool3, pool4, pool5] = poolOutputs;
  // Skip scores start at zero (classic FCN), so the decoder initially follows
  // the deepest features alone and the skips fade in during training.
  const score = (src: tf.SymbolicTensor, name: string, zero = false) =>
    tf.layers
      .conv2d({
        filters: cfg.numClasses,
        kernelSize: 1,
        kernelInitializer: zero ? tf.initializers.zeros() : init(),
        name,
      })
      .apply(src) as tf.SymbolicTensor;

  const upsample = (src: tf.SymbolicTensor, factor: number, name: string) =>
    tf.layers
      .conv2dTranspose({
        filters: cfg.numClasses,
        kernelSize: 2 * factor,
        strides: factor,
        padding: 'same',
        kernelInitializer: init(),
        name,
      })
      .apply(src) as tf.SymbolicTensor;

  const finalUp4 = upsample(score(pool5, 'score_final'), 4, 'up_final_x4');
  const pool4Up2 = upsample(score(pool4, 'score_pool4', true), 2, 'up_pool4_x2');
  const pool3Score = score(pool3, 'score_pool3', true);

  const fused = tf.layers
    .add({ name: 'fuse_stride8' })
    .apply([finalUp4, pool4Up2, pool3Score]) as tf.SymbolicTensor;

  const logits = upsample(fused, 8, 'up_fused_x8');
  const probs = tf.layers
    .softmax({ axis: -1, name: 'class_probs' })
    .apply(logits) as tf.SymbolicTensor;

  const model = tf.model({ inputs: input, outputs: probs, name: 'fcn8' });
  const [, h, w, c] = model.outputs[0].shape;
  if (h !== cfg.inputSize || w !== cfg.inputSize || c !== cfg.numClasses) {
    throw new Error(
      `decoder produced ${h}x${w}x${c}, expected ` +
        `${cfg.inputSize}x${cfg.inputSize}x${cfg.numClasses}`,
    );
  }
  for (const [name, factor] of [
    ['up_final_x4', 4],
    ['up_pool4_x2', 2],
    ['up_fused_x8', 8],
  ] as const) {
    const layer = model.getLayer(name);
    const [, bias] = layer.getWeights();
    const kernel = bilinearKernel(factor, cfg.numClasses);
    layer.setWeights([kernel, tf.zerosLike(bias)]);
    kernel.dispose();
  }
  return model;
}

/** Square input side the model was built for. */
export function modelInputSide(model: tf.LayersModel): number {
  const side = model.inputs[0].shape[1];
  if (typeof side !== 'number') {
    throw new Error('model has no static input size');
  }
  return side;
}

/** Per-pixel foreground probability for one patch (values in [0, 1]). */
export function predictPatch(model: tf.LayersModel, patch: Float32Array, side: number): Float32Array {
  const expected = modelInputSide(model);
  if (side !== expected) {
    throw new Error(`model expects ${expected}x${expected} patches, got ${side}x${side}`);
  }
  return tf.tidy(() => {
    const x = tf.tensor4d(patch, [1, side, side, 1]);
    const probs = model.predict(x) as tf.Tensor4D;
    const fg = probs.slice([0, 0, 0, 1], [1, side, side, 1]);
    return fg.dataSync() as Float32Array;
  });
}
