/** Configuration for the FCN8 reference predictor. */

export interface Fcn8Config {
  /** Square input side in pixels; must be divisible by 32 (five poolings). */
  inputSize: number;
  /** Output channels; text line vs background. */
  numClasses: number;
  /** VGG-16 convolutional block widths before scaling. */
  baseChannels: [number, number, number, number, number];
  /** Multiplier on the block widths; < 1 builds a toy model. */
  channelScale: number;
  learningRate: number;
  momentum: number;
  batchSize: number;
  epochs: number;
  /** Weight init seed so runs are reproducible. */
  seed: number;
}

export const VGG16_CHANNELS: [number, number, number, number, number] = [
  64, 128, 256, 512, 512,
];

/** Convolution layers per VGG-16 block (final classifier discarded). */
export const VGG16_LAYERS_PER_BLOCK = [2, 2, 3, 3, 3];

export const DEFAULT_CONFIG: Fcn8Config = {
  inputSize: 320,
  numClasses: 2,
  baseChannels: VGG16_CHANNELS,
  channelScale: 1.0,
  learningRate: 0.001,
  momentum: 0.9,
  batchSize: 16,
  epochs: 80,
  seed: 0,
};

/**
 * Small widths and input for CPU-friendly tests and the toy overfit run.
 * The learning rate is raised for the tiny regime; DEFAULT_CONFIG keeps the
 * full-scale operating point.
 */
export function toyConfig(overrides: Partial<Fcn8Config> = {}): Fcn8Config {
  return {
    ...DEFAULT_CONFIG,
    inputSize: 32,
    channelScale: 0.125,
    epochs: 30,
    learningRate: 0.03,
    ...overrides,
  };
}

export function validateConfig(cfg: Fcn8Config): void {
  if (cfg.inputSize <= 0 || cfg.inputSize % 32 !== 0) {
    throw new Error(
      `inputSize must be a positive multiple of 32, got ${cfg.inputSize}`,
    );
  }
  if (cfg.numClasses < 2) {
    throw new Error(`numClasses must be >= 2, got ${cfg.numClasses}`);
  }
  if (cfg.channelScale <= 0) {
    throw new Error(`channelScale must be positive, got ${cfg.channelScale}`);
  }
  if (cfg.batchSize < 1 || cfg.epochs < 1) {
    throw new Error('batchSize and epochs must be >= 1');
  }
}
