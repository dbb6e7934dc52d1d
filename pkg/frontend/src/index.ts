export { DEFAULT_CONFIG, Fcn8Config, toyConfig, validateConfig } from './config';
export { buildModel, modelInputSide, predictPatch } from './model';
export { loadPatchDataset, foregroundFraction, PatchDataset } from './data';
export { saveCheckpoint, loadCheckpoint, CheckpointMeta } from './checkpoint';
export { trainToy, TrainResult, EpochRecord } from './train';
export { identityResponder, modelResponder, serveOnce, serveStream } from './serve';
export {
  gradientCheck,
  randomParams,
  truncatedGradients,
  truncatedLoss,
} from './gradcheck';
export { decodeGrayPng, decodeMaskPng, encodeMaskPng } from './png';
