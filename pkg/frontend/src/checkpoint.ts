/**
 * Directory-based checkpoints (model.json + weights.bin + meta.json)
 * without the tfjs-node filesystem handlers.
 */

import * as fs from 'fs';
import * as path from 'path';

import * as tf from '@tensorflow/tfjs';

export interface CheckpointMeta {
  inputSize: number;
  numClasses: number;
  validationLoss: number | null;
  epoch: number | null;
}

export async function saveCheckpoint(
  model: tf.LayersModel,
  dir: string,
  meta: CheckpointMeta,
): Promise<void> {
  fs.mkdirSync(dir, { recursive: true });
  await model.save(
    tf.io.withSaveHandler(async (artifacts) => {
      const { weightData, weightSpecs, modelTopology } = artifacts;
      fs.writeFileSync(
        path.join(dir, 'model.json'),
        JSON.stringify({ modelTopology, weightSpecs }),
      );
      const data = weightData as ArrayBuffer;
      fs.writeFileSync(path.join(dir, 'weights.bin'), Buffer.from(data));
      return { modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' } };
    }),
  );
  fs.writeFileSync(path.join(dir, 'meta.json'), JSON.stringify(meta, null, 2));
}

export async function loadCheckpoint(dir: string): Promise<{ model: tf.LayersModel; meta: CheckpointMeta }> {
  const modelPath = path.join(dir, 'model.json');
  if (!fs.existsSync(modelPath)) {
    throw new Error(`no checkpoint at ${dir}`);
  }
  const { modelTopology, weightSpecs } = JSON.parse(fs.readFileSync(modelPath, 'utf-8'));
  const weightData = fs.readFileSync(path.join(dir, 'weights.bin'));
  const model = await tf.loadLayersModel(
    tf.io.fromMemory({
      modelTopology,
      weightSpecs,
      weightData: weightData.buffer.slice(
        weightData.byteOffset,
        weightData.byteOffset + weightData.byteLength,
      ),
    }),
  );
  const meta: CheckpointMeta = JSON.parse(
    fs.readFileSync(path.join(dir, 'meta.json'), 'utf-8'),
  );
  return { model, meta };
}
