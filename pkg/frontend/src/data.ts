/**
 * Loader for patch directories written by the `lineseg patches` subcommand:
 * manifest.json plus patch_*_page.png (8-bit binary) / patch_*_labels.png
 * (16-bit label ids). Labels collapse to two classes: any line id vs
 * background.
 */

import * as fs from 'fs';
import * as path from 'path';

import { decodeGrayPng, decodeMaskPng } from './png';

export interface PatchDataset {
  window: number;
  count: number;
  /** Patch pixels as 0/1 floats, [count * window * window]. */
  images: Float32Array;
  /** Per-pixel class (1 = text line), same layout. */
  labels: Uint8Array;
}

interface ManifestEntry {
  index: number;
  page_file: string;
  labels_file: string;
}

export function loadPatchDataset(dir: string, limit?: number): PatchDataset {
  const manifestPath = path.join(dir, 'manifest.json');
  if (!fs.existsSync(manifestPath)) {
    throw new Error(`no manifest.json in ${dir}; run 'lineseg patches' first`);
  }
  const manifest = JSON.parse(fs.readFileSync(manifestPath, 'utf-8'));
  const entries: ManifestEntry[] = manifest.patches ?? [];
  if (entries.length === 0) {
    throw new Error(`manifest in ${dir} lists no patches`);
  }
  const window: number = manifest.window;
  const used = limit ? entries.slice(0, limit) : entries;
  const pixels = window * window;
  const images = new Float32Array(used.length * pixels);
  const labels = new Uint8Array(used.length * pixels);
  used.forEach((entry, i) => {
    const page = decodeMaskPng(fs.readFileSync(path.join(dir, entry.page_file)));
    const lab = decodeGrayPng(fs.readFileSync(path.join(dir, entry.labels_file)));
    if (page.width !== window || page.height !== window || lab.width !== window) {
      throw new Error(`patch ${entry.index} is not ${window}x${window}`);
    }
    for (let p = 0; p < pixels; p++) {
      images[i * pixels + p] = page.mask[p];
      labels[i * pixels + p] = lab.data[p] > 0 ? 1 : 0;
    }
  });
  return { window, count: used.length, images, labels };
}

/** Fraction of text-line pixels; sanity guard against degenerate fixtures. */
export function foregroundFraction(ds: PatchDataset): number {
  let fg = 0;
  for (let i = 0; i < ds.labels.length; i++) {
    fg += ds.labels[i];
  }
  return fg / ds.labels.length;
}
