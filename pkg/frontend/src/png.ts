/**
 * Grayscale PNG helpers for the predictor wire format and patch files.
 *
 * Binary pages travel as 8-bit grayscale PNG (foreground = 255); label
 * patches are 16-bit grayscale with ids 1..65535, which must not be
 * rescaled to 8 bits (small ids would vanish), hence skipRescale.
 */

import { PNG } from 'pngjs';

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major samples; 0..255 for 8-bit sources, 0..65535 for 16-bit. */
  data: Uint16Array;
}

export function decodeGrayPng(buffer: Buffer): GrayImage {
  const png = PNG.sync.read(buffer, { skipRescale: true });
  const n = png.width * png.height;
  const data = new Uint16Array(n);
  for (let i = 0; i < n; i++) {
    data[i] = png.data[i * 4]; // gray replicated into RGBA; take R
  }
  return { width: png.width, height: png.height, data };
}

/** Binary mask (foreground = value >= 128) from an 8-bit grayscale PNG. */
export function decodeMaskPng(buffer: Buffer): { width: number; height: number; mask: Uint8Array } {
  const img = decodeGrayPng(buffer);
  const mask = new Uint8Array(img.data.length);
  for (let i = 0; i < img.data.length; i++) {
    mask[i] = img.data[i] >= 128 ? 1 : 0;
  }
  return { width: img.width, height: img.height, mask };
}

/** Encode a binary mask as 8-bit grayscale PNG (foreground = 255). */
export function encodeMaskPng(mask: Uint8Array, width: number, height: number): Buffer {
  if (mask.length !== width * height) {
    throw new Error(`mask length ${mask.length} != ${width}x${height}`);
  }
  const png = new PNG({ width, height, colorType: 0, inputColorType: 0, bitDepth: 8 });
  const bytes = new Uint8Array(width * height);
  for (let i = 0; i < mask.length; i++) {
    bytes[i] = mask[i] ? 255 : 0;
  }
  png.data = Buffer.from(bytes) as PNG['data'];
  return PNG.sync.write(png, { colorType: 0, inputColorType: 0, bitDepth: 8 });
}
