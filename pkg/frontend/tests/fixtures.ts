/**
 * Test fixtures come from the primary toolkit's CLI: the secondary consumes
 * the Python package only through its external interfaces (`lineseg synth`,
 * `lineseg patches`, PNG files, the predictor wire protocol).
 */

import { execFileSync } from 'child_process';
import * as fs from 'fs';
import * as os from 'os';
import * as path from 'path';

export function linesegAvailable(): boolean {
  try {
    execFileSync('lineseg', ['--version'], { stdio: 'pipe' });
    return true;
  } catch {
    return false;
  }
}

const DENSE_PAGE_SPEC = {
  size: [640, 640],
  lines: [
    { kind: 'straight', start: [30, 30], length: 580 },
    { kind: 'skewed', start: [30, 80], length: 580, angle_deg: 3 },
    { kind: 'straight', start: [30, 150], length: 580 },
    { kind: 'curved', start: [30, 210], length: 580, amplitude: 12, period: 300 },
    { kind: 'straight', start: [30, 280], length: 580 },
    { kind: 'skewed', start: [30, 330], length: 580, angle_deg: -3 },
    { kind: 'straight', start: [30, 400], length: 580 },
    { kind: 'curved', start: [30, 460], length: 580, amplitude: 12, period: 300 },
    { kind: 'straight', start: [30, 530], length: 580 },
    { kind: 'straight', start: [30, 580], length: 580 },
  ].map((line) => ({
    segment_length: 16,
    gap: 6,
    stroke_thickness: 9,
    ...line,
  })),
};

/** Synthesize a page and sample `count` window-sized patches from it. */
export function makePatchFixture(count: number, window: number, seed = 1): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'fcn-patches-'));
  const specPath = path.join(dir, 'spec.json');
  fs.writeFileSync(specPath, JSON.stringify(DENSE_PAGE_SPEC));
  const page = path.join(dir, 'page.png');
  const gt = path.join(dir, 'gt.png');
  execFileSync('lineseg', [
    'synth', '--spec', specPath, '--out-page', page, '--out-gt', gt, '--seed', '0',
  ]);
  const patches = path.join(dir, 'patches');
  execFileSync('lineseg', [
    'patches', '--page', page, '--labels', gt, '--count', String(count),
    '--window', String(window), '--seed', String(seed), '--out', patches,
  ]);
  return patches;
}
