/**
 * Dumps per-label gradient tensors and attention matrices in the NPY
 * format the alignment toolkit reads, plus a JSON manifest with shapes
 * and sampled coordinates for cross-language verification.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';

import {
  decode,
  encode,
  labelGradients,
  Matrix,
  ModelConfig,
  Utterance,
  Weights,
} from './model.js';
import { encodeNpy, NdArray } from './npy.js';
import { Rng } from './rng.js';

export class EmptyTranscript extends Error {}
export class LayerError extends Error {}

export const LAYER_SHIFTS_MS: Record<string, number> = {
  enc_in: 10, // model input frames
  enc_out: 60, // encoder output frames
};

export interface Sample {
  index: [number, number, number];
  value: number;
}

export interface ExportManifest {
  schema: 1;
  utterance_id: string;
  layer_tag: string;
  frame_shift_ms: number;
  S: number;
  T: number;
  D: number;
  files: Record<string, string>;
  tokens: string[];
  samples: Sample[];
}

function toF32Array(rows3: Matrix[], shape: [number, number, number]): NdArray {
  const data = new Float64Array(shape[0] * shape[1] * shape[2]);
  let i = 0;
  for (const mat of rows3) {
    for (const row of mat) {
      for (const v of row) {
        data[i++] = Math.fround(v); // record the exact f32 values we store
      }
    }
  }
  return { shape: [...shape], dtype: '<f4', data };
}

function matrixToF32(mat: Matrix): NdArray {
  const rows = mat.length;
  const cols = mat[0].length;
  const data = new Float64Array(rows * cols);
  let i = 0;
  for (const row of mat) {
    for (const v of row) {
      data[i++] = Math.fround(v);
    }
  }
  return { shape: [rows, cols], dtype: '<f4', data };
}

function sampleCoordinates(
  tensor: NdArray,
  rng: Rng,
  count: number,
): Sample[] {
  const [s, t, d] = tensor.shape;
  const samples: Sample[] = [];
  for (let i = 0; i < count; i++) {
    const index: [number, number, number] = [rng.int(s), rng.int(t), rng.int(d)];
    const flat = (index[0] * t + index[1]) * d + index[2];
    samples.push({ index, value: tensor.data[flat] });
  }
  return samples;
}

export function exportUtterance(
  weights: Weights,
  utterance: Utterance,
  cfg: ModelConfig,
  layerTag: string,
  outDir: string,
  utteranceId = 'utt-0',
): ExportManifest {
  if (utterance.tokens.length === 0) {
    throw new EmptyTranscript('transcript has no labels');
  }
  const shiftMs = LAYER_SHIFTS_MS[layerTag];
  if (shiftMs === undefined) {
    throw new LayerError(
      `layer ${layerTag} not exposed; available: ${Object.keys(LAYER_SHIFTS_MS).join(', ')}`,
    );
  }
  fs.mkdirSync(outDir, { recursive: true });

  const enc = encode(weights, utterance.features, cfg);
  const dec = decode(weights, enc.h, utterance.targets, cfg);

  // one backward per label position: each label's own log-probability
  const perLabel: Matrix[] = [];
  for (let s = 0; s < cfg.labels; s++) {
    const grads = labelGradients(weights, utterance.features, enc, dec, utterance.targets, s, cfg);
    perLabel.push(layerTag === 'enc_in' ? grads.dX : grads.dH);
  }
  const depth = layerTag === 'enc_in' ? cfg.dIn : cfg.dModel;
  const tensor = toF32Array(perLabel, [cfg.labels, cfg.frames, depth]);

  const files = {
    gradients: 'input_grads.npy',
    cross_attention: 'cross_attention.npy',
    self_attention: 'self_attention.npy',
    labels: 'labels.txt',
    manifest: 'manifest.json',
  };
  fs.writeFileSync(path.join(outDir, files.gradients), encodeNpy(tensor));
  fs.writeFileSync(
    path.join(outDir, files.cross_attention),
    encodeNpy(matrixToF32(dec.crossAttention)),
  );
  fs.writeFileSync(
    path.join(outDir, files.self_attention),
    encodeNpy(matrixToF32(enc.selfAttention)),
  );
  fs.writeFileSync(path.join(outDir, files.labels), utterance.tokens.join('\n') + '\n');

  const manifest: ExportManifest = {
    schema: 1,
    utterance_id: utteranceId,
    layer_tag: layerTag,
    frame_shift_ms: shiftMs,
    S: cfg.labels,
    T: cfg.frames,
    D: depth,
    files,
    tokens: utterance.tokens,
    samples: sampleCoordinates(tensor, new Rng(cfg.seed + 101), 5),
  };
  fs.writeFileSync(
    path.join(outDir, files.manifest),
    JSON.stringify(manifest, null, 2) + '\n',
  );
  return manifest;
}
