/**
 * Tiny reference encoder-decoder with hand-written backward passes.
 *
 * Stands in for an externally trained sequence model: the exporter hooks
 * its layers and dumps per-label gradients of each label's log-probability
 * w.r.t. a chosen layer input, plus the cross- and self-attention
 * matrices. Everything is plain number[][] math in float64; correctness
 * of the gradients is guarded by finite-difference tests.
 */

import { Rng } from './rng.js';

export const BOS_ID = 0;
export const EOS_ID = 1;

export interface ModelConfig {
  frames: number; // T
  labels: number; // S, including the EOS position
  vocab: number; // V, ids 0 = BOS, 1 = EOS, 2.. real
  dIn: number;
  dModel: number;
  seed: number;
}

export type Matrix = number[][]; // row-major

export interface Weights {
  wIn: Matrix;
  bIn: number[];
  wQ: Matrix;
  wK: Matrix;
  wV: Matrix;
  emb: Matrix;
  stepEmb: Matrix;
  wAh: Matrix;
  wAq: Matrix;
  bA: number[];
  vA: number[];
  wC: Matrix;
  wQr: Matrix;
  bR: number[];
  wOut: Matrix;
  bOut: number[];
}

export function zeros(rows: number, cols: number): Matrix {
  return Array.from({ length: rows }, () => new Array<number>(cols).fill(0));
}

function randMatrix(rng: Rng, rows: number, cols: number, scale: number): Matrix {
  return Array.from({ length: rows }, () =>
    Array.from({ length: cols }, () => scale * rng.normal()),
  );
}

export function matmul(a: Matrix, b: Matrix): Matrix {
  const out = zeros(a.length, b[0].length);
  for (let i = 0; i < a.length; i++) {
    for (let k = 0; k < b.length; k++) {
      const aik = a[i][k];
      if (aik === 0) continue;
      for (let j = 0; j < b[0].length; j++) {
        out[i][j] += aik * b[k][j];
      }
    }
  }
  return out;
}

export function transpose(a: Matrix): Matrix {
  const out = zeros(a[0].length, a.length);
  for (let i = 0; i < a.length; i++) {
    for (let j = 0; j < a[0].length; j++) {
      out[j][i] = a[i][j];
    }
  }
  return out;
}

function rowSoftmax(a: Matrix): Matrix {
  return a.map((row) => {
    const m = Math.max(...row);
    const exps = row.map((v) => Math.exp(v - m));
    const sum = exps.reduce((x, y) => x + y, 0);
    return exps.map((v) => v / sum);
  });
}

function tanhMat(a: Matrix): Matrix {
  return a.map((row) => row.map(Math.tanh));
}

function positionFeatures(frames: number, dim: number): Matrix {
  const out = zeros(frames, dim);
  for (let t = 0; t < frames; t++) {
    for (let k = 0; k < dim; k++) {
      const angle = t / Math.pow(200.0, (2 * Math.floor(k / 2)) / dim);
      out[t][k] = k % 2 === 0 ? Math.sin(angle) : Math.cos(angle);
    }
  }
  return out;
}

export function initWeights(cfg: ModelConfig): Weights {
  const rng = new Rng(cfg.seed * 2654435761 + 17);
  const dm = cfg.dModel;
  const sc = (rows: number) => 1.0 / Math.sqrt(rows);
  return {
    wIn: randMatrix(rng, cfg.dIn, dm, sc(cfg.dIn)),
    bIn: new Array(dm).fill(0),
    wQ: randMatrix(rng, dm, dm, sc(dm)),
    wK: randMatrix(rng, dm, dm, sc(dm)),
    wV: randMatrix(rng, dm, dm, sc(dm)),
    emb: randMatrix(rng, cfg.vocab, dm, 0.5),
    stepEmb: randMatrix(rng, cfg.labels, dm, 0.5),
    wAh: randMatrix(rng, dm, dm, sc(dm)),
    wAq: randMatrix(rng, dm, dm, sc(dm)),
    bA: new Array(dm).fill(0),
    vA: Array.from({ length: dm }, () => rng.normal() / Math.sqrt(dm)),
    wC: randMatrix(rng, dm, dm, sc(dm)),
    wQr: randMatrix(rng, dm, dm, sc(dm)),
    bR: new Array(dm).fill(0),
    wOut: randMatrix(rng, dm, cfg.vocab, sc(dm)),
    bOut: new Array(cfg.vocab).fill(0),
  };
}

export interface EncodeResult {
  p: Matrix;
  selfAttention: Matrix; // T x T weights
  vSelf: Matrix;
  h: Matrix; // T x dModel encoder output
}

export interface DecodeResult {
  q: Matrix; // S x dModel
  mPre: Matrix[]; // per step: T x dModel
  crossAttention: Matrix; // S x T
  ctx: Matrix;
  u: Matrix;
  logits: Matrix;
  logProbs: Matrix; // S x V
  probs: Matrix;
  prevIds: number[];
}

export function encode(weights: Weights, x: Matrix, cfg: ModelConfig): EncodeResult {
  const pos = positionFeatures(cfg.frames, cfg.dModel);
  const p = matmul(x, weights.wIn).map((row, t) =>
    row.map((v, j) => v + pos[t][j] + weights.bIn[j]),
  );
  const qa = matmul(p, weights.wQ);
  const ka = matmul(p, weights.wK);
  const scale = 1.0 / Math.sqrt(cfg.dModel);
  const energy = matmul(qa, transpose(ka)).map((row) => row.map((v) => v * scale));
  const selfAttention = rowSoftmax(energy);
  const vSelf = matmul(p, weights.wV);
  const z = matmul(selfAttention, vSelf);
  const h = tanhMat(p.map((row, t) => row.map((v, j) => v + z[t][j])));
  return { p, selfAttention, vSelf, h };
}

export function decode(
  weights: Weights,
  h: Matrix,
  targets: number[],
  cfg: ModelConfig,
): DecodeResult {
  const prevIds = [BOS_ID, ...targets.slice(0, -1)];
  const q = tanhMat(
    prevIds.map((id, s) => weights.emb[id].map((v, j) => v + weights.stepEmb[s][j])),
  );
  const hAh = matmul(h, weights.wAh);
  const qAq = matmul(q, weights.wAq);
  const mPre: Matrix[] = [];
  const e = zeros(cfg.labels, cfg.frames);
  for (let s = 0; s < cfg.labels; s++) {
    const rows = zeros(cfg.frames, cfg.dModel);
    for (let t = 0; t < cfg.frames; t++) {
      for (let j = 0; j < cfg.dModel; j++) {
        rows[t][j] = hAh[t][j] + qAq[s][j] + weights.bA[j];
      }
      e[s][t] = rows[t].reduce((acc, v, j) => acc + Math.tanh(v) * weights.vA[j], 0);
    }
    mPre.push(rows);
  }
  const crossAttention = rowSoftmax(e);
  const ctx = matmul(crossAttention, h);
  const qWqr = matmul(q, weights.wQr);
  const u = tanhMat(
    matmul(ctx, weights.wC).map((row, s) =>
      row.map((v, j) => v + qWqr[s][j] + weights.bR[j]),
    ),
  );
  const logits = matmul(u, weights.wOut).map((row) =>
    row.map((v, j) => v + weights.bOut[j]),
  );
  const logProbs = logits.map((row) => {
    const m = Math.max(...row);
    const lse = m + Math.log(row.reduce((acc, v) => acc + Math.exp(v - m), 0));
    return row.map((v) => v - lse);
  });
  const probs = logProbs.map((row) => row.map(Math.exp));
  return { q, mPre, crossAttention, ctx, u, logits, logProbs, probs, prevIds };
}

export interface LabelGradients {
  dX: Matrix; // T x dIn: d logp(label_s) / d input
  dH: Matrix; // T x dModel: d logp(label_s) / d encoder output
}

/** Backward pass of one label's log-probability objective. */
export function labelGradients(
  weights: Weights,
  x: Matrix,
  enc: EncodeResult,
  dec: DecodeResult,
  targets: number[],
  s: number,
  cfg: ModelConfig,
): LabelGradients {
  const dm = cfg.dModel;
  const t_ = cfg.frames;

  // d objective / d logits, only row s is active
  const dLogits = dec.probs[s].map((p, j) => (j === targets[s] ? 1 - p : -p));
  const dU = weights.wOut.map((row) => row.reduce((acc, w, j) => acc + w * dLogits[j], 0));
  const dUPre = dU.map((v, j) => v * (1 - dec.u[s][j] * dec.u[s][j]));
  const dCtx = weights.wC.map((row) => row.reduce((acc, w, j) => acc + w * dUPre[j], 0));

  // context: ctx[s] = sum_t alpha[s][t] * h[t]
  const alpha = dec.crossAttention[s];
  const dAlpha = new Array(t_).fill(0);
  const dH = zeros(t_, dm);
  for (let t = 0; t < t_; t++) {
    for (let j = 0; j < dm; j++) {
      dAlpha[t] += enc.h[t][j] * dCtx[j];
      dH[t][j] += alpha[t] * dCtx[j];
    }
  }
  // softmax over frames
  const dot = alpha.reduce((acc, a, t) => acc + a * dAlpha[t], 0);
  const dE = alpha.map((a, t) => a * (dAlpha[t] - dot));
  // e[s][t] = vA . tanh(mPre[s][t])
  for (let t = 0; t < t_; t++) {
    if (dE[t] === 0) continue;
    const dMPre = dec.mPre[s][t].map((v, j) => {
      const m = Math.tanh(v);
      return dE[t] * weights.vA[j] * (1 - m * m);
    });
    // mPre = h wAh + q wAq + bA: only the h path reaches the encoder
    for (let j = 0; j < dm; j++) {
      for (let k = 0; k < dm; k++) {
        dH[t][k] += dMPre[j] * weights.wAh[k][j];
      }
    }
  }

  // encoder backward: h = tanh(p + A vSelf)
  const dR = dH.map((row, t) => row.map((v, j) => v * (1 - enc.h[t][j] * enc.h[t][j])));
  const dP = dR.map((row) => row.slice());
  // z = A vSelf
  const dA = matmul(dR, transpose(enc.vSelf));
  const dVSelf = matmul(transpose(enc.selfAttention), dR);
  // self-attention softmax
  const dEnergy = zeros(t_, t_);
  for (let i = 0; i < t_; i++) {
    const a = enc.selfAttention[i];
    const rowDot = a.reduce((acc, v, j) => acc + v * dA[i][j], 0);
    for (let j = 0; j < t_; j++) {
      dEnergy[i][j] = (a[j] * (dA[i][j] - rowDot)) / Math.sqrt(dm);
    }
  }
  const qa = matmul(enc.p, weights.wQ);
  const ka = matmul(enc.p, weights.wK);
  const dQa = matmul(dEnergy, ka);
  const dKa = matmul(transpose(dEnergy), qa);
  const addInto = (target: Matrix, source: Matrix) => {
    for (let i = 0; i < target.length; i++) {
      for (let j = 0; j < target[0].length; j++) {
        target[i][j] += source[i][j];
      }
    }
  };
  addInto(dP, matmul(dQa, transpose(weights.wQ)));
  addInto(dP, matmul(dKa, transpose(weights.wK)));
  addInto(dP, matmul(dVSelf, transpose(weights.wV)));

  const dX = matmul(dP, transpose(weights.wIn));
  return { dX, dH };
}

/** One synthetic utterance: prototype features with per-label segments. */
export interface Utterance {
  features: Matrix; // T x dIn
  targets: number[]; // length S, ends with EOS_ID
  tokens: string[]; // length S-1
}

export function synthUtterance(cfg: ModelConfig, seed: number): Utterance {
  const rng = new Rng(seed * 69069 + 1);
  const protos = Array.from({ length: cfg.vocab + 1 }, () =>
    Array.from({ length: cfg.dIn }, () => rng.normal()),
  );
  const nReal = cfg.labels - 1;
  const ids: number[] = [];
  while (ids.length < nReal) {
    const cand = 2 + rng.int(cfg.vocab - 2);
    if (ids.length > 0 && cand === ids[ids.length - 1]) continue;
    ids.push(cand);
  }
  const lead = 2;
  const usable = cfg.frames - lead - 1;
  const base = Math.floor(usable / nReal);
  const features: Matrix = [];
  for (let t = 0; t < cfg.frames; t++) {
    const seg = Math.floor((t - lead) / base);
    const inSegment = t >= lead && seg < nReal;
    features.push(protos[inSegment ? ids[seg] : cfg.vocab].slice());
  }
  return {
    features,
    targets: [...ids, EOS_ID],
    tokens: ids.map((id) => `w${String(id).padStart(2, '0')}`),
  };
}
