import { describe, expect, it } from 'vitest';

import {
  decode,
  encode,
  initWeights,
  labelGradients,
  ModelConfig,
  synthUtterance,
} from '../src/model.js';

const cfg: ModelConfig = { frames: 10, labels: 4, vocab: 8, dIn: 5, dModel: 6, seed: 3 };

function labelLogProb(
  features: number[][],
  targets: number[],
  s: number,
  weights = initWeights(cfg),
): number {
  const enc = encode(weights, features, cfg);
  const dec = decode(weights, enc.h, targets, cfg);
  return dec.logProbs[s][targets[s]];
}

describe('reference model', () => {
  it('is deterministic per seed', () => {
    const a = initWeights(cfg);
    const b = initWeights(cfg);
    expect(a.wIn).toEqual(b.wIn);
    expect(synthUtterance(cfg, 5)).toEqual(synthUtterance(cfg, 5));
  });

  it('normalizes distributions', () => {
    const weights = initWeights(cfg);
    const utt = synthUtterance(cfg, 1);
    const enc = encode(weights, utt.features, cfg);
    const dec = decode(weights, enc.h, utt.targets, cfg);
    for (const row of dec.probs) {
      expect(row.reduce((a, b) => a + b, 0)).toBeCloseTo(1.0, 9);
    }
    for (const row of dec.crossAttention) {
      expect(row.reduce((a, b) => a + b, 0)).toBeCloseTo(1.0, 9);
    }
    for (const row of enc.selfAttention) {
      expect(row.reduce((a, b) => a + b, 0)).toBeCloseTo(1.0, 9);
    }
  });

  it('input gradients match central finite differences', () => {
    const weights = initWeights(cfg);
    const utt = synthUtterance(cfg, 2);
    const enc = encode(weights, utt.features, cfg);
    const dec = decode(weights, enc.h, utt.targets, cfg);
    const eps = 1e-6;
    for (const s of [0, 2, cfg.labels - 1]) {
      const grads = labelGradients(weights, utt.features, enc, dec, utt.targets, s, cfg);
      for (const [t, d] of [
        [0, 0],
        [3, 2],
        [9, 4],
      ]) {
        const keep = utt.features[t][d];
        utt.features[t][d] = keep + eps;
        const up = labelLogProb(utt.features, utt.targets, s, weights);
        utt.features[t][d] = keep - eps;
        const down = labelLogProb(utt.features, utt.targets, s, weights);
        utt.features[t][d] = keep;
        const fd = (up - down) / (2 * eps);
        const an = grads.dX[t][d];
        expect(Math.abs(an - fd) / Math.max(Math.abs(an), Math.abs(fd), 1e-6)).toBeLessThan(
          1e-4,
        );
      }
    }
  });

  it('encoder-output gradients match finite differences through the decoder', () => {
    const weights = initWeights(cfg);
    const utt = synthUtterance(cfg, 4);
    const enc = encode(weights, utt.features, cfg);
    const dec = decode(weights, enc.h, utt.targets, cfg);
    const s = 1;
    const grads = labelGradients(weights, utt.features, enc, dec, utt.targets, s, cfg);
    const eps = 1e-6;
    for (const [t, j] of [
      [0, 0],
      [5, 3],
      [9, 5],
    ]) {
      const keep = enc.h[t][j];
      enc.h[t][j] = keep + eps;
      const up = decode(weights, enc.h, utt.targets, cfg).logProbs[s][utt.targets[s]];
      enc.h[t][j] = keep - eps;
      const down = decode(weights, enc.h, utt.targets, cfg).logProbs[s][utt.targets[s]];
      enc.h[t][j] = keep;
      const fd = (up - down) / (2 * eps);
      const an = grads.dH[t][j];
      expect(Math.abs(an - fd) / Math.max(Math.abs(an), Math.abs(fd), 1e-6)).toBeLessThan(
        1e-4,
      );
    }
  });

  it('synthesizes transcripts without adjacent repeats', () => {
    for (let seed = 0; seed < 10; seed++) {
      const utt = synthUtterance(cfg, seed);
      expect(utt.targets.length).toBe(cfg.labels);
      expect(utt.targets[cfg.labels - 1]).toBe(1); // EOS
      const real = utt.targets.slice(0, -1);
      for (let i = 1; i < real.length; i++) {
        expect(real[i]).not.toBe(real[i - 1]);
      }
    }
  });
});
