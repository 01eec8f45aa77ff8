/** Standalone exporter: bundled tiny reference model -> NPY artifacts. */

import { initWeights, ModelConfig, synthUtterance } from './model.js';
import { exportUtterance } from './export.js';

function parseArgs(argv: string[]): Record<string, string> {
  const args: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    if (!argv[i].startsWith('--') || argv[i + 1] === undefined) {
      throw new Error(`bad argument near ${argv[i]}`);
    }
    args[argv[i].slice(2)] = argv[i + 1];
  }
  return args;
}

function main(): number {
  let args: Record<string, string>;
  try {
    args = parseArgs(process.argv.slice(2));
  } catch (err) {
    console.error(String(err));
    console.error(
      'usage: node dist/main.js --out-dir DIR [--seed N] [--layer enc_in|enc_out] ' +
        '[--frames T] [--labels S] [--vocab V]',
    );
    return 2;
  }
  const outDir = args['out-dir'];
  if (!outDir) {
    console.error('--out-dir is required');
    return 2;
  }
  const cfg: ModelConfig = {
    frames: Number(args['frames'] ?? 12),
    labels: Number(args['labels'] ?? 4),
    vocab: Number(args['vocab'] ?? 8),
    dIn: 5,
    dModel: 6,
    seed: Number(args['seed'] ?? 0),
  };
  const layer = args['layer'] ?? 'enc_in';
  const weights = initWeights(cfg);
  const utterance = synthUtterance(cfg, cfg.seed);
  try {
    const manifest = exportUtterance(weights, utterance, cfg, layer, outDir, `utt-${cfg.seed}`);
    console.log(
      `exported ${manifest.S}x${manifest.T}x${manifest.D} gradient tensor ` +
        `(layer ${manifest.layer_tag}, ${manifest.frame_shift_ms} ms shift) to ${outDir}`,
    );
    return 0;
  } catch (err) {
    console.error(String(err));
    return 1;
  }
}

process.exit(main());
