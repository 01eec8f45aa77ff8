/**
 * Minimal NPY v1.0 writer/reader for float32/float64 arrays of rank 2 or 3.
 *
 * Layout matches the reference implementation byte for byte: magic,
 * version 1.0, little-endian u16 header length, a Python dict literal
 * padded with spaces so the data section starts 64-byte aligned, then the
 * raw C-order little-endian payload.
 */

const MAGIC = Buffer.from([0x93, 0x4e, 0x55, 0x4d, 0x50, 0x59]); // \x93NUMPY

export type Dtype = '<f4' | '<f8';

export interface NdArray {
  shape: number[];
  dtype: Dtype;
  /** flat C-order values; stored via Float32Array when dtype is <f4 */
  data: Float64Array;
}

function elementCount(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function encodeNpy(arr: NdArray): Buffer {
  if (arr.shape.length < 2 || arr.shape.length > 3) {
    throw new Error(`rank ${arr.shape.length} not in {2, 3}`);
  }
  if (arr.shape.some((d) => d <= 0)) {
    throw new Error(`non-positive dimension in shape ${arr.shape}`);
  }
  if (elementCount(arr.shape) !== arr.data.length) {
    throw new Error('shape does not match data length');
  }
  const shapeRepr = `(${arr.shape.join(', ')})`;
  let header = `{'descr': '${arr.dtype}', 'fortran_order': False, 'shape': ${shapeRepr}, }`;
  const base = MAGIC.length + 2 + 2;
  const pad = 64 - ((base + header.length + 1) % 64);
  header = header + ' '.repeat(pad) + '\n';

  const head = Buffer.alloc(base + header.length);
  MAGIC.copy(head, 0);
  head[6] = 1;
  head[7] = 0;
  head.writeUInt16LE(header.length, 8);
  head.write(header, 10, 'latin1');

  const itemSize = arr.dtype === '<f4' ? 4 : 8;
  const payload = Buffer.alloc(arr.data.length * itemSize);
  for (let i = 0; i < arr.data.length; i++) {
    if (arr.dtype === '<f4') {
      payload.writeFloatLE(arr.data[i], i * 4);
    } else {
      payload.writeDoubleLE(arr.data[i], i * 8);
    }
  }
  return Buffer.concat([head, payload]);
}

export function decodeNpy(buf: Buffer): NdArray {
  if (!buf.subarray(0, 6).equals(MAGIC)) {
    throw new Error('not an NPY file');
  }
  if (buf[6] !== 1 || buf[7] !== 0) {
    throw new Error(`unsupported NPY version ${buf[6]}.${buf[7]}`);
  }
  const headerLen = buf.readUInt16LE(8);
  const header = buf.subarray(10, 10 + headerLen).toString('latin1');
  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeText = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (!descr || !fortran || shapeText === undefined) {
    throw new Error('unparseable NPY header');
  }
  if (fortran === 'True') {
    throw new Error('Fortran order not supported');
  }
  if (descr !== '<f4' && descr !== '<f8') {
    throw new Error(`unsupported dtype ${descr}`);
  }
  const shape = shapeText
    .split(',')
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map(Number);
  const n = elementCount(shape);
  const itemSize = descr === '<f4' ? 4 : 8;
  const data = new Float64Array(n);
  const start = 10 + headerLen;
  for (let i = 0; i < n; i++) {
    data[i] =
      descr === '<f4' ? buf.readFloatLE(start + 4 * i) : buf.readDoubleLE(start + 8 * i);
  }
  return { shape, dtype: descr, data };
}
