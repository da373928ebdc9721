/**
 * Minimal MAT-file (level 5) reader: enough to pull 2-D numeric matrices out
 * of the publicly distributed recording files. Handles the 128-byte header,
 * small-element tags, zlib-compressed elements and the numeric storage types
 * MATLAB actually emits for double matrices. Cell arrays, structs, sparse and
 * complex data are out of scope.
 */

import * as zlib from 'node:zlib';

export class MatFormatError extends Error {}

export interface MatMatrix {
    name: string;
    rows: number;
    cols: number;
    /** column-major, as stored on disk */
    data: Float64Array;
    get(i: number, j: number): number;
}

// data element types (mi*)
const MI_INT8 = 1;
const MI_UINT8 = 2;
const MI_INT16 = 3;
const MI_UINT16 = 4;
const MI_INT32 = 5;
const MI_UINT32 = 6;
const MI_SINGLE = 7;
const MI_DOUBLE = 9;
const MI_INT64 = 12;
const MI_UINT64 = 13;
const MI_MATRIX = 14;
const MI_COMPRESSED = 15;
const MI_UTF8 = 16;

interface Element {
    type: number;
    bytes: Buffer;
}

function readElement(buf: Buffer, offset: number): { el: Element; next: number } {
    if (offset + 8 > buf.length) {
        throw new MatFormatError(`truncated element tag at offset ${offset}`);
    }
    const word = buf.readUInt32LE(offset);
    const small = word >>> 16;
    if (small !== 0) {
        // small element: type and byte count packed into one 32-bit word,
        // data in the following 4 bytes
        const type = word & 0xffff;
        const bytes = buf.subarray(offset + 4, offset + 4 + small);
        return { el: { type, bytes }, next: offset + 8 };
    }
    const type = word;
    const size = buf.readUInt32LE(offset + 4);
    const bytes = buf.subarray(offset + 8, offset + 8 + size);
    if (offset + 8 + size > buf.length) {
        throw new MatFormatError(`element at ${offset} overruns file (${size} bytes)`);
    }
    // payloads are padded to 8-byte boundaries
    const padded = Math.ceil(size / 8) * 8;
    return { el: { type, bytes }, next: offset + 8 + padded };
}

function numericToDoubles(type: number, bytes: Buffer): Float64Array {
    const view = new DataView(bytes.buffer, bytes.byteOffset, bytes.byteLength);
    const read = (n: number, get: (i: number) => number): Float64Array => {
        const out = new Float64Array(n);
        for (let i = 0; i < n; i++) out[i] = get(i);
        return out;
    };
    switch (type) {
        case MI_DOUBLE:
            return read(bytes.length / 8, (i) => view.getFloat64(i * 8, true));
        case MI_SINGLE:
            return read(bytes.length / 4, (i) => view.getFloat32(i * 4, true));
        case MI_INT8:
            return read(bytes.length, (i) => view.getInt8(i));
        case MI_UINT8:
            return read(bytes.length, (i) => view.getUint8(i));
        case MI_INT16:
            return read(bytes.length / 2, (i) => view.getInt16(i * 2, true));
        case MI_UINT16:
            return read(bytes.length / 2, (i) => view.getUint16(i * 2, true));
        case MI_INT32:
            return read(bytes.length / 4, (i) => view.getInt32(i * 4, true));
        case MI_UINT32:
            return read(bytes.length / 4, (i) => view.getUint32(i * 4, true));
        case MI_INT64:
            return read(bytes.length / 8, (i) => Number(view.getBigInt64(i * 8, true)));
        case MI_UINT64:
            return read(bytes.length / 8, (i) => Number(view.getBigUint64(i * 8, true)));
        default:
            throw new MatFormatError(`unsupported numeric storage type mi=${type}`);
    }
}

function parseMatrix(bytes: Buffer): MatMatrix | null {
    let offset = 0;
    const flags = readElement(bytes, offset);
    offset = flags.next;
    const classId = flags.el.bytes.readUInt32LE(0) & 0xff;
    // numeric array classes are 6 (double) through 15 (uint64)
    if (classId < 6 || classId > 15) return null;

    const dims = readElement(bytes, offset);
    offset = dims.next;
    const dimCount = dims.el.bytes.length / 4;
    const shape: number[] = [];
    for (let i = 0; i < dimCount; i++) shape.push(dims.el.bytes.readInt32LE(i * 4));
    if (shape.length !== 2) return null;

    const nameEl = readElement(bytes, offset);
    offset = nameEl.next;
    if (nameEl.el.type !== MI_INT8 && nameEl.el.type !== MI_UTF8) {
        throw new MatFormatError(`unexpected array-name storage type mi=${nameEl.el.type}`);
    }
    const name = nameEl.el.bytes.toString('utf-8');

    const real = readElement(bytes, offset);
    const data = numericToDoubles(real.el.type, real.el.bytes);
    const [rows, cols] = shape;
    if (data.length !== rows * cols) {
        throw new MatFormatError(
            `matrix ${name}: ${rows}x${cols} declared but ${data.length} values stored`,
        );
    }
    return {
        name,
        rows,
        cols,
        data,
        get(i: number, j: number): number {
            return this.data[j * this.rows + i];
        },
    };
}

/** Parse every top-level 2-D numeric matrix in a MAT level-5 buffer. */
export function parseMat(buf: Buffer): Map<string, MatMatrix> {
    if (buf.length < 128) {
        throw new MatFormatError('file shorter than the 128-byte MAT header');
    }
    const version = buf.readUInt16LE(124);
    // the endian indicator is the 16-bit value 0x4D49 ("MI"); a little-endian
    // writer stores it as the bytes "IM"
    const endian = buf.toString('latin1', 126, 128);
    if (endian === 'MI') {
        throw new MatFormatError('big-endian MAT files are not supported');
    }
    if (endian !== 'IM' || version !== 0x0100) {
        throw new MatFormatError(
            'not a MAT level-5 file (v4 files have no header magic; re-save as v5)',
        );
    }

    const out = new Map<string, MatMatrix>();
    let offset = 128;
    while (offset < buf.length) {
        const start = offset;
        const { el, next } = readElement(buf, offset);
        offset = next;
        let type = el.type;
        let bytes = el.bytes;
        if (type === MI_COMPRESSED) {
            // compressed elements are exempt from 8-byte payload padding
            offset = start + 8 + el.bytes.length;
            bytes = zlib.inflateSync(bytes);
            const inner = readElement(bytes, 0);
            type = inner.el.type;
            bytes = inner.el.bytes;
        }
        if (type !== MI_MATRIX) continue; // skip globals we do not understand
        const matrix = parseMatrix(bytes);
        if (matrix) out.set(matrix.name, matrix);
    }
    return out;
}
