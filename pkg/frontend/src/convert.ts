/**
 * One-shot conversion from a recording .mat file to the canonical decoder
 * CSV: header `f0..f41,x,y`, one sample per row, shortest round-trip decimal
 * serialization (doubles survive a parse bit-exactly).
 */

import * as fs from 'node:fs';
import { MatMatrix, parseMat } from './mat.js';

export class VariableError extends Error {}
export class ShapeError extends Error {}

export interface ConvertOptions {
    featuresVar: string;
    positionsVar: string;
}

export interface ConvertSummary {
    samples: number;
    featureDim: number;
}

function pick(matrices: Map<string, MatMatrix>, name: string): MatMatrix {
    const m = matrices.get(name);
    if (!m) {
        const available = [...matrices.keys()].join(', ') || '(none)';
        throw new VariableError(
            `variable '${name}' not found; available matrices: ${available}`,
        );
    }
    return m;
}

export function toCsv(features: MatMatrix, positions: MatMatrix): string {
    if (positions.cols !== 2) {
        throw new ShapeError(
            `positions must be Kx2, got ${positions.rows}x${positions.cols}`,
        );
    }
    if (features.rows !== positions.rows) {
        throw new ShapeError(
            `row mismatch: ${features.rows} feature rows vs ${positions.rows} position rows`,
        );
    }
    const header = [...Array(features.cols).keys()].map((j) => `f${j}`).join(',');
    const lines = [`${header},x,y`];
    for (let i = 0; i < features.rows; i++) {
        const row: string[] = [];
        for (let j = 0; j < features.cols; j++) row.push(String(features.get(i, j)));
        row.push(String(positions.get(i, 0)), String(positions.get(i, 1)));
        lines.push(row.join(','));
    }
    return lines.join('\n') + '\n';
}

export function convert(
    src: string,
    dst: string,
    opts: ConvertOptions,
): ConvertSummary {
    const matrices = parseMat(fs.readFileSync(src));
    const features = pick(matrices, opts.featuresVar);
    const positions = pick(matrices, opts.positionsVar);
    fs.writeFileSync(dst, toCsv(features, positions));
    return { samples: features.rows, featureDim: features.cols };
}
