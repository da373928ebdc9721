#!/usr/bin/env node
import yargs from 'yargs';
import { hideBin } from 'yargs/helpers';
import { ShapeError, VariableError, convert } from './convert.js';
import { MatFormatError } from './mat.js';

export async function main(argv: string[]): Promise<number> {
    let code = 0;
    await yargs(argv)
        .command(
            'convert',
            'convert a .mat recording to the canonical decoder CSV',
            (y) =>
                y
                    .option('in', { type: 'string', demandOption: true, describe: 'source .mat file' })
                    .option('out', { type: 'string', demandOption: true, describe: 'target .csv file' })
                    .option('features-var', { type: 'string', default: 'features', describe: 'name of the Kx42 matrix' })
                    .option('positions-var', { type: 'string', default: 'positions', describe: 'name of the Kx2 matrix' }),
            (args) => {
                try {
                    const summary = convert(args.in, args.out, {
                        featuresVar: args['features-var'],
                        positionsVar: args['positions-var'],
                    });
                    console.log(
                        `wrote ${args.out}: K=${summary.samples}, ${summary.featureDim} features`,
                    );
                } catch (err) {
                    if (err instanceof VariableError || err instanceof ShapeError || err instanceof MatFormatError) {
                        console.error(`error: ${err.message}`);
                        code = 1;
                    } else {
                        throw err;
                    }
                }
            },
        )
        .demandCommand(1)
        .strict()
        .parse();
    return code;
}

const isDirect = process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!);
if (isDirect) {
    main(hideBin(process.argv)).then((code) => {
        process.exitCode = code;
    });
}
