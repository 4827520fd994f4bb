#!/usr/bin/env node
/**
 * CLI: `render --in <dir> --out <dir> [--panels a,b,c]`
 * Exit codes: 0 on success, 1 on bad arguments or rendering errors
 * (missing files, schema mismatches, absent columns).
 */

import { MissingColumnError, SchemaError } from './csv'
import { renderPanels } from './render'

const USAGE = 'usage: render --in <sweep-csv-dir> --out <image-dir> [--panels a,b,c]'

export function run(argv: string[]): number {
  if (argv[0] !== 'render') {
    process.stderr.write(USAGE + '\n')
    return 1
  }
  let inDir: string | undefined
  let outDir: string | undefined
  let panels: string[] | undefined
  for (let i = 1; i < argv.length; i += 1) {
    const arg = argv[i]
    if (arg === '--in') inDir = argv[++i]
    else if (arg === '--out') outDir = argv[++i]
    else if (arg === '--panels') panels = (argv[++i] ?? '').split(',').filter(Boolean)
    else {
      process.stderr.write(`unknown argument: ${arg}\n${USAGE}\n`)
      return 1
    }
  }
  if (!inDir || !outDir) {
    process.stderr.write(USAGE + '\n')
    return 1
  }
  try {
    const files = renderPanels(inDir, outDir, panels)
    for (const file of files) process.stdout.write(file + '\n')
    return 0
  } catch (error) {
    if (error instanceof MissingColumnError || error instanceof SchemaError) {
      process.stderr.write(`${error.name}: ${error.message}\n`)
    } else {
      process.stderr.write(`error: ${(error as Error).message}\n`)
    }
    return 1
  }
}

if (require.main === module) {
  process.exit(run(process.argv.slice(2)))
}
