import { describe, expect, it } from 'vitest'

import { MissingColumnError, SchemaError, checkSchema, parseCsv, requireColumns } from '../src/csv'

const SAMPLE = [
  '# schema=1',
  '# kind=summary',
  '# generated=2026-08-11T00:00:00+00:00',
  '# seed=42 vary=n instances_per_point=3',
  'a,b,c',
  '1,2,3',
  '4,,6',
].join('\n')

describe('parseCsv', () => {
  it('reads comment metadata, columns, and rows', () => {
    const table = parseCsv(SAMPLE)
    expect(table.meta).toMatchObject({ schema: '1', kind: 'summary', vary: 'n', seed: '42' })
    expect(table.columns).toEqual(['a', 'b', 'c'])
    expect(table.rows).toEqual([
      { a: '1', b: '2', c: '3' },
      { a: '4', b: '', c: '6' },
    ])
  })

  it('handles a header-only file', () => {
    const table = parseCsv('# schema=1\nx,y\n')
    expect(table.rows).toEqual([])
    expect(table.columns).toEqual(['x', 'y'])
  })

  it('rejects input without a header line', () => {
    expect(() => parseCsv('# schema=1\n')).toThrow(SchemaError)
  })
})

describe('schema and column checks', () => {
  it('accepts schema 1 and rejects others', () => {
    expect(() => checkSchema(parseCsv(SAMPLE), 'sample')).not.toThrow()
    expect(() => checkSchema(parseCsv('# schema=2\nx\n'), 'sample')).toThrow(/schema=2/)
    expect(() => checkSchema(parseCsv('x\n'), 'sample')).toThrow(/<missing>/)
  })

  it('names the absent column', () => {
    const table = parseCsv(SAMPLE)
    expect(() => requireColumns(table, ['a', 'nope'], 'sample.csv')).toThrow(MissingColumnError)
    try {
      requireColumns(table, ['nope'], 'sample.csv')
    } catch (error) {
      expect((error as MissingColumnError).column).toBe('nope')
      expect((error as Error).message).toContain('nope')
      expect((error as Error).message).toContain('sample.csv')
    }
  })
})
