/**
 * Reader for the sweep CSV schema: `# key=value` comment headers followed by
 * a column header line and comma-separated rows (no quoting in this schema).
 */

export interface CsvTable {
  /** parsed `# key=value` comment lines, e.g. schema, kind, generated */
  meta: Record<string, string>
  columns: string[]
  rows: Record<string, string>[]
}

export class MissingColumnError extends Error {
  readonly column: string

  constructor(column: string, context: string) {
    super(`missing column "${column}" in ${context}`)
    this.name = 'MissingColumnError'
    this.column = column
  }
}

export class SchemaError extends Error {
  constructor(message: string) {
    super(message)
    this.name = 'SchemaError'
  }
}

export const SUPPORTED_SCHEMA = '1'

export function parseCsv(text: string): CsvTable {
  const meta: Record<string, string> = {}
  let columns: string[] | null = null
  const rows: Record<string, string>[] = []
  for (const rawLine of text.split('\n')) {
    const line = rawLine.replace(/\r$/, '')
    if (line.trim() === '') continue
    if (line.startsWith('#')) {
      // a comment line may carry several key=value pairs
      for (const token of line.slice(1).trim().split(/\s+/)) {
        const eq = token.indexOf('=')
        if (eq > 0) meta[token.slice(0, eq)] = token.slice(eq + 1)
      }
      continue
    }
    const cells = line.split(',')
    if (columns === null) {
      columns = cells
      continue
    }
    const row: Record<string, string> = {}
    columns.forEach((name, i) => {
      row[name] = cells[i] ?? ''
    })
    rows.push(row)
  }
  if (columns === null) {
    throw new SchemaError('no header line found in CSV input')
  }
  return { meta, columns, rows }
}

export function checkSchema(table: CsvTable, context: string): void {
  const schema = table.meta['schema']
  if (schema !== SUPPORTED_SCHEMA) {
    throw new SchemaError(
      `${context} declares schema=${schema ?? '<missing>'}; expected schema=${SUPPORTED_SCHEMA}`,
    )
  }
}

export function requireColumns(table: CsvTable, names: string[], context: string): void {
  for (const name of names) {
    if (!table.columns.includes(name)) {
      throw new MissingColumnError(name, context)
    }
  }
}
