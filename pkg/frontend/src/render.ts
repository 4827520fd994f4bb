/**
 * Reads a sweep output directory (summary.csv + quality_curve_summary.csv)
 * and writes one SVG per requested panel plus the combined grid figure.
 */

import * as fs from 'fs'
import * as path from 'path'

import { CsvTable, checkSchema, parseCsv } from './csv'
import { PANELS, PanelSpec, extractSeries, panelById, resolveXLabel } from './panels'
import { GridPanel, renderGridSvg, renderPlotGroup, renderPlotSvg } from './svg'

const SOURCE_FILES: Record<PanelSpec['source'], string> = {
  summary: 'summary.csv',
  curve: 'quality_curve_summary.csv',
}

function loadTable(inDir: string, file: string): CsvTable {
  const fullPath = path.join(inDir, file)
  if (!fs.existsSync(fullPath)) {
    throw new Error(`input file not found: ${fullPath}`)
  }
  const table = parseCsv(fs.readFileSync(fullPath, 'utf8'))
  checkSchema(table, file)
  return table
}

function legendLine(table: CsvTable): string {
  const vary = table.meta['vary'] ?? '?'
  const seed = table.meta['seed'] ?? '?'
  const perPoint = table.meta['instances_per_point'] ?? '?'
  return `sweep over ${vary} - ${perPoint} instances per point, seed ${seed}`
}

export function renderPanels(inDir: string, outDir: string, panelIds?: string[]): string[] {
  const specs = panelIds && panelIds.length > 0 ? panelIds.map(panelById) : PANELS
  const tables = new Map<string, CsvTable>()
  for (const spec of specs) {
    const file = SOURCE_FILES[spec.source]
    if (!tables.has(file)) tables.set(file, loadTable(inDir, file))
  }

  fs.mkdirSync(outDir, { recursive: true })
  const written: string[] = []
  const gridPanels: GridPanel[] = []
  for (const spec of specs) {
    const file = SOURCE_FILES[spec.source]
    const table = tables.get(file)!
    const series = extractSeries(table, spec, file)
    const opts = {
      title: `(${spec.id}) ${spec.title}`,
      xLabel: resolveXLabel(table, spec),
      yLabel: spec.yLabel,
      series,
    }
    const target = path.join(outDir, `panel_${spec.id}.svg`)
    fs.writeFileSync(target, renderPlotSvg(opts) + '\n')
    written.push(target)
    gridPanels.push(renderPlotGroup(opts))
  }

  const anyTable = tables.values().next().value as CsvTable
  const combined = path.join(outDir, 'panels.svg')
  fs.writeFileSync(combined, renderGridSvg(legendLine(anyTable), gridPanels) + '\n')
  written.push(combined)
  return written
}
