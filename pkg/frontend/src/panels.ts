/**
 * Panel definitions for the six-panel sweep figure and the extraction of
 * plottable series from the sweep CSV tables. All numbers are read from the
 * CSVs; nothing is recomputed here.
 */

import { CsvTable, MissingColumnError, requireColumns } from './csv'

export interface PanelSpec {
  id: string
  title: string
  /** which CSV feeds the panel */
  source: 'summary' | 'curve'
  xColumn: string
  yColumn: string
  ciLowColumn: string
  ciHighColumn: string
  /** rows are grouped into one curve per distinct value of this column */
  groupColumn: string
  xLabel: string
  yLabel: string
}

export const PANELS: PanelSpec[] = [
  {
    id: 'a',
    title: 'Minimal stable allocation parameter',
    source: 'summary',
    xColumn: 'varied_value',
    yColumn: 'min_stable_rho_mean',
    ciLowColumn: 'min_stable_rho_ci_low',
    ciHighColumn: 'min_stable_rho_ci_high',
    groupColumn: 'varied_param',
    xLabel: 'varied parameter',
    yLabel: 'min stable rho',
  },
  {
    id: 'b',
    title: 'Total quality vs allocation parameter',
    source: 'curve',
    xColumn: 'rho',
    yColumn: 'total_quality_mean',
    ciLowColumn: 'total_quality_ci_low',
    ciHighColumn: 'total_quality_ci_high',
    groupColumn: 'varied_value',
    xLabel: 'rho',
    yLabel: 'total quality',
  },
  {
    id: 'c',
    title: 'Optimal allocation parameter',
    source: 'summary',
    xColumn: 'varied_value',
    yColumn: 'optimal_rho_mean',
    ciLowColumn: 'optimal_rho_ci_low',
    ciHighColumn: 'optimal_rho_ci_high',
    groupColumn: 'varied_param',
    xLabel: 'varied parameter',
    yLabel: 'optimal rho',
  },
  {
    id: 'd',
    title: 'Platform revenue at the optimum',
    source: 'summary',
    xColumn: 'varied_value',
    yColumn: 'platform_revenue_at_opt_mean',
    ciLowColumn: 'platform_revenue_at_opt_ci_low',
    ciHighColumn: 'platform_revenue_at_opt_ci_high',
    groupColumn: 'varied_param',
    xLabel: 'varied parameter',
    yLabel: 'platform revenue',
  },
  {
    id: 'e',
    title: 'Mean creator utility at the optimum',
    source: 'summary',
    xColumn: 'varied_value',
    yColumn: 'mean_creator_utility_at_opt_mean',
    ciLowColumn: 'mean_creator_utility_at_opt_ci_low',
    ciHighColumn: 'mean_creator_utility_at_opt_ci_high',
    groupColumn: 'varied_param',
    xLabel: 'varied parameter',
    yLabel: 'mean creator utility',
  },
  {
    id: 'f',
    title: 'Total quality at the optimum',
    source: 'summary',
    xColumn: 'varied_value',
    yColumn: 'total_quality_at_opt_mean',
    ciLowColumn: 'total_quality_at_opt_ci_low',
    ciHighColumn: 'total_quality_at_opt_ci_high',
    groupColumn: 'varied_param',
    xLabel: 'varied parameter',
    yLabel: 'total quality',
  },
]

export function panelById(id: string): PanelSpec {
  const spec = PANELS.find((p) => p.id === id)
  if (!spec) {
    throw new Error(`unknown panel id "${id}" (expected one of ${PANELS.map((p) => p.id).join(', ')})`)
  }
  return spec
}

export interface SeriesPoint {
  x: number
  y: number
  lo: number
  hi: number
}

export interface Series {
  label: string
  points: SeriesPoint[]
}

function variedParam(table: CsvTable): string | undefined {
  if (table.rows.length > 0 && table.rows[0]['varied_param']) {
    return table.rows[0]['varied_param']
  }
  return table.meta['vary']
}

/** The x-axis label; summary panels are labeled by the swept parameter name. */
export function resolveXLabel(table: CsvTable, spec: PanelSpec): string {
  if (spec.source === 'summary') {
    return variedParam(table) ?? spec.xLabel
  }
  return spec.xLabel
}

export function extractSeries(table: CsvTable, spec: PanelSpec, context: string): Series[] {
  requireColumns(
    table,
    [spec.xColumn, spec.yColumn, spec.ciLowColumn, spec.ciHighColumn, spec.groupColumn],
    context,
  )
  const groups = new Map<string, SeriesPoint[]>()
  for (const row of table.rows) {
    const x = Number(row[spec.xColumn])
    const y = Number(row[spec.yColumn])
    if (row[spec.yColumn] === '' || !Number.isFinite(x) || !Number.isFinite(y)) continue
    const lo = row[spec.ciLowColumn] === '' ? y : Number(row[spec.ciLowColumn])
    const hi = row[spec.ciHighColumn] === '' ? y : Number(row[spec.ciHighColumn])
    const key = row[spec.groupColumn]
    if (!groups.has(key)) groups.set(key, [])
    groups.get(key)!.push({ x, y, lo, hi })
  }
  const varied = variedParam(table)
  return [...groups.entries()].map(([key, points]) => ({
    // curve panels carry one curve per swept value: label them "n=5" style
    label: spec.groupColumn === 'varied_value' && varied ? `${varied}=${trimFloat(key)}` : key,
    points: points.sort((p, q) => p.x - q.x),
  }))
}

function trimFloat(text: string): string {
  const value = Number(text)
  return Number.isFinite(value) ? String(value) : text
}
