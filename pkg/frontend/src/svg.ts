/**
 * Minimal deterministic SVG line-plot renderer: axes, ticks, polylines,
 * confidence-interval error bars, and a legend. Pure string assembly with
 * fixed number formatting, so identical inputs yield identical bytes.
 */

import { Series } from './panels'

export interface PlotOptions {
  title: string
  xLabel: string
  yLabel: string
  series: Series[]
  width?: number
  height?: number
}

export const PALETTE = ['#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd', '#8c564b', '#17becf']

const MARGIN = { top: 30, right: 14, bottom: 42, left: 62 }

/** fixed-precision coordinate formatting keeps the output byte-stable */
function px(value: number): string {
  return value.toFixed(2)
}

function fmtTick(value: number): string {
  if (value === 0) return '0'
  const abs = Math.abs(value)
  if (abs >= 10000 || abs < 0.01) return value.toExponential(1)
  return String(Number(value.toPrecision(4)))
}

interface Domain {
  min: number
  max: number
}

function domainOf(values: number[]): Domain {
  if (values.length === 0) return { min: 0, max: 1 }
  let min = Math.min(...values)
  let max = Math.max(...values)
  if (min === max) {
    min -= 0.5
    max += 0.5
  }
  const pad = 0.05 * (max - min)
  return { min: min - pad, max: max + pad }
}

function ticks(domain: Domain, count = 5): number[] {
  const step = (domain.max - domain.min) / (count - 1)
  return Array.from({ length: count }, (_, i) => domain.min + i * step)
}

function escapeText(text: string): string {
  return text.replace(/&/g, '&amp;').replace(/</g, '&lt;').replace(/>/g, '&gt;')
}

/** Renders the plot as a <g> positioned at (0, 0); reusable inside grids. */
export function renderPlotGroup(opts: PlotOptions): { markup: string; width: number; height: number } {
  const width = opts.width ?? 360
  const height = opts.height ?? 260
  const innerW = width - MARGIN.left - MARGIN.right
  const innerH = height - MARGIN.top - MARGIN.bottom

  const xs = opts.series.flatMap((s) => s.points.map((p) => p.x))
  const ys = opts.series.flatMap((s) => s.points.flatMap((p) => [p.y, p.lo, p.hi]))
  const xDom = domainOf(xs)
  const yDom = domainOf(ys)
  const sx = (v: number) => MARGIN.left + ((v - xDom.min) / (xDom.max - xDom.min)) * innerW
  const sy = (v: number) => MARGIN.top + innerH - ((v - yDom.min) / (yDom.max - yDom.min)) * innerH

  const parts: string[] = []
  parts.push(`<rect x="${px(MARGIN.left)}" y="${px(MARGIN.top)}" width="${px(innerW)}" height="${px(innerH)}" fill="none" stroke="#444" stroke-width="1"/>`)
  parts.push(`<text x="${px(width / 2)}" y="16" text-anchor="middle" font-size="12" font-weight="bold">${escapeText(opts.title)}</text>`)
  parts.push(`<text x="${px(MARGIN.left + innerW / 2)}" y="${px(height - 8)}" text-anchor="middle" font-size="11">${escapeText(opts.xLabel)}</text>`)
  parts.push(`<text x="14" y="${px(MARGIN.top + innerH / 2)}" text-anchor="middle" font-size="11" transform="rotate(-90 14 ${px(MARGIN.top + innerH / 2)})">${escapeText(opts.yLabel)}</text>`)

  for (const t of ticks(xDom)) {
    const x = sx(t)
    parts.push(`<line x1="${px(x)}" y1="${px(MARGIN.top + innerH)}" x2="${px(x)}" y2="${px(MARGIN.top + innerH + 4)}" stroke="#444"/>`)
    parts.push(`<text x="${px(x)}" y="${px(MARGIN.top + innerH + 16)}" text-anchor="middle" font-size="9">${fmtTick(t)}</text>`)
  }
  for (const t of ticks(yDom)) {
    const y = sy(t)
    parts.push(`<line x1="${px(MARGIN.left - 4)}" y1="${px(y)}" x2="${px(MARGIN.left)}" y2="${px(y)}" stroke="#444"/>`)
    parts.push(`<text x="${px(MARGIN.left - 7)}" y="${px(y + 3)}" text-anchor="end" font-size="9">${fmtTick(t)}</text>`)
  }

  opts.series.forEach((series, idx) => {
    const color = PALETTE[idx % PALETTE.length]
    for (const p of series.points) {
      const x = sx(p.x)
      parts.push(`<line class="ci" x1="${px(x)}" y1="${px(sy(p.lo))}" x2="${px(x)}" y2="${px(sy(p.hi))}" stroke="${color}" stroke-width="1"/>`)
      parts.push(`<line class="ci-cap" x1="${px(x - 3)}" y1="${px(sy(p.lo))}" x2="${px(x + 3)}" y2="${px(sy(p.lo))}" stroke="${color}" stroke-width="1"/>`)
      parts.push(`<line class="ci-cap" x1="${px(x - 3)}" y1="${px(sy(p.hi))}" x2="${px(x + 3)}" y2="${px(sy(p.hi))}" stroke="${color}" stroke-width="1"/>`)
    }
    if (series.points.length > 0) {
      const path = series.points.map((p) => `${px(sx(p.x))},${px(sy(p.y))}`).join(' ')
      parts.push(`<polyline class="curve" points="${path}" fill="none" stroke="${color}" stroke-width="1.5"/>`)
      for (const p of series.points) {
        parts.push(`<circle cx="${px(sx(p.x))}" cy="${px(sy(p.y))}" r="2.5" fill="${color}"/>`)
      }
    }
    const ly = MARGIN.top + 10 + idx * 13
    parts.push(`<line x1="${px(MARGIN.left + innerW - 52)}" y1="${px(ly - 3)}" x2="${px(MARGIN.left + innerW - 38)}" y2="${px(ly - 3)}" stroke="${color}" stroke-width="2"/>`)
    parts.push(`<text x="${px(MARGIN.left + innerW - 34)}" y="${px(ly)}" font-size="9">${escapeText(series.label)}</text>`)
  })

  return { markup: parts.join('\n'), width, height }
}

export function renderPlotSvg(opts: PlotOptions): string {
  const { markup, width, height } = renderPlotGroup(opts)
  return [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    markup,
    '</svg>',
  ].join('\n')
}

export interface GridPanel {
  markup: string
  width: number
  height: number
}

/** Lays panels out in rows of three under a one-line legend strip. */
export function renderGridSvg(legend: string, panels: GridPanel[], columns = 3): string {
  const cellW = Math.max(...panels.map((p) => p.width), 1)
  const cellH = Math.max(...panels.map((p) => p.height), 1)
  const rows = Math.ceil(panels.length / columns)
  const legendH = 26
  const width = cellW * Math.min(columns, Math.max(panels.length, 1))
  const height = legendH + rows * cellH
  const parts = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}" font-family="Helvetica, Arial, sans-serif">`,
    `<rect width="${width}" height="${height}" fill="white"/>`,
    `<text x="${px(width / 2)}" y="17" text-anchor="middle" font-size="12">${escapeText(legend)}</text>`,
  ]
  panels.forEach((panel, idx) => {
    const col = idx % columns
    const row = Math.floor(idx / columns)
    parts.push(`<g transform="translate(${col * cellW} ${legendH + row * cellH})">`)
    parts.push(panel.markup)
    parts.push('</g>')
  })
  parts.push('</svg>')
  return parts.join('\n')
}
