import * as fs from 'fs'
import * as os from 'os'
import * as path from 'path'

import { afterAll, describe, expect, it } from 'vitest'

import { run } from '../src/cli'
import { MissingColumnError } from '../src/csv'
import { renderPanels } from '../src/render'

const FIXTURE = path.join(__dirname, 'fixtures', 'sweep')
const HOMOGENEOUS_FIXTURE = path.join(__dirname, 'fixtures', 'sweep_homogeneous')
const tmpDirs: string[] = []

function tmp(): string {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), 'panels-'))
  tmpDirs.push(dir)
  return dir
}

afterAll(() => {
  for (const dir of tmpDirs) fs.rmSync(dir, { recursive: true, force: true })
})

describe('renderPanels', () => {
  it('writes the six panels plus the combined grid', () => {
    const out = tmp()
    const files = renderPanels(FIXTURE, out)
    const names = files.map((f) => path.basename(f))
    expect(names).toEqual([
      'panel_a.svg', 'panel_b.svg', 'panel_c.svg',
      'panel_d.svg', 'panel_e.svg', 'panel_f.svg', 'panels.svg',
    ])
    for (const file of files) expect(fs.existsSync(file)).toBe(true)
    const panelA = fs.readFileSync(files[0], 'utf8')
    expect(panelA).toContain('min stable rho') // y label
    expect(panelA).toContain('>n<') // x label from the swept parameter
    expect(panelA).toContain('class="ci"') // error bars
    const grid = fs.readFileSync(files[6], 'utf8')
    expect(grid).toContain('sweep over n')
    expect(grid.match(/<g transform="translate/g)!.length).toBe(6)
  })

  it('renders a subset of panels when asked', () => {
    const out = tmp()
    const files = renderPanels(FIXTURE, out, ['b', 'd'])
    expect(files.map((f) => path.basename(f))).toEqual(['panel_b.svg', 'panel_d.svg', 'panels.svg'])
  })

  it('is byte-deterministic', () => {
    const outA = tmp()
    const outB = tmp()
    renderPanels(FIXTURE, outA)
    renderPanels(FIXTURE, outB)
    for (const name of fs.readdirSync(outA)) {
      expect(fs.readFileSync(path.join(outA, name), 'utf8')).toBe(
        fs.readFileSync(path.join(outB, name), 'utf8'),
      )
    }
  })

  it('panel (b) on a homogeneous sweep renders a strictly rising curve', () => {
    // heterogeneous sweeps may dip where newly-feasible instances join the
    // mean; identical instances make the rendered curve a clean regression
    const out = tmp()
    renderPanels(HOMOGENEOUS_FIXTURE, out, ['b'])
    const svg = fs.readFileSync(path.join(out, 'panel_b.svg'), 'utf8')
    const polylines = [...svg.matchAll(/class="curve" points="([^"]+)"/g)]
    expect(polylines.length).toBeGreaterThan(0)
    for (const match of polylines) {
      const ys = match[1].split(' ').map((pair) => Number(pair.split(',')[1]))
      expect(ys.length).toBeGreaterThan(1)
      // SVG y grows downward, so increasing quality means decreasing pixel y
      for (let i = 1; i < ys.length; i += 1) expect(ys[i]).toBeLessThan(ys[i - 1])
    }
  })

  it('renders empty axes from header-only CSVs', () => {
    const inDir = tmp()
    const header = (name: string) => {
      const source = fs.readFileSync(path.join(FIXTURE, name), 'utf8').split('\n')
      const keep = source.filter((line) => line.startsWith('#'))
      const columns = source.find((line) => !line.startsWith('#') && line.trim() !== '')!
      fs.writeFileSync(path.join(inDir, name), keep.join('\n') + '\n' + columns + '\n')
    }
    header('summary.csv')
    header('quality_curve_summary.csv')
    const out = tmp()
    const code = run(['render', '--in', inDir, '--out', out])
    expect(code).toBe(0)
    const svg = fs.readFileSync(path.join(out, 'panel_a.svg'), 'utf8')
    expect(svg).toContain('<rect') // axes frame still drawn
    expect(svg).not.toContain('class="curve"')
  })

  it('raises a named error for a missing column', () => {
    const inDir = tmp()
    for (const name of fs.readdirSync(FIXTURE)) {
      fs.copyFileSync(path.join(FIXTURE, name), path.join(inDir, name))
    }
    const summary = fs
      .readFileSync(path.join(inDir, 'summary.csv'), 'utf8')
      .replace('optimal_rho_mean', 'renamed_away')
    fs.writeFileSync(path.join(inDir, 'summary.csv'), summary)
    const out = tmp()
    try {
      renderPanels(inDir, out)
      expect.unreachable('should have thrown')
    } catch (error) {
      expect(error).toBeInstanceOf(MissingColumnError)
      expect((error as MissingColumnError).column).toBe('optimal_rho_mean')
      expect((error as Error).message).toContain('summary.csv')
    }
  })
})

describe('cli', () => {
  it('renders via the render subcommand', () => {
    const out = tmp()
    expect(run(['render', '--in', FIXTURE, '--out', out])).toBe(0)
    expect(fs.existsSync(path.join(out, 'panels.svg'))).toBe(true)
  })

  it('rejects missing arguments and unknown panels', () => {
    expect(run(['render'])).toBe(1)
    expect(run(['nope'])).toBe(1)
    expect(run(['render', '--in', FIXTURE, '--out', tmp(), '--panels', 'z'])).toBe(1)
  })

  it('fails cleanly on a missing input directory', () => {
    expect(run(['render', '--in', '/nonexistent', '--out', tmp()])).toBe(1)
  })
})
