/** Minimal deterministic RGB rasterizer: integer pixel work only. */

import { GLYPH_HEIGHT, GLYPH_WIDTH, glyph } from "./font.js";

export type Rgb = readonly [number, number, number];

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Rgb = [255, 255, 255]) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 3);
    this.fill(background);
  }

  fill(color: Rgb): void {
    for (let i = 0; i < this.data.length; i += 3) {
      this.data[i] = color[0];
      this.data[i + 1] = color[1];
      this.data[i + 2] = color[2];
    }
  }

  set(x: number, y: number, color: Rgb): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 3;
    this.data[i] = color[0];
    this.data[i + 1] = color[1];
    this.data[i + 2] = color[2];
  }

  get(x: number, y: number): Rgb {
    const i = (y * this.width + x) * 3;
    return [this.data[i] as number, this.data[i + 1] as number, this.data[i + 2] as number];
  }

  /** Filled axis-aligned rectangle, clipped to the canvas. */
  fillRect(x0: number, y0: number, w: number, h: number, color: Rgb): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) {
        this.set(x, y, color);
      }
    }
  }

  /** Bresenham segment; `thickness` grows a square pen around each step. */
  line(x0: number, y0: number, x1: number, y1: number, color: Rgb, thickness = 1): void {
    let x = Math.round(x0);
    let y = Math.round(y0);
    const xe = Math.round(x1);
    const ye = Math.round(y1);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    const pad = thickness >> 1;
    for (;;) {
      if (thickness <= 1) {
        this.set(x, y, color);
      } else {
        this.fillRect(x - pad, y - pad, thickness, thickness, color);
      }
      if (x === xe && y === ye) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  polyline(xs: number[], ys: number[], color: Rgb, thickness = 1): void {
    for (let i = 1; i < xs.length; i++) {
      this.line(
        xs[i - 1] as number,
        ys[i - 1] as number,
        xs[i] as number,
        ys[i] as number,
        color,
        thickness,
      );
    }
  }

  /** Draw `text` with its top-left corner at (x, y). */
  text(x: number, y: number, content: string, color: Rgb, scale = 2): void {
    let cursor = x;
    for (const ch of content) {
      const columns = glyph(ch);
      for (let cx = 0; cx < GLYPH_WIDTH; cx++) {
        const mask = columns[cx] as number;
        for (let cy = 0; cy < GLYPH_HEIGHT; cy++) {
          if ((mask >> cy) & 1) {
            this.fillRect(cursor + cx * scale, y + cy * scale, scale, scale, color);
          }
        }
      }
      cursor += (GLYPH_WIDTH + 1) * scale;
    }
  }
}

export function textWidth(content: string, scale = 2): number {
  return content.length * (GLYPH_WIDTH + 1) * scale;
}

export function textHeight(scale = 2): number {
  return GLYPH_HEIGHT * scale;
}
