import { describe, expect, it } from "vitest";

import { identityView, inBounds, panBy, toImagePixel, zoomAt } from "../src/coords.js";

describe("toImagePixel", () => {
  it("is the identity at 1x with no pan", () => {
    const view = identityView();
    expect(toImagePixel(0, 0, view)).toEqual({ x: 0, y: 0 });
    expect(toImagePixel(17, 42, view)).toEqual({ x: 17, y: 42 });
    expect(toImagePixel(17.9, 42.1, view)).toEqual({ x: 17, y: 42 });
  });

  it("maps every offset inside a zoomed pixel square to that pixel", () => {
    for (const zoom of [1, 2, 4, 8]) {
      const view = { zoom, panX: 0, panY: 0 };
      for (const frac of [0, 0.25, 0.999]) {
        const got = toImagePixel(5 * zoom + frac * zoom, 3 * zoom + frac * zoom, view);
        expect(got).toEqual({ x: 5, y: 3 });
      }
    }
  });

  it("matches between 1x and 4x for the same pixel", () => {
    const at1 = toImagePixel(12.5, 9.5, { zoom: 1, panX: 0, panY: 0 });
    const at4 = toImagePixel(12 * 4 + 2, 9 * 4 + 3, { zoom: 4, panX: 0, panY: 0 });
    expect(at4).toEqual(at1);
  });

  it("honors pan offsets, including fractional ones", () => {
    const view = { zoom: 4, panX: -8, panY: 6.5 };
    expect(toImagePixel(-8 + 4 * 7, 6.5 + 4 * 2, view)).toEqual({ x: 7, y: 2 });
  });

  it("yields negative pixels left of or above the image", () => {
    const view = { zoom: 2, panX: 10, panY: 10 };
    const got = toImagePixel(3, 3, view);
    expect(got.x).toBeLessThan(0);
    expect(got.y).toBeLessThan(0);
  });
});

describe("inBounds", () => {
  it("accepts corners and rejects the first pixel beyond each edge", () => {
    expect(inBounds(0, 0, 96, 64)).toBe(true);
    expect(inBounds(95, 63, 96, 64)).toBe(true);
    expect(inBounds(96, 0, 96, 64)).toBe(false);
    expect(inBounds(0, 64, 96, 64)).toBe(false);
    expect(inBounds(-1, 0, 96, 64)).toBe(false);
  });
});

describe("zoomAt", () => {
  it("keeps the pixel under the cursor fixed", () => {
    let view = { zoom: 2, panX: -30, panY: 14 };
    const cursor = { x: 120, y: 80 };
    const before = toImagePixel(cursor.x, cursor.y, view);
    view = zoomAt(view, 2, cursor.x, cursor.y);
    expect(view.zoom).toBe(4);
    expect(toImagePixel(cursor.x, cursor.y, view)).toEqual(before);
  });

  it("clamps to the zoom range", () => {
    const base = identityView();
    expect(zoomAt(base, 0.25, 0, 0).zoom).toBe(1);
    expect(zoomAt({ zoom: 32, panX: 0, panY: 0 }, 4, 0, 0).zoom).toBe(32);
  });
});

describe("panBy", () => {
  it("translates without touching the zoom", () => {
    const view = panBy({ zoom: 4, panX: 1, panY: 2 }, -5, 7);
    expect(view).toEqual({ zoom: 4, panX: -4, panY: 9 });
  });
});
