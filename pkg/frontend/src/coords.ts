// Viewport math shared by click handling and rendering. The canvas shows the
// image scaled by an integer-ish zoom factor and offset by a pan; a canvas
// offset maps back to the integer pixel whose square contains it.

export interface Viewport {
  zoom: number;
  panX: number;
  panY: number;
}

export const identityView = (): Viewport => ({ zoom: 1, panX: 0, panY: 0 });

export const toImagePixel = (
  offsetX: number,
  offsetY: number,
  view: Viewport,
): { x: number; y: number } => ({
  x: Math.floor((offsetX - view.panX) / view.zoom),
  y: Math.floor((offsetY - view.panY) / view.zoom),
});

export const inBounds = (x: number, y: number, width: number, height: number): boolean =>
  x >= 0 && y >= 0 && x < width && y < height;

export const MIN_ZOOM = 1;
export const MAX_ZOOM = 32;

// Rescale about a canvas point so the pixel under the cursor stays put.
export const zoomAt = (view: Viewport, factor: number, originX: number, originY: number): Viewport => {
  const zoom = Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, view.zoom * factor));
  const scale = zoom / view.zoom;
  return {
    zoom,
    panX: originX - (originX - view.panX) * scale,
    panY: originY - (originY - view.panY) * scale,
  };
};

export const panBy = (view: Viewport, dx: number, dy: number): Viewport => ({
  zoom: view.zoom,
  panX: view.panX + dx,
  panY: view.panY + dy,
});
