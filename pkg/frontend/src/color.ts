/**
 * Color scales for the figure renderers.
 *
 * The diverging scale is symmetric about zero by construction: the caller
 * passes the absolute color limit and value 0 always maps to white, so
 * negative quasiprobability regions are visually unmistakable.
 */

export type Rgb = [number, number, number];

function lerp(a: number, b: number, t: number): number {
  return a + (b - a) * t;
}

function lerpRgb(a: Rgb, b: Rgb, t: number): Rgb {
  return [lerp(a[0], b[0], t), lerp(a[1], b[1], t), lerp(a[2], b[2], t)];
}

export function rgbToHex([r, g, b]: Rgb): string {
  const h = (v: number) =>
    Math.max(0, Math.min(255, Math.round(v))).toString(16).padStart(2, "0");
  return `#${h(r)}${h(g)}${h(b)}`;
}

/** Piecewise-linear ramp through a list of stops, t in [0, 1]. */
function ramp(stops: Rgb[], t: number): Rgb {
  const x = Math.max(0, Math.min(1, t)) * (stops.length - 1);
  const i = Math.min(Math.floor(x), stops.length - 2);
  return lerpRgb(stops[i], stops[i + 1], x - i);
}

const SEQUENTIAL_STOPS: Rgb[] = [
  [68, 1, 84],
  [59, 82, 139],
  [33, 145, 140],
  [94, 201, 98],
  [253, 231, 37],
];

/** Dark-to-bright sequential scale for non-negative quantities. */
export function sequential(t: number): string {
  return rgbToHex(ramp(SEQUENTIAL_STOPS, t));
}

const NEGATIVE_END: Rgb = [5, 48, 97]; // deep blue
const WHITE: Rgb = [255, 255, 255];
const POSITIVE_END: Rgb = [103, 0, 31]; // deep red

/**
 * Blue-white-red diverging scale, symmetric about zero.
 * `limit` must be positive; values are clamped to [-limit, +limit].
 */
export function diverging(value: number, limit: number): string {
  if (!(limit > 0)) throw new Error("diverging scale needs a positive limit");
  const t = Math.max(-1, Math.min(1, value / limit));
  const rgb =
    t < 0 ? lerpRgb(WHITE, NEGATIVE_END, -t) : lerpRgb(WHITE, POSITIVE_END, t);
  return rgbToHex(rgb);
}
