/**
 * Pure presentation helpers: view model -> geometry/labels.
 *
 * Everything here is a function of the last server state; there is no step
 * arithmetic.  The interval bar maps the full diffusion span [base - range,
 * base + range] to [0, 100]% and shades the working interval inside it.
 */

import { SessionView } from "./controller.js";

export interface BarGeometry {
  /** left edge of the shaded working interval, percent of the bar */
  intervalLeftPct: number;
  intervalWidthPct: number;
  /** marker position for the current variant, percent of the bar */
  markerPct: number;
}

export function barGeometry(view: SessionView): BarGeometry | null {
  if (!view.space || !view.interval || view.variant === null) {
    return null;
  }
  const lo = view.space.base - view.space.range;
  const hi = view.space.base + view.space.range;
  const span = hi - lo;
  const pct = (x: number) => Math.min(100, Math.max(0, ((x - lo) / span) * 100));
  const left = pct(view.interval[0]);
  return {
    intervalLeftPct: left,
    intervalWidthPct: pct(view.interval[1]) - left,
    markerPct: pct(view.variant),
  };
}

export function variantLabel(view: SessionView): string {
  if (view.variant === null) return "-";
  // show at the grid's own resolution
  const step = view.space?.step ?? 0.01;
  const decimals = Math.min(10, Math.max(0, Math.ceil(-Math.log10(step))));
  return view.variant.toFixed(decimals);
}

export function statusLabel(view: SessionView): string {
  if (view.connection === "lost") return "connection lost - showing last known state";
  switch (view.status) {
    case "idle":
      return "no session";
    case "active":
      return view.converged ? "converged" : `refining (step ${view.stepIndex})`;
    case "converged":
      return "converged - confirm to finish";
    case "confirmed":
      return "confirmed";
    case "abandoned":
      return "abandoned";
  }
}
