// Pick-chip bookkeeping. Pure functions over an immutable list so the
// at-most-one-active invariant is enforced by construction.

export interface UiPick {
  key: number;
  kind: "manual" | "auto";
  x: number;
  y: number;
  swatch: number[];
  cluster: number;
  active: boolean;
}

export const withPickAdded = (picks: UiPick[], pick: Omit<UiPick, "active">): UiPick[] => [
  ...picks.map((p) => ({ ...p, active: false })),
  { ...pick, active: true },
];

export const withActivated = (picks: UiPick[], key: number): UiPick[] =>
  picks.map((p) => ({ ...p, active: p.key === key }));

// Deleting the active chip falls back to the most recent remaining pick.
export const withRemoved = (picks: UiPick[], key: number): UiPick[] => {
  const removed = picks.find((p) => p.key === key);
  const rest = picks.filter((p) => p.key !== key);
  if (removed?.active && rest.length > 0) {
    const lastKey = rest[rest.length - 1].key;
    return rest.map((p) => ({ ...p, active: p.key === lastKey }));
  }
  return rest;
};

export const activePick = (picks: UiPick[]): UiPick | null =>
  picks.find((p) => p.active) ?? null;
