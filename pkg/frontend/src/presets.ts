/** One-click directive templates for the showcase commands.
 *
 * State indices encode listening history with the most recent week in the
 * least-significant bit, so the 8-state strings map as 000->0, 100->4,
 * 010->2, 001->1, etc.
 */

import type { Directive } from "./directive.js";

export interface Preset {
  id: string;
  label: string;
  description: string;
  directive: Directive;
}

export const RISK_PRESET: Preset = {
  id: "risk",
  label: "Risk 0,1 -> 2,3",
  description: "Move interventions from low-risk to high-risk beneficiaries",
  directive: {
    source: { derived: "risk_score", op: "in", value: [0, 1] },
    target: { derived: "risk_score", op: "in", value: [2, 3] },
    cap: null,
  },
};

export const HISTORY_PRESET: Preset = {
  id: "history8",
  label: "8-state: rescue fading listeners",
  description:
    "Move all service calls from states {111,101,110,011,001} to {000,100,010}",
  directive: {
    source: { state_in: [1, 3, 5, 6, 7] },
    target: { state_in: [0, 2, 4] },
    cap: null,
  },
};

export const LANGUAGE_PRESET: Preset = {
  id: "language",
  label: "States 01,11 -> 10,00, marathi donors only",
  description:
    "Move interventions from states 01,11 to 10,00, only from marathi to non-marathi speakers",
  directive: {
    source: {
      and: [{ state_in: [1, 3] }, { feature: "language", op: "eq", value: "marathi" }],
    },
    target: {
      and: [
        { state_in: [0, 2] },
        { not: { feature: "language", op: "eq", value: "marathi" } },
      ],
    },
    cap: null,
  },
};

export const PRESETS: Preset[] = [RISK_PRESET, HISTORY_PRESET, LANGUAGE_PRESET];
