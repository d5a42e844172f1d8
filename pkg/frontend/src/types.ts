/**
 * Service response shapes.
 *
 * These mirror the JSON the quakedesk HTTP API returns, nothing more:
 * the console renders these fields verbatim and computes none of them.
 * Every response carries log_seq, the event-log sequence number used
 * by the poll loop to decide whether anything changed.
 */

export type Phase =
  | 'Received'
  | 'Assessed'
  | 'Sos1Issued'
  | 'Sos2Issued'
  | 'Resolved';

export interface Enveloped {
  log_seq: number;
}

export interface WarningView extends Enveloped {
  id: string;
  issued_at: string;
  date: string;
  time: string;
  latitude: number;
  longitude: number;
  magnitude: number;
  depth_km: number;
  epicenter_desc: string;
  affected_regencies: string[];
  risk_note: string;
  phase: Phase;
  medic_shortage: number;
  overdue: boolean;
}

export interface WarningList extends Enveloped {
  items: WarningView[];
}

export interface CasualtyView {
  predicted_deaths: number;
  predicted_injured: number;
  death_rate: number;
  injury_rate: number;
  analogs_used: [string, number][];
}

export interface ChecklistView {
  medics_required: number;
  medic_shortage: number;
  medics_international: number;
  volunteers_national: number;
  volunteers_international: number;
  tents: number;
  shelter_sites: number;
  sanitation_units: number;
  kitchens: number;
  rice_kg: number;
  baby_food_kg: number;
  blankets: number;
  total_cost: number;
  buildings_at_risk: number;
  damage_cost: number;
  extras: Record<string, number>;
}

export interface AssessmentBody {
  warning_id: string;
  affected_population: number;
  persons_per_medic: number;
  medics_available: number;
  medics_required: number;
  medic_shortage: number;
  affected_regencies: string[];
  low_confidence: boolean;
  magnitude_band: string;
  casualties: CasualtyView;
  checklist: ChecklistView;
}

export interface AssessmentResponse extends Enveloped {
  assessment: AssessmentBody;
}

export interface PledgeRow {
  source: string;
  medics: number;
  at: string;
}

export interface ApprovalRow {
  action: string;
  approver: string;
  at: string;
}

export interface SourceRow {
  code: string;
  name: string;
  kind: string;
  distance_km: number;
  medics_pledgeable: number;
}

export interface EscalationView extends Enveloped {
  warning_id: string;
  phase: Phase;
  medic_shortage: number;
  medics_required: number;
  medics_available: number;
  affected_regencies: string[];
  sos1_amount: number;
  sos2_amount: number;
  total_pledged: number;
  pledges: PledgeRow[];
  approvals: ApprovalRow[];
  sources: SourceRow[];
  assessed_at: string | null;
  overdue: boolean;
}

export interface OlapResult extends Enveloped {
  columns: string[];
  rows: Record<string, string | number>[];
  totals: Record<string, number>;
}

export interface HealthView extends Enveloped {
  status: string;
}

/** Error payload the service sends with 4xx/5xx statuses. */
export interface ErrorBody {
  error?: string;
  detail?: string;
  violations?: { field: string; kind: string; message: string }[];
  log_seq?: number;
}

/** What-if overrides; only these keys are accepted by the service. */
export interface WhatIfOverrides {
  persons_per_medic?: number;
  affected_population?: number;
  magnitude?: number;
  affected_regencies?: string;
  coefficients?: Record<string, unknown>;
}
