/** Wire types mirroring the /api/v1 JSON schemas. */

export interface DatasetDescriptor {
  id: string;
  variable: string;
  width: number;
  height: number;
  t: number;
  extent: number[];
  timespan: [string, string];
}

export interface PairCost {
  i: number;
  j: number;
  structural: number | null;
  statistical: number | null;
  distance: number | null;
  combined: number;
}

export type LoadState = 'salient' | 'loaded' | 'loading' | 'unloaded';

export interface FrameStatusEntry {
  index: number;
  state: LoadState;
  pinned: boolean;
  excluded: boolean;
}

export interface SelectionResponse {
  steps: number[];
  total_cost: number;
  pair_costs: PairCost[];
  params: {
    range: { start: number; end: number };
    k: number;
    alpha: number;
    beta: number;
    gamma: number;
    sigma: number;
    aggregation: string;
    region: { x0: number; y0: number; x1: number; y1: number } | null;
    pinned: number[];
    excluded: number[];
  };
  preload_order: number[];
  frame_status: FrameStatusEntry[];
}

export interface TrendResponse {
  kind: string;
  range: { start: number; end: number };
  ref: number | null;
  values: (number | null)[];
}

export interface EmbeddedPointDto {
  index: number;
  x: number;
  y: number;
  salient: boolean;
  sampled_out: boolean;
}

export interface EmbeddingResponse {
  method: string;
  range: { start: number; end: number };
  points: EmbeddedPointDto[];
}

export interface SelectRequest {
  range: { start: number; end: number };
  k: number;
  alpha: number;
  beta: number;
  aggregation: string;
  region?: { x0: number; y0: number; x1: number; y1: number } | null;
  pinned?: number[];
  excluded?: number[];
  gamma?: number;
  sigma?: number;
}

export type TrendKind = 'structural' | 'max' | 'min' | 'avg';
