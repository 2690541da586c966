// Typed client for the annotation service. Shapes mirror the server's
// response models one to one; nothing here reshapes data.

export interface KeypointOut {
  index: number;
  name: string;
  x: number;
  y: number;
  confidence: number;
}

export interface Correction {
  keypoint_index: number;
  x: number;
  y: number;
}

export interface RoundOut {
  round_index: number;
  correction: Correction | null;
  keypoints: KeypointOut[];
}

export interface SessionOut {
  session_id: string;
  status: string;
  image_sha: string;
  width: number;
  height: number;
  keypoint_names: string[];
  age: number | null;
  sex: string | null;
  patient_id: string | null;
  rounds: RoundOut[];
}

export interface CvmOut {
  session_id: string;
  round_index: number;
  features: Record<string, number>;
  feature_vector: number[];
  stage: string | null;
  stage_feature: string;
  stage_window: [number, number] | null;
  sensitivity: number;
  error_tolerance_px: number;
}

export interface GrowthPeakOut {
  age: number;
  rate: number;
  interval: [number, number];
  prev_median: number;
  peak_median: number;
  next_median: number | null;
}

export interface GrowthCurveOut {
  sex: string;
  feature: string;
  ages: number[];
  quantiles: Record<string, number[]>;
  counts: number[];
  annual_rates: { interval: [number, number]; rate: number }[];
  peak: GrowthPeakOut;
  stage_window: [number, number] | null;
}

export interface HealthOut {
  status: string;
  model_variant: string;
  num_keypoints: number;
  keypoint_names: string[];
  sessions: number;
}

export interface NewSessionRequest {
  image_base64: string;
  age?: number;
  sex?: "F" | "M";
  patient_id?: string;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(url, init);
  } catch (err) {
    throw new ApiError(0, err instanceof Error ? err.message : String(err));
  }
  if (!response.ok) {
    let detail = response.statusText;
    try {
      const body = (await response.json()) as { detail?: unknown };
      if (body.detail !== undefined) detail = JSON.stringify(body.detail);
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export class ApiClient {
  constructor(readonly base: string) {}

  private url(path: string): string {
    return this.base.replace(/\/$/, "") + path;
  }

  health(): Promise<HealthOut> {
    return request(this.url("/health"));
  }

  createSession(body: NewSessionRequest): Promise<SessionOut> {
    return request(this.url("/sessions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  getSession(sessionId: string): Promise<SessionOut> {
    return request(this.url(`/sessions/${sessionId}`));
  }

  submitCorrection(sessionId: string, correction: Correction): Promise<SessionOut> {
    return request(this.url(`/sessions/${sessionId}/corrections`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(correction),
    });
  }

  cvm(sessionId: string): Promise<CvmOut> {
    return request(this.url(`/sessions/${sessionId}/cvm`));
  }

  growthCurve(sex: string, feature: string): Promise<GrowthCurveOut> {
    const q = new URLSearchParams({ sex, feature });
    return request(this.url(`/growth/curves?${q}`));
  }
}
