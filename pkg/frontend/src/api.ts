/**
 * Typed client for the composition service's /v1 endpoints.
 *
 * Every mutating call carries the revision it was computed against; the service
 * answers 409 when that revision is stale. Errors surface as ApiError with the
 * service's machine-readable code so the UI can render precise assistance.
 */

export type Level = "OBJECT" | "MODEL" | "METHOD" | "IP";

export interface PropertyView {
  name: string;
  uri: string;
  value: string | null;
}

export interface ModelView {
  id: string;
  methods: string[];
  selected_method: string;
}

export interface ImageSummary {
  id: string;
  properties: PropertyView[];
  models: ModelView[];
  children: string[];
}

export interface Suggestion {
  source: string;
  target: string;
  source_varname: string;
  target_varname: string;
  source_uri: string;
  target_uri: string;
}

export interface ParamView {
  address: string;
  varname: string;
  uri: string;
  value: string | null;
  owner: string;
}

export interface ConnectionView {
  source: string;
  target: string;
  level: string;
}

export interface InstanceView {
  instance_id: string;
  image: string;
  enabled_models: string[];
  method_choice: Record<string, string>;
}

export interface EnvironmentDoc {
  env_id: string;
  catalog_version: string;
  instances: InstanceView[];
  connections: { source: string; target: string }[];
}

export interface SessionState {
  session_id: string;
  revision: number;
  catalog_version: string;
  environment: EnvironmentDoc;
}

export interface ConfigReport {
  key: string;
  total_time: number;
  critical_path_time: number;
  package_count: number;
  missing_perf: string[];
}

export interface ScriptResult {
  revision: number;
  vocabulary: string;
  text: string;
  steps: { label: string; address: string }[];
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly details: unknown = null,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

interface Mutated {
  revision: number;
}

export class VsoClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}/v1${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const payload = text ? JSON.parse(text) : null;
    if (!response.ok) {
      const error = payload?.error ?? {};
      throw new ApiError(
        response.status,
        error.code ?? `HTTP${response.status}`,
        error.message ?? response.statusText,
        error.details ?? null,
      );
    }
    return payload as T;
  }

  listImages(): Promise<{ images: ImageSummary[] }> {
    return this.request("GET", "/images");
  }

  createSession(): Promise<{ session_id: string; revision: number }> {
    return this.request("POST", "/sessions", {});
  }

  sessionState(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}`);
  }

  revision(sessionId: string): Promise<{ revision: number }> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/revision`);
  }

  instantiate(
    sessionId: string,
    revision: number,
    imageId: string,
  ): Promise<Mutated & { instance_id: string }> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/instances`, {
      revision,
      image_id: imageId,
    });
  }

  suggestions(sessionId: string): Promise<{ revision: number; suggestions: Suggestion[] }> {
    return this.request("GET", `/sessions/${encodeURIComponent(sessionId)}/suggestions`);
  }

  connect(sessionId: string, revision: number, source: string, target: string): Promise<Mutated> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/connections`, {
      revision,
      source,
      target,
    });
  }

  disconnect(
    sessionId: string,
    revision: number,
    source: string,
    target: string,
  ): Promise<Mutated> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/connections/delete`, {
      revision,
      source,
      target,
    });
  }

  toggleModel(
    sessionId: string,
    revision: number,
    instanceId: string,
    modelId: string,
    enabled: boolean,
  ): Promise<Mutated> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/models`, {
      revision,
      instance_id: instanceId,
      model_id: modelId,
      enabled,
    });
  }

  chooseMethod(
    sessionId: string,
    revision: number,
    instanceId: string,
    modelId: string,
    methodId: string,
  ): Promise<Mutated> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/methods`, {
      revision,
      instance_id: instanceId,
      model_id: modelId,
      method_id: methodId,
    });
  }

  /** Instance ids contain '#', which must be percent-encoded in URL paths. */
  params(
    sessionId: string,
    instanceId: string,
    level: Level,
    filtered = true,
  ): Promise<{ revision: number; inputs: ParamView[]; outputs: ParamView[] }> {
    const sid = encodeURIComponent(sessionId);
    const iid = encodeURIComponent(instanceId);
    return this.request(
      "GET",
      `/sessions/${sid}/instances/${iid}/params?level=${level}&filtered=${filtered}`,
    );
  }

  connections(
    sessionId: string,
    level: Level | "PARAM",
  ): Promise<{ revision: number; connections: ConnectionView[] }> {
    const sid = encodeURIComponent(sessionId);
    return this.request("GET", `/sessions/${sid}/connections?level=${level}`);
  }

  compare(
    sessionId: string,
    criterion: "total" | "critical-path",
  ): Promise<{ revision: number; criterion: string; reports: ConfigReport[] }> {
    const sid = encodeURIComponent(sessionId);
    return this.request(
      "GET",
      `/sessions/${sid}/configurations/compare?criterion=${encodeURIComponent(criterion)}`,
    );
  }

  generateScript(
    sessionId: string,
    vocabulary = "generic",
    configKey?: string,
  ): Promise<ScriptResult> {
    return this.request("POST", `/sessions/${encodeURIComponent(sessionId)}/script`, {
      vocabulary,
      config_key: configKey ?? null,
    });
  }
}
