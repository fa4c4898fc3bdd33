/** Typed client for the atlas service. The explorer never computes layout
 * or expression itself: every number it draws comes out of these documents.
 */

export interface MetaDoc {
  stages: number;
  version: number;
  counts: { structures: number; annotations: number; genes: number };
  populated_stages: number[];
  hash?: string;
}

export interface AnatomyNode {
  id: string;
  name: string;
  abbr: string | null;
  parent: string | null;
  depth: number;
}

export interface AnatomyDoc {
  mode: string;
  stage?: number;
  root: string;
  nodes: AnatomyNode[];
}

export interface ArcNode {
  id: string;
  depth: number;
  a0: number;
  a1: number;
  r0: number;
  r1: number;
}

export interface RectNode {
  id: string;
  depth: number;
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}

export type GeometryNode = ArcNode | RectNode;

export interface GeometryDoc {
  kind: 'sunburst' | 'icicle';
  mode: string;
  stage?: number;
  nodes: GeometryNode[];
}

export interface ExpressionDoc {
  states: Record<string, string>;
  profile: string[];
}

export interface CloudNodeDoc {
  gene: string;
  count: number;
  x: number;
  y: number;
  r: number;
}

export interface CloudDoc {
  stage: number;
  filter?: string;
  nodes: CloudNodeDoc[];
}

export type Mode = 'staged' | 'abstract';
export type Kind = 'sunburst' | 'icicle';

/** Minimal structural type for fetch so tests can inject a replay mock. */
export type FetchLike = (url: string) => Promise<{
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
}>;

export class ApiError extends Error {
  constructor(public url: string, public status: number, detail: string) {
    super(`${status} from ${url}: ${detail}`);
  }
}

export class AtlasClient {
  constructor(
    private base: string,
    private fetchFn: FetchLike = (url) => fetch(url),
  ) {}

  private async get<T>(pathAndQuery: string): Promise<T> {
    let response;
    try {
      response = await this.fetchFn(this.base + pathAndQuery);
    } catch (err) {
      throw new ApiError(pathAndQuery, 0, String(err));
    }
    if (!response.ok) {
      let detail = 'request failed';
      try {
        const body = (await response.json()) as { detail?: string };
        if (body && body.detail) detail = body.detail;
      } catch {
        // keep the generic detail
      }
      throw new ApiError(pathAndQuery, response.status, detail);
    }
    return (await response.json()) as T;
  }

  meta(): Promise<MetaDoc> {
    return this.get('/api/v1/meta');
  }

  anatomy(mode: Mode, stage?: number): Promise<AnatomyDoc> {
    const query = mode === 'staged' ? `mode=staged&stage=${stage}` : 'mode=abstract';
    return this.get(`/api/v1/anatomy?${query}`);
  }

  /** Parameter order is fixed (kind, mode, stage, root) so identical views
   * hit identical URLs and caches. Structure ids (EMAPA:<n>) are URL-safe
   * and embedded verbatim. */
  layout(kind: Kind, mode: Mode, stage: number, root?: string | null): Promise<GeometryDoc> {
    let query = `kind=${kind}&mode=${mode}`;
    if (mode === 'staged') query += `&stage=${stage}`;
    if (root) query += `&root=${root}`;
    return this.get(`/api/v1/layout?${query}`);
  }

  expression(gene: string, stage: number, mode: Mode): Promise<ExpressionDoc> {
    return this.get(
      `/api/v1/expression?gene=${encodeURIComponent(gene)}&stage=${stage}&mode=${mode}`,
    );
  }

  cloud(stage: number, structure?: string | null, q?: string): Promise<CloudDoc> {
    let query = `stage=${stage}`;
    if (structure) query += `&structure=${structure}`;
    if (q) query += `&q=${encodeURIComponent(q)}`;
    return this.get(`/api/v1/cloud?${query}`);
  }
}
