/** Explorer application: query building via the gene cloud, diagram panels,
 * stage navigation, mode/kind toggles, served zoom, and a hover detail box.
 *
 * All layout and expression data comes from the service; the app only joins
 * documents into DOM. Rapid navigation is latest-wins: stale responses are
 * dropped by an epoch check after every await.
 */

import { ApiError, AtlasClient } from './api.js';
import type { AnatomyDoc, CloudDoc, GeometryDoc, MetaDoc } from './api.js';
import { buildCloud } from './cloud.js';
import { renderDetail } from './detail.js';
import { buildDiagram } from './diagram.js';
import { initialState, navigate, STAGE_MAX, STAGE_MIN } from './state.js';
import type { NavAction, SessionState } from './state.js';

const SKELETON = `
  <div class="banner hidden"></div>
  <header>
    <h1>atlasburst explorer</h1>
    <span class="meta-stages"></span>
    <span class="meta-counts"></span>
    <button class="reload" type="button">reload</button>
  </header>
  <div class="controls">
    <button class="prev" type="button">prev</button>
    <span class="stage-label"></span>
    <button class="next" type="button">next</button>
    <button class="mode-toggle" type="button"></button>
    <button class="kind-toggle" type="button"></button>
    <label>focus
      <select class="filter-select"><option value="">whole organism</option></select>
    </label>
    <input class="search" type="search" placeholder="search genes" />
  </div>
  <main>
    <section class="cloud-panel"><h2>genes</h2><div class="cloud-host"></div></section>
    <section class="diagrams"></section>
    <aside class="detail-panel"><h2 class="detail-name"></h2><p class="detail-state"></p></aside>
  </main>
`;

export class ExplorerApp {
  state!: SessionState;
  meta!: MetaDoc;
  names: Record<string, string> = {};
  parents: Record<string, string | null> = {};
  /** Last user-triggered operation; tests await this. */
  lastOp: Promise<void> = Promise.resolve();

  private epoch = 0;
  private searchQuery = '';
  private ready = false;

  constructor(
    private root: HTMLElement,
    private client: AtlasClient,
  ) {}

  // -- bootstrap -----------------------------------------------------------

  async init(): Promise<void> {
    this.root.innerHTML = SKELETON;
    this.wireEvents();
    try {
      const [meta, anatomy] = await Promise.all([
        this.client.meta(),
        this.client.anatomy('abstract'),
      ]);
      this.meta = meta;
      this.indexAnatomy(anatomy);
      this.state = initialState(meta);
      this.ready = true;
      this.hideBanner();
      this.renderHeader();
      this.populateFilter(anatomy);
      await this.refresh();
    } catch (err) {
      this.showBanner(`cannot reach the atlas service: ${String(err)}`, () => this.init());
    }
  }

  private indexAnatomy(anatomy: AnatomyDoc): void {
    this.names = {};
    this.parents = {};
    for (const node of anatomy.nodes) {
      this.names[node.id] = node.name;
      this.parents[node.id] = node.parent;
    }
  }

  private populateFilter(anatomy: AnatomyDoc): void {
    const select = this.q<HTMLSelectElement>('.filter-select');
    for (const node of anatomy.nodes) {
      if (node.depth !== 1) continue;
      const option = document.createElement('option');
      option.value = node.id;
      option.textContent = node.name;
      select.appendChild(option);
    }
  }

  // -- events --------------------------------------------------------------

  private wireEvents(): void {
    this.q('.prev').addEventListener('click', () => this.dispatch({ type: 'prev-stage' }));
    this.q('.next').addEventListener('click', () => this.dispatch({ type: 'next-stage' }));
    this.q('.mode-toggle').addEventListener('click', () => this.dispatch({ type: 'toggle-mode' }));
    this.q('.kind-toggle').addEventListener('click', () => this.dispatch({ type: 'toggle-kind' }));
    this.q('.reload').addEventListener('click', () => {
      this.lastOp = this.reload();
    });
    this.q('.filter-select').addEventListener('change', (e) => {
      const value = (e.target as HTMLSelectElement).value;
      this.dispatch({ type: 'filter', structure: value || null });
    });
    this.q('.search').addEventListener('input', (e) => {
      this.searchQuery = (e.target as HTMLInputElement).value;
      this.lastOp = this.refreshCloud();
    });

    const diagrams = this.q('.diagrams');
    diagrams.addEventListener('mouseover', (e) => {
      const node = (e.target as Element).closest('.node');
      if (node) {
        this.state = { ...this.state, hovered: node.getAttribute('data-id') };
        renderDetail(
          this.q('.detail-panel'),
          node.getAttribute('data-name'),
          node.getAttribute('data-state'),
        );
      }
    });
    diagrams.addEventListener('mouseout', () => {
      this.state = { ...this.state, hovered: null };
      renderDetail(this.q('.detail-panel'), null, null);
    });
    diagrams.addEventListener('click', (e) => {
      const node = (e.target as Element).closest('.node');
      if (node) this.dispatch({ type: 'zoom', node: node.getAttribute('data-id')! });
    });

    this.q('.cloud-host').addEventListener('click', (e) => {
      const gene = (e.target as Element).closest('.gene');
      if (gene) this.dispatch({ type: 'toggle-gene', gene: gene.getAttribute('data-gene')! });
    });
  }

  /** Apply an action and refresh; stale in-flight refreshes are discarded. */
  dispatch(action: NavAction): void {
    if (!this.ready) return;
    this.state = navigate(this.state, action, this.parents);
    this.lastOp = this.refresh();
  }

  private async reload(): Promise<void> {
    try {
      this.meta = await this.client.meta();
      this.hideBanner();
      this.renderHeader();
      await this.refresh();
    } catch (err) {
      this.showBanner(`reload failed: ${String(err)}`, () => this.reload());
    }
  }

  // -- rendering -----------------------------------------------------------

  private async refresh(): Promise<void> {
    const my = ++this.epoch;
    try {
      const [cloud, diagrams] = await Promise.all([
        this.client.cloud(this.state.stage, this.state.filter, this.searchQuery),
        this.fetchDiagrams(),
      ]);
      if (my !== this.epoch) return; // a newer navigation already landed
      this.renderControls();
      this.renderCloud(cloud);
      this.renderDiagrams(diagrams);
      this.hideBanner();
    } catch (err) {
      if (my !== this.epoch) return;
      if (await this.recoverLostZoom(err)) return;
      // Surface the problem, keep the stale view on screen.
      this.showBanner(String(err), () => this.refresh());
    }
  }

  private async refreshCloud(): Promise<void> {
    const my = ++this.epoch;
    try {
      const cloud = await this.client.cloud(
        this.state.stage, this.state.filter, this.searchQuery);
      if (my !== this.epoch) return;
      this.renderCloud(cloud);
    } catch (err) {
      if (my === this.epoch) this.showBanner(String(err), () => this.refreshCloud());
    }
  }

  /** A zoom root can vanish when stepping stages in staged mode; fall back
   * to the full view instead of failing. */
  private async recoverLostZoom(err: unknown): Promise<boolean> {
    if (err instanceof ApiError && err.status === 404 && this.state.zoomRoot) {
      this.state = { ...this.state, zoomRoot: null };
      await this.refresh();
      return true;
    }
    return false;
  }

  private async fetchDiagrams(): Promise<Array<{ gene: string; svg: SVGSVGElement }>> {
    if (this.state.selected.length === 0) return [];
    const layout: GeometryDoc = await this.client.layout(
      this.state.kind, this.state.mode, this.state.stage, this.state.zoomRoot);
    const expressions = await Promise.all(
      this.state.selected.map((g) =>
        this.client.expression(g, this.state.stage, this.state.mode)));
    return this.state.selected.map((gene, i) => ({
      gene,
      svg: buildDiagram(layout, expressions[i].states, this.names),
    }));
  }

  private renderHeader(): void {
    this.q('.meta-stages').textContent = `${this.meta.stages} stages`;
    this.q('.meta-counts').textContent =
      `${this.meta.counts.structures} structures, ` +
      `${this.meta.counts.genes} genes, ${this.meta.counts.annotations} annotations`;
  }

  private renderControls(): void {
    this.q('.stage-label').textContent = `TS${this.state.stage}`;
    (this.q('.prev') as HTMLButtonElement).disabled = this.state.stage <= STAGE_MIN;
    (this.q('.next') as HTMLButtonElement).disabled = this.state.stage >= STAGE_MAX;
    this.q('.mode-toggle').textContent = `mode: ${this.state.mode}`;
    this.q('.kind-toggle').textContent = `kind: ${this.state.kind}`;
  }

  private renderCloud(cloud: CloudDoc): void {
    const host = this.q('.cloud-host');
    host.innerHTML = '';
    host.appendChild(buildCloud(cloud, this.state.selected));
  }

  private renderDiagrams(cells: Array<{ gene: string; svg: SVGSVGElement }>): void {
    const host = this.q('.diagrams');
    host.innerHTML = '';
    if (cells.length === 0) {
      const hint = document.createElement('p');
      hint.className = 'empty-hint';
      hint.textContent = 'click genes in the cloud to draw their expression';
      host.appendChild(hint);
      return;
    }
    for (const cell of cells) {
      const figure = document.createElement('figure');
      figure.className = 'diagram-cell';
      figure.setAttribute('data-gene', cell.gene);
      const caption = document.createElement('figcaption');
      caption.textContent = `${cell.gene} @ TS${this.state.stage}`;
      figure.appendChild(caption);
      figure.appendChild(cell.svg);
      host.appendChild(figure);
    }
  }

  // -- chrome helpers ------------------------------------------------------

  private q<T extends Element = HTMLElement>(selector: string): T {
    return this.root.querySelector(selector) as T;
  }

  private showBanner(message: string, retry: () => Promise<void>): void {
    const banner = this.q('.banner');
    banner.classList.remove('hidden');
    banner.innerHTML = '';
    banner.appendChild(document.createTextNode(message + ' '));
    const button = document.createElement('button');
    button.type = 'button';
    button.className = 'retry';
    button.textContent = 'retry';
    button.addEventListener('click', () => {
      this.lastOp = retry();
    });
    banner.appendChild(button);
  }

  private hideBanner(): void {
    this.q('.banner').classList.add('hidden');
  }
}

export function mount(root: HTMLElement, baseUrl: string): ExplorerApp {
  const app = new ExplorerApp(root, new AtlasClient(baseUrl));
  app.lastOp = app.init();
  return app;
}
