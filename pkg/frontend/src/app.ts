import { ApiClient, ApiError } from "./api.js";
import {
  SequenceGate,
  type Screen,
  type UiState,
  decodeHash,
  encodeHash,
  initialState,
} from "./state.js";
import type {
  ChangesPayload,
  CreatedModel,
  FeatureEdit,
  GeParams,
  InstancesPayload,
  RenderPayload,
} from "./types.js";
import * as views from "./views.js";

/** Where rendered HTML and URL updates go. The browser host writes the DOM
 * and location.hash; tests capture the strings. */
export interface AppHost {
  render(html: string): void;
  setHash(hash: string): void;
}

export class App {
  state: UiState;
  private gate = new SequenceGate();
  private model: CreatedModel | null = null;
  private lastGlobal: RenderPayload | null = null;
  private lastInstances: InstancesPayload | null = null;
  private lastLocal: RenderPayload | null = null;
  private lastChanges: { payload: ChangesPayload; rendered: RenderPayload } | null = null;

  constructor(
    private api: ApiClient,
    private host: AppHost,
    initial?: UiState,
  ) {
    this.state = initial ?? initialState();
  }

  static fromHash(api: ApiClient, host: AppHost, hash: string): App {
    return new App(api, host, decodeHash(hash));
  }

  /** Fetch whatever the current screen needs and render it. */
  async boot(): Promise<void> {
    const { screen } = this.state;
    if (!this.state.modelId || screen === "home") {
      await this.openHome();
      return;
    }
    await this.ensureModel();
    if (screen === "global") await this.openGlobal();
    else if (screen === "pick") await this.openPicker();
    else if (screen === "local") await this.openLocal();
    else if (screen === "changes") await this.openChanges();
    else await this.openHome();
  }

  private async ensureModel(): Promise<void> {
    if (this.model && this.model.model_id === this.state.modelId) return;
    if (!this.state.modelId) return;
    this.model = await this.api.getSummary(this.state.modelId);
  }

  async openHome(): Promise<void> {
    this.state.screen = "home";
    try {
      await this.ensureModel();
      this.page(views.homeScreen(this.model));
    } catch (err) {
      this.page(views.homeScreen(null, (err as Error).message));
    }
  }

  async createModel(body: {
    forest?: unknown;
    train?: unknown;
    dataset_csv: string;
    schema: Record<string, unknown>;
  }): Promise<void> {
    try {
      this.model = await this.api.createModel(body);
      this.state = { ...initialState(), modelId: this.model.model_id };
      this.page(views.homeScreen(this.model));
    } catch (err) {
      this.page(views.homeScreen(null) + views.errorBox(err as ApiError));
    }
  }

  async openGlobal(params?: GeParams): Promise<void> {
    if (!this.requireModel()) return;
    this.state.screen = "global";
    if (params) this.state.geParams = { ...params };
    const key = JSON.stringify(this.state.geParams);
    try {
      const payload = await this.gate.run("global", key, () =>
        this.api.renderGlobal(this.state.modelId as string, this.state.geParams),
      );
      if (payload === null) return; // superseded by a newer request
      this.lastGlobal = payload;
      this.page(views.globalScreen(payload, this.state.geParams, this.summary()));
    } catch (err) {
      this.page(views.geControls(this.state.geParams) + views.errorBox(err as ApiError));
    }
  }

  async openPicker(): Promise<void> {
    if (!this.requireModel()) return;
    this.state.screen = "pick";
    try {
      const payload = await this.gate.run("pick", "test", () =>
        this.api.getInstances(this.state.modelId as string, "test"),
      );
      if (payload === null) return;
      this.lastInstances = payload;
      this.page(views.pickScreen(payload.instances, this.summary()));
    } catch (err) {
      this.page(views.errorBox(err as ApiError));
    }
  }

  async pickRow(index: number, values: number[]): Promise<void> {
    this.state.instance = values;
    this.state.instanceRow = index;
    this.state.pendingEdits = [];
    this.state.lastWhatIf = null;
    await this.openLocal();
  }

  async setManualInstance(values: number[]): Promise<void> {
    this.state.instance = values;
    this.state.instanceRow = null;
    this.state.pendingEdits = [];
    this.state.lastWhatIf = null;
    await this.openLocal();
  }

  async openLocal(): Promise<void> {
    if (!this.requireModel() || !this.requireInstance()) return;
    this.state.screen = "local";
    const instance = this.state.instance as number[];
    try {
      const payload = await this.gate.run("local", instance.join(","), () =>
        this.api.renderLocal(this.state.modelId as string, instance, "local"),
      );
      if (payload === null) return;
      this.lastLocal = payload;
      this.page(
        views.localScreen(payload.view, payload, this.summary(), this.state.lastWhatIf),
      );
    } catch (err) {
      this.page(views.errorBox(err as ApiError));
    }
  }

  async openChanges(): Promise<void> {
    if (!this.requireModel() || !this.requireInstance()) return;
    this.state.screen = "changes";
    const instance = this.state.instance as number[];
    try {
      const result = await this.gate.run("changes", instance.join(","), async () => {
        const [payload, rendered] = await Promise.all([
          this.api.explainChanges(this.state.modelId as string, instance),
          this.api.renderLocal(this.state.modelId as string, instance, "changes"),
        ]);
        return { payload, rendered };
      });
      if (result === null) return;
      this.lastChanges = result;
      this.page(
        views.changesScreen(
          result.payload, result.rendered, this.summary(), this.state.lastWhatIf,
        ),
      );
    } catch (err) {
      this.page(views.errorBox(err as ApiError));
    }
  }

  /** Apply one tree's smallest change: exactly one /whatif call, then
   * re-render the current screen from cached data. */
  async applyChange(treeId: number): Promise<void> {
    if (!this.requireModel() || !this.requireInstance()) return;
    try {
      this.state.lastWhatIf = await this.api.whatifTree(
        this.state.modelId as string,
        this.state.instance as number[],
        treeId,
      );
      this.rerenderCurrent();
    } catch (err) {
      this.page(views.errorBox(err as ApiError));
    }
  }

  /** Slider edits: re-predict against the latest server response. */
  async applyEdits(edits: FeatureEdit[]): Promise<void> {
    if (!this.requireModel() || !this.requireInstance()) return;
    this.state.pendingEdits = edits;
    try {
      this.state.lastWhatIf = await this.api.whatifEdits(
        this.state.modelId as string,
        this.state.instance as number[],
        edits,
      );
      this.rerenderCurrent();
    } catch (err) {
      this.page(views.errorBox(err as ApiError));
    }
  }

  /** The steering loop: the edited instance becomes the working instance
   * only on this explicit action, so explorations stay reversible. */
  async adopt(): Promise<void> {
    if (!this.state.lastWhatIf) return;
    this.state.instance = [...this.state.lastWhatIf.new_instance];
    this.state.instanceRow = null;
    this.state.pendingEdits = [];
    this.state.lastWhatIf = null;
    if (this.state.screen === "changes") await this.openChanges();
    else await this.openLocal();
  }

  private rerenderCurrent(): void {
    const s = this.summary();
    if (this.state.screen === "changes" && this.lastChanges) {
      this.page(
        views.changesScreen(
          this.lastChanges.payload, this.lastChanges.rendered, s, this.state.lastWhatIf,
        ),
      );
    } else if (this.lastLocal) {
      this.page(
        views.localScreen(this.lastLocal.view, this.lastLocal, s, this.state.lastWhatIf),
      );
    }
  }

  goto(screen: Screen): Promise<void> {
    this.state.screen = screen;
    return this.boot();
  }

  private summary() {
    if (!this.model) throw new Error("no model loaded");
    return this.model.summary;
  }

  private requireModel(): boolean {
    if (!this.state.modelId) {
      this.page(views.homeScreen(null, "load a model first"));
      return false;
    }
    return true;
  }

  private requireInstance(): boolean {
    if (!this.state.instance) {
      this.state.screen = "pick";
      void this.openPicker();
      return false;
    }
    return true;
  }

  private page(content: string): void {
    const nav = views.navBar(
      this.state.screen,
      this.state.modelId !== null,
      this.state.instance !== null,
    );
    this.host.render(nav + content);
    this.host.setHash(encodeHash(this.state));
  }
}
