/** Vanilla-DOM views: a login form and the annotation page.
 *
 * The page fully re-renders from the model after every action. User
 * actions are funnelled through a serial queue, so a double click can
 * never send two mutations with the same version, and tests can await
 * `settled()` to observe the outcome.
 */

import type { SessionModel } from "./model.js";
import type { LdpView, TagValue } from "./types.js";
import { TAGS } from "./types.js";

/** Verbatim rendering keeps displayed numbers equal to the JSON fields. */
export function formatScore(value: number | null): string {
  return value === null ? "n/a" : String(value);
}

const TAG_KEYS: Record<string, TagValue> = {
  "1": "correct",
  "2": "incorrect",
  "3": "irrelevant",
  "4": "missing",
};

export class SessionPage {
  private readonly root: HTMLElement;
  private readonly model: SessionModel;
  private selectedIndex = 0;
  private queue: Promise<void> = Promise.resolve();

  constructor(root: HTMLElement, model: SessionModel) {
    this.root = root;
    this.model = model;
    root.addEventListener("keydown", (e) => this.onKeydown(e as KeyboardEvent));
    this.render();
  }

  /** Resolves once every queued action has run and rendered. */
  settled(): Promise<void> {
    return this.queue;
  }

  private enqueue(op: () => Promise<void>): void {
    // Model methods never throw (failures land in model.notice), so the
    // chain cannot break.
    this.queue = this.queue.then(async () => {
      await op();
      this.render();
    });
  }

  private onKeydown(e: KeyboardEvent): void {
    const target = e.target as HTMLElement | null;
    const name = target?.tagName ?? "";
    if (name === "INPUT" || name === "TEXTAREA") {
      return; // typing in the add-missing field must not tag anything
    }
    const tag = TAG_KEYS[e.key];
    if (tag !== undefined && !this.model.submitted) {
      e.preventDefault();
      this.tagSelected(tag);
    } else if (e.key === "ArrowDown" || e.key === "ArrowUp") {
      e.preventDefault();
      this.moveSelection(e.key === "ArrowDown" ? 1 : -1);
      this.render();
    }
  }

  private moveSelection(step: number): void {
    const count = this.model.session.ldps.length;
    if (count === 0) return;
    this.selectedIndex = Math.min(
      Math.max(this.selectedIndex + step, 0),
      count - 1,
    );
  }

  private tagSelected(tag: TagValue): void {
    const index = this.selectedIndex;
    this.enqueue(async () => {
      await this.model.tag(index, tag);
      if (this.model.notice === null) {
        this.advanceToUntagged();
      }
    });
  }

  private advanceToUntagged(): void {
    const untagged = this.model.untaggedIndices();
    const next = untagged.find((i) => i > this.selectedIndex);
    this.selectedIndex = next ?? untagged[0] ?? this.selectedIndex;
  }

  // -- rendering ------------------------------------------------------------

  render(): void {
    const s = this.model.session;
    this.selectedIndex = Math.min(
      this.selectedIndex,
      Math.max(s.ldps.length - 1, 0),
    );
    const page = el("div", "session");
    page.append(
      this.header(),
      ...this.notices(),
      this.context(),
      this.ldpList(),
      this.addedSection(),
    );
    if (!this.model.submitted) {
      const submit = el("button", "submit-btn", "Submit");
      submit.addEventListener("click", () =>
        this.enqueue(() => this.model.submit()),
      );
      page.append(submit);
    }
    if (this.model.result !== null) {
      page.append(this.resultPanel());
    }
    this.root.replaceChildren(page);
  }

  private header(): HTMLElement {
    const s = this.model.session;
    const { tagged, total } = this.model.progress();
    const head = el("header", "session-header");
    head.append(
      el("h1", "session-title", `${s.qa_id} (${s.session_id})`),
      el("span", `session-state state-${s.state}`, s.state),
      el("span", "progress", `${tagged} of ${total} tagged, ${total - tagged} left`),
    );
    return head;
  }

  private notices(): HTMLElement[] {
    const notice = this.model.notice;
    if (notice === null) return [];
    const box = el("div", `notice notice-${notice.kind}`);
    box.append(el("span", "notice-message", notice.message));
    if (notice.kind === "conflict") {
      const btn = el("button", "reload-btn", "Reload");
      btn.addEventListener("click", () =>
        this.enqueue(() => this.model.reload()),
      );
      box.append(btn);
    } else if (notice.kind === "network") {
      const btn = el("button", "retry-btn", "Retry");
      btn.addEventListener("click", () =>
        this.enqueue(() => this.model.retry()),
      );
      box.append(btn);
    }
    return [box];
  }

  private context(): HTMLElement {
    const s = this.model.session;
    const ctx = el("section", "context");
    const contract = el("details", "contract");
    contract.append(
      el("summary", "contract-id", `Contract ${s.contract_id}`),
      el("pre", "contract-text", s.contract_text),
    );
    ctx.append(
      contract,
      el("h2", undefined, "Question"),
      el("p", "question", s.question),
      el("h2", undefined, "Answer"),
      el("p", "answer", s.answer),
    );
    return ctx;
  }

  private ldpList(): HTMLElement {
    const list = el("ol", "ldp-list");
    const highlighted = new Set(
      this.model.notice?.kind === "untagged" ? this.model.notice.indices : [],
    );
    for (const ldp of this.model.session.ldps) {
      list.append(this.ldpRow(ldp, highlighted.has(ldp.index)));
    }
    return list;
  }

  private ldpRow(ldp: LdpView, highlight: boolean): HTMLElement {
    const classes = ["ldp-row"];
    if (ldp.index === this.selectedIndex) classes.push("selected");
    if (highlight) classes.push("untagged-highlight");
    const row = el("li", classes.join(" "));
    row.dataset.index = String(ldp.index);
    row.tabIndex = 0;
    row.addEventListener("click", () => {
      this.selectedIndex = ldp.index;
      this.render();
    });
    row.append(el("div", "ldp-text", ldp.text));
    if (ldp.citation !== null) {
      row.append(el("div", "ldp-citation", ldp.citation));
    }
    row.append(
      this.model.submitted ? this.tagColumns(ldp) : this.tagButtons(ldp),
    );
    return row;
  }

  private tagButtons(ldp: LdpView): HTMLElement {
    const box = el("div", "tag-buttons");
    TAGS.forEach((tag, i) => {
      const btn = el("button", `tag-btn tag-${tag}`, `${i + 1} ${tag}`);
      btn.dataset.tag = tag;
      btn.setAttribute("aria-pressed", String(ldp.human_tag === tag));
      btn.addEventListener("click", () => {
        this.selectedIndex = ldp.index;
        this.enqueue(() => this.model.tag(ldp.index, tag));
      });
      box.append(btn);
    });
    return box;
  }

  /** After submit the machine tag is revealed next to the human one. */
  private tagColumns(ldp: LdpView): HTMLElement {
    const box = el(
      "div",
      ldp.human_tag === ldp.machine_tag ? "tag-columns agree" : "tag-columns differ",
    );
    box.append(
      el("span", "human-tag", `you: ${ldp.human_tag ?? "untagged"}`),
      el("span", "machine-tag", `judge: ${ldp.machine_tag ?? "hidden"}`),
    );
    return box;
  }

  private addedSection(): HTMLElement {
    const section = el("section", "added-ldps");
    section.append(el("h2", undefined, "Missing information"));
    const items = el("ul", "added-ldp-list");
    for (const added of this.model.session.added_ldps) {
      items.append(el("li", "added-ldp", `${added.text} (${added.tag})`));
    }
    section.append(items);
    if (!this.model.submitted) {
      section.append(this.addForm());
    }
    return section;
  }

  private addForm(): HTMLElement {
    const form = el("form", "add-ldp-form") as HTMLFormElement;
    const input = el("input", "add-ldp-text") as HTMLInputElement;
    input.placeholder = "Point the answer should have made";
    const btn = el("button", "add-ldp-btn", "Add missing LDP");
    btn.setAttribute("type", "submit");
    form.append(input, btn);
    form.addEventListener("submit", (e) => {
      e.preventDefault();
      const text = input.value.trim();
      if (text !== "") {
        this.enqueue(() => this.model.addMissing(text));
      }
    });
    return form;
  }

  private resultPanel(): HTMLElement {
    const result = this.model.result;
    if (result === null) return el("section", "result");
    const panel = el("section", "result");
    panel.append(el("h2", undefined, "Scores"));
    const dl = el("dl", "score-list");
    const rows: [string, string, string][] = [
      ["Correctness", "score-correctness", formatScore(result.scores.correctness)],
      ["Precision", "score-precision", formatScore(result.scores.precision)],
      ["Recall", "score-recall", formatScore(result.scores.recall)],
      ["F1", "score-f1", formatScore(result.scores.f1)],
      [
        "Alignment accuracy",
        "alignment-accuracy",
        formatScore(result.alignment.accuracy),
      ],
      [
        "Adjusted alignment accuracy",
        "alignment-adjusted-accuracy",
        formatScore(result.alignment.adjusted_accuracy),
      ],
    ];
    for (const [label, cls, value] of rows) {
      dl.append(el("dt", undefined, label), el("dd", cls, value));
    }
    panel.append(dl);
    return panel;
  }
}

// -- login ------------------------------------------------------------------

export interface LoginValues {
  baseUrl: string;
  token: string;
  qaId: string;
}

export function renderLogin(
  root: HTMLElement,
  defaults: Partial<LoginValues>,
  onLogin: (values: LoginValues) => void,
): void {
  const form = el("form", "login-form") as HTMLFormElement;
  const baseUrl = textInput("login-base-url", defaults.baseUrl ?? "");
  const token = textInput("login-token", defaults.token ?? "");
  const qaId = textInput("login-qa-id", defaults.qaId ?? "");
  form.append(
    labelled("Service URL", baseUrl),
    labelled("Access token", token),
    labelled("QA pair id", qaId),
    el("button", "login-btn", "Open session"),
    el("p", "login-error", ""),
  );
  form.addEventListener("submit", (e) => {
    e.preventDefault();
    onLogin({
      baseUrl: baseUrl.value.trim(),
      token: token.value.trim(),
      qaId: qaId.value.trim(),
    });
  });
  root.replaceChildren(form);
}

export function showLoginError(root: HTMLElement, message: string): void {
  const slot = root.querySelector(".login-error");
  if (slot !== null) slot.textContent = message;
}

// -- helpers ----------------------------------------------------------------

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className !== undefined) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function textInput(className: string, value: string): HTMLInputElement {
  const input = el("input", className) as HTMLInputElement;
  input.value = value;
  return input;
}

function labelled(text: string, input: HTMLElement): HTMLElement {
  const label = el("label", undefined, text);
  label.append(input);
  return label;
}
