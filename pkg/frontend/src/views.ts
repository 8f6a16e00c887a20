import type { ChoiceView, MatchedRule } from "./types.js";
import { CONFIDENCE_LABELS } from "./types.js";

type Attrs = Record<string, string | boolean | ((event: Event) => void)>;

export function el(
  tag: string,
  attrs: Attrs = {},
  children: Array<Node | string> = [],
): HTMLElement {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    if (typeof value === "function") {
      node.addEventListener(key.replace(/^on/, ""), value);
    } else if (typeof value === "boolean") {
      if (value) node.setAttribute(key, "");
    } else {
      node.setAttribute(key, value);
    }
  }
  for (const child of children) {
    node.append(child);
  }
  return node;
}

/** Sentence with the focus span wrapped in <mark>; never leaks the answer. */
export function sentenceView(text: string, start: number, end: number): HTMLElement {
  const holder = el("p", { class: "sentence", "data-testid": "sentence" });
  holder.append(text.slice(0, start));
  holder.append(el("mark", { "data-testid": "focus" }, [text.slice(start, end)]));
  holder.append(text.slice(end));
  return holder;
}

export function choiceLabel(choice: ChoiceView): string {
  return choice.translit ? `${choice.lemma} (${choice.translit})` : choice.lemma;
}

export function choiceButtons(
  choices: ChoiceView[],
  onSelect: (lemma: string, button: HTMLButtonElement) => void,
): HTMLElement {
  const group = el("div", { class: "choices", role: "group" });
  for (const choice of choices) {
    const button = el("button", {
      class: "choice",
      type: "button",
      "data-choice": choice.lemma,
    }, [choiceLabel(choice)]) as HTMLButtonElement;
    button.addEventListener("click", () => onSelect(choice.lemma, button));
    group.append(button);
  }
  return group;
}

export function confidenceSelector(name: string): HTMLElement {
  const box = el("fieldset", { class: "confidence", "data-testid": "confidence" });
  box.append(el("legend", {}, ["How confident are you?"]));
  for (const [value, label] of CONFIDENCE_LABELS) {
    const id = `${name}-conf-${value}`;
    box.append(
      el("input", { type: "radio", name, id, value: String(value) }),
      el("label", { for: id }, [label]),
    );
  }
  return box;
}

export function selectedConfidence(root: ParentNode, name: string): number | null {
  const checked = root.querySelector<HTMLInputElement>(
    `input[name="${name}"]:checked`,
  );
  return checked ? Number(checked.value) : null;
}

/** One choice's rendered rule block as category lines. */
export function rulesBlock(choice: string, text: string): HTMLElement {
  const box = el("section", { class: "rules-block", "data-choice": choice });
  box.append(el("h3", {}, [choice]));
  for (const line of text.split("\n")) {
    if (line.trim()) box.append(el("p", { class: "rule-line" }, [line]));
  }
  return box;
}

/** Feedback rules with the matching ones visually distinguished. */
export function matchedRulesList(matched: MatchedRule[]): HTMLElement {
  const list = el("ul", { class: "matched-rules", "data-testid": "matched-rules" });
  for (const rule of matched) {
    const payload = rule.payload.join(", ");
    list.append(
      el("li", { class: "rule matched", "data-rank": String(rule.rank) }, [
        `${rule.category}: ${payload}`,
      ]),
    );
  }
  return list;
}

export function errorNote(message: string): HTMLElement {
  return el("p", { class: "error", role: "alert" }, [message]);
}

export function clear(root: HTMLElement): void {
  root.replaceChildren();
}
