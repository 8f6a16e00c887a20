import { Api } from "./api.js";
import type { AnnotationItem } from "./types.js";
import {
  choiceButtons,
  clear,
  confidenceSelector,
  el,
  errorNote,
  selectedConfidence,
  sentenceView,
} from "./views.js";

/**
 * Representative-example selection: same question screen as the learner
 * task but with no rules and no right/wrong feedback.
 */
export class AnnotatorFlow {
  constructor(
    private readonly api: Api,
    private readonly root: HTMLElement,
    private readonly annotator: string,
  ) {}

  async run(): Promise<void> {
    while (true) {
      const item = await this.api.annotateNext(this.annotator);
      if (item.done) break;
      const { choice, confidence } = await this.askItem(item);
      await this.api.annotateAnswer(this.annotator, {
        example_id: item.example_id,
        choice,
        confidence,
      });
    }
    clear(this.root);
    this.root.append(
      el("section", { class: "screen done-screen", "data-testid": "annotation-done" }, [
        el("h2", {}, ["Annotation queue complete"]),
        el("p", {}, ["Every example has been labeled."]),
      ]),
    );
  }

  private askItem(item: AnnotationItem): Promise<{ choice: string; confidence: number }> {
    return new Promise((resolve) => {
      clear(this.root);
      const screen = el("section", {
        class: "screen annotation-screen",
        "data-testid": "annotation-screen",
      });
      screen.append(
        el("h2", {}, [`Which translation fits best? (${item.word})`]),
        sentenceView(item.text, item.focus_start, item.focus_end),
      );
      let selected: string | null = null;
      const buttons = choiceButtons(item.choices, (lemma, button) => {
        if (submitted) return;
        selected = lemma;
        for (const other of buttons.querySelectorAll("button")) {
          other.classList.toggle("selected", other === button);
        }
      });
      screen.append(buttons);
      const confName = `ann-${item.example_id}`;
      screen.append(confidenceSelector(confName));
      const errorSlot = el("div", { class: "error-slot" });
      screen.append(errorSlot);

      let submitted = false;
      const submit = el("button", {
        type: "button",
        class: "primary",
        "data-testid": "submit-annotation",
      }, ["Submit"]) as HTMLButtonElement;
      submit.addEventListener("click", () => {
        if (submitted) return;
        const confidence = selectedConfidence(screen, confName);
        clear(errorSlot);
        if (selected === null) {
          errorSlot.append(errorNote("Pick the translation that fits the sentence."));
          return;
        }
        if (confidence === null) {
          errorSlot.append(errorNote("Mark your confidence before submitting."));
          return;
        }
        submitted = true;
        submit.disabled = true;
        resolve({ choice: selected, confidence });
      });
      screen.append(submit);
      this.root.append(screen);
    });
  }
}
