import { Api } from "./api.js";
import type { Feedback, Question, RulesView, WordOverview } from "./types.js";
import {
  choiceButtons,
  clear,
  confidenceSelector,
  el,
  errorNote,
  matchedRulesList,
  rulesBlock,
  selectedConfidence,
  sentenceView,
} from "./views.js";

/**
 * Drives one learner through every assigned word in order.
 *
 * The server is the source of truth: a refresh restarts from GET /next,
 * answers carry the example id as the idempotency token, and the client
 * never learns the correct answer before submission.
 */
export class LearnerFlow {
  constructor(
    private readonly api: Api,
    private readonly root: HTMLElement,
    private readonly learner: string,
  ) {}

  async run(): Promise<void> {
    const overview = await this.api.sessions(this.learner);
    for (const word of overview.words) {
      await this.runWord(word);
    }
    clear(this.root);
    this.root.append(
      el("section", { class: "screen done-screen", "data-testid": "all-done" }, [
        el("h2", {}, ["All tasks complete"]),
        el("p", {}, ["Thank you for participating."]),
      ]),
    );
  }

  async runWord(word: WordOverview): Promise<void> {
    if (word.done) return;
    let rules: RulesView | null = null;
    if (word.condition === "rules") {
      rules = await this.api.rules(word.word, this.learner);
      await this.showRulesScreen(word, rules);
    }
    while (true) {
      const next = await this.api.next(this.learner, word.word);
      if (next.done) break;
      const { choice, confidence } = await this.askQuestion(word, next, rules);
      const feedback = await this.api.answer(this.learner, word.word, {
        example_id: next.example_id,
        choice,
        confidence,
      });
      await this.showFeedback(word, feedback);
    }
  }

  /** Pre-task review screen; the learner continues at their own pace. */
  private showRulesScreen(word: WordOverview, rules: RulesView): Promise<void> {
    return new Promise((resolve) => {
      clear(this.root);
      const screen = el("section", {
        class: "screen rules-screen",
        "data-testid": "rules-screen",
      });
      screen.append(el("h2", {}, [`When to use each translation of "${word.display}"`]));
      for (const choice of rules.choices) {
        screen.append(rulesBlock(choice, rules.rendered[choice] ?? ""));
      }
      const start = el("button", {
        type: "button",
        class: "primary",
        "data-testid": "start-questions",
      }, ["Start the questions"]);
      start.addEventListener("click", () => resolve());
      screen.append(start);
      this.root.append(screen);
    });
  }

  private askQuestion(
    word: WordOverview,
    question: Question,
    rules: RulesView | null,
  ): Promise<{ choice: string; confidence: number }> {
    return new Promise((resolve) => {
      clear(this.root);
      const screen = el("section", {
        class: "screen question-screen",
        "data-testid": "question-screen",
      });
      screen.append(
        el("h2", {}, [`${word.display} - question ${question.position}`]),
        sentenceView(question.text, question.focus_start, question.focus_end),
      );

      let selected: string | null = null;
      const buttons = choiceButtons(question.choices, (lemma, button) => {
        if (submitted) return;
        selected = lemma;
        for (const other of buttons.querySelectorAll("button")) {
          other.classList.toggle("selected", other === button);
        }
      });
      screen.append(buttons);

      const confName = `q-${question.example_id}`;
      screen.append(confidenceSelector(confName));

      const errorSlot = el("div", { class: "error-slot" });
      screen.append(errorSlot);

      let submitted = false;
      const submit = el("button", {
        type: "button",
        class: "primary",
        "data-testid": "submit-answer",
      }, ["Submit answer"]) as HTMLButtonElement;
      submit.addEventListener("click", () => {
        if (submitted) return;
        const confidence = selectedConfidence(screen, confName);
        clear(errorSlot);
        if (selected === null) {
          errorSlot.append(errorNote("Pick one of the translations first."));
          return;
        }
        if (confidence === null) {
          errorSlot.append(errorNote("Mark how confident you are before submitting."));
          return;
        }
        submitted = true;
        submit.disabled = true;
        resolve({ choice: selected, confidence });
      });
      screen.append(submit);

      if (rules !== null) {
        const panel = el("aside", {
          class: "rules-panel",
          "data-testid": "rules-panel",
        });
        panel.append(el("h3", {}, ["Rules for the translation choices"]));
        for (const choice of rules.choices) {
          panel.append(rulesBlock(choice, rules.rendered[choice] ?? ""));
        }
        screen.append(panel);
      }

      this.root.append(screen);
    });
  }

  /** Correct answer always; rules of only the correct choice when present. */
  private showFeedback(word: WordOverview, feedback: Feedback): Promise<void> {
    return new Promise((resolve) => {
      clear(this.root);
      const screen = el("section", {
        class: "screen feedback-screen",
        "data-testid": "feedback-screen",
      });
      screen.append(
        el("h2", { class: feedback.correct ? "correct" : "incorrect" }, [
          feedback.correct ? "Correct!" : "Not quite.",
        ]),
        el("p", { "data-testid": "correct-choice" }, [
          "The right answer is ",
          el("strong", {}, [feedback.correct_choice]),
          ".",
        ]),
      );
      if (feedback.rules_text !== undefined) {
        screen.append(rulesBlock(feedback.correct_choice, feedback.rules_text));
        if (feedback.matched_rules && feedback.matched_rules.length > 0) {
          screen.append(
            el("h4", {}, ["Hints that applied to this sentence"]),
            matchedRulesList(feedback.matched_rules),
          );
        }
      }
      const next = el("button", {
        type: "button",
        class: "primary",
        "data-testid": "next-question",
      }, [feedback.done ? `Finish "${word.display}"` : "Next question"]);
      next.addEventListener("click", () => resolve());
      screen.append(next);
      this.root.append(screen);
    });
  }
}
