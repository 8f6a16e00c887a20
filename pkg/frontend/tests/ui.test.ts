// @vitest-environment happy-dom
//
// S1: flow gating and submission discipline of the learner interface.

import { beforeEach, describe, expect, it } from "vitest";

import { Api } from "../src/api.js";
import { LearnerFlow } from "../src/learner.js";
import { FakeBackend, exampleWord } from "./fake_backend.js";

function setup(condition: "rules" | "no_rules") {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app")!;
  const backend = new FakeBackend("L0", [exampleWord("wall|NOUN", condition)]);
  const api = new Api("", backend.fetch);
  const flow = new LearnerFlow(api, root, "L0");
  return { root, backend, api, flow };
}

async function settle(): Promise<void> {
  for (let i = 0; i < 20; i += 1) {
    await Promise.resolve();
  }
}

function click(root: HTMLElement, selector: string): void {
  const node = root.querySelector<HTMLElement>(selector);
  expect(node, `missing element ${selector}`).toBeTruthy();
  node!.click();
}

async function answerCurrentQuestion(root: HTMLElement, choice: string,
                                     confidence: number): Promise<void> {
  click(root, `button[data-choice="${choice}"]`);
  const radio = root.querySelector<HTMLInputElement>(
    `fieldset input[value="${confidence}"]`,
  )!;
  radio.checked = true;
  click(root, '[data-testid="submit-answer"]');
  await settle();
}

describe("learner flow screens", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("shows the rules review screen before question 1 in the rules condition", async () => {
    const { root, flow } = setup("rules");
    const run = flow.run();
    await settle();
    expect(root.querySelector('[data-testid="rules-screen"]')).toBeTruthy();
    expect(root.querySelector('[data-testid="question-screen"]')).toBeNull();
    // both choices are reviewable before any question
    const blocks = root.querySelectorAll(".rules-block");
    expect(blocks).toHaveLength(2);
    click(root, '[data-testid="start-questions"]');
    await settle();
    expect(root.querySelector('[data-testid="question-screen"]')).toBeTruthy();
    void run;
  });

  it("goes straight to question 1 in the baseline condition, with no rules panel", async () => {
    const { root, flow } = setup("no_rules");
    const run = flow.run();
    await settle();
    expect(root.querySelector('[data-testid="rules-screen"]')).toBeNull();
    expect(root.querySelector('[data-testid="question-screen"]')).toBeTruthy();
    expect(root.querySelector('[data-testid="rules-panel"]')).toBeNull();
    void run;
  });

  it("keeps the rules panel available while answering in the rules condition", async () => {
    const { root, flow } = setup("rules");
    const run = flow.run();
    await settle();
    click(root, '[data-testid="start-questions"]');
    await settle();
    expect(root.querySelector('[data-testid="rules-panel"]')).toBeTruthy();
    void run;
  });

  it("never reveals the correct answer before submission", async () => {
    const { root, flow } = setup("no_rules");
    const run = flow.run();
    await settle();
    const screen = root.querySelector('[data-testid="question-screen"]')!;
    expect(screen.textContent).not.toContain("right answer");
    expect(root.querySelector('[data-testid="correct-choice"]')).toBeNull();
    void run;
  });
});

describe("submission discipline", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("blocks submission without a confidence rating", async () => {
    const { root, backend, flow } = setup("no_rules");
    const run = flow.run();
    await settle();
    click(root, 'button[data-choice="muro"]');
    click(root, '[data-testid="submit-answer"]');
    await settle();
    expect(backend.answers).toHaveLength(0);
    expect(root.querySelector(".error")!.textContent).toMatch(/confident/i);
    // still on the question screen
    expect(root.querySelector('[data-testid="question-screen"]')).toBeTruthy();
    void run;
  });

  it("blocks submission without a selected choice", async () => {
    const { root, backend, flow } = setup("no_rules");
    const run = flow.run();
    await settle();
    const radio = root.querySelector<HTMLInputElement>('fieldset input[value="3"]')!;
    radio.checked = true;
    click(root, '[data-testid="submit-answer"]');
    await settle();
    expect(backend.answers).toHaveLength(0);
    expect(root.querySelector(".error")!.textContent).toMatch(/translation/i);
    void run;
  });

  it("cannot submit the same question twice", async () => {
    const { root, backend, flow } = setup("no_rules");
    const run = flow.run();
    await settle();
    click(root, 'button[data-choice="muro"]');
    const radio = root.querySelector<HTMLInputElement>('fieldset input[value="4"]')!;
    radio.checked = true;
    const submit = root.querySelector<HTMLButtonElement>(
      '[data-testid="submit-answer"]',
    )!;
    submit.click();
    submit.click();
    submit.click();
    await settle();
    expect(backend.answers).toHaveLength(1);
    expect(submit.disabled).toBe(true);
    void run;
  });
});

describe("feedback screen", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("shows only the correct choice's rules with matched rules distinguished", async () => {
    const { root, flow } = setup("rules");
    const run = flow.run();
    await settle();
    click(root, '[data-testid="start-questions"]');
    await settle();
    // question 1 is the "stone wall" example whose answer is muro
    await answerCurrentQuestion(root, "pared", 2);
    const feedback = root.querySelector('[data-testid="feedback-screen"]')!;
    expect(feedback.querySelector('[data-testid="correct-choice"]')!.textContent)
      .toContain("muro");
    const blocks = feedback.querySelectorAll(".rules-block");
    expect(blocks).toHaveLength(1);
    expect(blocks[0]!.getAttribute("data-choice")).toBe("muro");
    expect(feedback.textContent).not.toContain("picture");  // pared rules absent
    const matched = feedback.querySelectorAll(".matched-rules .rule.matched");
    expect(matched).toHaveLength(1);
    expect(matched[0]!.textContent).toContain("stone");
    void run;
  });

  it("shows no rules at all in the baseline condition", async () => {
    const { root, flow } = setup("no_rules");
    const run = flow.run();
    await settle();
    await answerCurrentQuestion(root, "pared", 2);
    const feedback = root.querySelector('[data-testid="feedback-screen"]')!;
    expect(feedback.querySelector(".rules-block")).toBeNull();
    expect(feedback.querySelector('[data-testid="matched-rules"]')).toBeNull();
    expect(feedback.querySelector('[data-testid="correct-choice"]')).toBeTruthy();
    void run;
  });

  it("finishes the word after the last example and completes the run", async () => {
    const { root, flow } = setup("no_rules");
    const run = flow.run();
    await settle();
    await answerCurrentQuestion(root, "muro", 3);
    click(root, '[data-testid="next-question"]');
    await settle();
    await answerCurrentQuestion(root, "pared", 3);
    click(root, '[data-testid="next-question"]');
    await settle();
    await run;
    expect(root.querySelector('[data-testid="all-done"]')).toBeTruthy();
  });

  it("highlights the focus span in the sentence", async () => {
    const { root, flow } = setup("no_rules");
    const run = flow.run();
    await settle();
    const mark = root.querySelector('[data-testid="focus"]')!;
    expect(mark.textContent).toBe("wall");
    void run;
  });
});
