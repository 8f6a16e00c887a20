import { AnnotatorFlow } from "./annotator.js";
import { Api } from "./api.js";
import { LearnerFlow } from "./learner.js";
import { clear, el } from "./views.js";

function showLogin(root: HTMLElement, api: Api): void {
  clear(root);
  const name = el("input", {
    type: "text",
    placeholder: "your id",
    "data-testid": "login-name",
  }) as HTMLInputElement;
  const start = (role: "learner" | "annotator") => () => {
    const id = name.value.trim();
    if (!id) return;
    window.location.hash = role === "learner" ? `#learner/${id}` : `#annotate/${id}`;
    boot(root, api);
  };
  root.append(
    el("section", { class: "screen login-screen" }, [
      el("h2", {}, ["lexsel study"]),
      name,
      el("button", { type: "button", onclick: start("learner") }, ["I am a learner"]),
      el("button", { type: "button", onclick: start("annotator") }, [
        "I am a native-speaker annotator",
      ]),
    ]),
  );
}

export function boot(root: HTMLElement, api: Api = new Api("")): void {
  const hash = window.location.hash;
  const learnerMatch = /^#learner\/(.+)$/.exec(hash);
  const annotatorMatch = /^#annotate\/(.+)$/.exec(hash);
  if (learnerMatch) {
    void new LearnerFlow(api, root, decodeURIComponent(learnerMatch[1]!)).run();
  } else if (annotatorMatch) {
    void new AnnotatorFlow(api, root, decodeURIComponent(annotatorMatch[1]!)).run();
  } else {
    showLogin(root, api);
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot(document.getElementById("app")!);
}
