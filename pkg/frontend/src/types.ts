export type Condition = "rules" | "no_rules";

export interface ChoiceView {
  lemma: string;
  translit: string | null;
}

export interface WordOverview {
  word: string;
  display: string;
  condition: Condition;
  choices: ChoiceView[];
  done: boolean;
}

export interface SessionsResponse {
  learner: string;
  words: WordOverview[];
}

export interface Question {
  done: false;
  example_id: string;
  text: string;
  focus_start: number;
  focus_end: number;
  position: number;
  condition: Condition;
  choices: ChoiceView[];
}

export type NextResponse = Question | { done: true };

export interface MatchedRule {
  category: string;
  payload: string[];
  rank: number;
}

export interface Feedback {
  correct_choice: string;
  correct: boolean;
  done: boolean;
  rules_text?: string;
  matched_rules?: MatchedRule[];
}

export interface RulesView {
  word: string;
  choices: string[];
  rendered: Record<string, string>;
}

export interface AnnotationItem {
  done: false;
  word: string;
  example_id: string;
  text: string;
  focus_start: number;
  focus_end: number;
  choices: ChoiceView[];
}

export type AnnotationNextResponse = AnnotationItem | { done: true };

export interface AnswerBody {
  example_id: string;
  choice: string;
  confidence: number;
}

export const CONFIDENCE_LABELS: ReadonlyArray<[number, string]> = [
  [1, "Not at all"],
  [2, "Slightly"],
  [3, "Somewhat"],
  [4, "Quite"],
  [5, "Very"],
];
