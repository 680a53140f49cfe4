// Demo datasets for the loader menu (the same fixtures the backend ships).

export interface FixtureExample {
  string: string;
  label: "positive" | "negative";
}

export interface Fixture {
  id: string;
  title: string;
  examples: FixtureExample[];
}

const pos = (s: string): FixtureExample => ({ string: s, label: "positive" });
const neg = (s: string): FixtureExample => ({ string: s, label: "negative" });

export const FIXTURES: Fixture[] = [
  {
    id: "fig1-toy",
    title: "toy: ab / abb",
    examples: [pos("ab"), pos("abb")],
  },
  {
    id: "dogs-cat",
    title: "dogs vs cat",
    examples: [pos("dogs"), neg("cat")],
  },
  {
    id: "bracket-hard",
    title: "bracketed word (adversarial)",
    examples: [pos("[hello]"), neg("hello]"), neg("[hello"), neg("[]hello"), neg("hello[]")],
  },
  {
    id: "star-s",
    title: "ends in s (long strings)",
    examples: [
      pos("fj38fj498js"),
      pos("r5iffffkkkks"),
      pos("59yhkgyg7s"),
      pos("FJEFJISFJs"),
      neg("SIJF$$FES"),
      neg("48f94wfwh"),
      neg("GRSRSRSFJh"),
      neg("sw4wfJEHSFK"),
    ],
  },
  {
    id: "number-parser",
    title: "number formats",
    examples: [pos("123"), pos("123.456"), pos("-123"), pos(".456"), neg("."), neg("123.456.7")],
  },
];
