/** Verdict panel: the service's label verbatim, the ensemble probability as
 * a percentage, the per-member vote breakdown, and the model's measured
 * accuracy with a decision-support disclaimer. */

import type { ModelInfo, Prediction } from "./api.js";

export function formatPercent(p: number): string {
  return `${Math.round(p * 100)}%`;
}

/** Probability the member assigned to the class it voted for. */
function voteConfidence(label: string, pPositive: number, info: ModelInfo): number {
  return label === info.labels.positive ? pPositive : 1 - pPositive;
}

export function renderVerdict(
  container: HTMLElement,
  prediction: Prediction,
  info: ModelInfo,
): void {
  container.replaceChildren();

  const headline = document.createElement("h2");
  headline.className = "verdict-label";
  headline.textContent = prediction.label; // verbatim, never re-derived
  container.appendChild(headline);

  const probability = document.createElement("p");
  probability.className = "verdict-probability";
  probability.textContent = `${info.labels.positive} probability: ${formatPercent(prediction.p_positive)}`;
  container.appendChild(probability);

  const forVerdict = prediction.votes.filter(
    (v) => v.label === prediction.label,
  ).length;
  const tally = document.createElement("p");
  tally.className = "verdict-tally";
  tally.textContent = `${forVerdict}-vs-${prediction.votes.length - forVerdict} member vote`;
  container.appendChild(tally);

  const table = document.createElement("table");
  table.className = "vote-breakdown";
  const head = table.createTHead().insertRow();
  for (const title of ["member", "vote", "confidence"]) {
    const th = document.createElement("th");
    th.textContent = title;
    head.appendChild(th);
  }
  const body = table.createTBody();
  for (const vote of prediction.votes) {
    const row = body.insertRow();
    row.insertCell().textContent = vote.member;
    row.insertCell().textContent = vote.label;
    row.insertCell().textContent = formatPercent(
      voteConfidence(vote.label, vote.p_positive, info),
    );
  }
  container.appendChild(table);

  for (const warning of prediction.warnings) {
    const note = document.createElement("p");
    note.className = "verdict-warning";
    note.textContent = warning;
    container.appendChild(note);
  }

  const footer = document.createElement("p");
  footer.className = "verdict-disclaimer";
  const accuracy = info.metrics?.["accuracy"];
  const measured =
    typeof accuracy === "number"
      ? `Model cross-validation accuracy: ${formatPercent(accuracy)}. `
      : "";
  footer.textContent = `${measured}Decision support, not diagnosis.`;
  container.appendChild(footer);
}
