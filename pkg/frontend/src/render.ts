/**
 * Small HTML-string rendering helpers.
 *
 * Views produce plain HTML strings so they stay pure functions of the
 * service data and can be tested without a DOM.  The one hard rule:
 * numbers pass through String() untouched; the console never derives a
 * numeric value of its own.
 */

export function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

/** Render a service-provided number verbatim. */
export function num(value: number): string {
  return String(value);
}

export function badge(text: string, tone: string): string {
  return `<span class="badge badge-${esc(tone)}">${esc(text)}</span>`;
}

export function phaseBadge(phase: string): string {
  const tones: Record<string, string> = {
    Received: 'neutral',
    Assessed: 'info',
    Sos1Issued: 'warn',
    Sos2Issued: 'alert',
    Resolved: 'ok',
  };
  return badge(phase, tones[phase] ?? 'neutral');
}

export interface ButtonSpec {
  label: string;
  action: string;
  enabled: boolean;
  reason?: string;
  requiresConfirmation?: boolean;
}

/**
 * A workflow button; when disabled the reason is rendered beside it so
 * the operator always sees why an action is unavailable.
 */
export function actionButton(spec: ButtonSpec): string {
  const attrs = [
    `data-action="${esc(spec.action)}"`,
    spec.requiresConfirmation ? 'data-requires-confirmation="true"' : '',
    spec.enabled ? '' : 'disabled',
  ]
    .filter(Boolean)
    .join(' ');
  const reason =
    !spec.enabled && spec.reason
      ? ` <span class="disabled-reason">${esc(spec.reason)}</span>`
      : '';
  return `<button ${attrs}>${esc(spec.label)}</button>${reason}`;
}
