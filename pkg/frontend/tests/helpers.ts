/**
 * Test utilities: fixture loading and the rendered-numeric audit.
 *
 * The fixtures under tests/fixtures/ are recorded responses from the
 * real service (see scripts/record_fixtures.py).  The audit extracts
 * every standalone numeric token from rendered HTML and checks it
 * against the scalar values present in the fixture, which is how the
 * zero-local-arithmetic rule is enforced.
 */

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';

const fixturesDir = join(dirname(fileURLToPath(import.meta.url)), 'fixtures');

export function fixture<T>(name: string): T {
  const raw = readFileSync(join(fixturesDir, `${name}.json`), 'utf8');
  return JSON.parse(raw) as T;
}

export function textContent(html: string): string {
  return html.replace(/<[^>]*>/g, ' ').replace(/&[a-z#0-9]+;/g, ' ');
}

const NUMERIC = /^-?\d+(\.\d+)?$/;

/** Standalone numbers in the rendered text, punctuation stripped. */
export function numericTokens(html: string): string[] {
  const tokens: string[] = [];
  for (const raw of textContent(html).split(/\s+/)) {
    const token = raw.replace(/^[(,[]+/, '').replace(/[)\],.:;]+$/, '');
    if (NUMERIC.test(token)) tokens.push(token);
  }
  return tokens;
}

/**
 * Collect every scalar in a service response, rendered the way the
 * console renders it (String on numbers, verbatim for strings).
 */
export function scalarStrings(value: unknown, out = new Set<string>()): Set<string> {
  if (typeof value === 'number') {
    out.add(String(value));
  } else if (typeof value === 'string') {
    if (NUMERIC.test(value)) out.add(value);
  } else if (Array.isArray(value)) {
    for (const item of value) scalarStrings(item, out);
  } else if (value !== null && typeof value === 'object') {
    for (const item of Object.values(value)) scalarStrings(item, out);
  }
  return out;
}

/** Assert-ready diff: rendered numbers with no matching service field. */
export function unexplainedNumbers(html: string, ...sources: unknown[]): string[] {
  const allowed = new Set<string>();
  for (const source of sources) scalarStrings(source, allowed);
  return numericTokens(html).filter((token) => !allowed.has(token));
}

/** Build a Response the way the service would send it. */
export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { 'Content-Type': 'application/json' },
  });
}

export interface RecordedCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: unknown;
}

export interface CannedResponse {
  json: unknown;
  status?: number;
}

/**
 * A fetch stub that replays recorded fixtures.  Routes map
 * "METHOD path" to a queue of responses; a queue's last entry repeats.
 */
export function fixtureFetch(routes: Record<string, CannedResponse[]>) {
  const calls: RecordedCall[] = [];
  const pending = new Map<string, CannedResponse[]>(
    Object.entries(routes).map(([k, v]) => [k, [...v]]),
  );
  const impl = async (url: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? 'GET';
    const path = url.replace(/^https?:\/\/[^/]+/, '');
    calls.push({
      url,
      method,
      headers: (init?.headers ?? {}) as Record<string, string>,
      body: typeof init?.body === 'string' ? JSON.parse(init.body) : undefined,
    });
    const queue = pending.get(`${method} ${path}`);
    if (!queue || queue.length === 0) {
      throw new Error(`no fixture for ${method} ${path}`);
    }
    const entry = queue.length > 1 ? queue.shift()! : queue[0]!;
    return jsonResponse(entry.json, entry.status ?? 200);
  };
  return { impl, calls };
}
