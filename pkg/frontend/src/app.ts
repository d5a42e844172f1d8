/**
 * Browser bootstrap: wires the pure views to the DOM and the client.
 *
 * Configuration comes from window.QUAKEDESK_CONSOLE (base URL, write
 * token, poll interval).  All state lives in service responses; the
 * only client-side state is which warning is selected and the pending
 * what-if field values.
 */

import { ApiError, ServiceClient, type ConsoleConfig } from './client.js';
import { DEFAULT_POLL_MS, LogSeqPoller } from './poll.js';
import {
  renderAssessment,
  renderAssessmentNotFound,
} from './views/assessment.js';
import { confirmationSatisfied, renderEscalation } from './views/escalation.js';
import { renderConnectivityBanner, renderInbox } from './views/inbox.js';
import {
  renderOlapControls,
  renderOlapTable,
  type OlapSelection,
} from './views/olap.js';
import { collectOverrides, renderWhatIfPanel } from './views/whatif.js';
import type { AssessmentBody, ErrorBody } from './types.js';

declare global {
  interface Window {
    QUAKEDESK_CONSOLE?: ConsoleConfig;
  }
}

interface Panels {
  banner: HTMLElement;
  inbox: HTMLElement;
  assessment: HTMLElement;
  whatif: HTMLElement;
  escalation: HTMLElement;
  olap: HTMLElement;
}

function panel(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id} in index.html`);
  return node;
}

export function startConsole(): void {
  const config = window.QUAKEDESK_CONSOLE ?? { baseUrl: '' };
  const client = new ServiceClient(config);
  const panels: Panels = {
    banner: panel('banner'),
    inbox: panel('inbox'),
    assessment: panel('assessment'),
    whatif: panel('whatif'),
    escalation: panel('escalation'),
    olap: panel('olap'),
  };

  let selectedWarning: string | null = null;
  let storedAssessment: AssessmentBody | null = null;
  const olapSelection: OlapSelection = { groupBy: ['province', 'band'], filters: [] };

  async function refreshInbox(): Promise<void> {
    const list = await client.listWarnings();
    panels.inbox.innerHTML = renderInbox(list.items);
  }

  async function refreshDetail(): Promise<void> {
    if (!selectedWarning) return;
    try {
      const stored = await client.getAssessment(selectedWarning);
      storedAssessment = stored.assessment;
      panels.assessment.innerHTML = renderAssessment(stored.assessment);
      panels.whatif.innerHTML = renderWhatIfPanel({ stored: stored.assessment });
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        panels.assessment.innerHTML = renderAssessmentNotFound(selectedWarning);
      } else {
        throw error;
      }
    }
    const escalation = await client.getEscalation(selectedWarning);
    panels.escalation.innerHTML = renderEscalation(escalation);
  }

  async function refreshOlap(): Promise<void> {
    const controls = renderOlapControls(olapSelection);
    if (olapSelection.groupBy.length === 0) {
      panels.olap.innerHTML = controls;
      return;
    }
    const result = await client.olapQuery(
      olapSelection.groupBy,
      olapSelection.filters,
    );
    panels.olap.innerHTML = controls + renderOlapTable(result);
  }

  async function refreshAll(): Promise<void> {
    await refreshInbox();
    await refreshDetail();
    await refreshOlap();
  }

  const poller = new LogSeqPoller(client, {
    onChange: () => refreshAll(),
    onError: (error) => {
      panels.banner.innerHTML = renderConnectivityBanner(
        error instanceof Error ? error.message : String(error),
      );
    },
    onRecovered: () => {
      panels.banner.innerHTML = '';
    },
  });

  function confirmed(): boolean {
    const input = panels.escalation.querySelector<HTMLInputElement>(
      'input[name="confirmation"]',
    );
    if (!input || !selectedWarning) return false;
    return confirmationSatisfied(input.value, selectedWarning);
  }

  function showServiceError(error: unknown): void {
    const body: ErrorBody =
      error instanceof ApiError
        ? error.body
        : { detail: error instanceof Error ? error.message : String(error) };
    panels.banner.innerHTML = renderConnectivityBanner(
      body.detail ?? body.error ?? 'request failed',
    );
  }

  document.addEventListener('click', (event) => {
    const target = event.target as HTMLElement;
    const row = target.closest<HTMLElement>('tr[data-warning-id]');
    if (row && row.closest('.inbox')) {
      selectedWarning = row.dataset['warningId'] ?? null;
      void refreshDetail();
      return;
    }
    const button = target.closest<HTMLButtonElement>('button[data-action]');
    if (!button || button.disabled || !selectedWarning) return;
    const action = button.dataset['action'];
    if (button.dataset['requiresConfirmation'] === 'true' && !confirmed()) {
      showServiceError(new Error('type the warning id to confirm this action'));
      return;
    }
    const approver = 'console operator';
    const id = selectedWarning;
    const call =
      action === 'sos1'
        ? client.approveSos1(id, approver)
        : action === 'sos2'
          ? client.approveSos2(id, approver)
          : action === 'resolve'
            ? client.resolve(id)
            : null;
    if (!call) return;
    call
      .then((view) => {
        panels.escalation.innerHTML = renderEscalation(view);
      })
      .catch(showServiceError);
  });

  document.addEventListener('submit', (event) => {
    const form = event.target as HTMLFormElement;
    const action = form.dataset['action'];
    if (!action) return;
    event.preventDefault();
    if (action === 'pledge' && selectedWarning) {
      const data = new FormData(form);
      const source = String(data.get('source') ?? '');
      const medics = Number(String(data.get('medics') ?? ''));
      client
        .recordPledge(selectedWarning, source, medics)
        .then((view) => {
          panels.escalation.innerHTML = renderEscalation(view);
        })
        .catch(showServiceError);
    }
    if (action === 'whatif' && selectedWarning && storedAssessment) {
      const data = new FormData(form);
      const fields: Record<string, string> = {};
      for (const name of ['persons_per_medic', 'affected_population', 'magnitude']) {
        fields[name] = String(data.get(name) ?? '');
      }
      const stored = storedAssessment;
      client
        .whatIf(selectedWarning, collectOverrides(fields))
        .then((response) => {
          panels.whatif.innerHTML = renderWhatIfPanel({
            stored,
            preview: response.assessment,
          });
        })
        .catch((error: unknown) => {
          if (error instanceof ApiError) {
            panels.whatif.innerHTML = renderWhatIfPanel({
              stored,
              error: error.body,
            });
          } else {
            showServiceError(error);
          }
        });
    }
    if (action === 'olap') {
      const data = new FormData(form);
      olapSelection.groupBy = data.getAll('group_by').map(String);
      const filter = String(data.get('filter') ?? '').trim();
      if (filter && !olapSelection.filters.includes(filter)) {
        olapSelection.filters.push(filter);
      }
      refreshOlap().catch(showServiceError);
    }
  });

  void poller.tick();
  poller.start(config.pollMs ?? DEFAULT_POLL_MS);
}

startConsole();
