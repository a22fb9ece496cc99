// Entry point: wires the session to the DOM and the keyboard.

import { ApiClient } from './api.js';
import { renderLegend, renderSample, renderStatus } from './overlay.js';
import { UiSession } from './session.js';

const api = new ApiClient('');
const stage = document.getElementById('stage')!;
const legend = document.getElementById('legend')!;
const status = document.getElementById('status')!;
const toast = document.getElementById('toast')!;

function showToast(message: string): void {
  toast.textContent = message;
  toast.classList.add('visible');
  setTimeout(() => toast.classList.remove('visible'), 2500);
}

const session = new UiSession(api, 'ui', {
  onSample: (sample) => {
    renderSample(stage, sample, api.imageUrl(sample), session.blockIndex, (i) => {
      session.blockIndex = i;
      redraw();
    });
    redraw();
  },
  onBlock: () => redraw(),
  onProgress: () => redraw(),
  onError: (message) => showToast(`rejected: ${message}`),
});

function redraw(): void {
  if (session.current) {
    renderSample(stage, session.current, api.imageUrl(session.current),
      session.blockIndex, (i) => {
        session.blockIndex = i;
        redraw();
      });
  }
  renderStatus(status, session.current, session.sampleIndex,
    session.sampleIds.length, session.blockIndex, session.labeled, session.total);
}

document.addEventListener('keydown', (e: KeyboardEvent) => {
  if (e.target instanceof HTMLInputElement) return;
  if (e.key === 'e' || e.key === 'E') {
    session
      .exportCorpus()
      .then((path) => showToast(`exported to ${path}`))
      .catch((err) => showToast(`export failed: ${err.message}`));
    return;
  }
  session.handleKey(e.key).then((handled) => {
    if (handled) e.preventDefault();
  });
});

document.getElementById('export-btn')!.addEventListener('click', () => {
  session
    .exportCorpus()
    .then((path) => showToast(`exported to ${path}`))
    .catch((err) => showToast(`export failed: ${err.message}`));
});

renderLegend(legend);
session.start().then(redraw).catch((err) => showToast(String(err)));
