// DOM rendering: chart image with bbox overlays, the role legend, status bar.

import type { SamplePayload } from './api.js';
import { ROLE_ORDER, ROLE_COLORS, Role } from './roles.js';

export function renderLegend(container: HTMLElement): void {
  container.innerHTML = '';
  ROLE_ORDER.forEach((role, i) => {
    const item = document.createElement('div');
    item.className = 'legend-item';
    const key = document.createElement('kbd');
    key.textContent = String(i + 1);
    const swatch = document.createElement('span');
    swatch.className = 'swatch';
    swatch.style.background = ROLE_COLORS[role];
    const label = document.createElement('span');
    label.textContent = role;
    item.append(key, swatch, label);
    container.appendChild(item);
  });
}

export function renderSample(
  stage: HTMLElement,
  sample: SamplePayload,
  imageUrl: string,
  highlighted: number,
  onPick: (blockIndex: number) => void,
): void {
  stage.innerHTML = '';
  if (!sample.blocks.length) {
    const empty = document.createElement('p');
    empty.className = 'empty';
    empty.textContent = 'nothing to label in this sample';
    stage.appendChild(empty);
    return;
  }
  const frame = document.createElement('div');
  frame.className = 'frame';
  frame.style.width = `${sample.width}px`;
  frame.style.height = `${sample.height}px`;

  const img = document.createElement('img');
  img.src = imageUrl;
  img.width = sample.width;
  img.height = sample.height;
  img.alt = sample.sample_id;
  img.onerror = () => {
    img.replaceWith(errorBox(sample));
  };
  frame.appendChild(img);

  sample.blocks.forEach((block, i) => {
    const box = document.createElement('div');
    box.className = 'bbox' + (i === highlighted ? ' highlighted' : '');
    const color = block.role ? ROLE_COLORS[block.role as Role] : '#555';
    box.style.left = `${block.bbox.x}px`;
    box.style.top = `${block.bbox.y}px`;
    box.style.width = `${block.bbox.width}px`;
    box.style.height = `${block.bbox.height}px`;
    box.style.borderColor = color;
    box.title = `#${block.block_id} "${block.text}" ${block.role ?? 'unlabeled'}`;
    box.onclick = () => onPick(i);
    frame.appendChild(box);
  });
  stage.appendChild(frame);
}

function errorBox(sample: SamplePayload): HTMLElement {
  const div = document.createElement('div');
  div.className = 'image-error';
  div.textContent = `image for ${sample.sample_id} failed to load; ` +
    'navigation still works';
  return div;
}

export function renderStatus(
  bar: HTMLElement,
  sample: SamplePayload | null,
  sampleIndex: number,
  sampleCount: number,
  blockIndex: number,
  labeled: number,
  total: number,
): void {
  if (!sample) {
    bar.textContent = 'loading…';
    return;
  }
  const block = sample.blocks[blockIndex];
  const blockInfo = block
    ? `block ${blockIndex + 1}/${sample.blocks.length} "${block.text}" -> ${block.role ?? '·'}`
    : 'no blocks';
  bar.textContent =
    `${sample.sample_id} (${sampleIndex + 1}/${sampleCount}) | ${blockInfo} | ` +
    `labeled ${labeled}/${total}`;
}
