// The nine text role classes in their canonical order. Keys 1-9 map to the
// same order, so the digit a labeler presses is the role's position here.

export const ROLE_ORDER = [
  'chart_title',
  'legend_title',
  'legend_label',
  'axis_title',
  'tick_label',
  'tick_grouping',
  'mark_label',
  'value_label',
  'other',
] as const;

export type Role = (typeof ROLE_ORDER)[number];

export const KEY_TO_ROLE: Record<string, Role> = Object.fromEntries(
  ROLE_ORDER.map((role, i) => [String(i + 1), role]),
) as Record<string, Role>;

export const ROLE_COLORS: Record<Role, string> = {
  chart_title: '#1f77b4',
  legend_title: '#9467bd',
  legend_label: '#8c564b',
  axis_title: '#2ca02c',
  tick_label: '#ff7f0e',
  tick_grouping: '#17becf',
  mark_label: '#d62728',
  value_label: '#bcbd22',
  other: '#7f7f7f',
};

export function roleForKey(key: string): Role | null {
  return KEY_TO_ROLE[key] ?? null;
}
