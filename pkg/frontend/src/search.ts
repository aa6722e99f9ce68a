/** Client-side firm search over the /firms listing. */

import type { FirmSummary } from "./api.js";

/**
 * Case-insensitive match on id or name: prefix matches rank before substring
 * matches, ties keep the service's listing order.
 */
export function matchFirms(
  firms: readonly FirmSummary[],
  query: string,
  limit = 8,
): FirmSummary[] {
  const needle = query.trim().toLowerCase();
  if (!needle) {
    return [];
  }
  const prefix: FirmSummary[] = [];
  const substring: FirmSummary[] = [];
  for (const firm of firms) {
    const id = firm.company_id.toLowerCase();
    const name = firm.name.toLowerCase();
    if (id.startsWith(needle) || name.startsWith(needle)) {
      prefix.push(firm);
    } else if (id.includes(needle) || name.includes(needle)) {
      substring.push(firm);
    }
    if (prefix.length >= limit) {
      break;
    }
  }
  return [...prefix, ...substring].slice(0, limit);
}
