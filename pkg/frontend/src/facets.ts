/** Facet tree rendering: umbrella roots collapsed by default, expandable into
 * their member entities with certainty styling. Counts come straight from the
 * server; the UI never recomputes them. */

import type { FacetNode, FacetTree } from "./types.js";

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function renderNode(node: FacetNode): HTMLElement {
  const item = el("li", `facet certainty-${node.certainty}`);
  item.dataset.uri = node.uri;
  const label = el("span", "facet-label", node.label);
  const count = el("span", "facet-count", String(node.artwork_count));
  item.append(label, count);
  if (node.children.length > 0) {
    item.classList.add("expandable", "collapsed");
    const children = el("ul", "facet-children hidden");
    for (const child of node.children) {
      children.append(renderNode(child));
    }
    label.addEventListener("click", () => {
      const collapsed = item.classList.toggle("collapsed");
      children.classList.toggle("hidden", collapsed);
    });
    item.append(children);
  }
  return item;
}

export function renderFacetTree(container: HTMLElement, tree: FacetTree): void {
  container.replaceChildren();
  if (tree.roots.length === 0) {
    container.append(el("p", "empty-state", "No facets available."));
    return;
  }
  const list = el("ul", "facet-roots");
  for (const root of tree.roots) {
    list.append(renderNode(root));
  }
  container.append(list);
}
