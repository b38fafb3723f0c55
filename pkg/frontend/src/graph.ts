import { join } from "node:path";

import { writeEdgeList, writeEmbeddings, writeLabels } from "./emb.js";
import { Encoder } from "./encoder.js";
import { LexicalDatabase, Synset } from "./lexical.js";
import { assertClassesResolve } from "./manifest.js";

export interface GraphExport {
  nodeCount: number;
  classNodes: number[];
  edges: [number, number][];
  nodeNames: string[];
  files: { edges: string; classNodes: string; nodeInit: string };
}

/** Build the class relation graph: anchor each class to a synset, take the
 * union of hypernym paths to the root, then keep only the minimal subtree
 * spanning the class synsets (repeatedly strip non-class leaves). Class k
 * becomes node k; surviving ancestors follow in sorted id order. */
export function buildClassSubtree(
  classes: readonly string[],
  db: LexicalDatabase,
): { classSynsets: Synset[]; kept: Set<string>; parents: Map<string, string | null> } {
  assertClassesResolve(classes, db);
  const classSynsets = classes.map((c) => db.resolveClass(c) as Synset);

  const dup = new Map<string, string>();
  for (let k = 0; k < classes.length; k++) {
    const prior = dup.get(classSynsets[k].id);
    if (prior !== undefined) {
      throw new Error(
        `classes ${prior} and ${classes[k]} resolve to the same synset ${classSynsets[k].id}`,
      );
    }
    dup.set(classSynsets[k].id, classes[k]);
  }

  // union of paths to root, remembering each node's unique parent
  const parents = new Map<string, string | null>();
  for (const s of classSynsets) {
    for (const node of db.pathToRoot(s.id)) {
      parents.set(node.id, node.parent);
    }
  }

  // undirected degree over the union tree
  const degree = new Map<string, number>();
  for (const id of parents.keys()) degree.set(id, 0);
  for (const [id, parent] of parents) {
    if (parent !== null) {
      degree.set(id, (degree.get(id) ?? 0) + 1);
      degree.set(parent, (degree.get(parent) ?? 0) + 1);
    }
  }

  const isClass = new Set(classSynsets.map((s) => s.id));
  const kept = new Set(parents.keys());
  const queue = [...kept].filter((id) => !isClass.has(id) && (degree.get(id) ?? 0) <= 1);
  while (queue.length > 0) {
    const id = queue.pop() as string;
    if (!kept.has(id)) continue;
    kept.delete(id);
    const parent = parents.get(id);
    const neighbors: string[] = [];
    if (parent !== null && parent !== undefined && kept.has(parent)) neighbors.push(parent);
    for (const [child, p] of parents) {
      if (p === id && kept.has(child)) neighbors.push(child);
    }
    for (const nb of neighbors) {
      degree.set(nb, (degree.get(nb) ?? 1) - 1);
      if (!isClass.has(nb) && (degree.get(nb) ?? 0) <= 1) queue.push(nb);
    }
  }
  return { classSynsets, kept, parents };
}

export async function exportGraph(
  classes: readonly string[],
  db: LexicalDatabase,
  encoder: Encoder,
  outDir: string,
): Promise<GraphExport> {
  const { classSynsets, kept, parents } = buildClassSubtree(classes, db);

  const index = new Map<string, number>();
  classSynsets.forEach((s, k) => index.set(s.id, k));
  const ancestors = [...kept].filter((id) => !index.has(id)).sort();
  ancestors.forEach((id, i) => index.set(id, classes.length + i));

  const edges: [number, number][] = [];
  for (const id of kept) {
    const parent = parents.get(id);
    if (parent !== null && parent !== undefined && kept.has(parent)) {
      edges.push([index.get(id) as number, index.get(parent) as number]);
    }
  }

  // node-init rows: the class name itself for class nodes, the synset's
  // first lemma for retained ancestors
  const nodeNames = new Array<string>(index.size);
  classes.forEach((name, k) => (nodeNames[k] = name));
  for (const id of ancestors) {
    nodeNames[index.get(id) as number] = db.get(id).lemmas[0];
  }
  const nodeInit = await encoder.encodeText(nodeNames);

  const files = {
    edges: join(outDir, "graph_edges.txt"),
    classNodes: join(outDir, "class_nodes.txt"),
    nodeInit: join(outDir, "node_init.emb"),
  };
  writeEdgeList(files.edges, index.size, edges);
  writeLabels(files.classNodes, classes.map((_, k) => k));
  writeEmbeddings(files.nodeInit, nodeInit);

  return {
    nodeCount: index.size,
    classNodes: classes.map((_, k) => k),
    edges,
    nodeNames,
    files,
  };
}
