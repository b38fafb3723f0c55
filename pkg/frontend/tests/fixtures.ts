import { LexicalDatabase, Synset } from "../src/lexical.js";

/** A pocket hypernym hierarchy:
 *
 *   entity
 *   ├── animal
 *   │   ├── canine ── dog, wolf
 *   │   ├── feline ── cat
 *   │   └── zebra
 *   └── artifact ── vehicle ── car
 *
 * plus a second, slangier synset for "cat" to exercise the synonym modes.
 */
export const FIXTURE_SYNSETS: Synset[] = [
  { id: "entity.n.01", lemmas: ["entity"], parent: null },
  { id: "animal.n.01", lemmas: ["animal", "creature"], parent: "entity.n.01" },
  { id: "canine.n.01", lemmas: ["canine"], parent: "animal.n.01" },
  { id: "dog.n.01", lemmas: ["dog", "domestic_dog"], parent: "canine.n.01" },
  { id: "wolf.n.01", lemmas: ["wolf"], parent: "canine.n.01" },
  { id: "feline.n.01", lemmas: ["feline"], parent: "animal.n.01" },
  { id: "cat.n.01", lemmas: ["cat", "true_cat"], parent: "feline.n.01" },
  { id: "cat.n.02", lemmas: ["cat", "kat"], parent: "entity.n.01" },
  { id: "zebra.n.01", lemmas: ["zebra"], parent: "animal.n.01" },
  { id: "artifact.n.01", lemmas: ["artifact"], parent: "entity.n.01" },
  { id: "vehicle.n.01", lemmas: ["vehicle"], parent: "artifact.n.01" },
  { id: "car.n.01", lemmas: ["car", "auto", "automobile"], parent: "vehicle.n.01" },
];

export function fixtureDb(): LexicalDatabase {
  return new LexicalDatabase(FIXTURE_SYNSETS);
}
