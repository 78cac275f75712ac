/** Response payloads captured verbatim from a running service. */

import type {
  AttackResponse,
  ExplainResponse,
  GraphResponse,
  SkillDoc,
} from "../src/types.js";

export const SKY_TOKENS = [
  "[CLS]", "what", "color", "is", "the", "sky", "?", "[SEP]",
  "the", "sky", "is", "blue", "in", "the", "sea", "[SEP]",
];

export const EXPLAIN_FIXTURE: ExplainResponse = {
  skill: "span-qa",
  prediction: {
    answer: "sea",
    span: [14, 14],
    candidate_index: null,
    probability: 0.0855280149,
    score: 1.14377094,
  },
  saliency: {
    method: "integrated_grad",
    scores: [
      0.00736577406, 0.0620524995, 0.000819831456, 0.0122296912,
      0.0099341579, 0.0155102743, 0.00029801098, 0.000751444759,
      0.000914055846, 5.31140444e-5, 0.000396740575, 0.0105839678,
      3.31199291e-6, 0.00278159787, 0.875388864, 0.000916663881,
    ],
    tokens: SKY_TOKENS,
    normalization: "sum_to_one",
    params_used: { steps: 20 },
  },
};

const BASIS = {
  method: "integrated_grad",
  scores: [
    0.00736576849, 0.0620254618, 0.000820882521, 0.012244231,
    0.00993154451, 0.015499888, 0.00029792606, 0.000751775164,
    0.000913973082, 5.31540378e-5, 0.00039343585, 0.0106022403,
    3.3117022e-6, 0.00277974724, 0.875399591, 0.000917069233,
  ],
  tokens: SKY_TOKENS,
  normalization: "sum_to_one",
  params_used: { steps: 50 },
};

export const HOTFLIP_FIXTURE: AttackResponse = {
  skill: "span-qa",
  method: "hotflip",
  edits: [
    { kind: "replace", positions: [1], original: ["what"], replacement: "does" },
  ],
  original_prediction: {
    answer: "sea",
    span: [14, 14],
    candidate_index: null,
    probability: 0.0855280149,
    score: 1.14377094,
  },
  new_prediction: {
    answer: "sea",
    span: [14, 14],
    candidate_index: null,
    probability: 0.0798144327,
    score: 1.06025684,
  },
  success: false,
  saliency_basis: BASIS,
};

export const KEEP_WINDOW_FIXTURE: AttackResponse = {
  skill: "span-qa",
  method: "sub_span",
  edits: [
    {
      kind: "keep_window",
      positions: [12, 13, 14],
      original: ["in", "the", "sea"],
      replacement: null,
    },
  ],
  original_prediction: {
    answer: "sea",
    span: [14, 14],
    candidate_index: null,
    probability: 0.0855280149,
    score: 1.14377094,
  },
  new_prediction: {
    answer: "sea",
    span: [10, 10],
    candidate_index: null,
    probability: 0.294974451,
    score: 1.12167606,
  },
  success: true,
  saliency_basis: BASIS,
};

export const DELETE_FIXTURE: AttackResponse = {
  ...HOTFLIP_FIXTURE,
  method: "input_reduction",
  edits: [
    { kind: "delete", positions: [10], original: ["is"], replacement: null },
    { kind: "delete", positions: [12], original: ["in"], replacement: null },
  ],
};

export const GRAPH_FIXTURE: GraphResponse = {
  skill: "qa-gnn",
  hops: 2,
  nodes: [
    {
      id: "crab",
      name: "crab",
      role: "question",
      relevance: 0.51036465,
      incoming_attention_sum: 0,
    },
    {
      id: "crustacean",
      name: "crustacean",
      role: "other",
      relevance: 0.504339724,
      incoming_attention_sum: 1,
    },
    {
      id: "saltwater",
      name: "saltwater",
      role: "answer_candidate",
      relevance: 0.504339724,
      incoming_attention_sum: 1,
    },
    {
      id: "sea",
      name: "sea",
      role: "other",
      relevance: 0.512681054,
      incoming_attention_sum: 1,
    },
  ],
  edges: [
    {
      id: "crab-atlocation-sea",
      name: "AtLocation",
      in_id: "crab",
      out_id: "sea",
      weight: 2,
      attention: 1,
    },
    {
      id: "crab-isa-crustacean",
      name: "IsA",
      in_id: "crab",
      out_id: "crustacean",
      weight: 1,
      attention: 1,
    },
    {
      id: "sea-relatedto-saltwater",
      name: "RelatedTo",
      in_id: "sea",
      out_id: "saltwater",
      weight: 1.5,
      attention: 1,
    },
  ],
  answer_scores: { saltwater: -0.352696245, desert: null },
  prediction: "saltwater",
};

export const SKILLS_FIXTURE: SkillDoc[] = [
  {
    id: "mc-qa",
    name: "mc-qa",
    kind: "multiple_choice",
    params_file: "/srv/toy.npz",
    kg: null,
  },
  {
    id: "qa-gnn",
    name: "graph reasoner",
    kind: "graph_reasoner",
    params_file: "/srv/toy.npz",
    kg: "conceptnet",
  },
  {
    id: "span-qa",
    name: "span-qa",
    kind: "extractive",
    params_file: "/srv/toy.npz",
    kg: null,
  },
];
