use linesift::corpus::CORPUS_SCHEMA;

use crate::cli::SchemaKind;

pub const GOLD_SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "gold clustering",
  "type": "object",
  "required": ["topics", "clusters"],
  "properties": {
    "topics": {
      "description": "topic id -> keyword string used for keyword seeding",
      "type": "object",
      "additionalProperties": {"type": "string", "minLength": 1}
    },
    "clusters": {
      "description": "topic id -> member document ids; clusters are disjoint and every key is a topic",
      "type": "object",
      "additionalProperties": {"type": "array", "items": {"type": "string"}}
    }
  },
  "additionalProperties": false
}"##;

pub const MODEL_SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "trained line classifier",
  "type": "object",
  "required": ["format_version", "feature_config", "scaling_stats", "stage1_weights", "stage2_weights",
               "train_config", "table_model", "embedding", "priors", "summaries"],
  "properties": {
    "format_version": {"const": 1},
    "feature_config": {
      "type": "object",
      "required": ["use_ngram", "use_syntax", "use_table_layout", "use_embedding", "use_sequential", "layout_bins"],
      "properties": {
        "use_ngram": {"type": "boolean"},
        "use_syntax": {"type": "boolean"},
        "use_table_layout": {"type": "boolean"},
        "use_embedding": {"type": "boolean"},
        "use_sequential": {"type": "boolean"},
        "layout_bins": {"type": "integer", "minimum": 1},
        "layout_edges": {"type": "array", "items": {"type": "number"}},
        "raw_edit_distance": {"type": "boolean"}
      }
    },
    "scaling_stats": {"type": "object"},
    "stage1_weights": {"$ref": "#/$defs/weights"},
    "stage2_weights": {"$ref": "#/$defs/weights"},
    "train_config": {
      "type": "object",
      "required": ["c", "epochs", "seed"],
      "properties": {
        "c": {"type": "number", "exclusiveMinimum": 0},
        "epochs": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "t0": {"type": ["number", "null"]},
        "extra_dagger_rounds": {"type": "integer", "minimum": 0},
        "cross_fit_folds": {"type": "integer", "minimum": 0}
      }
    },
    "table_model": {"type": ["object", "null"]},
    "embedding": {"type": ["object", "null"]},
    "priors": {"$ref": "#/$defs/per_label_number"},
    "summaries": {"type": "array"}
  },
  "$defs": {
    "label": {"enum": ["TEXT", "TABLE", "CODE", "FORMULA", "MISC"]},
    "per_label_number": {
      "type": "object",
      "propertyNames": {"$ref": "#/$defs/label"},
      "additionalProperties": {"type": "number"}
    },
    "weights": {
      "description": "label -> [feature id, weight] pairs sorted by feature id",
      "type": "object",
      "propertyNames": {"$ref": "#/$defs/label"},
      "additionalProperties": {
        "type": "array",
        "items": {"type": "array", "prefixItems": [{"type": "string"}, {"type": "number"}], "minItems": 2, "maxItems": 2}
      }
    }
  }
}"##;

pub fn schema_text(kind: SchemaKind) -> &'static str {
    match kind {
        SchemaKind::Corpus => CORPUS_SCHEMA,
        SchemaKind::Gold => GOLD_SCHEMA,
        SchemaKind::Model => MODEL_SCHEMA,
    }
}
