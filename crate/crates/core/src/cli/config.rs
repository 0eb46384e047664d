use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::mlkit::ModelSpec;
use crate::relcore::{load_csv, CsvOptions, Database, Dictionary, Schema};
use crate::synth::{star, StarConfig};
use crate::vorder::{AggregateSpec, JoinTree, VariableOrder};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub variable_order: Option<String>,
    #[serde(default)]
    pub aggregates: Vec<String>,
    #[serde(default, rename = "relation")]
    pub relations: Vec<RelationConfig>,
    pub join_tree: Option<JoinTreeConfig>,
    pub model: Option<ModelConfig>,
    pub generator: Option<GeneratorConfig>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationConfig {
    pub name: String,
    pub path: PathBuf,
    pub attributes: Vec<String>,
    #[serde(default = "yes")]
    pub header: bool,
    #[serde(default = "comma")]
    pub delimiter: char,
}

fn yes() -> bool {
    true
}

fn comma() -> char {
    ','
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JoinTreeConfig {
    pub edges: Option<Vec<[String; 2]>>,
    pub root: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub features: Vec<String>,
    pub response: String,
    #[serde(default)]
    pub lambda: f64,
    pub alpha: Option<f64>,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
    #[serde(default)]
    pub standardise: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    pub facts: usize,
    #[serde(default = "two")]
    pub dimensions: usize,
    #[serde(default = "four")]
    pub fanout: usize,
    pub keys: Option<usize>,
    #[serde(default = "two")]
    pub measures: usize,
    #[serde(default)]
    pub seed: u64,
}

fn two() -> usize {
    2
}

fn four() -> usize {
    4
}

impl GeneratorConfig {
    /// The generator settings with the fact count multiplied by `scale`.
    pub fn star_config(&self, scale: f64, seed: Option<u64>) -> StarConfig {
        let facts = (self.facts as f64 * scale).round() as usize;
        StarConfig {
            facts,
            dimensions: self.dimensions,
            fanout: self.fanout,
            keys: self.keys.unwrap_or_else(|| (facts / 20).max(1)),
            measures: self.measures,
            seed: seed.unwrap_or(self.seed),
        }
    }
}

/// Everything a command needs, resolved from a config file.
#[derive(Clone, Debug)]
pub struct Workload {
    pub db: Database,
    pub join_tree: JoinTree,
    pub root: usize,
    pub order: Option<VariableOrder>,
    pub batch: Vec<AggregateSpec>,
    pub model: Option<ModelSpec>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Config = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Config> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    fn model_spec(&self) -> Option<ModelSpec> {
        self.model.as_ref().map(|m| {
            let mut spec = ModelSpec::new(&m.features, &m.response).with_lambda(m.lambda);
            spec.alpha = m.alpha;
            if let Some(t) = m.tol {
                spec.tol = t;
            }
            if let Some(n) = m.max_iters {
                spec.max_iters = n;
            }
            spec.standardise = m.standardise;
            spec
        })
    }

    /// Loads the relations (or generates them) and resolves the join tree,
    /// variable order, aggregate batch and model.
    pub fn workload(&self, scale: f64, seed: Option<u64>) -> Result<Workload> {
        let (db, generated) = match (&self.generator, self.relations.is_empty()) {
            (Some(g), true) => {
                let s = star(&g.star_config(scale, seed))?;
                let model = ModelSpec::new(&s.features[..s.features.len() - 1], s.response());
                (s.db.clone(), Some((s, model)))
            }
            (None, false) => (self.load_relations()?, None),
            (Some(_), false) => return Err(Error::Config("give either [[relation]] entries or a [generator], not both".into())),
            (None, true) => return Err(Error::Config("no relations: add [[relation]] entries or a [generator]".into())),
        };
        let schemas = db.schemas();
        let tree_cfg = self.join_tree.clone().unwrap_or_default();
        let join_tree = match (&tree_cfg.edges, &generated) {
            (Some(edges), _) => {
                let names = db.relations().iter().map(|r| r.name().to_string()).collect();
                let refs: Vec<(&str, &str)> = edges.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
                let jt = JoinTree::new(names, &refs)?;
                jt.validate(&schemas)?;
                jt
            }
            (None, Some((s, _))) => s.join_tree.clone(),
            (None, None) => JoinTree::infer(&schemas)?,
        };
        let root = match &tree_cfg.root {
            Some(r) => join_tree.index_of(r).ok_or_else(|| Error::UnknownRelation(r.clone()))?,
            None => join_tree.default_root(&db),
        };
        let order = match (&self.variable_order, &generated) {
            (Some(text), _) => Some(VariableOrder::parse(text)?.annotated(&schemas)?),
            (None, Some((s, _))) => Some(s.order.annotated(&schemas)?),
            (None, None) => None,
        };
        let batch = self
            .aggregates
            .iter()
            .map(|a| AggregateSpec::parse(a))
            .collect::<Result<Vec<_>>>()?;
        let model = self.model_spec().or_else(|| generated.map(|(_, m)| m));
        Ok(Workload {
            db,
            join_tree,
            root,
            order,
            batch,
            model,
        })
    }

    fn load_relations(&self) -> Result<Database> {
        let mut dict = Dictionary::new();
        let mut relations = Vec::with_capacity(self.relations.len());
        for r in &self.relations {
            let specs: Vec<&str> = r.attributes.iter().map(String::as_str).collect();
            let schema = Schema::parse(&r.name, &specs)?;
            if !r.delimiter.is_ascii() {
                return Err(Error::Config(format!("delimiter of `{}` must be ASCII", r.name)));
            }
            let options = CsvOptions {
                delimiter: r.delimiter as u8,
                header: r.header,
            };
            relations.push(load_csv(self.base_dir.join(&r.path), schema, options, &mut dict)?);
        }
        Database::new(relations, dict)
    }
}
