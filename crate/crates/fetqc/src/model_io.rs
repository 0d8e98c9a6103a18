//! Versioned text format for fitted forests.
//!
//! ```text
//! fetqc-forest 1
//! task classification
//! seed 7
//! n_train 120
//! features 3
//! feature 0 rank_error_full
//! ...
//! importance 0 0.25
//! ...
//! warning no_splits
//! trees 100
//! tree 0 seed 1234 nodes 3
//! split 1 0.5 1 2
//! leaf 0
//! leaf 1
//! end
//! ```
//!
//! Floats are written in shortest round-trip form, so a saved model predicts
//! bit-identically after loading.

use std::path::{Path, PathBuf};

use fetqc_core::forest::{ForestModel, ForestWarning, Node, Task, Tree};
use thiserror::Error;

pub const MODEL_MAGIC: &str = "fetqc-forest";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("model file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unsupported model format version {0}")]
    Version(u32),
}

pub fn model_to_string(m: &ForestModel) -> String {
    let mut s = format!("{MODEL_MAGIC} {MODEL_VERSION}\n");
    s += &format!("task {}\nseed {}\nn_train {}\nfeatures {}\n", m.task.name(), m.seed, m.n_train, m.feature_names.len());
    for (i, n) in m.feature_names.iter().enumerate() {
        s += &format!("feature {i} {n}\n");
    }
    for (i, v) in m.importances.iter().enumerate() {
        s += &format!("importance {i} {v:?}\n");
    }
    for w in &m.warnings {
        s += &format!("warning {}\n", w.name());
    }
    s += &format!("trees {}\n", m.trees.len());
    for (t, (tree, seed)) in m.trees.iter().zip(&m.tree_seeds).enumerate() {
        s += &format!("tree {t} seed {seed} nodes {}\n", tree.nodes().len());
        for n in tree.nodes() {
            match *n {
                Node::Leaf { value } => s += &format!("leaf {value:?}\n"),
                Node::Split { feature, threshold, left, right } => s += &format!("split {feature} {threshold:?} {left} {right}\n"),
            }
        }
    }
    s += "end\n";
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_fields(&mut self) -> Result<Vec<&'a str>, ModelError> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            if !l.trim().is_empty() {
                return Ok(l.split_whitespace().collect());
            }
        }
        Err(ModelError::Parse { line: self.line + 1, message: "unexpected end of file".into() })
    }

    fn err(&self, message: impl Into<String>) -> ModelError {
        ModelError::Parse { line: self.line, message: message.into() }
    }

    fn keyed(&mut self, key: &str, n: usize) -> Result<Vec<&'a str>, ModelError> {
        let f = self.next_fields()?;
        if f.first() != Some(&key) || f.len() != n + 1 {
            return Err(self.err(format!("expected `{key}` with {n} value(s)")));
        }
        Ok(f[1..].to_vec())
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T, ModelError> {
        s.parse().map_err(|_| self.err(format!("cannot parse `{s}`")))
    }
}

pub fn model_from_str(text: &str) -> Result<ForestModel, ModelError> {
    let mut l = Lines { inner: text.lines().enumerate(), line: 0 };
    let head = l.next_fields()?;
    if head.len() != 2 || head[0] != MODEL_MAGIC {
        return Err(l.err("not a fetqc forest file"));
    }
    let version: u32 = l.parse(head[1])?;
    if version != MODEL_VERSION {
        return Err(ModelError::Version(version));
    }
    let task = Task::parse(l.keyed("task", 1)?[0]).ok_or_else(|| l.err("unknown task"))?;
    let f = l.keyed("seed", 1)?;
    let seed: u64 = l.parse(f[0])?;
    let f = l.keyed("n_train", 1)?;
    let n_train: usize = l.parse(f[0])?;
    let f = l.keyed("features", 1)?;
    let p: usize = l.parse(f[0])?;
    let mut feature_names = Vec::with_capacity(p);
    for i in 0..p {
        let f = l.keyed("feature", 2)?;
        if l.parse::<usize>(f[0])? != i {
            return Err(l.err("feature indices must be consecutive"));
        }
        feature_names.push(f[1].to_string());
    }
    let mut importances = Vec::with_capacity(p);
    for i in 0..p {
        let f = l.keyed("importance", 2)?;
        if l.parse::<usize>(f[0])? != i {
            return Err(l.err("importance indices must be consecutive"));
        }
        importances.push(l.parse::<f64>(f[1])?);
    }
    let mut warnings = Vec::new();
    let mut f = l.next_fields()?;
    while f.first() == Some(&"warning") {
        warnings.push(f.get(1).and_then(|w| ForestWarning::parse(w)).ok_or_else(|| l.err("unknown warning"))?);
        f = l.next_fields()?;
    }
    if f.len() != 2 || f[0] != "trees" {
        return Err(l.err("expected `trees`"));
    }
    let n_trees: usize = l.parse(f[1])?;
    let mut trees = Vec::with_capacity(n_trees);
    let mut tree_seeds = Vec::with_capacity(n_trees);
    for t in 0..n_trees {
        let f = l.next_fields()?;
        if f.len() != 6 || f[0] != "tree" || f[2] != "seed" || f[4] != "nodes" || l.parse::<usize>(f[1])? != t {
            return Err(l.err("expected `tree <i> seed <s> nodes <n>`"));
        }
        tree_seeds.push(l.parse::<u64>(f[3])?);
        let n: usize = l.parse(f[5])?;
        let mut nodes = Vec::with_capacity(n);
        for _ in 0..n {
            let f = l.next_fields()?;
            nodes.push(match (f.first().copied(), f.len()) {
                (Some("leaf"), 2) => Node::Leaf { value: l.parse(f[1])? },
                (Some("split"), 5) => {
                    Node::Split { feature: l.parse(f[1])?, threshold: l.parse(f[2])?, left: l.parse(f[3])?, right: l.parse(f[4])? }
                }
                _ => return Err(l.err("expected a `leaf` or `split` node")),
            });
        }
        trees.push(Tree::from_nodes(nodes, p).ok_or_else(|| l.err(format!("tree {t} has invalid links")))?);
    }
    if l.next_fields()? != ["end"] {
        return Err(l.err("expected `end`"));
    }
    Ok(ForestModel { task, feature_names, seed, n_train, trees, tree_seeds, importances, warnings })
}

pub fn save_model(path: &Path, m: &ForestModel) -> Result<(), ModelError> {
    std::fs::write(path, model_to_string(m)).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })
}

pub fn load_model(path: &Path) -> Result<ForestModel, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.to_path_buf(), source })?;
    model_from_str(&text)
}
