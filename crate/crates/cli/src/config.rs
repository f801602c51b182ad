//! Grid configuration file (TOML).
//!
//! ```toml
//! run_dir = "runs"
//!
//! [defaults]
//! n_runs = 2
//! seed = 0
//!
//! [corpora.de]
//! path = "corpora/de.jsonl"
//!
//! [backends.lexicon]
//! kind = "dictionary"
//! path = "lexicon.json"
//!
//! [backends.deepl]
//! kind = "http"
//! endpoint = "https://api-free.deepl.com/v2/translate"
//! token_env = "DEEPL_AUTH_KEY"
//!
//! [[experiments]]
//! condition = "translate_train"
//! source_lang = "de"
//! target_lang = "en"
//! task = "identification"
//! source_corpus = "de"
//! target_test_corpus = "en"
//! backend = "lexicon"
//! ```
//!
//! Precedence, highest first: command-line flags, the experiment entry,
//! `[defaults]`, built-in defaults. A `train` table is laid over the task's
//! default training configuration. Relative paths are resolved against the
//! run directory root, which in turn defaults to the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use claimbridge::corpus::{load_corpus, AnnotatedCorpus, Codebook, CorpusFormat};
use claimbridge::evaluation::Task;
use claimbridge::experiments::{ExperimentConfig, Resources};
use claimbridge::models::TrainConfig;
use claimbridge::translation::{
    DictionaryBackend, HttpBackend, HttpBackendConfig, TranslationBackend, TranslationCache,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub run_dir: Option<PathBuf>,
    #[serde(default)]
    pub defaults: toml::Table,
    #[serde(default)]
    pub corpora: BTreeMap<String, CorpusEntry>,
    #[serde(default)]
    pub backends: BTreeMap<String, toml::Table>,
    #[serde(default)]
    pub experiments: Vec<toml::Table>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub codebook: Option<PathBuf>,
}

/// Overrides taken from command-line flags.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_runs: Option<usize>,
    pub backend: Option<String>,
}

pub struct LoadedGrid {
    pub file: GridFile,
    /// Directory of the config file.
    pub base: PathBuf,
}

impl LoadedGrid {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let file: GridFile =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        let base = path
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(LoadedGrid { file, base })
    }

    /// Run directory: the flag wins over the config file's `run_dir`.
    pub fn run_dir(&self, flag: Option<&Path>) -> PathBuf {
        match (flag, &self.file.run_dir) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.base.join(p),
            (None, None) => self.base.clone(),
        }
    }

    pub fn experiments(&self, overrides: &Overrides) -> Result<Vec<ExperimentConfig>> {
        if self.file.experiments.is_empty() {
            bail!("config defines no experiments");
        }
        self.file
            .experiments
            .iter()
            .enumerate()
            .map(|(i, entry)| {
                experiment_config(&self.file.defaults, entry, overrides)
                    .with_context(|| format!("experiment #{}", i + 1))
            })
            .collect()
    }

    /// Loads every declared corpus and backend.
    pub fn resources(&self, root: &Path, cache: TranslationCache) -> Result<Resources> {
        let mut res = Resources::new().with_cache(cache);
        for (name, entry) in &self.file.corpora {
            let corpus = load_corpus_entry(root, entry)
                .with_context(|| format!("loading corpus `{name}`"))?;
            res = res.with_corpus(name, corpus);
        }
        for (name, table) in &self.file.backends {
            let backend =
                build_backend(root, name, table).with_context(|| format!("backend `{name}`"))?;
            res = res.with_backend(backend);
        }
        Ok(res)
    }
}

pub fn load_corpus_entry(root: &Path, entry: &CorpusEntry) -> Result<AnnotatedCorpus> {
    let codebook = match &entry.codebook {
        Some(p) => Codebook::from_json_file(root.join(p))?,
        None => Codebook::debatenet(),
    };
    Ok(load_corpus(root.join(&entry.path), CorpusFormat::Jsonl, codebook)?)
}

fn merge(base: &mut toml::Table, over: &toml::Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

pub fn experiment_config(
    defaults: &toml::Table,
    entry: &toml::Table,
    overrides: &Overrides,
) -> Result<ExperimentConfig> {
    let mut table = defaults.clone();
    merge(&mut table, entry);
    if let Some(v) = overrides.seed {
        table.insert("seed".into(), toml::Value::Integer(v as i64));
    }
    if let Some(v) = overrides.n_runs {
        table.insert("n_runs".into(), toml::Value::Integer(v as i64));
    }
    if let Some(v) = &overrides.backend {
        table.insert("backend".into(), toml::Value::String(v.clone()));
    }
    if let Some(toml::Value::Table(train)) = table.get("train") {
        let task: Task = table
            .get("task")
            .and_then(toml::Value::as_str)
            .ok_or_else(|| anyhow!("missing `task`"))?
            .parse()?;
        let mut full = toml::Table::try_from(TrainConfig::for_task(task.into()))?;
        merge(&mut full, train);
        table.insert("train".into(), toml::Value::Table(full));
    }
    let config: ExperimentConfig = toml::Value::Table(table).try_into()?;
    config.validate()?;
    Ok(config)
}

/// A backend registered under the name it has in the config file.
struct Named {
    id: String,
    inner: Arc<dyn TranslationBackend>,
}

impl TranslationBackend for Named {
    fn id(&self) -> &str {
        &self.id
    }

    fn supports(&self, source: &str, target: &str) -> bool {
        self.inner.supports(source, target)
    }

    fn translate_batch(
        &self,
        texts: &[String],
        source: &str,
        target: &str,
    ) -> claimbridge::Result<Vec<String>> {
        self.inner.translate_batch(texts, source, target)
    }
}

pub fn build_backend(
    root: &Path,
    name: &str,
    table: &toml::Table,
) -> Result<Arc<dyn TranslationBackend>> {
    let mut table = table.clone();
    let kind = match table.remove("kind") {
        Some(toml::Value::String(k)) => k,
        _ => bail!("missing `kind` (dictionary or http)"),
    };
    let inner: Arc<dyn TranslationBackend> = match kind.as_str() {
        "dictionary" => {
            let path = match table.remove("path") {
                Some(toml::Value::String(p)) => p,
                _ => bail!("dictionary backend needs `path`"),
            };
            if let Some(k) = table.keys().next() {
                bail!("unknown key `{k}` for a dictionary backend");
            }
            Arc::new(DictionaryBackend::from_json_file(root.join(path))?)
        }
        "http" => {
            table.insert("id".into(), toml::Value::String(name.to_string()));
            let config: HttpBackendConfig = toml::Value::Table(table).try_into()?;
            Arc::new(HttpBackend::new(config)?)
        }
        other => bail!("unknown backend kind `{other}`"),
    };
    Ok(Arc::new(Named {
        id: name.to_string(),
        inner,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use claimbridge::experiments::ExperimentCondition;

    fn table(s: &str) -> toml::Table {
        toml::from_str(s).unwrap()
    }

    #[test]
    fn precedence_flags_entry_defaults() {
        let defaults = table("seed = 3\nn_runs = 4\nbackend = \"lex\"");
        let entry = table(
            "condition = \"translate_train\"\nsource_lang = \"de\"\ntarget_lang = \"en\"\n\
             task = \"identification\"\nsource_corpus = \"de\"\nseed = 5",
        );
        let c = experiment_config(&defaults, &entry, &Overrides::default()).unwrap();
        assert_eq!((c.seed, c.n_runs, c.backend.as_str()), (5, 4, "lex"));
        let flags = Overrides {
            seed: Some(9),
            ..Overrides::default()
        };
        let c = experiment_config(&defaults, &entry, &flags).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.condition, ExperimentCondition::TranslateTrain);
    }

    #[test]
    fn partial_train_table_keeps_task_defaults() {
        let defaults = table("[train]\nepochs = 3");
        let entry = table(
            "condition = \"baseline\"\nsource_lang = \"de\"\ntarget_lang = \"de\"\n\
             task = \"categorization\"\nsource_corpus = \"de\"",
        );
        let c = experiment_config(&defaults, &entry, &Overrides::default()).unwrap();
        let train = c.train.unwrap();
        assert_eq!(train.epochs, 3);
        assert_eq!(train, TrainConfig { epochs: 3, ..TrainConfig::for_task(Task::Categorization.into()) });
    }

    #[test]
    fn invalid_entries_are_rejected() {
        let entry = table(
            "condition = \"baseline\"\nsource_lang = \"de\"\ntarget_lang = \"en\"\n\
             task = \"identification\"\nsource_corpus = \"de\"",
        );
        assert!(experiment_config(&toml::Table::new(), &entry, &Overrides::default()).is_err());
        let typo = table("conditon = \"baseline\"");
        assert!(experiment_config(&toml::Table::new(), &typo, &Overrides::default()).is_err());
    }
}
