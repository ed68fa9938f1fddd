//! Method × dataset grids with deterministic, parallelism-independent results.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Catalog, CatalogEntry, Dataset, Modality};
use crate::error::{Error, Result};
use crate::methods::{self, Method, MethodOptions, Metric};
use crate::synth::{
    gen_categorical, gen_pairwise, gen_segmentation, gen_sequence, CategoricalSpec, PairwiseSpec,
    SegmentationSpec, SequenceSpec,
};
use crate::util::{derive_seed, sha256_hex};

/// Environment variable naming a directory with one sub-directory per catalog dataset.
pub const DATA_DIR_ENV: &str = "CROWDINFER_DATA";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeneratorSpec {
    Categorical(CategoricalSpec),
    Pairwise(PairwiseSpec),
    Sequence(SequenceSpec),
    Segmentation(SegmentationSpec),
}

impl GeneratorSpec {
    pub fn modality(&self) -> Modality {
        match self {
            GeneratorSpec::Categorical(_) => Modality::Categorical,
            GeneratorSpec::Pairwise(_) => Modality::Pairwise,
            GeneratorSpec::Sequence(_) => Modality::Sequence,
            GeneratorSpec::Segmentation(_) => Modality::Segmentation,
        }
    }

    pub fn generate(&self) -> Result<Dataset> {
        Ok(match self {
            GeneratorSpec::Categorical(s) => {
                let g = gen_categorical(s)?;
                Dataset::Categorical {
                    table: g.table,
                    truth: g.truth,
                }
            }
            GeneratorSpec::Pairwise(s) => {
                let g = gen_pairwise(s)?;
                Dataset::Pairwise {
                    table: g.table,
                    truth: g.truth,
                }
            }
            GeneratorSpec::Sequence(s) => {
                let g = gen_sequence(s)?;
                Dataset::Sequence {
                    table: g.table,
                    truth: g.truth,
                }
            }
            GeneratorSpec::Segmentation(s) => {
                let g = gen_segmentation(s)?;
                Dataset::Segmentation {
                    masks: g.masks,
                    truth: g.truth,
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetSource {
    Generator(GeneratorSpec),
    /// A built-in catalog entry. Without `dir`, files are looked up under
    /// `$CROWDINFER_DATA/<entry>`, then `<config dir>/<entry>`.
    Catalog {
        entry: String,
        #[serde(default)]
        dir: Option<PathBuf>,
    },
    /// Files described inline, with paths relative to `dir`.
    Local {
        dir: PathBuf,
        #[serde(flatten)]
        entry: CatalogEntry,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(flatten)]
    pub source: DatasetSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodSpec {
    Name(Method),
    Full {
        method: Method,
        #[serde(default)]
        n_iter: Option<usize>,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
}

impl MethodSpec {
    pub fn method(&self) -> Method {
        match self {
            MethodSpec::Name(m) | MethodSpec::Full { method: m, .. } => *m,
        }
    }

    fn options(&self, seed: u64) -> MethodOptions {
        match self {
            MethodSpec::Name(_) => MethodOptions {
                seed,
                ..MethodOptions::default()
            },
            MethodSpec::Full { n_iter, params, .. } => MethodOptions {
                n_iter: *n_iter,
                seed,
                params: params.clone(),
            },
        }
    }
}

fn default_parallelism() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub datasets: Vec<DatasetSpec>,
    pub methods: Vec<MethodSpec>,
    /// Defaults to the conventional metric of the datasets' modality.
    #[serde(default)]
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default)]
    pub seed: u64,
    /// Directory that relative paths resolve against; set when loading from a file.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Everything that influences values, i.e. the config minus output and parallelism.
#[derive(Serialize)]
struct HashedConfig<'a> {
    datasets: &'a [DatasetSpec],
    methods: &'a [MethodSpec],
    metrics: &'a [Metric],
    seed: u64,
}

impl BenchConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: BenchConfig =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("bench config: {e}")))?;
        config.base_dir = base_dir.to_path_buf();
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn config_hash(&self) -> String {
        let hashed = HashedConfig {
            datasets: &self.datasets,
            methods: &self.methods,
            metrics: &self.metrics,
            seed: self.seed,
        };
        sha256_hex(serde_json::to_string(&hashed).unwrap().as_bytes())[..16].to_owned()
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_dir(&self) -> Option<PathBuf> {
        self.output.as_deref().map(|p| self.resolve(p))
    }

    fn modality_of(&self, spec: &DatasetSpec, catalog: &Catalog) -> Result<Modality> {
        Ok(match &spec.source {
            DatasetSource::Generator(g) => g.modality(),
            DatasetSource::Catalog { entry, .. } => catalog.get(entry)?.modality,
            DatasetSource::Local { entry, .. } => entry.modality,
        })
    }

    /// Checks names, modalities and method parameters before anything runs.
    pub fn validate(&self) -> Result<()> {
        if self.parallelism == 0 {
            return Err(Error::InvalidParameter("parallelism must be at least 1".into()));
        }
        if self.datasets.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidParameter(
                "bench config needs at least one dataset and one method".into(),
            ));
        }
        let catalog = Catalog::builtin();
        let mut names = BTreeSet::new();
        for d in &self.datasets {
            if !names.insert(&d.name) {
                return Err(Error::InvalidParameter(format!("duplicate dataset `{}`", d.name)));
            }
            let modality = self.modality_of(d, &catalog)?;
            for m in &self.methods {
                if m.method().modality() != modality {
                    return Err(Error::ModalityMismatch {
                        method: m.method().name().to_owned(),
                        modality: format!("{modality} (dataset `{}`)", d.name),
                    });
                }
            }
            for metric in &self.metrics {
                if metric.modality() != modality {
                    return Err(Error::InvalidParameter(format!(
                        "metric `{metric}` does not apply to {modality} dataset `{}`",
                        d.name
                    )));
                }
            }
        }
        let mut seen = BTreeSet::new();
        for m in &self.methods {
            if !seen.insert(m.method()) {
                return Err(Error::InvalidParameter(format!("duplicate method `{}`", m.method())));
            }
            m.options(0).validate(m.method())?;
        }
        Ok(())
    }

    fn load(&self, spec: &DatasetSpec, catalog: &Catalog) -> Result<Dataset> {
        match &spec.source {
            DatasetSource::Generator(g) => g.generate(),
            DatasetSource::Catalog { entry, dir } => {
                let dir = match dir {
                    Some(d) => self.resolve(d),
                    None => std::env::var_os(DATA_DIR_ENV)
                        .map(|root| PathBuf::from(root).join(entry))
                        .filter(|p| p.is_dir())
                        .unwrap_or_else(|| self.base_dir.join(entry)),
                };
                catalog.load(entry, &dir)
            }
            DatasetSource::Local { dir, entry } => entry.load(&self.resolve(dir)),
        }
    }

    fn metrics_for(&self, modality: Modality) -> Vec<Metric> {
        if self.metrics.is_empty() {
            vec![Metric::for_modality(modality)]
        } else {
            self.metrics.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok(BTreeMap<Metric, f64>),
    /// The method declines this dataset by design (e.g. KOS on non-binary labels).
    Skipped(String),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub dataset: String,
    pub method: Method,
    pub seed: u64,
    pub status: CellStatus,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub version: String,
    pub config_hash: String,
    pub datasets: Vec<String>,
    pub methods: Vec<Method>,
    pub metrics: Vec<Metric>,
    /// Dataset-major, config order.
    pub cells: Vec<Cell>,
}

fn run_cell(method: &MethodSpec, seed: u64, dataset: &Dataset, metrics: &[Metric]) -> CellStatus {
    let output = match methods::run(method.method(), dataset.input(), &method.options(seed)) {
        Ok(o) => o,
        Err(e @ Error::NotBinary(_)) => return CellStatus::Skipped(e.to_string()),
        Err(e) => return CellStatus::Failed(e.to_string()),
    };
    let mut values = BTreeMap::new();
    for &metric in metrics {
        match methods::evaluate(metric, &output, dataset) {
            Ok(v) => {
                values.insert(metric, v);
            }
            Err(e) => return CellStatus::Failed(e.to_string()),
        }
    }
    CellStatus::Ok(values)
}

/// Runs every (dataset, method) cell. Per-cell seeds depend only on the config
/// seed and the two names, so the pool size never changes a value.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let catalog = Catalog::builtin();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;

    let cells = pool.install(|| {
        let loaded: Vec<Result<Dataset>> = config
            .datasets
            .par_iter()
            .map(|d| config.load(d, &catalog))
            .collect();
        let jobs: Vec<(usize, usize)> = (0..config.datasets.len())
            .flat_map(|d| (0..config.methods.len()).map(move |m| (d, m)))
            .collect();
        jobs.par_iter()
            .map(|&(d, m)| {
                let spec = &config.datasets[d];
                let method = &config.methods[m];
                let seed = derive_seed(config.seed, &[method.method().name(), &spec.name]);
                let start = Instant::now();
                let status = match &loaded[d] {
                    Ok(dataset) => run_cell(method, seed, dataset, &config.metrics_for(dataset.modality())),
                    Err(e) => CellStatus::Failed(format!("dataset unavailable: {e}")),
                };
                Cell {
                    dataset: spec.name.clone(),
                    method: method.method(),
                    seed,
                    status,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                }
            })
            .collect::<Vec<_>>()
    });

    let mut metrics: Vec<Metric> = config.metrics.clone();
    if metrics.is_empty() {
        let catalog = Catalog::builtin();
        let mut set = BTreeSet::new();
        for d in &config.datasets {
            set.insert(Metric::for_modality(config.modality_of(d, &catalog)?));
        }
        metrics = set.into_iter().collect();
    }
    Ok(BenchReport {
        version: env!("CARGO_PKG_VERSION").to_owned(),
        config_hash: config.config_hash(),
        datasets: config.datasets.iter().map(|d| d.name.clone()).collect(),
        methods: config.methods.iter().map(MethodSpec::method).collect(),
        metrics,
        cells,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

impl BenchReport {
    pub fn all_ok(&self) -> bool {
        self.cells.iter().all(|c| !matches!(c.status, CellStatus::Failed(_)))
    }

    pub fn cell(&self, dataset: &str, method: Method) -> Option<&Cell> {
        self.cells.iter().find(|c| c.dataset == dataset && c.method == method)
    }

    /// One row per cell and metric. Wall times are kept out so reruns compare byte-for-byte.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dataset,method,metric,value,status,seed,config_hash,version\n");
        for c in &self.cells {
            let mut row = |metric: &str, value: String, status: &str| {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{}",
                    csv_field(&c.dataset),
                    c.method,
                    metric,
                    value,
                    csv_field(status),
                    c.seed,
                    self.config_hash,
                    self.version
                );
            };
            match &c.status {
                CellStatus::Ok(values) => {
                    for (metric, v) in values {
                        row(metric.name(), v.to_string(), "ok");
                    }
                }
                CellStatus::Skipped(why) => row("", String::new(), &format!("skipped: {why}")),
                CellStatus::Failed(why) => row("", String::new(), &format!("error: {why}")),
            }
        }
        out
    }

    /// Methods as rows, datasets as columns, one table per metric.
    pub fn to_markdown(&self) -> String {
        let mut out = format!(
            "# Benchmark report\n\nversion {}, config hash `{}`\n",
            self.version, self.config_hash
        );
        for metric in &self.metrics {
            let _ = write!(out, "\n## {metric}\n\n| Method |");
            for d in &self.datasets {
                let _ = write!(out, " {d} |");
            }
            out.push_str("\n|---|");
            out.push_str(&"---|".repeat(self.datasets.len()));
            out.push('\n');
            for &m in &self.methods {
                let _ = write!(out, "| {} |", m.display_name());
                for d in &self.datasets {
                    let text = match self.cell(d, m).map(|c| &c.status) {
                        Some(CellStatus::Ok(values)) => values
                            .get(metric)
                            .map(|v| format!("{v:.3}"))
                            .unwrap_or_else(|| "-".into()),
                        Some(CellStatus::Skipped(_)) => "-".into(),
                        Some(CellStatus::Failed(_)) | None => "error".into(),
                    };
                    let _ = write!(out, " {text} |");
                }
                out.push('\n');
            }
        }
        let failures: Vec<&Cell> = self
            .cells
            .iter()
            .filter(|c| matches!(c.status, CellStatus::Failed(_)))
            .collect();
        if !failures.is_empty() {
            out.push_str("\n## Errors\n\n");
            for c in failures {
                if let CellStatus::Failed(why) = &c.status {
                    let _ = writeln!(out, "- {} / {}: {why}", c.dataset, c.method);
                }
            }
        }
        out
    }

    pub fn timings_csv(&self) -> String {
        let mut out = String::from("dataset,method,wall_ms\n");
        for c in &self.cells {
            let _ = writeln!(out, "{},{},{:.3}", csv_field(&c.dataset), c.method, c.wall_ms);
        }
        out
    }

    /// Writes `report.csv`, `report.md` and `timings.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            ("report.csv", self.to_csv()),
            ("report.md", self.to_markdown()),
            ("timings.csv", self.timings_csv()),
        ] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}
