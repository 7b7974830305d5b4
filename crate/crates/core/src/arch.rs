//! Coupling maps, the connectivity ratio and hop-count distances.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ArchError {
    #[error("unknown architecture '{0}' (built-ins: r1..r5, s1..s5)")]
    Unknown(String),
    #[error("edge {0}-{1} references a qubit outside 0..{2}")]
    QubitOutOfRange(usize, usize, usize),
    #[error("self-loop on qubit {0}")]
    SelfLoop(usize),
    #[error("coupling graph is disconnected: qubits {component:?} are unreachable from qubit 0")]
    Disconnected { component: Vec<usize> },
    #[error("architecture has no couplers")]
    NoEdges,
    #[error("n_full must be positive")]
    ZeroBaseline,
    #[error("n_con = {n_con} exceeds n_full = {n_full}")]
    ExceedsBaseline { n_con: usize, n_full: usize },
    #[error("bad edge entry '{0}': expected 'a-b' or 'a>b'")]
    BadEdge(String),
    #[error("unknown family '{0}'")]
    BadFamily(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rectangle,
    Square,
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Rectangle => "rectangle",
            Family::Square => "square",
            Family::Custom => "custom",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = ArchError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rectangle" => Ok(Family::Rectangle),
            "square" => Ok(Family::Square),
            "custom" => Ok(Family::Custom),
            other => Err(ArchError::BadFamily(other.to_string())),
        }
    }
}

/// Directed-edge baseline of the fully connected variant shared by both
/// built-in families.
pub const BUILTIN_N_FULL: usize = 188;

pub const BUILTIN_NAMES: [&str; 10] = ["r1", "r2", "r3", "r4", "r5", "s1", "s2", "s3", "s4", "s5"];

/// A named coupling graph. Edges are stored directed and closed under
/// reversal, so a physical coupler contributes two to `n_con`.
#[derive(Debug, Clone)]
pub struct Architecture {
    name: String,
    num_qubits: usize,
    family: Family,
    n_full: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    distances: OnceLock<DistanceMatrix>,
}

impl PartialEq for Architecture {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.num_qubits == other.num_qubits
            && self.family == other.family
            && self.n_full == other.n_full
            && self.edges == other.edges
    }
}

impl Architecture {
    /// Builds and validates an architecture from couplers given as pairs.
    /// Each pair is symmetrized. `n_full` defaults to `n(n-1)`.
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        family: Family,
        n_full: Option<usize>,
        couplers: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ArchError> {
        let mut edges = BTreeSet::new();
        for (a, b) in couplers {
            if a >= num_qubits || b >= num_qubits {
                return Err(ArchError::QubitOutOfRange(a, b, num_qubits));
            }
            if a == b {
                return Err(ArchError::SelfLoop(a));
            }
            edges.insert((a, b));
            edges.insert((b, a));
        }
        if edges.is_empty() {
            return Err(ArchError::NoEdges);
        }
        let n_full = n_full.unwrap_or(num_qubits * num_qubits.saturating_sub(1));
        if n_full == 0 {
            return Err(ArchError::ZeroBaseline);
        }
        if edges.len() > n_full {
            return Err(ArchError::ExceedsBaseline { n_con: edges.len(), n_full });
        }
        let mut neighbors = vec![Vec::new(); num_qubits];
        for &(a, b) in &edges {
            neighbors[a].push(b);
        }
        let arch = Architecture {
            name: name.into(),
            num_qubits,
            family,
            n_full,
            edges,
            neighbors,
            distances: OnceLock::new(),
        };
        let dist = DistanceMatrix::bfs(&arch.neighbors)?;
        let _ = arch.distances.set(dist);
        Ok(arch)
    }

    /// Complete graph on `n` qubits.
    pub fn complete(n: usize) -> Result<Self, ArchError> {
        let pairs = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)));
        Architecture::new(format!("complete{n}"), n, Family::Custom, None, pairs)
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn line(n: usize) -> Result<Self, ArchError> {
        Architecture::new(format!("line{n}"), n, Family::Custom, None, (1..n).map(|i| (i - 1, i)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n_full(&self) -> usize {
        self.n_full
    }

    /// Directed coupler count.
    pub fn n_con(&self) -> usize {
        self.edges.len()
    }

    /// `n_con / n_full`.
    pub fn connectivity(&self) -> f64 {
        self.n_con() as f64 / self.n_full as f64
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    /// Couplers as `(a, b)` with `a < b`.
    pub fn couplers(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied().filter(|(a, b)| a < b)
    }

    pub fn is_coupled(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a, b))
    }

    /// Neighbours of `q` in ascending order.
    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.neighbors[q]
    }

    pub fn distance_matrix(&self) -> &DistanceMatrix {
        self.distances.get_or_init(|| DistanceMatrix::bfs(&self.neighbors).expect("validated on construction"))
    }

    /// Graphviz description, one undirected edge per coupler.
    pub fn to_dot(&self) -> String {
        let mut out = format!("graph \"{}\" {{\n", self.name);
        let _ = writeln!(
            out,
            "  label=\"{} ({}, n_con={}, c={:.2})\";",
            self.name,
            self.family,
            self.n_con(),
            self.connectivity()
        );
        for q in 0..self.num_qubits {
            let _ = writeln!(out, "  {q};");
        }
        for (a, b) in self.couplers() {
            let _ = writeln!(out, "  {a} -- {b};");
        }
        out.push_str("}\n");
        out
    }
}

/// Unweighted all-pairs hop counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u32>,
}

impl DistanceMatrix {
    /// Breadth-first search from every vertex.
    pub fn bfs(neighbors: &[Vec<usize>]) -> Result<Self, ArchError> {
        let n = neighbors.len();
        let mut data = vec![u32::MAX; n * n];
        let mut queue = VecDeque::with_capacity(n);
        for src in 0..n {
            let row = &mut data[src * n..(src + 1) * n];
            row[src] = 0;
            queue.clear();
            queue.push_back(src);
            while let Some(u) = queue.pop_front() {
                let du = row[u];
                for &v in &neighbors[u] {
                    if row[v] == u32::MAX {
                        row[v] = du + 1;
                        queue.push_back(v);
                    }
                }
            }
            if src == 0 {
                let unreachable: Vec<usize> = (0..n).filter(|&v| row[v] == u32::MAX).collect();
                if !unreachable.is_empty() {
                    return Err(ArchError::Disconnected { component: unreachable });
                }
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.data[a * self.n + b]
    }

    pub fn row(&self, a: usize) -> &[u32] {
        &self.data[a * self.n..(a + 1) * self.n]
    }

    pub fn diameter(&self) -> u32 {
        self.data.iter().copied().max().unwrap_or(0)
    }
}

const BUILTIN_SOURCES: [(&str, &str); 10] = [
    ("r1", include_str!("../data/archs/r1.toml")),
    ("r2", include_str!("../data/archs/r2.toml")),
    ("r3", include_str!("../data/archs/r3.toml")),
    ("r4", include_str!("../data/archs/r4.toml")),
    ("r5", include_str!("../data/archs/r5.toml")),
    ("s1", include_str!("../data/archs/s1.toml")),
    ("s2", include_str!("../data/archs/s2.toml")),
    ("s3", include_str!("../data/archs/s3.toml")),
    ("s4", include_str!("../data/archs/s4.toml")),
    ("s5", include_str!("../data/archs/s5.toml")),
];

/// One of the ten bundled 32-qubit architectures.
pub fn builtin(name: &str) -> Result<Architecture, ArchError> {
    let (_, src) = BUILTIN_SOURCES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| ArchError::Unknown(name.to_string()))?;
    Ok(from_toml_str(src)?.arch)
}

pub fn all_builtins() -> Vec<Architecture> {
    BUILTIN_NAMES.iter().map(|n| builtin(n).expect("bundled data is valid")).collect()
}

/// Resolves a built-in name, or else reads the argument as a file path.
pub fn resolve(name_or_path: &str) -> Result<Architecture, ArchError> {
    match builtin(name_or_path) {
        Ok(a) => Ok(a),
        Err(ArchError::Unknown(_)) if Path::new(name_or_path).exists() => Ok(load(name_or_path)?.arch),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArchFile {
    name: String,
    num_qubits: usize,
    #[serde(default = "default_family")]
    family: String,
    #[serde(default)]
    n_full: Option<usize>,
    #[serde(default)]
    edges: Vec<String>,
    /// One-way entries `a>b`; a missing reverse is added with a warning.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    directed_edges: Vec<String>,
}

fn default_family() -> String {
    "custom".into()
}

#[derive(Debug, Clone)]
pub struct LoadedArch {
    pub arch: Architecture,
    pub warnings: Vec<String>,
}

pub fn from_toml_str(text: &str) -> Result<LoadedArch, ArchError> {
    let file: ArchFile = toml::from_str(text).map_err(|e| ArchError::Schema(e.message().to_string()))?;
    let family: Family = file.family.parse()?;
    let mut warnings = Vec::new();
    let mut pairs = Vec::new();
    for e in &file.edges {
        let (a, b) = e.split_once('-').ok_or_else(|| ArchError::BadEdge(e.clone()))?;
        pairs.push((parse_qubit(a, e)?, parse_qubit(b, e)?));
    }
    let mut directed = BTreeSet::new();
    for e in &file.directed_edges {
        let (a, b) = e.split_once('>').ok_or_else(|| ArchError::BadEdge(e.clone()))?;
        directed.insert((parse_qubit(a, e)?, parse_qubit(b, e)?));
    }
    for &(a, b) in &directed {
        if !directed.contains(&(b, a)) && !pairs.contains(&(a, b)) && !pairs.contains(&(b, a)) {
            warnings.push(format!("edge {a}>{b} has no reverse; added {b}>{a}"));
        }
        pairs.push((a, b));
    }
    for w in &warnings {
        log::warn!("{}: {w}", file.name);
    }
    let n_full = match (family, file.n_full) {
        (_, Some(n)) => Some(n),
        (Family::Rectangle | Family::Square, None) => Some(BUILTIN_N_FULL),
        (Family::Custom, None) => None,
    };
    let arch = Architecture::new(file.name, file.num_qubits, family, n_full, pairs)?;
    Ok(LoadedArch { arch, warnings })
}

fn parse_qubit(s: &str, entry: &str) -> Result<usize, ArchError> {
    s.trim().parse().map_err(|_| ArchError::BadEdge(entry.to_string()))
}

pub fn to_toml_string(arch: &Architecture) -> String {
    let file = ArchFile {
        name: arch.name.clone(),
        num_qubits: arch.num_qubits,
        family: arch.family.as_str().to_string(),
        n_full: Some(arch.n_full),
        edges: arch.couplers().map(|(a, b)| format!("{a}-{b}")).collect(),
        directed_edges: Vec::new(),
    };
    toml::to_string(&file).expect("architecture file serializes")
}

pub fn load(path: impl AsRef<Path>) -> Result<LoadedArch, ArchError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ArchError::Io { path: path.display().to_string(), source })?;
    from_toml_str(&text)
}

pub fn save(arch: &Architecture, path: impl AsRef<Path>) -> Result<(), ArchError> {
    let path = path.as_ref();
    std::fs::write(path, to_toml_string(arch)).map_err(|source| ArchError::Io { path: path.display().to_string(), source })
}
