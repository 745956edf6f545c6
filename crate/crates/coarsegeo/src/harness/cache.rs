//! On-disk cache of balls, keyed by model hash, radius and code version.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::group::GroupModel;

/// Environment variable naming the cache directory. Caching is off when it
/// is unset or empty.
pub const CACHE_ENV: &str = "COARSEGEO_CACHE_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CacheStatus {
    Disabled,
    Hit,
    Miss,
    /// A file existed but did not match its key and was rebuilt.
    Stale,
}

#[derive(Serialize, Deserialize)]
struct BallFile {
    model_hash: String,
    radius: u32,
    code_version: String,
    vertices: Vec<String>,
    neighbours: Vec<u32>,
}

pub fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn ball_path(dir: &Path, model: &GroupModel, radius: u32) -> PathBuf {
    dir.join(format!("ball-{}-r{radius}-v{}.json", model.hash_hex(), env!("CARGO_PKG_VERSION")))
}

fn load(path: &Path, model: &GroupModel, radius: u32) -> Option<MetricGraph> {
    let text = std::fs::read_to_string(path).ok()?;
    let f: BallFile = serde_json::from_str(&text).ok()?;
    if f.model_hash != model.hash_hex() || f.radius != radius || f.code_version != env!("CARGO_PKG_VERSION") {
        return None;
    }
    if f.neighbours.len() != f.vertices.len() * model.letters().len() {
        return None;
    }
    let vertices = f.vertices.iter().map(|v| model.parse(v)).collect::<Result<Vec<_>>>().ok()?;
    Some(MetricGraph::from_parts(model, radius, vertices, f.neighbours))
}

fn store(path: &Path, g: &MetricGraph) -> Result<()> {
    let f = BallFile {
        model_hash: g.model().hash_hex(),
        radius: g.radius(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        vertices: g.elements().iter().map(|e| g.model().format(e)).collect(),
        neighbours: g.neighbour_table().to_vec(),
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, serde_json::to_vec(&f).expect("ball serialises")).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// The ball of `radius`, read from or written to the cache directory when
/// one is configured.
pub fn cached_ball(model: &GroupModel, radius: u32, budget: usize) -> Result<(MetricGraph, CacheStatus)> {
    cached_ball_in(cache_dir().as_deref(), model, radius, budget)
}

pub fn cached_ball_in(
    dir: Option<&Path>,
    model: &GroupModel,
    radius: u32,
    budget: usize,
) -> Result<(MetricGraph, CacheStatus)> {
    let Some(dir) = dir else {
        return Ok((MetricGraph::ball(model, radius, budget)?, CacheStatus::Disabled));
    };
    let path = ball_path(dir, model, radius);
    let existed = path.exists();
    if let Some(g) = load(&path, model, radius) {
        if g.n_vertices() <= budget {
            return Ok((g, CacheStatus::Hit));
        }
    }
    let g = MetricGraph::ball(model, radius, budget)?;
    store(&path, &g)?;
    Ok((g, if existed { CacheStatus::Stale } else { CacheStatus::Miss }))
}
