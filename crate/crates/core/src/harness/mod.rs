//! Study drivers shared by the command line and the acceptance tests.

mod csv_out;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use csv_out::{
    fmt_real, write_convergence_csv, write_infsup_csv, CONVERGENCE_HEADER, INFSUP_HEADER,
};

use crate::assembly::{ManufacturedSolution, Options, PenaltyParams, StokesSystem};
use crate::error::{Error, Result};
use crate::infsup::compute_beta;
use crate::mesh::{
    gen_agglomerated_with, gen_degenerate_edges, gen_distorted_with, gen_rotating_hole,
    gen_triangular, gen_voronoi_regular, HoleOptions, PolyMesh, VoronoiOptions,
};
use crate::mesh::io::read_mesh;
use crate::solver::{compute_errors, solve_stationary, ErrorReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Triangular,
    Voronoi,
    Distorted,
    Agglomerated,
    DegenerateEdges,
    RotatingHole,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Triangular,
        Family::Voronoi,
        Family::Distorted,
        Family::Agglomerated,
        Family::DegenerateEdges,
        Family::RotatingHole,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Triangular => "triangular",
            Family::Voronoi => "voronoi",
            Family::Distorted => "distorted",
            Family::Agglomerated => "agglomerated",
            Family::DegenerateEdges => "degenerate-edges",
            Family::RotatingHole => "rotating-hole",
        }
    }

    /// Levels of the convergence study in h.
    pub fn default_h_levels(self) -> Vec<usize> {
        match self {
            Family::DegenerateEdges | Family::RotatingHole => vec![0],
            _ => vec![1, 2, 3, 4],
        }
    }

    /// Levels of the inf-sup study; one level coarser than the h-study so the
    /// dense pencil stays small.
    pub fn default_infsup_levels(self) -> Vec<usize> {
        match self {
            Family::DegenerateEdges => vec![0, 1, 2, 3, 4],
            Family::RotatingHole => vec![0],
            _ => vec![0, 1, 2, 3],
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Family::ALL.iter().map(|f| f.name()).collect();
                Error::Config(format!("unknown family `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// Generator parameters that are not refined with the level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyParams {
    pub seed: u64,
    pub lloyd_iters: usize,
    /// Maximum number of points inserted per interior edge (distorted).
    pub insertions_per_edge: usize,
    /// Fine Voronoi cells per agglomerate.
    pub agglomeration_ratio: usize,
    /// Grid size of the degenerate-edge base mesh.
    pub degenerate_base: usize,
    pub hole: HoleOptions,
}

impl Default for FamilyParams {
    fn default() -> Self {
        Self {
            seed: 1,
            lloyd_iters: VoronoiOptions::default().lloyd_iters,
            insertions_per_edge: 3,
            agglomeration_ratio: 8,
            degenerate_base: 5,
            hole: HoleOptions::default(),
        }
    }
}

/// Element count of the Voronoi-based families: 5, 20, 80, 320, 1280, ...
pub fn voronoi_count(level: usize) -> usize {
    5 << (2 * level)
}

/// Generates level `level` of a family. `theta` is the hole angle in degrees
/// and is only used by the rotating-hole family.
pub fn family_mesh(family: Family, level: usize, theta: f64, p: &FamilyParams) -> Result<PolyMesh> {
    if level > 8 {
        return Err(Error::Config(format!("level {level} is too fine")));
    }
    match family {
        Family::Triangular => gen_triangular(2 << level),
        Family::Voronoi => gen_voronoi_regular(voronoi_count(level), p.lloyd_iters, p.seed),
        Family::Distorted => {
            gen_distorted_with(voronoi_count(level), p.insertions_per_edge, p.seed, p.lloyd_iters)
        }
        Family::Agglomerated => {
            let n = voronoi_count(level);
            gen_agglomerated_with(n * p.agglomeration_ratio, n, p.seed, p.lloyd_iters).map(|(m, _, _)| m)
        }
        Family::DegenerateEdges => gen_degenerate_edges(level, p.degenerate_base),
        Family::RotatingHole => gen_rotating_hole(theta, &p.hole),
    }
}

/// Experimental order of convergence between two consecutive levels.
pub fn eoc(e1: f64, e2: f64, h1: f64, h2: f64) -> f64 {
    (e1 / e2).ln() / (h1 / h2).ln()
}

/// Parameters of one study invocation, validated before any computation.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub family: Family,
    pub levels: Vec<usize>,
    pub ell: usize,
    pub m: usize,
    /// Velocity degree offsets of the inf-sup study, `ell = m + k`.
    pub k: Vec<usize>,
    /// Pressure degrees of the inf-sup study.
    pub m_list: Vec<usize>,
    /// `None` means both values where defined.
    pub eta: Option<Vec<u8>>,
    pub gamma_v: f64,
    pub gamma_p: f64,
    pub params: FamilyParams,
    pub theta_grid: Vec<f64>,
    /// Highest degree of the p-study.
    pub max_degree: usize,
    /// Element count of the p-study mesh.
    pub p_study_elements: usize,
    pub out: Option<PathBuf>,
    pub mesh_in: Option<PathBuf>,
    pub mesh_out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            family: Family::Triangular,
            levels: Vec::new(),
            ell: 2,
            m: 2,
            k: vec![0],
            m_list: vec![1],
            eta: None,
            gamma_v: 10.0,
            gamma_p: 10.0,
            params: FamilyParams::default(),
            theta_grid: theta_grid(0.0, 5.0, 180.0),
            max_degree: 6,
            p_study_elements: 160,
            out: None,
            mesh_in: None,
            mesh_out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        PenaltyParams::new(self.gamma_v, self.gamma_p)?;
        if self.ell == 0 || self.m == 0 {
            return Err(Error::Config("degrees must be at least 1".into()));
        }
        if self.m_list.iter().any(|&m| m == 0) {
            return Err(Error::Config("pressure degree must be at least 1".into()));
        }
        if self.k.iter().any(|&k| k > 4) {
            return Err(Error::Config("k must lie in 0..=4".into()));
        }
        if let Some(etas) = &self.eta {
            if etas.iter().any(|&e| e > 1) {
                return Err(Error::Config("eta must be 0 or 1".into()));
            }
            if etas.contains(&0) && self.k.contains(&0) {
                return Err(Error::Config(
                    "k = 0 with eta = 0 (unstabilized equal-order pair) is not supported; use eta = 1 or k >= 1".into(),
                ));
            }
        }
        if self.max_degree == 0 {
            return Err(Error::Config("max degree must be at least 1".into()));
        }
        if self.theta_grid.iter().any(|t| !t.is_finite()) {
            return Err(Error::Config("theta grid must be finite".into()));
        }
        Ok(())
    }

    pub fn penalty(&self) -> PenaltyParams {
        PenaltyParams { gamma_v: self.gamma_v, gamma_p: self.gamma_p }
    }

    pub fn h_levels(&self) -> Vec<usize> {
        if self.levels.is_empty() {
            self.family.default_h_levels()
        } else {
            self.levels.clone()
        }
    }

    pub fn infsup_levels(&self) -> Vec<usize> {
        if self.levels.is_empty() {
            self.family.default_infsup_levels()
        } else {
            self.levels.clone()
        }
    }

    /// `(k, eta)` pairs of the inf-sup study.
    pub fn infsup_pairs(&self) -> Vec<(usize, u8)> {
        let mut out = Vec::new();
        for &k in &self.k {
            let etas = match &self.eta {
                Some(e) => e.clone(),
                None if k == 0 => vec![1],
                None => vec![1, 0],
            };
            out.extend(etas.into_iter().map(|e| (k, e)));
        }
        out
    }
}

/// Inclusive grid `start, start + step, ..., stop`.
pub fn theta_grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + step * i as f64).collect()
}

/// Parses `1,2,5` and inclusive ranges `0..4` (or `0..=4`).
pub fn parse_levels(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("cannot parse level list `{s}`"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if b < a {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

/// Parses `start:step:stop` or a comma-separated list of angles in degrees.
pub fn parse_theta_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("cannot parse theta grid `{s}`"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        if !(v[1] > 0.0) || v[2] < v[0] {
            return Err(bad());
        }
        return Ok(theta_grid(v[0], v[1], v[2]));
    }
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(bad());
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRecord {
    pub family: String,
    pub level: usize,
    pub n_el: usize,
    pub ell: usize,
    pub m: usize,
    pub gamma_v: f64,
    pub gamma_p: f64,
    pub errors: ErrorReport,
    /// `(u L2, u DG, p L2)` against the previous record; `None` on the first.
    pub eoc: Option<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfSupRecord {
    pub family: String,
    pub level: usize,
    pub h: f64,
    pub n_el: usize,
    pub ell: usize,
    pub m: usize,
    pub k: usize,
    pub eta: u8,
    pub gamma_v: f64,
    pub gamma_p: f64,
    pub theta: Option<f64>,
    pub beta_h: f64,
}

/// Assembles and solves the manufactured problem on one mesh.
pub fn solve_manufactured(mesh: &PolyMesh, ell: usize, m: usize, penalty: PenaltyParams) -> Result<ErrorReport> {
    let exact = ManufacturedSolution::new(1.0);
    let mut opts = Options::new(ell, m);
    opts.penalty = penalty;
    let sys = StokesSystem::assemble(mesh, opts, &exact)?;
    let sol = solve_stationary(&sys)?;
    compute_errors(&sys, &sol.u, &sol.p, &exact)
}

fn convergence_records(
    family: &str,
    runs: Vec<(usize, usize, usize, usize, ErrorReport)>,
    cfg: &RunConfig,
    with_eoc: bool,
) -> Vec<ConvergenceRecord> {
    let mut out: Vec<ConvergenceRecord> = Vec::with_capacity(runs.len());
    for (level, n_el, ell, m, e) in runs {
        let eoc = match out.last() {
            Some(prev) if with_eoc => {
                let p = &prev.errors;
                Some([
                    eoc(p.err_u_l2, e.err_u_l2, p.h, e.h),
                    eoc(p.err_u_dg, e.err_u_dg, p.h, e.h),
                    eoc(p.err_p_l2, e.err_p_l2, p.h, e.h),
                ])
            }
            _ => None,
        };
        out.push(ConvergenceRecord {
            family: family.to_string(),
            level,
            n_el,
            ell,
            m,
            gamma_v: cfg.gamma_v,
            gamma_p: cfg.gamma_p,
            errors: e,
            eoc,
        });
    }
    out
}

/// Convergence in h: one record per level, EOCs against the previous level.
pub fn run_h_study(cfg: &RunConfig) -> Result<Vec<ConvergenceRecord>> {
    cfg.validate()?;
    let mut runs = Vec::new();
    for level in cfg.h_levels() {
        let mesh = family_mesh(cfg.family, level, 0.0, &cfg.params)?;
        let t = std::time::Instant::now();
        let e = solve_manufactured(&mesh, cfg.ell, cfg.m, cfg.penalty())?;
        log::info!(
            "{} level {level}: {} elements, err_u_DG {:.3e} ({:.2?})",
            cfg.family,
            mesh.n_elements(),
            e.err_u_dg,
            t.elapsed()
        );
        runs.push((level, mesh.n_elements(), cfg.ell, cfg.m, e));
    }
    Ok(convergence_records(cfg.family.name(), runs, cfg, true))
}

/// Convergence in the degree `ell = m = 1..=max_degree` on a fixed mesh,
/// read from `mesh_in` or a Voronoi mesh with `p_study_elements` cells.
pub fn run_p_study(cfg: &RunConfig) -> Result<Vec<ConvergenceRecord>> {
    cfg.validate()?;
    let (mesh, family) = match &cfg.mesh_in {
        Some(path) => (read_mesh(path)?, "file".to_string()),
        None => (
            gen_voronoi_regular(cfg.p_study_elements, cfg.params.lloyd_iters, cfg.params.seed)?,
            Family::Voronoi.name().to_string(),
        ),
    };
    let mut runs = Vec::new();
    for deg in 1..=cfg.max_degree {
        let e = solve_manufactured(&mesh, deg, deg, cfg.penalty())?;
        log::info!("degree {deg}: err_u_DG {:.3e}", e.err_u_dg);
        runs.push((0, mesh.n_elements(), deg, deg, e));
    }
    Ok(convergence_records(&family, runs, cfg, false))
}

/// Inf-sup constants for every level (or angle, for the rotating hole),
/// pressure degree, offset `k` and `eta`, in that nesting order.
pub fn run_infsup_study(cfg: &RunConfig) -> Result<Vec<InfSupRecord>> {
    cfg.validate()?;
    let points: Vec<(usize, Option<f64>)> = if cfg.family == Family::RotatingHole {
        cfg.theta_grid.iter().map(|&t| (0, Some(t))).collect()
    } else {
        cfg.infsup_levels().into_iter().map(|l| (l, None)).collect()
    };
    let pairs = cfg.infsup_pairs();
    let mut out = Vec::new();
    for (level, theta) in points {
        let mesh = family_mesh(cfg.family, level, theta.unwrap_or(0.0), &cfg.params)?;
        for &m in &cfg.m_list {
            for &k in cfg.k.iter() {
                let mut opts = Options::new(m + k, m);
                opts.penalty = cfg.penalty();
                let sys = StokesSystem::assemble_operators(&mesh, opts)?;
                for &(pk, eta) in pairs.iter().filter(|(pk, _)| *pk == k) {
                    let r = compute_beta(&sys, eta)?;
                    log::info!(
                        "{} level {level} theta {theta:?} m {m} k {pk} eta {eta}: beta_h {:.6}",
                        cfg.family,
                        r.beta_h
                    );
                    out.push(InfSupRecord {
                        family: cfg.family.name().to_string(),
                        level,
                        h: mesh.h(),
                        n_el: mesh.n_elements(),
                        ell: m + k,
                        m,
                        k,
                        eta,
                        gamma_v: cfg.gamma_v,
                        gamma_p: cfg.gamma_p,
                        theta,
                        beta_h: r.beta_h,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eoc_definition() {
        assert!((eoc(0.1, 0.05, 0.2, 0.1) - 1.0).abs() < 1e-15);
        assert_eq!(eoc(0.3, 0.3, 0.2, 0.1), 0.0);
        // antisymmetric under swapping the levels
        let a = eoc(0.7, 0.02, 0.5, 0.1);
        assert!((a - eoc(0.02, 0.7, 0.1, 0.5)).abs() < 1e-14);
    }

    #[test]
    fn level_lists() {
        assert_eq!(parse_levels("0..4").unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(parse_levels("1,3, 5").unwrap(), vec![1, 3, 5]);
        assert_eq!(parse_levels("2..=3").unwrap(), vec![2, 3]);
        assert!(parse_levels("a").is_err());
        assert!(parse_levels("4..1").is_err());
        assert_eq!(parse_theta_grid("0:15:180").unwrap().len(), 13);
        assert_eq!(parse_theta_grid("10,20").unwrap(), vec![10.0, 20.0]);
        assert!(parse_theta_grid("0:0:10").is_err());
        assert_eq!(RunConfig::default().theta_grid.len(), 37);
    }

    #[test]
    fn family_names_round_trip() {
        for f in Family::ALL {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!(matches!("hexagonal".parse::<Family>(), Err(Error::Config(_))));
    }

    #[test]
    fn default_level_sequences() {
        let tri: Vec<_> = Family::Triangular
            .default_h_levels()
            .into_iter()
            .map(|l| family_mesh(Family::Triangular, l, 0.0, &FamilyParams::default()).unwrap().n_elements())
            .collect();
        assert_eq!(tri, vec![2 * 16, 2 * 64, 2 * 256, 2 * 1024]);
        let vor: Vec<_> = Family::Voronoi.default_h_levels().into_iter().map(voronoi_count).collect();
        assert_eq!(vor, vec![20, 80, 320, 1280]);
    }

    #[test]
    fn unstabilized_equal_order_is_refused() {
        let cfg = RunConfig { k: vec![0, 1], eta: Some(vec![0]), ..Default::default() };
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("k = 0 with eta = 0"));
        let ok = RunConfig { k: vec![0, 1, 2], eta: None, ..Default::default() };
        assert_eq!(ok.infsup_pairs(), vec![(0, 1), (1, 1), (1, 0), (2, 1), (2, 0)]);
    }

    #[test]
    fn bad_penalty_is_a_config_error() {
        let cfg = RunConfig { gamma_v: -1.0, ..Default::default() };
        assert_eq!(cfg.validate().unwrap_err().exit_code(), 2);
    }
}
