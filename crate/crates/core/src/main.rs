use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polydg::harness::{
    family_mesh, parse_levels, parse_theta_grid, run_h_study, run_infsup_study, run_p_study,
    solve_manufactured, write_convergence_csv, write_infsup_csv, ConvergenceRecord, Family,
    RunConfig,
};
use polydg::mesh::io::{read_mesh, write_mesh};
use polydg::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "polydg", version, about = "Discontinuous Galerkin Stokes solver on polygonal meshes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a mesh and write it to --mesh-out.
    Mesh(Shared),
    /// Solve the manufactured problem on one mesh and print the errors.
    Solve(Shared),
    /// Convergence under mesh refinement.
    StudyH(Shared),
    /// Convergence in the polynomial degree on a fixed mesh.
    StudyP(Shared),
    /// Discrete inf-sup constants.
    StudyInfsup(Shared),
}

#[derive(Args, Debug)]
struct Shared {
    #[arg(long, default_value = "triangular")]
    family: String,
    /// Levels, e.g. `1,2,3` or `0..4`.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    /// Pressure degree; a list such as `1,2` for study-infsup.
    #[arg(long)]
    m: Option<String>,
    /// Velocity degree offsets `ell - m` for study-infsup, e.g. `0,1,2`.
    #[arg(long, default_value = "0")]
    k: String,
    /// 0, 1 or `0,1`; default: both where defined.
    #[arg(long)]
    eta: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    gamma_v: f64,
    #[arg(long, default_value_t = 10.0)]
    gamma_p: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `start:step:stop` or a list of angles in degrees.
    #[arg(long, default_value = "0:5:180")]
    theta_grid: String,
    /// Highest degree of study-p.
    #[arg(long, default_value_t = 6)]
    max_degree: usize,
    /// Element count of the study-p Voronoi mesh.
    #[arg(long, default_value_t = 160)]
    n_el: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    mesh_out: Option<PathBuf>,
    #[arg(long)]
    mesh_in: Option<PathBuf>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    let v = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|_| Error::Config(format!("cannot parse {what} `{s}`"))))
        .collect::<Result<Vec<T>>>()?;
    if v.is_empty() {
        return Err(Error::Config(format!("empty {what} list")));
    }
    Ok(v)
}

impl Shared {
    fn config(&self) -> Result<RunConfig> {
        let family: Family = self.family.parse()?;
        let m_list: Vec<usize> = match &self.m {
            Some(s) => parse_list(s, "m")?,
            None => vec![self.ell],
        };
        let mut cfg = RunConfig {
            family,
            levels: self.levels.as_deref().map(parse_levels).transpose()?.unwrap_or_default(),
            ell: self.ell,
            m: m_list[0],
            k: parse_list(&self.k, "k")?,
            m_list,
            eta: self.eta.as_deref().map(|s| parse_list(s, "eta")).transpose()?,
            gamma_v: self.gamma_v,
            gamma_p: self.gamma_p,
            theta_grid: parse_theta_grid(&self.theta_grid)?,
            max_degree: self.max_degree,
            p_study_elements: self.n_el,
            out: self.out.clone(),
            mesh_in: self.mesh_in.clone(),
            mesh_out: self.mesh_out.clone(),
            ..Default::default()
        };
        cfg.params.seed = self.seed;
        cfg.validate()?;
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(Error::Config("--threads must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        }
        Ok(cfg)
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn single_mesh(cfg: &RunConfig) -> Result<polydg::mesh::PolyMesh> {
    if let Some(p) = &cfg.mesh_in {
        return read_mesh(p);
    }
    let level = cfg.levels.first().copied().unwrap_or(1);
    family_mesh(cfg.family, level, cfg.theta_grid.first().copied().unwrap_or(0.0), &cfg.params)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mesh(a) => {
            let cfg = a.config()?;
            let path = cfg
                .mesh_out
                .clone()
                .or(cfg.out.clone())
                .ok_or_else(|| Error::Config("mesh needs --mesh-out".into()))?;
            let mesh = single_mesh(&cfg)?;
            write_mesh(&mesh, &path)?;
            println!(
                "wrote {} ({} elements, {} faces, h = {:.6})",
                path.display(),
                mesh.n_elements(),
                mesh.faces.len(),
                mesh.h()
            );
        }
        Command::Solve(a) => {
            let cfg = a.config()?;
            let mesh = single_mesh(&cfg)?;
            if let Some(p) = &cfg.mesh_out {
                write_mesh(&mesh, p)?;
            }
            let e = solve_manufactured(&mesh, cfg.ell, cfg.m, cfg.penalty())?;
            println!("elements    {}", mesh.n_elements());
            println!("h           {:.6e}", e.h);
            println!("dofs        {} + {}", e.n_u, e.n_p);
            println!("err_u_L2    {:.6e}", e.err_u_l2);
            println!("err_u_DG    {:.6e}", e.err_u_dg);
            println!("err_p_L2    {:.6e}", e.err_p_l2);
            println!("err_p_jump  {:.6e}", e.err_p_jump);
            if let Some(p) = &cfg.out {
                let rec = ConvergenceRecord {
                    family: if cfg.mesh_in.is_some() { "file".into() } else { cfg.family.name().into() },
                    level: cfg.levels.first().copied().unwrap_or(1),
                    n_el: mesh.n_elements(),
                    ell: cfg.ell,
                    m: cfg.m,
                    gamma_v: cfg.gamma_v,
                    gamma_p: cfg.gamma_p,
                    errors: e,
                    eoc: None,
                };
                write_convergence_csv(&[rec], File::create(p)?)?;
            }
        }
        Command::StudyH(a) => {
            let cfg = a.config()?;
            let recs = run_h_study(&cfg)?;
            write_convergence_csv(&recs, output(&cfg.out)?)?;
        }
        Command::StudyP(a) => {
            let cfg = a.config()?;
            let recs = run_p_study(&cfg)?;
            write_convergence_csv(&recs, output(&cfg.out)?)?;
        }
        Command::StudyInfsup(a) => {
            let cfg = a.config()?;
            let recs = run_infsup_study(&cfg)?;
            write_infsup_csv(&recs, output(&cfg.out)?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
