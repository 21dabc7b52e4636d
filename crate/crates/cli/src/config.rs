//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; blank lines and lines starting with `#` are
//! ignored. Keys:
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `rho0` | inner radius of the annulus | 0.99 |
//! | `depth` | number of stages k* | 2 |
//! | `mode` | `explicit` or `adaptive` | adaptive |
//! | `conditions` | enforced conditions in adaptive mode | LC2,CONE |
//! | `cap` | largest corrugation number tried | 2^40 |
//! | `tau1` | first budget, tau_k = tau1 e^{1-k} | e^{-1} |
//! | `lambda` | the constant of (LC4) | 100 |
//! | `schedule.k.i` | corrugation number N_{k,i} (starting value when adaptive) | see below |
//! | `grid.rho`, `grid.phi` | samples per shortest period | 12 |
//! | `domain` | `ring` or `window` | window |
//! | `window.phi`, `window.width` | angular window | 0.5, 5e-6 |
//! | `max_nodes` | largest grid of a step | 12000000 |
//! | `samples` | nodes per stage kept for comparisons | 5000 |
//! | `snapshot.nodes`, `mesh.nodes` | decimation targets of snapshots and OBJ meshes | 20000, 250000 |
//! | `scan.nodes` | nodes of the self-intersection scan | 4000000 |
//! | `formal.rho` | comma separated circles for pattern dumps | 0.7 |
//! | `formal.samples` | samples per arc and per circle | 4096 |
//! | `compare.k` | the interval K as `lo,hi` | rho0,1 |
//! | `outdir` | output directory | out |
//! | `seed` | seed of analysis sampling | 1 |
//!
//! The default schedule is (12, 80, 800), (8000, 80000, 800000): every N is
//! even and every N_{k,2}, N_{k,3} a multiple of 10, so M = 4 and L = 80.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use corrugate::holonomic::{Condition, Domain, RunSpec, Sampling, ScheduleMode, DEFAULT_LAMBDA, DEFAULT_MAX_NODES};
use corrugate::metrics::initial_differential;
use corrugate::geom::lambda_min;
use corrugate::schedule::Schedule;

use crate::error::{CliError, Result};

pub const DEFAULT_SCHEDULE: [[u64; 3]; 2] = [[12, 80, 800], [8000, 80000, 800000]];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Explicit,
    Adaptive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rho0: f64,
    pub depth: usize,
    pub mode: Mode,
    pub conditions: Vec<Condition>,
    pub cap: u64,
    pub tau1: f64,
    pub lambda: f64,
    pub schedule: Vec<[u64; 3]>,
    pub sampling: Sampling,
    pub domain: Domain,
    pub max_nodes: usize,
    pub samples: usize,
    pub snapshot_nodes: usize,
    pub mesh_nodes: usize,
    pub scan_nodes: usize,
    pub formal_rho: Vec<f64>,
    pub formal_samples: usize,
    pub compare_k: Option<(f64, f64)>,
    pub outdir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rho0: 0.99,
            depth: 2,
            mode: Mode::Adaptive,
            conditions: vec![Condition::Lc2, Condition::Cone],
            cap: 1 << 40,
            tau1: (-1.0f64).exp(),
            lambda: DEFAULT_LAMBDA,
            schedule: DEFAULT_SCHEDULE.to_vec(),
            sampling: Sampling::default(),
            domain: Domain::Window {
                phi_c: 0.5,
                width: 5e-6,
            },
            max_nodes: DEFAULT_MAX_NODES,
            samples: 5_000,
            snapshot_nodes: 20_000,
            mesh_nodes: 250_000,
            scan_nodes: 4_000_000,
            formal_rho: vec![0.7],
            formal_samples: 4096,
            compare_k: None,
            outdir: PathBuf::from("out"),
            seed: 1,
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse '{v}'")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|x| parse(key, x.trim())).collect()
}

impl RunConfig {
    /// Parses a config file's text on top of the defaults. A file that sets
    /// any `schedule.k.i` replaces the whole default schedule.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        let mut seen = BTreeMap::new();
        let mut sched: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        let (mut window_phi, mut window_width) = match c.domain {
            Domain::Window { phi_c, width } => (phi_c, width),
            Domain::Ring => unreachable!(),
        };
        let mut ring = false;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", ln + 1)))?;
            let (key, v) = (key.trim(), v.trim());
            if seen.insert(key.to_string(), ln + 1).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key '{key}'", ln + 1)));
            }
            match key {
                "rho0" => c.rho0 = parse(key, v)?,
                "depth" => c.depth = parse(key, v)?,
                "mode" => {
                    c.mode = match v.to_ascii_lowercase().as_str() {
                        "explicit" => Mode::Explicit,
                        "adaptive" => Mode::Adaptive,
                        _ => return Err(CliError::Config(format!("mode: expected explicit or adaptive, got '{v}'"))),
                    }
                }
                "conditions" => {
                    c.conditions = if v.is_empty() {
                        Vec::new()
                    } else {
                        v.split(',').map(Condition::from_str).collect::<corrugate::Result<_>>()?
                    }
                }
                "cap" => c.cap = parse(key, v)?,
                "tau1" => c.tau1 = parse(key, v)?,
                "lambda" => c.lambda = parse(key, v)?,
                "grid.rho" => c.sampling.spp_rho = parse(key, v)?,
                "grid.phi" => c.sampling.spp_phi = parse(key, v)?,
                "domain" => {
                    ring = match v.to_ascii_lowercase().as_str() {
                        "ring" => true,
                        "window" => false,
                        _ => return Err(CliError::Config(format!("domain: expected ring or window, got '{v}'"))),
                    }
                }
                "window.phi" => window_phi = parse(key, v)?,
                "window.width" => window_width = parse(key, v)?,
                "max_nodes" => c.max_nodes = parse(key, v)?,
                "samples" => c.samples = parse(key, v)?,
                "snapshot.nodes" => c.snapshot_nodes = parse(key, v)?,
                "mesh.nodes" => c.mesh_nodes = parse(key, v)?,
                "scan.nodes" => c.scan_nodes = parse(key, v)?,
                "formal.rho" => c.formal_rho = parse_list(key, v)?,
                "formal.samples" => c.formal_samples = parse(key, v)?,
                "compare.k" => {
                    let k: Vec<f64> = parse_list(key, v)?;
                    if k.len() != 2 {
                        return Err(CliError::Config("compare.k: expected lo,hi".into()));
                    }
                    c.compare_k = Some((k[0], k[1]));
                }
                "outdir" => c.outdir = PathBuf::from(v),
                "seed" => c.seed = parse(key, v)?,
                _ => {
                    let parts: Vec<&str> = key.split('.').collect();
                    match parts.as_slice() {
                        ["schedule", k, i] => {
                            let (k, i): (usize, usize) = (parse(key, k)?, parse(key, i)?);
                            if k == 0 || !(1..=3).contains(&i) {
                                return Err(CliError::Config(format!("{key}: stage outside k >= 1, i in 1..3")));
                            }
                            sched.insert((k, i), parse(key, v)?);
                        }
                        _ => return Err(CliError::Config(format!("line {}: unknown key '{key}'", ln + 1))),
                    }
                }
            }
        }
        if !sched.is_empty() {
            let rows = sched.keys().map(|s| s.0).max().unwrap_or(0);
            c.schedule = (1..=rows)
                .map(|k| {
                    let mut row = [0u64; 3];
                    for i in 1..=3 {
                        row[i - 1] = *sched
                            .get(&(k, i))
                            .ok_or_else(|| CliError::Config(format!("schedule.{k}.{i} is missing")))?;
                    }
                    Ok(row)
                })
                .collect::<Result<_>>()?;
        }
        c.domain = if ring {
            Domain::Ring
        } else {
            Domain::Window {
                phi_c: window_phi,
                width: window_width,
            }
        };
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    /// The schedule truncated to `depth`, checked.
    pub fn schedule(&self) -> Result<Schedule> {
        if self.depth > self.schedule.len() {
            return Err(CliError::Config(format!(
                "depth {} exceeds the {} schedule rows",
                self.depth,
                self.schedule.len()
            )));
        }
        Ok(Schedule::new(self.schedule.clone())?.truncated(self.depth))
    }

    /// Checks the invariants a run depends on.
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.rho0 < 1.0) {
            return Err(CliError::Config(format!("rho0 must lie in (0, 1), got {}", self.rho0)));
        }
        self.schedule()?;
        if !(self.sampling.spp_rho >= 4.0 && self.sampling.spp_phi >= 4.0) {
            return Err(CliError::Config("grid.rho and grid.phi must be at least 4".into()));
        }
        if self.formal_rho.iter().any(|r| !(*r > 0.0 && *r <= 1.0)) {
            return Err(CliError::Config("formal.rho radii must lie in (0, 1]".into()));
        }
        self.run_spec()?.validate()?;
        Ok(())
    }

    /// lambda_C(df0) at rho0, the smallest value on the annulus.
    pub fn lambda_c_df0(&self) -> f64 {
        lambda_min(&initial_differential(self.rho0, 0.0))
    }

    pub fn run_spec(&self) -> Result<RunSpec> {
        let mut spec = RunSpec::new(self.rho0, self.depth, Schedule::new(self.schedule.clone())?);
        spec.mode = match self.mode {
            Mode::Explicit => ScheduleMode::Explicit,
            Mode::Adaptive => ScheduleMode::Adaptive {
                conditions: self.conditions.clone(),
                cap: self.cap,
            },
        };
        spec.tau1 = self.tau1;
        spec.lambda = self.lambda;
        spec.sampling = self.sampling;
        spec.domain = self.domain;
        spec.sample_cap = self.samples;
        spec.max_nodes = self.max_nodes;
        Ok(spec)
    }

    /// The interval K of comparisons.
    pub fn k_interval(&self) -> (f64, f64) {
        self.compare_k.unwrap_or((self.rho0, 1.0))
    }

    /// Canonical text form; parses back to the same config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let w = &mut s;
        let _ = writeln!(w, "rho0 = {}", self.rho0);
        let _ = writeln!(w, "depth = {}", self.depth);
        let mode = match self.mode {
            Mode::Explicit => "explicit",
            Mode::Adaptive => "adaptive",
        };
        let _ = writeln!(w, "mode = {mode}");
        let conds: Vec<&str> = self.conditions.iter().map(|c| c.name()).collect();
        let _ = writeln!(w, "conditions = {}", conds.join(","));
        let _ = writeln!(w, "cap = {}", self.cap);
        let _ = writeln!(w, "tau1 = {}", self.tau1);
        let _ = writeln!(w, "lambda = {}", self.lambda);
        for (k, row) in self.schedule.iter().enumerate() {
            for (i, n) in row.iter().enumerate() {
                let _ = writeln!(w, "schedule.{}.{} = {n}", k + 1, i + 1);
            }
        }
        let _ = writeln!(w, "grid.rho = {}", self.sampling.spp_rho);
        let _ = writeln!(w, "grid.phi = {}", self.sampling.spp_phi);
        match self.domain {
            Domain::Ring => {
                let _ = writeln!(w, "domain = ring");
            }
            Domain::Window { phi_c, width } => {
                let _ = writeln!(w, "domain = window\nwindow.phi = {phi_c}\nwindow.width = {width}");
            }
        }
        let _ = writeln!(w, "max_nodes = {}", self.max_nodes);
        let _ = writeln!(w, "samples = {}", self.samples);
        let _ = writeln!(w, "snapshot.nodes = {}", self.snapshot_nodes);
        let _ = writeln!(w, "mesh.nodes = {}", self.mesh_nodes);
        let _ = writeln!(w, "scan.nodes = {}", self.scan_nodes);
        let radii: Vec<String> = self.formal_rho.iter().map(f64::to_string).collect();
        let _ = writeln!(w, "formal.rho = {}", radii.join(","));
        let _ = writeln!(w, "formal.samples = {}", self.formal_samples);
        if let Some((lo, hi)) = self.compare_k {
            let _ = writeln!(w, "compare.k = {lo},{hi}");
        }
        let _ = writeln!(w, "outdir = {}", self.outdir.display());
        let _ = writeln!(w, "seed = {}", self.seed);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_and_validates() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        let s = c.schedule().unwrap();
        assert_eq!((s.m(), s.l()), (4, 80));
    }

    #[test]
    fn schedule_keys_replace_the_default() {
        let c = RunConfig::parse("schedule.1.1 = 12\nschedule.1.2 = 80\nschedule.1.3 = 500\ndepth = 1\n").unwrap();
        assert_eq!(c.schedule, vec![[12, 80, 500]]);
        assert!(RunConfig::parse("schedule.1.1 = 12\n").is_err());
    }

    #[test]
    fn bad_input_is_a_config_error() {
        for text in ["rho0 = x", "nope = 1", "rho0 = 0.5\nrho0 = 0.6", "mode = sideways", "conditions = LC9"] {
            let e = RunConfig::parse(text).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{text}: {e}");
        }
        let c = RunConfig::parse("rho0 = 1.5").unwrap();
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let c = RunConfig::parse("depth = 3").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn budget_invariant_is_enforced() {
        // T = tau1 / (1 - 1/e) must stay below lambda_C(df0) / 2 = rho0
        let c = RunConfig::parse("rho0 = 0.3\ntau1 = 0.2").unwrap();
        assert!((c.lambda_c_df0() - 0.6).abs() < 1e-12);
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
        let c = RunConfig::parse("rho0 = 0.3\ntau1 = 0.18").unwrap();
        c.validate().unwrap();
    }
}
