//! Runs one configured experiment and writes its outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use backscatter_isac::experiments::{
    coverage_cdf, design, detection_sweep, pattern_sweep, power_sweep, write_coverage_csv,
    write_detection_csv, write_pattern_csv, write_power_csv, DesignStatus, DetectionStatus,
    DistanceSearch, Execution, Experiment, Metadata, PowerStatus,
};
use backscatter_isac::scene::Position;
use backscatter_isac::units::linear_to_db;
use thiserror::Error;

use crate::config::{ConfigError, Experiment as Kind, RunConfig};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Library(#[from] backscatter_isac::Error),
}

#[derive(Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Sweep points or designs where the conic solver gave up.
    pub numerical_failures: usize,
}

fn create(path: &Path) -> Result<BufWriter<File>, RunError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| RunError::Io {
            path: path.into(),
            source,
        })
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<(), RunError> {
    w.flush().map_err(|source| RunError::Io {
        path: path.into(),
        source,
    })
}

struct Outputs<'a> {
    dir: &'a Path,
    summary: RunSummary,
}

impl Outputs<'_> {
    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> backscatter_isac::Result<()>,
    ) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let mut w = create(&path)?;
        body(&mut w).map_err(|e| RunError::Io {
            path: path.clone(),
            source: std::io::Error::other(e.to_string()),
        })?;
        finish(&path, w)?;
        log::info!("wrote {}", path.display());
        self.summary.files.push(path);
        Ok(())
    }
}

fn single<T: Copy>(values: &[T], key: &str, experiment: Kind) -> Result<T, ConfigError> {
    match values {
        [v] => Ok(*v),
        _ => Err(ConfigError::Key {
            key: key.into(),
            reason: format!("{} takes a single value", experiment.as_str()),
        }),
    }
}

/// The sidecar: the configuration as parseable `key = value` lines, with
/// derived quantities as comments.
pub fn metadata(cfg: &RunConfig) -> Result<Metadata, RunError> {
    let mut m = Metadata::new();
    m.comment(format!("backscatter-isac {}", env!("CARGO_PKG_VERSION")));
    for (k, v) in cfg.entries() {
        m.entry(k, v);
    }
    for &g in &cfg.gamma_u_db {
        let p = cfg.params(g)?;
        m.comment(format!(
            "derived gamma_u_db={g}: total_power_w={} sigma2_tag_w={:e} sigma2_reader_w={:e} sigma2_user_w={:e} \
             eta={} gamma_user={} gamma_tag={} ({:.4} dB) gamma_reader={} ({:.4} dB)",
            p.total_power,
            p.sigma2_tag,
            p.sigma2_reader,
            p.sigma2_user,
            p.eta,
            p.gamma_user,
            p.gamma_tag,
            linear_to_db(p.gamma_tag),
            p.gamma_reader,
            linear_to_db(p.gamma_reader),
        ));
    }
    for &n in &cfg.n_antennas {
        let exp = Experiment::new(cfg.array(n)?, cfg.params(cfg.gamma_u_db[0])?)?;
        m.comment(format!(
            "derived n_antennas={n}: upper_bound_m={:.6}",
            exp.upper_bound
        ));
    }
    Ok(m)
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary, RunError> {
    cfg.validate()?;
    let dir = Path::new(&cfg.output_dir);
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.into(),
        source,
    })?;
    let execution = if cfg.parallel {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    let experiment = |n: usize, gamma_db: f64| -> Result<Experiment, RunError> {
        let mut exp = Experiment::new(cfg.array(n)?, cfg.params(gamma_db)?)?;
        exp.solver = cfg.solver();
        Ok(exp)
    };
    let search = |exp: &Experiment| DistanceSearch {
        low: cfg.search_low_m,
        tol: cfg.search_tol_m,
        ..DistanceSearch::for_experiment(exp)
    };
    let mut out = Outputs {
        dir,
        summary: RunSummary::default(),
    };

    match cfg.experiment {
        Kind::DetectDistance => {
            let bearings = cfg.bearings()?;
            let mut points = Vec::new();
            for &n in &cfg.n_antennas {
                for &g in &cfg.gamma_u_db {
                    let exp = experiment(n, g)?;
                    points.extend(detection_sweep(
                        &exp,
                        &bearings,
                        cfg.user(),
                        &cfg.methods,
                        &search(&exp),
                        g,
                        execution,
                    ));
                }
            }
            out.summary.numerical_failures += points
                .iter()
                .filter(|p| p.status == DetectionStatus::SolverFailure)
                .count();
            out.write("detection.csv", |w| write_detection_csv(w, &points))?;
        }
        Kind::Coverage => {
            let exp = experiment(
                single(&cfg.n_antennas, "n_antennas", cfg.experiment)?,
                single(&cfg.gamma_u_db, "gamma_u_db", cfg.experiment)?,
            )?;
            let spec = cfg.coverage_spec()?;
            for &method in &cfg.methods {
                let points = coverage_cdf(&exp, &spec, method, &search(&exp), execution)?;
                out.write(&format!("coverage_{method}.csv"), |w| {
                    write_coverage_csv(w, &points)
                })?;
            }
        }
        Kind::PowerSweep => {
            let exp = experiment(
                single(&cfg.n_antennas, "n_antennas", cfg.experiment)?,
                single(&cfg.gamma_u_db, "gamma_u_db", cfg.experiment)?,
            )?;
            let points = power_sweep(
                &exp,
                &cfg.bearings()?,
                cfg.tag_distance_m,
                cfg.user(),
                &cfg.methods,
                execution,
            );
            out.summary.numerical_failures += points
                .iter()
                .filter(|p| p.status == PowerStatus::SolverFailure)
                .count();
            out.write("power.csv", |w| write_power_csv(w, &points))?;
        }
        Kind::BeamPattern | Kind::SolveOne => {
            let n = single(&cfg.n_antennas, "n_antennas", cfg.experiment)?;
            let params = cfg.params(single(&cfg.gamma_u_db, "gamma_u_db", cfg.experiment)?)?;
            let array = cfg.array(n)?;
            let tag = Position::from_bearing(cfg.tag_angle_deg.to_radians(), cfg.tag_distance_m);
            let dump = cfg.experiment == Kind::SolveOne && cfg.dump_program;
            let grid = cfg.pattern_bearings()?;
            for &method in &cfg.methods {
                let d = design(
                    &array,
                    tag,
                    cfg.user(),
                    method,
                    &params,
                    &cfg.solver(),
                    dump,
                )?;
                if d.status == DesignStatus::NumericalFailure {
                    out.summary.numerical_failures += 1;
                }
                if cfg.experiment == Kind::SolveOne {
                    print!("{d}");
                    out.write(&format!("design_{method}.txt"), |w| {
                        write!(w, "{d}").map_err(|e| backscatter_isac::Error::Io(e.to_string()))
                    })?;
                    continue;
                }
                if d.status != DesignStatus::Optimal {
                    log::warn!("{method}: no beams to plot ({})", d.status.as_str());
                }
                let points = d
                    .beams
                    .as_ref()
                    .map_or_else(Vec::new, |b| pattern_sweep(b, &grid, &array));
                out.write(&format!("pattern_{method}.csv"), |w| {
                    write_pattern_csv(w, &points)
                })?;
            }
        }
    }

    let meta = metadata(cfg)?;
    out.write(&format!("{}.meta", cfg.experiment.as_str()), |w| {
        write!(w, "{meta}").map_err(|e| backscatter_isac::Error::Io(e.to_string()))
    })?;
    Ok(out.summary)
}
