//! Sweeps over tag and user placements: detection distance, coverage,
//! allocated power and beam patterns.
//!
//! Everything here talks in *bearings* (see [`crate::scene`]): `0..=180`
//! degrees across the front half-plane, boresight at 90.

mod coverage;
mod distance;
mod output;
mod pattern;
mod power;

pub use coverage::{coverage_cdf, CoveragePoint, CoverageSpec};
pub use distance::{
    detection_distance, detection_sweep, search_distance, DetectionPoint, DetectionStatus,
    DistanceSearch,
};
pub use output::{
    write_coverage_csv, write_detection_csv, write_pattern_csv, write_power_csv, Metadata,
    COVERAGE_HEADER, DETECTION_HEADER, PATTERN_HEADER, POWER_HEADER,
};
pub use pattern::{
    beam_pattern, design, pattern_sweep, DesignResult, DesignStatus, PatternPoint, PATTERN_FLOOR_DB,
};
pub use power::{power_sweep, PowerPoint, PowerStatus};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::conic::SolverSettings;
use crate::error::{Error, Result};
use crate::joint::{min_power_joint, JointStatus};
use crate::scene::{los_channel, los_receive_channel, ArrayConfig, Position, Scene, SystemParams};
use crate::sinr::{sinr_reader, sinr_tag, BeamPair, Combiner};
use crate::zf::solve_zf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MethodKind {
    ZeroForcing,
    JointSocp,
}

impl MethodKind {
    pub const ALL: [MethodKind; 2] = [MethodKind::ZeroForcing, MethodKind::JointSocp];

    pub fn as_str(&self) -> &'static str {
        match self {
            MethodKind::ZeroForcing => "zf",
            MethodKind::JointSocp => "joint",
        }
    }
}

impl fmt::Display for MethodKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MethodKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zf" => Ok(MethodKind::ZeroForcing),
            "joint" => Ok(MethodKind::JointSocp),
            other => Err(Error::InvalidParameter {
                name: "method",
                reason: format!("unknown method `{other}`"),
            }),
        }
    }
}

/// Outcome of one feasibility query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Feasible,
    Infeasible,
    /// The scene could not be set up (collinear channels for zero-forcing,
    /// coincident tag and user). Counts as infeasible.
    Degenerate,
    /// The conic solver did not converge. Counts as infeasible.
    SolverFailure,
}

impl Verdict {
    pub fn is_feasible(self) -> bool {
        self == Verdict::Feasible
    }
}

/// Whether sweeps fan out over rayon's pool. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub(crate) fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            Execution::Sequential => items.iter().map(f).collect(),
            Execution::Parallel => items.par_iter().map(f).collect(),
        }
    }
}

/// Is there a beam pair meeting every threshold within the power budget?
///
/// Zero-forcing answers through its power-allocation LP; the joint design
/// through the minimum-power SOCP compared with the budget.
pub fn feasible_at(
    array: &ArrayConfig,
    tag: Position,
    user: Position,
    method: MethodKind,
    params: &SystemParams,
    solver: &SolverSettings,
) -> Verdict {
    let channels = match Scene::new(*array, tag, user).and_then(|s| s.channels()) {
        Ok(c) => c,
        Err(e) => {
            log::debug!("degenerate scene tag={tag:?} user={user:?}: {e}");
            return Verdict::Degenerate;
        }
    };
    match method {
        MethodKind::ZeroForcing => match solve_zf(&channels, params) {
            Ok(z) if z.allocation.feasible => Verdict::Feasible,
            Ok(_) => Verdict::Infeasible,
            Err(e) => {
                log::debug!("zero-forcing unavailable at tag={tag:?} user={user:?}: {e}");
                Verdict::Degenerate
            }
        },
        MethodKind::JointSocp => match min_power_joint(&channels, params, solver) {
            Ok(s) => match s.status {
                JointStatus::Optimal => Verdict::Feasible,
                JointStatus::Infeasible => Verdict::Infeasible,
                JointStatus::NumericalFailure => {
                    log::warn!("solver failure at tag={tag:?} user={user:?}");
                    Verdict::SolverFailure
                }
            },
            Err(e) => {
                log::debug!("joint design unavailable at tag={tag:?} user={user:?}: {e}");
                Verdict::Degenerate
            }
        },
    }
}

/// Can the tag at `range` be read with no user to serve? Uses the full budget
/// on a matched sensing beam, which is optimal in that case.
pub fn no_user_feasible(array: &ArrayConfig, params: &SystemParams, tag: Position) -> Result<bool> {
    let h_t = los_channel(array, tag)?;
    let h_r = los_receive_channel(array, tag)?;
    let w = Combiner::matched(&h_r)?;
    let f_t = h_t.unscale(h_t.norm()) * crate::scene::C64::from(params.total_power.sqrt());
    let beams = BeamPair::new(f_t, crate::scene::CVector::zeros(array.n_tx))?;
    Ok(
        sinr_tag(&beams, &h_t, params.sigma2_tag) >= params.gamma_tag
            && sinr_reader(
                &beams,
                &h_t,
                &h_r,
                &w,
                params.eta,
                params.sigma2_tag,
                params.sigma2_reader,
            ) >= params.gamma_reader,
    )
}

/// Largest tag range readable with no user present. Independent of the tag
/// bearing under the line-of-sight model; zero if even a tag 1 mm away
/// cannot be read.
pub fn upper_bound_distance(array: &ArrayConfig, params: &SystemParams) -> Result<f64> {
    let at = |d: f64| no_user_feasible(array, params, Position::new(d, 0.0));
    let mut lo = 1e-3;
    if !at(lo)? {
        return Ok(0.0);
    }
    let mut hi = 1.0;
    while at(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Domain("no-user detection range is unbounded".into()));
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Shared state of a sweep: array, parameters, solver settings and the
/// no-user range, which bounds every detection distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experiment {
    pub array: ArrayConfig,
    pub params: SystemParams,
    pub solver: SolverSettings,
    pub upper_bound: f64,
}

impl Experiment {
    pub fn new(array: ArrayConfig, params: SystemParams) -> Result<Self> {
        params.validate()?;
        let upper_bound = upper_bound_distance(&array, &params)?;
        Ok(Self {
            array,
            params,
            solver: SolverSettings::default(),
            upper_bound,
        })
    }

    /// [`feasible_at`] with two exact shortcuts for the joint design: a tag
    /// beyond the no-user range is never readable, and a zero-forcing
    /// solution is a feasible point of the joint problem. The SOCP runs only
    /// when neither settles the question.
    pub fn feasible(&self, tag: Position, user: Position, method: MethodKind) -> Verdict {
        if method == MethodKind::JointSocp {
            if tag.range() > self.upper_bound * (1.0 + 1e-9) {
                return Verdict::Infeasible;
            }
            if feasible_at(
                &self.array,
                tag,
                user,
                MethodKind::ZeroForcing,
                &self.params,
                &self.solver,
            )
            .is_feasible()
            {
                return Verdict::Feasible;
            }
        }
        feasible_at(&self.array, tag, user, method, &self.params, &self.solver)
    }
}

/// `count` bearings `start, start + step, ...` in degrees.
pub fn bearing_grid(start_deg: f64, stop_deg: f64, step_deg: f64) -> Result<Vec<f64>> {
    if !(step_deg > 0.0) || stop_deg < start_deg {
        return Err(Error::InvalidParameter {
            name: "angle grid",
            reason: format!(
                "need start <= stop and step > 0, got {start_deg}..{stop_deg} by {step_deg}"
            ),
        });
    }
    let count = ((stop_deg - start_deg) / step_deg + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| start_deg + i as f64 * step_deg)
        .collect())
}

/// The 37-bearing grid `0, 5, ..., 180` degrees.
pub fn default_bearings() -> Vec<f64> {
    bearing_grid(0.0, 180.0, 5.0).expect("static grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::LinkBudget;
    use std::f64::consts::PI;

    fn setup(n: usize) -> (ArrayConfig, SystemParams) {
        (
            ArrayConfig::half_wavelength(n).unwrap(),
            LinkBudget::default().params().unwrap(),
        )
    }

    fn user() -> Position {
        Position::from_bearing(135f64.to_radians(), 5.0)
    }

    #[test]
    fn upper_bound_matches_closed_form() {
        let (array, params) = setup(4);
        let d = upper_bound_distance(&array, &params).unwrap();
        // 4 (lambda / 4 pi d)^2 P = sensitivity
        let lambda = array.wavelength();
        let sens = crate::units::dbm_to_watt(-25.5);
        let closed = lambda / (4.0 * PI) * (4.0 * params.total_power / sens).sqrt();
        assert!(
            (d - closed).abs() < 0.05 && (d - 11.84).abs() < 0.05,
            "{d} vs {closed}"
        );

        let (array8, _) = setup(8);
        let d8 = upper_bound_distance(&array8, &params).unwrap();
        assert!((d8 / d - 2f64.sqrt()).abs() < 1e-6);

        let deaf = SystemParams {
            gamma_tag: f64::MAX,
            ..params
        };
        assert_eq!(upper_bound_distance(&array, &deaf).unwrap(), 0.0);
    }

    #[test]
    fn close_and_far_tags() {
        let (array, params) = setup(4);
        let s = SolverSettings::default();
        let near = Position::from_bearing(90f64.to_radians(), 0.5);
        let far = Position::from_bearing(90f64.to_radians(), 100.0);
        let off_axis_user = Position::from_bearing(20f64.to_radians(), 5.0);
        for m in MethodKind::ALL {
            assert_eq!(
                feasible_at(&array, near, off_axis_user, m, &params, &s),
                Verdict::Feasible
            );
            assert_eq!(
                feasible_at(&array, far, off_axis_user, m, &params, &s),
                Verdict::Infeasible
            );
        }
    }

    #[test]
    fn collinear_scene_is_degenerate_for_zero_forcing() {
        let (array, params) = setup(4);
        let tag = Position::from_bearing(135f64.to_radians(), 3.0);
        let v = feasible_at(
            &array,
            tag,
            user(),
            MethodKind::ZeroForcing,
            &params,
            &SolverSettings::default(),
        );
        assert_eq!(v, Verdict::Degenerate);
        assert!(!v.is_feasible());
        let same = feasible_at(
            &array,
            user(),
            user(),
            MethodKind::JointSocp,
            &params,
            &SolverSettings::default(),
        );
        assert_eq!(same, Verdict::Degenerate);
    }

    #[test]
    fn shortcuts_agree_with_the_plain_oracle() {
        let (array, params) = setup(4);
        let exp = Experiment::new(array, params).unwrap();
        for bearing in [30.0f64, 90.0, 120.0, 130.0, 135.0, 140.0] {
            for range in [2.0, 6.0, 10.0, 11.5, 12.0, 20.0] {
                let tag = Position::from_bearing(bearing.to_radians(), range);
                let fast = exp.feasible(tag, user(), MethodKind::JointSocp);
                let plain = feasible_at(
                    &array,
                    tag,
                    user(),
                    MethodKind::JointSocp,
                    &params,
                    &exp.solver,
                );
                assert_eq!(fast, plain, "bearing {bearing} range {range}");
            }
        }
    }

    #[test]
    fn joint_feasible_wherever_zero_forcing_is() {
        let (array, params) = setup(4);
        let s = SolverSettings::default();
        for bearing in (0..=36).map(|i| i as f64 * 5.0) {
            for range in [3.0, 8.0, 11.0] {
                let tag = Position::from_bearing(bearing.to_radians(), range);
                if feasible_at(&array, tag, user(), MethodKind::ZeroForcing, &params, &s)
                    .is_feasible()
                {
                    assert!(
                        feasible_at(&array, tag, user(), MethodKind::JointSocp, &params, &s)
                            .is_feasible()
                    );
                }
            }
        }
    }

    #[test]
    fn bearing_grids() {
        let g = default_bearings();
        assert_eq!(g.len(), 37);
        assert_eq!((g[0], g[18], g[36]), (0.0, 90.0, 180.0));
        assert_eq!(bearing_grid(0.0, 180.0, 0.5).unwrap().len(), 361);
        assert!(bearing_grid(10.0, 0.0, 1.0).is_err());
        assert!(bearing_grid(0.0, 10.0, 0.0).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in MethodKind::ALL {
            assert_eq!(m.as_str().parse::<MethodKind>().unwrap(), m);
        }
        assert!("both".parse::<MethodKind>().is_err());
    }
}
